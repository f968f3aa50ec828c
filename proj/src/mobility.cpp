#include "xdiff/mobility.hpp"

#include <cmath>

#include "xdiff/models.hpp"

namespace xdiff {

Matrix mobility_matrix(const ModelSpec& m, const Composition& c) {
  return m.diffusion(c) * hessian_inverse(c);
}

AugmentedMobility augment(const Matrix& B) {
  const int n = static_cast<int>(B.rows());
  Matrix bar = Matrix::Zero(n + 1, n + 1);
  bar.block(1, 1, n, n) = B;
  for (int j = 0; j < n; ++j) bar(0, j + 1) = -B.col(j).sum();
  for (int i = 0; i < n; ++i) bar(i + 1, 0) = -B.row(i).sum();
  bar(0, 0) = B.sum();
  return AugmentedMobility{std::move(bar)};
}

GMatrix g_matrix(const AugmentedMobility& bm, const AugmentedComposition& ac) {
  if (!ac.strictly_interior())
    throw BoundaryComposition("g_matrix: augmented composition touches the boundary");
  const int n1 = ac.n() + 1;
  Vector inv_sqrt(n1);
  for (int i = 0; i < n1; ++i) inv_sqrt[i] = 1.0 / std::sqrt(ac.bar[i]);
  Matrix g(n1, n1);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n1; ++j)
      g(i, j) = bm.entries(i, j) * inv_sqrt[i] * inv_sqrt[j];
  return GMatrix{std::move(g), ac};
}

Vector project_L(const AugmentedComposition& ac, const Vector& y) {
  const int n1 = ac.n() + 1;
  Vector sq(n1);
  for (int i = 0; i < n1; ++i) sq[i] = std::sqrt(ac.bar[i]);
  const double coef = sq.dot(y);
  return y - coef * sq;
}

Vector project_Lperp(const AugmentedComposition& ac, const Vector& y) {
  const int n1 = ac.n() + 1;
  Vector sq(n1);
  for (int i = 0; i < n1; ++i) sq[i] = std::sqrt(ac.bar[i]);
  return sq.dot(y) * sq;
}

Matrix projector_L(const AugmentedComposition& ac) {
  const int n1 = ac.n() + 1;
  return Matrix::Identity(n1, n1) - projector_Lperp(ac);
}

Matrix projector_Lperp(const AugmentedComposition& ac) {
  const int n1 = ac.n() + 1;
  Vector sq(n1);
  for (int i = 0; i < n1; ++i) sq[i] = std::sqrt(ac.bar[i]);
  return sq * sq.transpose();
}

double subspace_quadratic_form(const GMatrix& g, const Vector& z) {
  return z.dot(g.g * z);
}

}  // namespace xdiff

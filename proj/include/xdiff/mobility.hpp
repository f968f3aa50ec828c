#pragma once

#include "xdiff/core.hpp"

namespace xdiff {

struct ModelSpec;

/// (n+1)x(n+1) mobility matrix with the solvent as index 0. Rows and columns
/// sum to zero by construction.
struct AugmentedMobility {
  Matrix entries;
  int n() const { return static_cast<int>(entries.rows()) - 1; }
};

/// Normalized mobility G_ij = Bbar_ij / sqrt(u_i u_j), kept together with the
/// composition it was built at. sqrt(ubar) spans its kernel; G is positive
/// definite only on the orthogonal complement L(ubar).
struct GMatrix {
  Matrix g;
  AugmentedComposition at;
  int n() const { return static_cast<int>(g.rows()) - 1; }
};

/// B(u) = A(u) h''(u)^{-1}, assembled from the model's diffusion matrix and
/// the closed-form Hessian inverse (no linear solve involved).
Matrix mobility_matrix(const ModelSpec& m, const Composition& c);

/// Extends an n x n mobility block to the zero-row-sum augmented matrix.
AugmentedMobility augment(const Matrix& B);

/// G from an augmented mobility at a strictly interior composition.
/// Throws BoundaryComposition when any augmented entry vanishes.
GMatrix g_matrix(const AugmentedMobility& bm, const AugmentedComposition& ac);

/// Orthogonal projection onto L(ubar) = { y : sqrt(ubar) . y = 0 }.
Vector project_L(const AugmentedComposition& ac, const Vector& y);

/// Complementary projection onto span sqrt(ubar).
Vector project_Lperp(const AugmentedComposition& ac, const Vector& y);

/// Dense projector matrices (for identity checks).
Matrix projector_L(const AugmentedComposition& ac);
Matrix projector_Lperp(const AugmentedComposition& ac);

/// z^T G z.
double subspace_quadratic_form(const GMatrix& g, const Vector& z);

}  // namespace xdiff

// Entropy calculus on the Gibbs simplex: density, transform pair, Hessian
// pair, and the structural properties (round trip, convexity, positive
// semidefiniteness) that everything downstream relies on.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "xdiff/core.hpp"
#include "xdiff/hypotheses.hpp"
#include "xdiff/rng.hpp"

using namespace xdiff;

namespace {

Composition comp2(double a, double b) {
  Vector u(2);
  u << a, b;
  return Composition(u);
}

}  // namespace

TEST_CASE("entropy density at reference points") {
  // high-precision evaluations frozen from an independent computation
  CHECK(entropy_density(comp2(1.0 / 3.0, 1.0 / 3.0)) ==
        doctest::Approx(-2.0986122886681097).epsilon(1e-14));
  CHECK(entropy_density(comp2(0.5, 0.25)) ==
        doctest::Approx(-2.0397207708399180).epsilon(1e-14));
}

TEST_CASE("entropy density boundary convention 0 log 0 = 0") {
  CHECK(entropy_density(comp2(1.0, 0.0)) == doctest::Approx(-1.0).epsilon(1e-15));
  Vector u1(1);
  u1 << 0.0;
  CHECK(entropy_density(Composition(u1)) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("entropy density is minimized at the uniform composition") {
  const double href = entropy_density(comp2(1.0 / 3.0, 1.0 / 3.0));
  const SimplexSampler sampler(2, 0.0, 123);
  for (int k = 0; k < 2000; ++k)
    CHECK(entropy_density(sampler.sample(k).species()) >= href - 1e-14);
}

TEST_CASE("entropy functional: constant fields and domain scaling") {
  const Composition c = comp2(1.0 / 3.0, 1.0 / 3.0);
  const GridField f1 = GridField::constant(c, 64, 1.0);
  const GridField f2 = GridField::constant(c, 64, 2.0);
  CHECK(entropy_functional(f1) == doctest::Approx(-2.0986122886681097).epsilon(1e-13));
  CHECK(entropy_functional(f2) == doctest::Approx(2.0 * entropy_functional(f1)).epsilon(1e-14));
}

TEST_CASE("entropy functional dominates the uniform minimum") {
  const double floor = entropy_density(comp2(1.0 / 3.0, 1.0 / 3.0));
  const SimplexSampler sampler(2, 0.0, 7);
  GridField f(2, 32, 1.0);
  for (int c = 0; c < 32; ++c) f.set_composition(c, sampler.sample(c).species());
  CHECK(entropy_functional(f) >= floor - 1e-13);
}

TEST_CASE("entropy variable transform at reference points") {
  const EntropyVars w0 = to_entropy_vars(comp2(1.0 / 3.0, 1.0 / 3.0));
  CHECK(std::abs(w0.w[0]) <= 1e-15);
  CHECK(std::abs(w0.w[1]) <= 1e-15);

  const EntropyVars w1 = to_entropy_vars(comp2(0.5, 0.25));
  CHECK(w1.w[0] == doctest::Approx(0.69314718055994531).epsilon(1e-15));
  CHECK(std::abs(w1.w[1]) <= 1e-15);

  const EntropyVars w2 = to_entropy_vars(comp2(0.25, 0.25));
  CHECK(w2.w[0] == doctest::Approx(-0.69314718055994531).epsilon(1e-15));
  CHECK(w2.w[1] == doctest::Approx(-0.69314718055994531).epsilon(1e-15));
}

TEST_CASE("entropy variable transform is undefined on the boundary") {
  CHECK_THROWS_AS((void)to_entropy_vars(comp2(0.0, 0.5)), BoundaryComposition);
  CHECK_THROWS_AS((void)to_entropy_vars(comp2(0.5, 0.5)), BoundaryComposition);
}

TEST_CASE("inverse transform at reference points") {
  Vector w(2);
  w << 0.0, 0.0;
  const Composition c0 = from_entropy_vars(EntropyVars(w));
  CHECK(c0.u[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(c0.u[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  w << 0.69314718055994531, 0.0;
  const Composition c1 = from_entropy_vars(EntropyVars(w));
  CHECK(c1.u[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c1.u[1] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("inverse transform is overflow-safe and strictly interior") {
  Vector w(2);
  w << 50.0, 0.0;
  const Composition c = from_entropy_vars(EntropyVars(w));
  CHECK(c.u[0] > 0.0);
  CHECK(c.u[0] < 1.0);
  CHECK(c.solvent() > 0.0);

  w << 800.0, -800.0;
  const Composition ext = from_entropy_vars(EntropyVars(w));
  CHECK(ext.strictly_interior(0.0));
  CHECK(ext.u.sum() < 1.0);

  w << 1e6, 1e6;
  const Composition huge = from_entropy_vars(EntropyVars(w));
  CHECK(huge.strictly_interior(0.0));
}

TEST_CASE("round trip from(to(c)) = c to 1e-12 relative on 1e5 samples") {
  const SimplexSampler sampler(2, 0.0, 2024);
  double worst = 0.0;
  for (long k = 0; k < 100000; ++k) {
    const Composition c = sampler.sample(k).species();
    const Composition back = from_entropy_vars(to_entropy_vars(c));
    for (int i = 0; i < 2; ++i)
      worst = std::max(worst, std::abs(back.u[i] - c.u[i]) / c.u[i]);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("hessian inverse entries and boundary totality") {
  const Matrix h = hessian_inverse(comp2(0.5, 0.25));
  CHECK(h(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(h(0, 1) == doctest::Approx(-0.125).epsilon(1e-15));
  CHECK(h(1, 0) == doctest::Approx(-0.125).epsilon(1e-15));
  CHECK(h(1, 1) == doctest::Approx(0.1875).epsilon(1e-15));

  const Matrix z = hessian_inverse(comp2(0.0, 0.0));
  CHECK(z.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hessian entries at reference points") {
  const Matrix h = hessian(comp2(0.5, 0.25));
  CHECK(h(0, 0) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(h(0, 1) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(h(1, 0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(h(1, 1) == doctest::Approx(8.0).epsilon(1e-14));

  const Matrix g = hessian(comp2(1.0 / 3.0, 1.0 / 3.0));
  CHECK(g(0, 0) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(g(0, 1) == doctest::Approx(3.0).epsilon(1e-14));

  CHECK_THROWS_AS((void)hessian(comp2(0.0, 0.5)), BoundaryComposition);
}

TEST_CASE("hessian * hessian_inverse = identity on 1e4 interior samples") {
  const SimplexSampler sampler(2, 1e-4, 99);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const Composition c = sampler.sample(k).species();
    const Matrix prod = hessian(c) * hessian_inverse(c);
    worst = std::max(worst, (prod - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("entropy density is convex along random segments") {
  const SimplexSampler sampler(2, 1e-6, 5);
  RandomStream rs(5, 999);
  for (int k = 0; k < 5000; ++k) {
    const Composition a = sampler.sample(2 * k).species();
    const Composition b = sampler.sample(2 * k + 1).species();
    const double lam = rs.uniform();
    const Composition mid(lam * a.u + (1.0 - lam) * b.u);
    CHECK(entropy_density(mid) <=
          lam * entropy_density(a) + (1.0 - lam) * entropy_density(b) + 1e-12);
  }
}

TEST_CASE("hessian inverse is positive semidefinite on 1e4 simplex samples") {
  const SimplexSampler sampler(2, 0.0, 31);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const Matrix h = hessian_inverse(sampler.sample(k).species());
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    worst = std::min(worst, eig.eigenvalues().minCoeff());
  }
  CHECK(worst >= -1e-14);
}

TEST_CASE("grid field basics") {
  CHECK_THROWS_AS(GridField(1, 1, 1.0), InvalidParameter);
  CHECK_THROWS_AS(GridField(1, 8, 0.0), InvalidParameter);
  GridField f(2, 8, 2.0);
  CHECK(f.cell_width() == doctest::Approx(0.25));
  f.set_composition(3, comp2(0.5, 0.25));
  CHECK(f.at(0, 3) == 0.5);
  CHECK(f.solvent(3) == doctest::Approx(0.25));
  CHECK(f.composition(3).u[1] == 0.25);
}

// Scalar/SIMD lane equivalence for the fieldwise reduction kernels. The
// vector lane may differ from std::log by a couple of ulps, so comparisons
// are relative, not bitwise.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "xdiff/kernels.hpp"
#include "xdiff/rng.hpp"

using namespace xdiff;

namespace {

struct FieldData {
  std::vector<std::vector<double>> u, v;
  std::vector<const double*> pu, pv;
  int n;
  std::size_t m;

  FieldData(int n_, std::size_t m_, std::uint64_t seed) : n(n_), m(m_) {
    RandomStream rs(seed, 0);
    u.resize(n);
    v.resize(n);
    for (int i = 0; i < n; ++i) {
      u[i].resize(m);
      v[i].resize(m);
    }
    for (std::size_t c = 0; c < m; ++c) {
      // two independent interior compositions per cell
      double su = 0.0, sv = 0.0;
      std::vector<double> eu(n + 1), ev(n + 1);
      for (int i = 0; i <= n; ++i) {
        eu[i] = rs.exponential();
        ev[i] = rs.exponential();
        su += eu[i];
        sv += ev[i];
      }
      for (int i = 0; i < n; ++i) {
        u[i][c] = eu[i + 1] / su;
        v[i][c] = ev[i + 1] / sv;
      }
    }
    for (int i = 0; i < n; ++i) {
      pu.push_back(u[i].data());
      pv.push_back(v[i].data());
    }
  }
};

const std::vector<std::size_t> kSizes = {1, 2, 3, 4, 5, 7, 8, 64, 129, 515};

}  // namespace

TEST_CASE("active lane is available") {
  const auto& ops = kernels::active_ops();
  CHECK(ops.entropy_sum != nullptr);
  MESSAGE("active kernel lane: ", ops.name);
}

TEST_CASE("avx2 lane matches scalar lane on all kernels") {
  const kernels::Ops* vec = kernels::avx2_ops();
  if (vec == nullptr) {
    MESSAGE("avx2 lane unavailable on this host; scalar lane only");
    return;
  }
  const auto& ref = kernels::scalar_ops();
  for (std::size_t m : kSizes) {
    for (int n : {1, 2, 3}) {
      FieldData d(n, m, 1000 + m * 10 + n);
      const double e0 = ref.entropy_sum(d.pu.data(), n, m);
      const double e1 = vec->entropy_sum(d.pu.data(), n, m);
      CHECK(e1 == doctest::Approx(e0).epsilon(1e-13));

      const double r0 = ref.relative_entropy_sum(d.pu.data(), d.pv.data(), n, m);
      const double r1 = vec->relative_entropy_sum(d.pu.data(), d.pv.data(), n, m);
      CHECK(r1 == doctest::Approx(r0).epsilon(1e-12).scale(1.0 + std::abs(r0)));

      const double q0 = ref.sq_diff_sum(d.pu.data(), d.pv.data(), n, m);
      const double q1 = vec->sq_diff_sum(d.pu.data(), d.pv.data(), n, m);
      CHECK(q1 == doctest::Approx(q0).epsilon(1e-13));
    }
  }
}

TEST_CASE("hl2 slack kernel agrees across lanes and with a direct loop") {
  RandomStream rs(77, 0);
  for (std::size_t m : kSizes) {
    std::vector<double> y(m), z(m);
    for (std::size_t k = 0; k < m; ++k) {
      y[k] = 1.0 - rs.uniform();
      z[k] = 1.0 - rs.uniform();
    }
    double direct = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) {
      const double d = y[k] - z[k];
      direct = std::min(direct, y[k] * std::log(y[k] / z[k]) - d -
                                    0.5 * d * d / std::max(y[k], z[k]));
    }
    const double s0 = kernels::scalar_ops().hl2_min_slack(y.data(), z.data(), m);
    CHECK(s0 == doctest::Approx(direct).epsilon(1e-14).scale(1.0 + std::abs(direct)));
    if (const kernels::Ops* vec = kernels::avx2_ops()) {
      const double s1 = vec->hl2_min_slack(y.data(), z.data(), m);
      CHECK(s1 == doctest::Approx(s0).epsilon(1e-12).scale(1.0 + std::abs(s0)));
    }
  }
}

TEST_CASE("entropy kernel honors the 0 log 0 convention in both lanes") {
  std::vector<double> u0 = {0.0, 0.5, 1.0, 0.25, 0.0, 0.125, 0.75, 0.5, 0.0};
  const double* p[1] = {u0.data()};
  const double expect = [&] {
    double acc = 0.0;
    for (double x : u0) {
      if (x > 0.0) acc += x * (std::log(x) - 1.0);
      const double s = 1.0 - x;
      if (s > 0.0) acc += s * (std::log(s) - 1.0);
    }
    return acc;
  }();
  CHECK(kernels::scalar_ops().entropy_sum(p, 1, u0.size()) ==
        doctest::Approx(expect).epsilon(1e-14));
  if (const kernels::Ops* vec = kernels::avx2_ops())
    CHECK(vec->entropy_sum(p, 1, u0.size()) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("vector log path survives denormal and extreme inputs") {
  if (const kernels::Ops* vec = kernels::avx2_ops()) {
    std::vector<double> y = {5e-324, 1e-300, 1e-17, 0.9999999999999999,
                             1.0, 0.3333333333333333, 1e-8, 0.75};
    std::vector<double> z = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
    const double a = kernels::scalar_ops().hl2_min_slack(y.data(), z.data(), y.size());
    const double b = vec->hl2_min_slack(y.data(), z.data(), y.size());
    CHECK(b == doctest::Approx(a).epsilon(1e-11).scale(1.0 + std::abs(a)));
  }
}

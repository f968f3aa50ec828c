#include "xdiff/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>

namespace xdiff::kernels {

namespace {

inline double xlogx_minus_x(double x) {
  return x > 0.0 ? x * (std::log(x) - 1.0) : 0.0;
}

double entropy_sum_scalar(const double* const* species, int n, std::size_t m) {
  double acc = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    double u0 = 1.0;
    for (int i = 0; i < n; ++i) {
      const double ui = species[i][c];
      u0 -= ui;
      acc += xlogx_minus_x(ui);
    }
    acc += xlogx_minus_x(u0);
  }
  return acc;
}

inline double rel_entropy_term(double u, double v) {
  // u log(u/v) - u + v with the 0 log 0 = 0 convention; v > 0 by contract.
  return (u > 0.0 ? u * std::log(u / v) : 0.0) - u + v;
}

double relative_entropy_sum_scalar(const double* const* u, const double* const* v,
                                   int n, std::size_t m) {
  double acc = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    double u0 = 1.0, v0 = 1.0;
    for (int i = 0; i < n; ++i) {
      const double ui = u[i][c], vi = v[i][c];
      u0 -= ui;
      v0 -= vi;
      acc += rel_entropy_term(ui, vi);
    }
    acc += rel_entropy_term(u0, v0);
  }
  return acc;
}

double sq_diff_sum_scalar(const double* const* u, const double* const* v,
                          int n, std::size_t m) {
  double acc = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    double u0 = 1.0, v0 = 1.0;
    for (int i = 0; i < n; ++i) {
      const double d = u[i][c] - v[i][c];
      u0 -= u[i][c];
      v0 -= v[i][c];
      acc += d * d;
    }
    const double d0 = u0 - v0;
    acc += d0 * d0;
  }
  return acc;
}

double hl2_min_slack_scalar(const double* y, const double* z, std::size_t m) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m; ++k) {
    const double a = y[k], b = z[k];
    const double d = a - b;
    const double slack = a * std::log(a / b) - a + b - 0.5 * d * d / std::max(a, b);
    best = std::min(best, slack);
  }
  return best;
}

const Ops kScalarOps = {
    "scalar",
    &entropy_sum_scalar,
    &relative_entropy_sum_scalar,
    &sq_diff_sum_scalar,
    &hl2_min_slack_scalar,
};

const Ops* pick_ops() {
  const char* force = std::getenv("XDIFF_SIMD");
  if (force != nullptr && std::strcmp(force, "scalar") == 0) return &kScalarOps;
  const Ops* vec = avx2_ops();
  if (force != nullptr && std::strcmp(force, "avx2") == 0)
    return vec != nullptr ? vec : &kScalarOps;
  return vec != nullptr ? vec : &kScalarOps;
}

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

const Ops& active_ops() {
  static const Ops* ops = pick_ops();
  return *ops;
}

}  // namespace xdiff::kernels

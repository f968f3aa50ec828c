#pragma once

#include <cstddef>

namespace xdiff::kernels {

/// Flat-array reduction kernels behind the fieldwise operations.
///
/// Each entry has a scalar reference implementation and, on x86-64 hosts with
/// AVX2+FMA, a vector variant selected once at startup. `species` points to
/// `n` arrays of `m` cells each; the solvent fraction u_0 = 1 - sum_i u_i is
/// reconstructed on the fly, and x log x terms use the 0 log 0 = 0 convention.
struct Ops {
  const char* name;

  /// sum_c [ sum_{i=0}^{n} u_i (log u_i - 1) ]
  double (*entropy_sum)(const double* const* species, int n, std::size_t m);

  /// sum_c sum_{i=0}^{n} [ u_i log(u_i / v_i) - u_i + v_i ]
  double (*relative_entropy_sum)(const double* const* u, const double* const* v,
                                 int n, std::size_t m);

  /// sum_c sum_{i=0}^{n} (u_i - v_i)^2
  double (*sq_diff_sum)(const double* const* u, const double* const* v,
                        int n, std::size_t m);

  /// min_k [ y log(y/z) - y + z - (y-z)^2 / (2 max(y,z)) ] over pairs in (0,1]
  double (*hl2_min_slack)(const double* y, const double* z, std::size_t m);
};

/// Scalar reference lane (always available).
const Ops& scalar_ops();

/// AVX2 lane, or nullptr when unsupported by build or host CPU.
const Ops* avx2_ops();

/// Lane picked at first use: AVX2 when available, else scalar. The
/// XDIFF_SIMD environment variable ("scalar" / "avx2") forces a lane.
const Ops& active_ops();

}  // namespace xdiff::kernels

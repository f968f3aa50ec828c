#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xdiff/core.hpp"
#include "xdiff/models.hpp"

namespace xdiff {

enum class Check { H3, H4i, H4ii, H5, H5prime, LemG, GPL, Reaction, IonLemma };
enum class Verdict { Pass, Fail, Inconclusive };

const char* to_string(Check c);
const char* to_string(Verdict v);
std::optional<Check> check_from_string(std::string_view s);

/// Outcome of one numerical audit. For boundedness/Lipschitz audits the
/// statistic is the supremum over the finest margin level and
/// level_statistics holds the per-margin suprema; for positivity audits the
/// statistic is the sampled infimum (or minimal relative slack).
struct HypothesisReport {
  Check check = Check::H3;
  Verdict verdict = Verdict::Inconclusive;
  double statistic = 0.0;
  std::vector<double> witness;       // worst-case ubar (pair audits: ubar then vbar)
  long samples = 0;                  // total evaluations behind the statistic
  double margin = 0.0;               // finest boundary margin used
  std::uint64_t seed = 0;
  std::vector<double> level_statistics;
  std::string note;
};

/// Uniform sampling on the augmented simplex (exponential normalization)
/// with rejection against a boundary margin. Draws are a pure function of
/// (seed, index), so loops parallelize without losing reproducibility.
struct SimplexSampler {
  int n;
  double margin;
  std::uint64_t seed;

  SimplexSampler(int n, double margin, std::uint64_t seed);
  AugmentedComposition sample(std::uint64_t index) const;
};

std::vector<AugmentedComposition> sample_simplex(const SimplexSampler& s, long count);

/// Positivity of h''(u) A(u) against the weight sum u_i^{2s-2} z_i^2.
/// Directions are the images of Gaussian vectors projected into L(ubar)
/// under the change of variables z_i = -sqrt(u_i) (P_L g)_i, which makes the
/// sampled infimum directly transferable to the subspace bound audit below.
HypothesisReport check_H3(const ModelSpec& m, long samples, std::uint64_t seed);

enum class BoundednessVariant { TransformedDiffusion, AugmentedMobility };  // (i) / (ii)

/// Boundedness audit under a margin-refinement schedule (1e-2, 1e-4, 1e-6,
/// cumulative samples): stable suprema pass, x10 growth per level fails.
HypothesisReport check_H4(const ModelSpec& m, BoundednessVariant variant,
                          long samples, std::uint64_t seed);

/// Lipschitz continuity of the reduced mobility (difference quotients over
/// sampled pairs, same margin schedule).
HypothesisReport check_H5(const ModelSpec& m, long pairs, std::uint64_t seed);

/// Hoelder-type variant: quotients against sum_k |u_k^gamma - v_k^gamma|.
HypothesisReport check_H5_prime(const ModelSpec& m, double gamma, long pairs,
                                std::uint64_t seed);

/// Subspace positivity z^T G z >= c_A sum u_i^{2s-1} z_i^2 for z in L(ubar);
/// reports the minimal relative slack.
HypothesisReport check_lemma_G(const ModelSpec& m, double c_A, long samples,
                               std::uint64_t seed);

/// Projection identity P_L G = G P_L = G.
HypothesisReport check_gpl(const ModelSpec& m, long samples, std::uint64_t seed);

/// Reaction-rate condition: empirical C_R as the largest sampled ratio of
/// the paired rate/entropy forms, audited under the margin schedule.
HypothesisReport estimate_CR(const ModelSpec& m, long pairs, std::uint64_t seed);

/// Improved subspace bound for diagonal-mobility ion transport:
/// z^T G z >= c_A (sum z_i^2 + z_0^2/u_0) with c_A = min d_i.
HypothesisReport check_ion_lemma(const ModelSpec& m, long samples, std::uint64_t seed);

}  // namespace xdiff

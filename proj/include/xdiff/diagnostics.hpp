#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "xdiff/core.hpp"
#include "xdiff/models.hpp"
#include "xdiff/solver.hpp"

namespace xdiff {

/// Outcome of one twin (perturbed vs. refined-reference) run.
///
/// The reference role is played by a refined-discretization run of the same
/// scheme; its observed positivity floor and log-gradient bound are recorded
/// as the empirical stand-ins for the regularity a strong reference state
/// would certify.
struct TwinExperimentResult {
  double delta = 0.0;
  std::vector<double> times;
  std::vector<double> H_series;            // relative entropy per stamp
  std::vector<double> lower_bound_series;  // (1/2) sum int |u_i - v_i|^2
  std::vector<double> I1_series;           // instantaneous dissipation observable
  std::vector<double> I2_series;           // instantaneous drift observable
  std::optional<double> fitted_C;          // empty when H(0) is degenerate
  long envelope_violations = 0;
  double v_floor = 0.0;                    // reference-run positivity floor
  double v_grad_log_max = 0.0;             // reference-run max |grad log v_j|
  double entropy_slack = 0.0;              // worst ledger slack of the coarse run
};

/// H(u|v) = sum_{i=0}^{n} int u_i log(u_i/v_i) - u_i + v_i; nonnegative, zero
/// iff the fields coincide. Throws BoundaryReference when v touches the
/// simplex boundary.
double relative_entropy(const GridField& u, const GridField& v);

/// (1/2) sum_{i=0}^{n} int |u_i - v_i|^2 <= H(u|v).
double hl2_lower_bound(const GridField& u, const GridField& v);

/// Instantaneous spatial integrals of the relative-entropy derivative split:
/// I1 is the negated quadratic dissipation form (<= 0 up to roundoff),
/// I2 the mobility-difference drift term.
std::pair<double, double> decomposition_observables(const ModelSpec& m,
                                                    const GridField& u,
                                                    const GridField& v);

/// Envelope rate C* = max_{t_k > 0} log(H(t_k)/H(0)) / t_k, so that
/// H(0) exp(C* t) dominates the series by construction.
/// Throws DegenerateSeries when H(0) <= 1e-14.
double gronwall_fit(const std::vector<double>& times, const std::vector<double>& H);

/// Runs the perturbed coarse trajectory against a refined reference from the
/// same initial data and collects the stability observables. cfg_fine must
/// either equal cfg or refine it by >= 4x in tau and >= 2x in cells
/// (ConfigMismatch otherwise).
TwinExperimentResult twin_experiment(const ModelSpec& m, const GridField& init,
                                     double delta, const SolverConfig& cfg,
                                     const SolverConfig& cfg_fine);

/// The perturbation used by twin_experiment: a mean-free raised-cosine bump
/// of amplitude delta added to species 1 (the solvent absorbs the
/// complement), clamped to a 1e-6 interior margin.
GridField perturb_initial(const GridField& init, double delta);

}  // namespace xdiff

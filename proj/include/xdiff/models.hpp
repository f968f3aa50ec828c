#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xdiff/core.hpp"
#include "xdiff/mobility.hpp"

namespace xdiff {

using DiffusionEval = std::function<Matrix(const Composition&)>;
using ReducedMobilityEval = std::function<Matrix(const AugmentedComposition&)>;
using ReactionEval = std::function<Vector(const Composition&)>;

/// One cross-diffusion system: species count, diffusion matrix A(u), entropy
/// exponent s, the factored reduced mobility rho_ij(ubar) = Bbar_ij / u_i in
/// analytic form, and optional reaction terms.
///
/// The factored rho is the primary mobility route: it is exact up to the
/// simplex boundary (removable singularities are cancelled analytically) and
/// everything built from Bbar uses it. The A h''^{-1} route exists separately
/// and is held to agree with the factored one by the consistency tests.
struct ModelSpec {
  std::string name;
  int n = 0;
  double s = 1.0;                       // entropy exponent in (0, 1]
  std::map<std::string, double> params; // scalar parameters, for provenance
  std::vector<double> param_table;      // matrix/vector parameters, row-major

  DiffusionEval diffusion;              // A(u), n x n
  ReducedMobilityEval reduced_mobility; // rho(ubar), (n+1) x (n+1)
  std::optional<ReactionEval> reaction; // r(u), n entries; r_0 = -sum r_i
  double reaction_rate_hint = 0.0;      // caller-supplied C_R guess, 0 = none

  // The ion-channel system carries an improved subspace bound with
  // c_A = min_i d_i; checkers route to the dedicated op through this flag.
  bool improved_ion_lemma = false;
  double ion_c_A = 0.0;

  bool has_reaction() const { return reaction.has_value(); }
};

// ---- catalog ----------------------------------------------------------------

/// n = 1: d/dt u1 = div(u1^alpha (1 - u1) grad u1); s = (alpha + 1) / 2.
ModelSpec scalar_model(double alpha);

/// n = 2 multiphase tissue model with pressures q1 = q11 u1 + q12 u1 u2,
/// q2 = q12 u1 u2 + q22 u2; requires 16 q11 q22 > q12^2; s = 1.
ModelSpec multiphase_model(double q11, double q12, double q22);

/// n = 2 tumor-growth model; requires theta < 4 / sqrt(beta); s = 1.
ModelSpec tumor_model(double beta, double theta);

/// Modified Busenberg-Travis system with symmetric positive definite P;
/// A_ij = u_i (p_ij - p_j(u)), h'' A = P; s = 1.
ModelSpec busenberg_travis_model(const Matrix& P);

/// Two-species Maxwell-Stefan system with binary diffusivities d01, d02, d12;
/// s = 1/2.
ModelSpec maxwell_stefan_2(double d01, double d02, double d12);

/// Thin-film deposition model with symmetric hopping coefficients
/// a_ij > 0 (i != j), given as an (n+1) x (n+1) table; s = 1/2.
ModelSpec thin_film_model(const Matrix& a);

/// Ion-channel transport with diagonal mobility B = diag(d_i u_i); s = 1/2.
/// The (0,0) reduced-mobility entry genuinely diverges as u_0 -> 0.
ModelSpec ion_channel_model(const Vector& d);

/// Attaches a reaction r (vanishing where the matching fraction vanishes;
/// probed numerically, InvalidReaction otherwise).
ModelSpec with_reaction(ModelSpec m, ReactionEval r, double C_R_hint);

/// r_i(u) = rate * u_i * (u_0 - 1/2), the logistic-style volume-filling rate.
ReactionEval logistic_reaction(int n, double rate);

// ---- derived evaluations ----------------------------------------------------

/// Bbar(ubar) through the factored route: Bbar_ij = u_i rho_ij(ubar).
AugmentedMobility augmented_mobility(const ModelSpec& m, const AugmentedComposition& ac);

/// Species block of the factored route: B_ij = u_i rho_ij (i, j >= 1).
/// Exact where the A h''^{-1} product only cancels to roundoff.
Matrix factored_mobility(const ModelSpec& m, const Composition& c);

/// Augmented reaction (r_0, r) with r_0 = -sum_i r_i. Throws MissingReaction.
Vector augmented_reaction(const ModelSpec& m, const Composition& c);

/// Named presets (the parameter choices used by the catalog tests and the
/// default CLI configuration blocks).
ModelSpec preset_model(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace xdiff

#pragma once

#include <Eigen/Dense>

#include "xdiff/errors.hpp"

namespace xdiff {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Point of the closed Gibbs simplex: n species volume fractions u_i with
/// u_i >= 0 and sum u_i <= 1. The solvent (or void) fraction u_0 = 1 - sum u_i
/// is derived, never stored.
struct Composition {
  Vector u;

  Composition() = default;
  explicit Composition(Vector fractions) : u(std::move(fractions)) {}

  int n() const { return static_cast<int>(u.size()); }
  double solvent() const { return 1.0 - u.sum(); }

  bool in_closed_simplex(double tol = 1e-12) const;
  /// All fractions, including the solvent, strictly above `margin`.
  bool strictly_interior(double margin = 0.0) const;
};

/// Augmented state (u_0, u_1, ..., u_n); entries are nonnegative and sum to 1.
struct AugmentedComposition {
  Vector bar;  // index 0 = solvent

  AugmentedComposition() = default;
  explicit AugmentedComposition(Vector entries) : bar(std::move(entries)) {}
  static AugmentedComposition from(const Composition& c);

  int n() const { return static_cast<int>(bar.size()) - 1; }
  Composition species() const { return Composition(bar.tail(n())); }
  bool strictly_interior(double margin = 0.0) const;
};

/// Entropy variables w_i = log(u_i / u_0); the diffeomorphism between the
/// open simplex and R^n that enforces the box constraints structurally.
struct EntropyVars {
  Vector w;

  EntropyVars() = default;
  explicit EntropyVars(Vector values) : w(std::move(values)) {}
  int n() const { return static_cast<int>(w.size()); }
};

/// Compositions over a uniform 1-D grid of M cells covering a domain of the
/// given length. Storage is species-major so fieldwise reductions can run on
/// contiguous arrays.
class GridField {
 public:
  GridField() = default;
  GridField(int species, int cells, double length);

  int species() const { return species_; }
  int cells() const { return cells_; }
  double length() const { return length_; }
  double cell_width() const { return length_ / cells_; }

  double& at(int i, int c) { return data_[static_cast<std::size_t>(i) * cells_ + c]; }
  double at(int i, int c) const { return data_[static_cast<std::size_t>(i) * cells_ + c]; }
  const double* species_data(int i) const { return data_.data() + static_cast<std::size_t>(i) * cells_; }
  double* species_data(int i) { return data_.data() + static_cast<std::size_t>(i) * cells_; }

  double solvent(int c) const {
    double s = 1.0;
    for (int i = 0; i < species_; ++i) s -= at(i, c);
    return s;
  }

  Composition composition(int c) const;
  void set_composition(int c, const Composition& v);

  /// Filled with one composition everywhere.
  static GridField constant(const Composition& c, int cells, double length);

  bool same_grid(const GridField& o) const {
    return species_ == o.species_ && cells_ == o.cells_ && length_ == o.length_;
  }
  /// Every cell strictly interior to the simplex with the given margin.
  bool strictly_interior(double margin = 0.0) const;
  /// Smallest fraction over all cells, species and solvent included.
  double min_fraction() const;
  /// Discrete mass of species i (midpoint quadrature).
  double mass(int i) const;

 private:
  int species_ = 0;
  int cells_ = 0;
  double length_ = 0.0;
  std::vector<double> data_;
};

// ---- Boltzmann entropy calculus -------------------------------------------

/// h(u) = sum_{i=0}^{n} u_i (log u_i - 1) with the convention 0 log 0 = 0.
/// Total on the closed simplex; minimized at the uniform composition.
double entropy_density(const Composition& c);

/// Midpoint-quadrature integral of entropy_density over the grid.
double entropy_functional(const GridField& f);

/// w_i = log(u_i / u_0). Throws BoundaryComposition on the simplex boundary.
EntropyVars to_entropy_vars(const Composition& c);

/// u_i = exp(w_i) / (1 + sum_j exp(w_j)), evaluated with a max shift so large
/// |w| cannot overflow; the result is strictly interior for any finite w.
Composition from_entropy_vars(const EntropyVars& v);

/// h''(u), entries delta_ij / u_i + 1 / u_0. Throws BoundaryComposition.
Matrix hessian(const Composition& c);

/// h''(u)^{-1}, entries delta_ij u_i - u_i u_j. Total on the closed simplex.
Matrix hessian_inverse(const Composition& c);

}  // namespace xdiff

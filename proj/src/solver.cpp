#include "xdiff/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xdiff/kernels.hpp"

namespace xdiff {

void SolverConfig::validate() const {
  if (!(tau > 0.0)) throw InvalidParameter("solver: tau must be > 0");
  if (!(T >= tau)) throw InvalidParameter("solver: T must be >= tau");
  if (!(epsilon >= 0.0)) throw InvalidParameter("solver: epsilon must be >= 0");
  if (m_reg != 1) throw InvalidParameter("solver: regularization order is fixed to 1");
  if (cells < 2) throw InvalidParameter("solver: need at least 2 cells");
  if (!(length > 0.0)) throw InvalidParameter("solver: length must be > 0");
  if (!(newton_tol > 0.0)) throw InvalidParameter("solver: newton_tol must be > 0");
  if (newton_max_iter < 1) throw InvalidParameter("solver: newton_max_iter must be >= 1");
  if (!(linesearch > 0.0 && linesearch < 1.0))
    throw InvalidParameter("solver: linesearch factor must lie in (0, 1)");
}

double EntropyLedger::max_slack(double tau, double epsilon) const {
  double acc = 0.0, worst = -std::numeric_limits<double>::infinity();
  for (const auto& s : steps) {
    acc += tau * (s.production + epsilon * s.regularization);
    worst = std::max(worst, s.entropy + acc - initial_entropy);
  }
  return worst;
}

namespace {

// Nonlinear step system, cell-major unknowns w[c*n + i]:
//   u_i(c) - uprev_i(c)
//     - (tau/dx^2) [B_f(c+1/2) (w(c+1)-w(c)) - B_f(c-1/2) (w(c)-w(c-1))]_i
//     + eps tau [ (local Neumann Laplacian of w_i)(c) + w_i(c) ]
//     - tau r_i(u(c)) = 0
// with B_f the arithmetic face average of the factored mobility.
class StepSystem {
 public:
  StepSystem(const ModelSpec& m, const GridField& prev, const SolverConfig& cfg,
             double tau)
      : model_(m), prev_(prev), cfg_(cfg), tau_(tau), n_(m.n),
        cells_(prev.cells()), dx_(prev.cell_width()) {}

  int unknowns() const { return n_ * cells_; }

  void eval_state(const Vector& w, GridField& u, std::vector<Matrix>& bcell) const {
    Vector wc(n_);
    for (int c = 0; c < cells_; ++c) {
      for (int i = 0; i < n_; ++i) wc[i] = w[c * n_ + i];
      const Composition uc = from_entropy_vars(EntropyVars(wc));
      u.set_composition(c, uc);
      bcell[c] = factored_mobility(model_, uc);
    }
  }

  void residual(const Vector& w, const GridField& u, const std::vector<Matrix>& bcell,
                Vector& F) const {
    const double tau = tau_, eps = cfg_.epsilon;
    const double idx2 = 1.0 / (dx_ * dx_);
    Vector dw(n_), flux_left = Vector::Zero(n_), flux_right(n_);
    for (int c = 0; c < cells_; ++c) {
      if (c + 1 < cells_) {
        for (int i = 0; i < n_; ++i) dw[i] = w[(c + 1) * n_ + i] - w[c * n_ + i];
        flux_right.noalias() = 0.5 * (bcell[c] + bcell[c + 1]) * dw;
      } else {
        flux_right.setZero();
      }
      for (int i = 0; i < n_; ++i) {
        const int k = c * n_ + i;
        double reg = w[k];  // zeroth-order part of b
        if (c > 0) reg += (w[k] - w[k - n_]) * idx2;
        if (c + 1 < cells_) reg += (w[k] - w[k + n_]) * idx2;
        F[k] = u.at(i, c) - prev_.at(i, c) -
               tau * idx2 * (flux_right[i] - flux_left[i]) + eps * tau * reg;
      }
      if (model_.has_reaction()) {
        const Vector r = (*model_.reaction)(u.composition(c));
        for (int i = 0; i < n_; ++i) F[c * n_ + i] -= tau * r[i];
      }
      flux_left = flux_right;
    }
  }

  // Finite-difference Jacobian in block-tridiagonal form, assembled with
  // distance-3 cell coloring (3 residual sweeps per species).
  void jacobian(const Vector& w, const Vector& F0,
                std::vector<Matrix>& diag, std::vector<Matrix>& lower,
                std::vector<Matrix>& upper, GridField& scratch_u,
                std::vector<Matrix>& scratch_b, Vector& scratch_F) const {
    for (int c = 0; c < cells_; ++c) {
      diag[c].setZero();
      lower[c].setZero();
      upper[c].setZero();
    }
    const double sqrt_eps = 1.4901161193847656e-08;
    Vector wp = w;
    for (int color = 0; color < 3; ++color) {
      for (int i = 0; i < n_; ++i) {
        for (int c = color; c < cells_; c += 3) {
          const int k = c * n_ + i;
          wp[k] = w[k] + sqrt_eps * (1.0 + std::abs(w[k]));
        }
        eval_state(wp, scratch_u, scratch_b);
        residual(wp, scratch_u, scratch_b, scratch_F);
        for (int c = color; c < cells_; c += 3) {
          const int k = c * n_ + i;
          const double h = wp[k] - w[k];
          for (int dr = -1; dr <= 1; ++dr) {
            const int r = c + dr;
            if (r < 0 || r >= cells_) continue;
            Matrix& blk = dr == 0 ? diag[c] : (dr == -1 ? upper[r] : lower[r]);
            for (int q = 0; q < n_; ++q)
              blk(q, i) = (scratch_F[r * n_ + q] - F0[r * n_ + q]) / h;
          }
          wp[k] = w[k];
        }
      }
    }
  }

  double dx() const { return dx_; }

 private:
  const ModelSpec& model_;
  const GridField& prev_;
  const SolverConfig& cfg_;
  double tau_;
  int n_, cells_;
  double dx_;
};

// In-place block-tridiagonal solve (block Thomas with per-block pivoting).
// Returns false on a singular or non-finite elimination.
bool solve_block_tridiagonal(std::vector<Matrix>& diag, std::vector<Matrix>& lower,
                             const std::vector<Matrix>& upper, Vector& rhs, int n) {
  const int cells = static_cast<int>(diag.size());
  Matrix dinv = diag[0];
  std::vector<Matrix> dinvs(cells);
  auto invert = [&](const Matrix& a, Matrix& out) {
    Eigen::PartialPivLU<Matrix> lu(a);
    out = lu.inverse();
    return out.allFinite();
  };
  if (!invert(diag[0], dinvs[0])) return false;
  for (int c = 1; c < cells; ++c) {
    const Matrix lfac = lower[c] * dinvs[c - 1];
    diag[c].noalias() -= lfac * upper[c - 1];
    rhs.segment(c * n, n).noalias() -= lfac * rhs.segment((c - 1) * n, n);
    if (!invert(diag[c], dinvs[c])) return false;
  }
  Vector xc = dinvs[cells - 1] * rhs.segment((cells - 1) * n, n);
  rhs.segment((cells - 1) * n, n) = xc;
  for (int c = cells - 2; c >= 0; --c) {
    Vector b = rhs.segment(c * n, n) - upper[c] * rhs.segment((c + 1) * n, n);
    rhs.segment(c * n, n) = dinvs[c] * b;
  }
  return rhs.allFinite();
}

struct StepOutcome {
  GridField u;
  Vector w;
  int iterations = 0;
  double residual = 0.0;
  double production = 0.0;      // dissipation rate over the (sub)step
  double regularization = 0.0;  // b(w, w) rate over the (sub)step
};

StepOutcome newton_solve(const ModelSpec& m, const GridField& prev, const Vector& w_start,
                         const SolverConfig& cfg, double tau, int step_index) {
  const int n = m.n, cells = prev.cells();
  StepSystem sys(m, prev, cfg, tau);

  GridField u(n, cells, prev.length());
  std::vector<Matrix> bcell(cells, Matrix(n, n));
  Vector w = w_start;
  Vector F(sys.unknowns());
  sys.eval_state(w, u, bcell);
  sys.residual(w, u, bcell, F);
  double norm = F.cwiseAbs().maxCoeff();

  std::vector<Matrix> diag(cells, Matrix(n, n)), lower(cells, Matrix(n, n)),
      upper(cells, Matrix(n, n));
  GridField su(n, cells, prev.length());
  std::vector<Matrix> sb(cells, Matrix(n, n));
  Vector sF(sys.unknowns());

  // one damped Newton iteration; returns false when the Armijo search on the
  // squared residual cannot make progress
  auto iterate = [&]() -> bool {
    sys.jacobian(w, F, diag, lower, upper, su, sb, sF);
    Vector delta = -F;
    if (!solve_block_tridiagonal(diag, lower, upper, delta, n)) return false;

    // entropy variables saturate exponentially, so huge w-moves only slide
    // along the degenerate boundary plateau; cap the initial move instead
    constexpr double kMaxMove = 6.0;
    double lambda = 1.0;
    const double move = delta.cwiseAbs().maxCoeff();
    if (move > kMaxMove) lambda = kMaxMove / move;

    const double merit0 = F.squaredNorm();
    for (int halving = 0; halving <= 40; ++halving) {
      const Vector wt = w + lambda * delta;
      sys.eval_state(wt, su, sb);
      sys.residual(wt, su, sb, sF);
      const double merit = sF.squaredNorm();
      if (std::isfinite(merit) && merit <= (1.0 - 2e-4 * lambda) * merit0) {
        w = wt;
        std::swap(u, su);
        std::swap(bcell, sb);
        F = sF;
        norm = F.cwiseAbs().maxCoeff();
        return true;
      }
      lambda *= cfg.linesearch;
    }
    return false;
  };

  int iters = 0;
  while (!(norm <= cfg.newton_tol)) {
    if (iters >= cfg.newton_max_iter)
      throw NewtonDiverged("Newton iteration exceeded max iterations", step_index);
    if (!iterate())
      throw NewtonDiverged("Newton line search stalled", step_index);
    ++iters;
  }
  // polish once so the exit residual sits at the floor; keeps the per-step
  // mass defect far below the conservation tolerances over long runs
  if (iters > 0 && norm > 1e-14 && iters < cfg.newton_max_iter && iterate()) ++iters;

  // Dissipation bookkeeping at the converged state: the quadratic form the
  // step actually removed from the entropy, plus the regularization form.
  const double dx = prev.cell_width();
  double production = 0.0, breg = 0.0;
  Vector dw(n);
  for (int c = 0; c + 1 < cells; ++c) {
    for (int i = 0; i < n; ++i) dw[i] = w[(c + 1) * n + i] - w[c * n + i];
    const Matrix bface = 0.5 * (bcell[c] + bcell[c + 1]);
    production += dw.dot(bface * dw);
    breg += dw.squaredNorm();
  }
  production /= dx;
  breg /= dx;
  for (int c = 0; c < cells; ++c)
    breg += dx * w.segment(c * n, n).squaredNorm();

  StepOutcome out{std::move(u), std::move(w), iters, norm, production, breg};
  return out;
}

// Advances by tau, bisecting the step in time when Newton cannot converge
// (sharp-interface data shrinks the Newton basin; implicit Euler converges
// for small enough substeps). Production and regularization are reported as
// time-averaged rates so the discrete entropy accounting stays exact.
StepOutcome newton_step(const ModelSpec& m, const GridField& prev, const Vector& w_start,
                        const SolverConfig& cfg, double tau, int step_index,
                        int depth = 0) {
  try {
    return newton_solve(m, prev, w_start, cfg, tau, step_index);
  } catch (const NewtonDiverged&) {
    if (depth >= 6) throw;
    StepOutcome first = newton_step(m, prev, w_start, cfg, 0.5 * tau, step_index, depth + 1);
    StepOutcome second =
        newton_step(m, first.u, first.w, cfg, 0.5 * tau, step_index, depth + 1);
    second.iterations += first.iterations;
    second.residual = std::max(first.residual, second.residual);
    second.production = 0.5 * (first.production + second.production);
    second.regularization = 0.5 * (first.regularization + second.regularization);
    return second;
  }
}

Vector entropy_vars_of(const GridField& f) {
  Vector w(f.species() * f.cells());
  for (int c = 0; c < f.cells(); ++c) {
    const EntropyVars v = to_entropy_vars(f.composition(c));
    for (int i = 0; i < f.species(); ++i) w[c * f.species() + i] = v.w[i];
  }
  return w;
}

std::vector<double> masses_of(const GridField& f) {
  std::vector<double> m(f.species());
  for (int i = 0; i < f.species(); ++i) m[i] = f.mass(i);
  return m;
}

}  // namespace

GridField step(const ModelSpec& m, const GridField& prev, const SolverConfig& cfg) {
  cfg.validate();
  if (prev.species() != m.n) throw InvalidParameter("step: field/model species mismatch");
  return newton_step(m, prev, entropy_vars_of(prev), cfg, cfg.tau, 0).u;
}

SimulationRun simulate_with_recovery(const ModelSpec& m, const GridField& init,
                                     const SolverConfig& cfg) {
  cfg.validate();
  if (init.species() != m.n)
    throw InvalidParameter("simulate: field/model species mismatch");
  if (init.cells() != cfg.cells || init.length() != cfg.length)
    throw InvalidParameter("simulate: field does not match the configured grid");

  // Inward projection: entropy variables need interior states; mixing with
  // the barycenter moves boundary data inside without visible distortion.
  constexpr double kEta = 1e-8;
  GridField state(init.species(), init.cells(), init.length());
  const double bary = 1.0 / (m.n + 1);
  for (int c = 0; c < init.cells(); ++c)
    for (int i = 0; i < m.n; ++i)
      state.at(i, c) = (1.0 - kEta) * init.at(i, c) + kEta * bary;
  if (!state.strictly_interior(0.0))
    throw InvalidParameter("simulate: initial data leaves the closed simplex");

  const long N = std::lround(cfg.T / cfg.tau);

  SimulationRun run;
  TrajectoryField& traj = run.trajectory;
  traj.times.reserve(N + 1);
  traj.states.reserve(N + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(state);
  traj.ledger.initial_entropy = entropy_functional(state);
  traj.ledger.initial_mass = masses_of(state);

  Vector w = entropy_vars_of(state);
  for (long k = 1; k <= N; ++k) {
    StepOutcome out;
    try {
      out = newton_step(m, traj.states.back(), w, cfg, cfg.tau, static_cast<int>(k - 1));
    } catch (const NewtonDiverged& e) {
      run.failed_step = static_cast<int>(k - 1);
      run.failure_message = e.what();
      return run;
    }
    w = out.w;
    StepRecord rec;
    rec.time = static_cast<double>(k) * cfg.tau;
    rec.entropy = entropy_functional(out.u);
    rec.production = out.production;
    rec.regularization = out.regularization;
    rec.newton_iterations = out.iterations;
    rec.residual = out.residual;
    rec.mass = masses_of(out.u);
    traj.ledger.steps.push_back(std::move(rec));
    traj.times.push_back(static_cast<double>(k) * cfg.tau);
    traj.states.push_back(std::move(out.u));
  }
  return run;
}

TrajectoryField simulate(const ModelSpec& m, const GridField& init, const SolverConfig& cfg) {
  SimulationRun run = simulate_with_recovery(m, init, cfg);
  if (run.failed_step)
    throw NewtonDiverged(run.failure_message + " (step " +
                             std::to_string(*run.failed_step) + ")",
                         *run.failed_step);
  return std::move(run.trajectory);
}

namespace {

// Augmented log-gradients and s-power gradients at the face between cells c
// and c+1, with the s-power log-mean as the face denominator so both
// production routes agree analytically.
struct FaceGeometry {
  Vector dlog;    // (log u_i(c+1) - log u_i(c)) / dx
  Vector dpow;    // (u_i^s(c+1) - u_i^s(c)) / dx
  Vector powmean; // s-power log-mean of u_i across the face
  AugmentedComposition mid;
};

FaceGeometry face_geometry(const GridField& f, int c, double s) {
  const int n = f.species();
  const double dx = f.cell_width();
  FaceGeometry geo;
  geo.dlog.resize(n + 1);
  geo.dpow.resize(n + 1);
  geo.powmean.resize(n + 1);
  Vector mid(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double a = i == 0 ? f.solvent(c) : f.at(i - 1, c);
    const double b = i == 0 ? f.solvent(c + 1) : f.at(i - 1, c + 1);
    const double la = std::log(a), lb = std::log(b);
    const double pa = std::pow(a, s), pb = std::pow(b, s);
    geo.dlog[i] = (lb - la) / dx;
    geo.dpow[i] = (pb - pa) / dx;
    geo.powmean[i] = (lb == la) ? pa : (pb - pa) / (s * (lb - la));
    mid[i] = 0.5 * (a + b);
  }
  geo.mid = AugmentedComposition(std::move(mid));
  return geo;
}

}  // namespace

double discrete_entropy_production(const ModelSpec& m, const GridField& f) {
  if (!f.strictly_interior(0.0))
    throw BoundaryComposition("entropy production: field touches the simplex boundary");
  const double dx = f.cell_width();
  const double s = m.s;
  double acc = 0.0;
  for (int c = 0; c + 1 < f.cells(); ++c) {
    const FaceGeometry geo = face_geometry(f, c, s);
    const AugmentedMobility bar = augmented_mobility(m, geo.mid);
    double face = 0.0;
    for (int i = 0; i <= m.n; ++i)
      for (int j = 0; j <= m.n; ++j)
        face += bar.entries(i, j) / (geo.powmean[i] * geo.powmean[j]) *
                geo.dpow[i] * geo.dpow[j];
    acc += face / (s * s);
  }
  return acc * dx;
}

double discrete_entropy_production_direct(const ModelSpec& m, const GridField& f) {
  if (!f.strictly_interior(0.0))
    throw BoundaryComposition("entropy production: field touches the simplex boundary");
  const double dx = f.cell_width();
  double acc = 0.0;
  for (int c = 0; c + 1 < f.cells(); ++c) {
    const FaceGeometry geo = face_geometry(f, c, m.s);
    const AugmentedMobility bar = augmented_mobility(m, geo.mid);
    for (int i = 0; i <= m.n; ++i)
      for (int j = 0; j <= m.n; ++j)
        acc += bar.entries(i, j) * geo.dlog[i] * geo.dlog[j];
  }
  return acc * dx;
}

GridField restrict_field(const GridField& fine, int factor) {
  if (factor < 1 || fine.cells() % factor != 0)
    throw InvalidParameter("restrict_field: factor must divide the cell count");
  GridField coarse(fine.species(), fine.cells() / factor, fine.length());
  for (int i = 0; i < fine.species(); ++i)
    for (int c = 0; c < coarse.cells(); ++c) {
      double acc = 0.0;
      for (int k = 0; k < factor; ++k) acc += fine.at(i, c * factor + k);
      coarse.at(i, c) = acc / factor;
    }
  return coarse;
}

GridField prolong_field(const GridField& coarse, int factor) {
  if (factor < 1) throw InvalidParameter("prolong_field: factor must be >= 1");
  GridField fine(coarse.species(), coarse.cells() * factor, coarse.length());
  for (int i = 0; i < coarse.species(); ++i)
    for (int c = 0; c < fine.cells(); ++c) fine.at(i, c) = coarse.at(i, c / factor);
  return fine;
}

GridField cosine_profile(const Composition& base, const Vector& amplitude,
                         int cells, double length) {
  if (amplitude.size() != base.n())
    throw InvalidParameter("cosine_profile: amplitude size mismatch");
  GridField f(base.n(), cells, length);
  const double dx = length / cells;
  for (int c = 0; c < cells; ++c) {
    const double x = (c + 0.5) * dx;
    const double shape = std::cos(M_PI * x / length);
    for (int i = 0; i < base.n(); ++i) f.at(i, c) = base.u[i] + amplitude[i] * shape;
    if (!f.composition(c).in_closed_simplex(0.0))
      throw InvalidParameter("cosine_profile: amplitudes leave the simplex");
  }
  return f;
}

GridField step_profile(const Composition& left, const Composition& right,
                       int cells, double length) {
  if (left.n() != right.n()) throw InvalidParameter("step_profile: species mismatch");
  GridField f(left.n(), cells, length);
  for (int c = 0; c < cells; ++c)
    f.set_composition(c, c < cells / 2 ? left : right);
  return f;
}

double l2_distance(const GridField& a, const GridField& b) {
  if (!a.same_grid(b)) throw InvalidParameter("l2_distance: grid mismatch");
  std::vector<const double*> pu(a.species()), pv(b.species());
  for (int i = 0; i < a.species(); ++i) {
    pu[i] = a.species_data(i);
    pv[i] = b.species_data(i);
  }
  const double sum = kernels::active_ops().sq_diff_sum(
      pu.data(), pv.data(), a.species(), static_cast<std::size_t>(a.cells()));
  return std::sqrt(sum * a.cell_width());
}

}  // namespace xdiff

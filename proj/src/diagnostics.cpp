#include "xdiff/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xdiff/kernels.hpp"

namespace xdiff {

namespace {

void require_same_grid(const GridField& u, const GridField& v, const char* who) {
  if (!u.same_grid(v)) throw InvalidParameter(std::string(who) + ": grid mismatch");
}

}  // namespace

double relative_entropy(const GridField& u, const GridField& v) {
  require_same_grid(u, v, "relative_entropy");
  if (!(v.min_fraction() > 0.0))
    throw BoundaryReference("relative_entropy: reference field touches the boundary");
  std::vector<const double*> pu(u.species()), pv(v.species());
  for (int i = 0; i < u.species(); ++i) {
    pu[i] = u.species_data(i);
    pv[i] = v.species_data(i);
  }
  const double sum = kernels::active_ops().relative_entropy_sum(
      pu.data(), pv.data(), u.species(), static_cast<std::size_t>(u.cells()));
  return sum * u.cell_width();
}

double hl2_lower_bound(const GridField& u, const GridField& v) {
  require_same_grid(u, v, "hl2_lower_bound");
  std::vector<const double*> pu(u.species()), pv(v.species());
  for (int i = 0; i < u.species(); ++i) {
    pu[i] = u.species_data(i);
    pv[i] = v.species_data(i);
  }
  const double sum = kernels::active_ops().sq_diff_sum(
      pu.data(), pv.data(), u.species(), static_cast<std::size_t>(u.cells()));
  return 0.5 * sum * u.cell_width();
}

std::pair<double, double> decomposition_observables(const ModelSpec& m,
                                                    const GridField& u,
                                                    const GridField& v) {
  require_same_grid(u, v, "decomposition_observables");
  if (!u.strictly_interior(0.0) || !v.strictly_interior(0.0))
    throw BoundaryComposition("decomposition_observables: fields must be interior");

  const int n = m.n;
  const double dx = u.cell_width();
  double i1 = 0.0, i2 = 0.0;
  Vector du(n + 1), dv(n + 1), gv(n + 1), umid(n + 1), vmid(n + 1);
  for (int c = 0; c + 1 < u.cells(); ++c) {
    for (int i = 0; i <= n; ++i) {
      const double ua = i == 0 ? u.solvent(c) : u.at(i - 1, c);
      const double ub = i == 0 ? u.solvent(c + 1) : u.at(i - 1, c + 1);
      const double va = i == 0 ? v.solvent(c) : v.at(i - 1, c);
      const double vb = i == 0 ? v.solvent(c + 1) : v.at(i - 1, c + 1);
      du[i] = (std::log(ub) - std::log(ua)) / dx;
      gv[i] = (std::log(vb) - std::log(va)) / dx;
      dv[i] = du[i] - gv[i];  // grad log(u_i / v_i)
      umid[i] = 0.5 * (ua + ub);
      vmid[i] = 0.5 * (va + vb);
    }
    const AugmentedComposition uac(umid), vac(vmid);
    const Matrix rho_u = m.reduced_mobility(uac);
    const Matrix rho_v = m.reduced_mobility(vac);
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        i1 -= umid[i] * rho_u(i, j) * dv[i] * dv[j];
        i2 -= (rho_u(i, j) - rho_v(i, j)) * umid[i] * gv[j] * dv[i];
      }
  }
  return {i1 * dx, i2 * dx};
}

double gronwall_fit(const std::vector<double>& times, const std::vector<double>& H) {
  if (times.size() != H.size() || times.empty())
    throw InvalidParameter("gronwall_fit: malformed series");
  const double H0 = H.front();
  if (!(H0 > 1e-14))
    throw DegenerateSeries("gronwall_fit: H(0) vanishes, rate undefined");
  double C = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < H.size(); ++k) {
    if (!(times[k] > 0.0)) continue;
    C = std::max(C, std::log(H[k] / H0) / times[k]);
  }
  return C;
}

GridField perturb_initial(const GridField& init, double delta) {
  constexpr double kMargin = 1e-6;
  const int cells = init.cells();
  const double L = init.length(), dx = init.cell_width();
  const double center = 0.5 * L, width = 0.5 * L;

  std::vector<double> bump(cells, 0.0);
  double mean = 0.0;
  for (int c = 0; c < cells; ++c) {
    const double x = (c + 0.5) * dx;
    if (std::abs(x - center) <= 0.5 * width)
      bump[c] = 0.5 * (1.0 + std::cos(2.0 * M_PI * (x - center) / width));
    mean += bump[c];
  }
  mean /= cells;

  GridField out = init;
  for (int c = 0; c < cells; ++c) {
    double u1 = init.at(0, c) + delta * (bump[c] - mean);
    // keep the cell strictly interior; the solvent absorbs the complement
    double others = 0.0;
    for (int i = 1; i < init.species(); ++i) others += init.at(i, c);
    u1 = std::min(std::max(u1, kMargin), 1.0 - others - kMargin);
    out.at(0, c) = u1;
  }
  return out;
}

TwinExperimentResult twin_experiment(const ModelSpec& m, const GridField& init,
                                     double delta, const SolverConfig& cfg,
                                     const SolverConfig& cfg_fine) {
  if (delta < 0.0) throw InvalidParameter("twin_experiment: delta must be >= 0");
  cfg.validate();
  cfg_fine.validate();
  if (cfg_fine.length != cfg.length || cfg_fine.T != cfg.T)
    throw ConfigMismatch("twin_experiment: fine run must share domain and horizon");

  const bool identical = cfg_fine.tau == cfg.tau && cfg_fine.cells == cfg.cells &&
                         cfg_fine.epsilon == cfg.epsilon;
  int ratio_tau = 1, ratio_cells = 1;
  if (!identical) {
    const double rt = cfg.tau / cfg_fine.tau;
    ratio_tau = static_cast<int>(std::lround(rt));
    if (std::abs(rt - ratio_tau) > 1e-9 * rt || ratio_tau < 4)
      throw ConfigMismatch("twin_experiment: fine tau must refine tau by an integer >= 4");
    if (cfg_fine.cells % cfg.cells != 0 || cfg_fine.cells / cfg.cells < 2)
      throw ConfigMismatch("twin_experiment: fine grid must refine cells by an integer >= 2");
    ratio_cells = cfg_fine.cells / cfg.cells;
  }

  const GridField u0 = perturb_initial(init, delta);
  const GridField v0 = prolong_field(init, ratio_cells);

  const TrajectoryField coarse = simulate(m, u0, cfg);
  const TrajectoryField fine = simulate(m, v0, cfg_fine);

  TwinExperimentResult res;
  res.delta = delta;
  res.entropy_slack = coarse.ledger.max_slack(cfg.tau, cfg.epsilon);

  const std::size_t stamps = coarse.times.size();
  res.times = coarse.times;
  res.H_series.reserve(stamps);
  res.lower_bound_series.reserve(stamps);
  res.I1_series.reserve(stamps);
  res.I2_series.reserve(stamps);

  res.v_floor = std::numeric_limits<double>::infinity();
  res.v_grad_log_max = 0.0;
  const double dxf = fine.states.front().cell_width();

  for (std::size_t k = 0; k < stamps; ++k) {
    const GridField& uk = coarse.states[k];
    const GridField& vfine = fine.states[k * static_cast<std::size_t>(ratio_tau)];
    const GridField vk = ratio_cells == 1 ? vfine : restrict_field(vfine, ratio_cells);

    res.H_series.push_back(relative_entropy(uk, vk));
    res.lower_bound_series.push_back(hl2_lower_bound(uk, vk));
    const auto [i1, i2] = decomposition_observables(m, uk, vk);
    res.I1_series.push_back(i1);
    res.I2_series.push_back(i2);

    res.v_floor = std::min(res.v_floor, vfine.min_fraction());
    for (int c = 0; c + 1 < vfine.cells(); ++c)
      for (int i = 0; i <= m.n; ++i) {
        const double a = i == 0 ? vfine.solvent(c) : vfine.at(i - 1, c);
        const double b = i == 0 ? vfine.solvent(c + 1) : vfine.at(i - 1, c + 1);
        res.v_grad_log_max =
            std::max(res.v_grad_log_max, std::abs(std::log(b) - std::log(a)) / dxf);
      }
  }

  if (res.H_series.front() > 1e-14) {
    const double C = gronwall_fit(res.times, res.H_series);
    res.fitted_C = C;
    const double H0 = res.H_series.front();
    for (std::size_t k = 1; k < stamps; ++k)
      if (res.H_series[k] > H0 * std::exp(C * res.times[k]) * (1.0 + 1e-9))
        ++res.envelope_violations;
  }
  return res;
}

}  // namespace xdiff

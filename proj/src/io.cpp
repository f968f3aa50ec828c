#include "xdiff/io.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace xdiff {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const std::string& dir, const std::string& name,
                       const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
  const fs::path final_path = fs::path(dir) / name;
  const fs::path tmp_path = fs::path(dir) / ("." + name + ".tmp");
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write to '" + tmp_path.string() + "'");
    out << content;
    if (!out.good()) throw Error("short write to '" + tmp_path.string() + "'");
  }
  fs::rename(tmp_path, final_path, ec);
  if (ec) throw Error("cannot move output into place at '" + final_path.string() +
                      "': " + ec.message());
}

Json provenance_header(const RunSettings& s) {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  return Json{
      {"timestamp",
       std::chrono::duration_cast<std::chrono::milliseconds>(now).count()},
      {"seed", s.experiment.seed},
      {"config", s.resolved},
  };
}

Json report_to_json(const HypothesisReport& r) {
  return Json{
      {"hypothesis", to_string(r.check)},
      {"verdict", to_string(r.verdict)},
      {"statistic", r.statistic},
      {"witness", r.witness},
      {"samples", r.samples},
      {"margin", r.margin},
      {"seed", r.seed},
      {"level_statistics", r.level_statistics},
      {"note", r.note},
  };
}

Json ledger_to_json(const EntropyLedger& ledger, const std::vector<double>& times) {
  Json steps = Json::array();
  for (const auto& s : ledger.steps)
    steps.push_back(Json{{"t", s.time},
                         {"entropy", s.entropy},
                         {"production", s.production},
                         {"regularization", s.regularization},
                         {"newton_iterations", s.newton_iterations},
                         {"residual", s.residual},
                         {"mass", s.mass}});
  Json j{{"initial", Json{{"entropy", ledger.initial_entropy},
                          {"mass", ledger.initial_mass}}},
         {"steps", std::move(steps)}};
  if (!times.empty()) j["final_time"] = times.back();
  return j;
}

Json twin_to_json(const TwinExperimentResult& r) {
  Json j{
      {"delta", r.delta},
      {"times", r.times},
      {"H_series", r.H_series},
      {"lower_bound_series", r.lower_bound_series},
      {"I1_series", r.I1_series},
      {"I2_series", r.I2_series},
      {"envelope_violations", r.envelope_violations},
      {"v_floor", r.v_floor},
      {"v_grad_log_max", r.v_grad_log_max},
      {"entropy_slack", r.entropy_slack},
  };
  if (r.fitted_C)
    j["fitted_C"] = *r.fitted_C;
  else
    j["fitted_C"] = nullptr;
  return j;
}

namespace {

std::string provenance_comment(const RunSettings& s) {
  std::string out = "# config: " + s.resolved.dump() + "\n";
  out += "# seed: " + std::to_string(s.experiment.seed) + "\n";
  return out;
}

}  // namespace

std::string trajectory_csv(const TrajectoryField& t, const RunSettings& s) {
  std::string out = provenance_comment(s);
  const int n = s.model.n;
  out += "t,x";
  for (int i = 1; i <= n; ++i) out += ",u" + std::to_string(i);
  out += ",u0\n";
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    const GridField& f = t.states[k];
    const double dx = f.cell_width();
    for (int c = 0; c < f.cells(); ++c) {
      out += format_double(t.times[k]);
      out += ',';
      out += format_double((c + 0.5) * dx);
      for (int i = 0; i < n; ++i) {
        out += ',';
        out += format_double(f.at(i, c));
      }
      out += ',';
      out += format_double(f.solvent(c));
      out += '\n';
    }
  }
  return out;
}

std::string twin_csv(const TwinExperimentResult& r, const RunSettings& s) {
  std::string out = provenance_comment(s);
  out += "t,H,lower_bound,I1,I2\n";
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    out += format_double(r.times[k]);
    out += ',';
    out += format_double(r.H_series[k]);
    out += ',';
    out += format_double(r.lower_bound_series[k]);
    out += ',';
    out += format_double(r.I1_series[k]);
    out += ',';
    out += format_double(r.I2_series[k]);
    out += '\n';
  }
  return out;
}

std::string reports_csv(const std::vector<HypothesisReport>& reports,
                        const RunSettings& s) {
  std::string out = provenance_comment(s);
  out += "hypothesis,verdict,statistic,samples,margin,seed\n";
  for (const auto& r : reports) {
    out += to_string(r.check);
    out += ',';
    out += to_string(r.verdict);
    out += ',';
    out += format_double(r.statistic);
    out += ',';
    out += std::to_string(r.samples);
    out += ',';
    out += format_double(r.margin);
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

std::string sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows,
                      const RunSettings& s) {
  std::string out = provenance_comment(s);
  out += "axis,value,H0,max_H,C_star,entropy_slack,conv_error\n";
  for (const auto& r : rows) {
    out += axis;
    out += ',';
    out += format_double(r.value);
    out += ',';
    out += format_double(r.H0);
    out += ',';
    out += format_double(r.max_H);
    out += ',';
    out += format_double(r.C_star);
    out += ',';
    out += format_double(r.entropy_slack);
    out += ',';
    out += format_double(r.conv_error);
    out += '\n';
  }
  return out;
}

}  // namespace xdiff

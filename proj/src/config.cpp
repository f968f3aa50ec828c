#include "xdiff/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace xdiff {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void reject_unknown(const Json& obj, std::initializer_list<const char*> allowed,
                    const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed) known = known || it.key() == a;
    if (!known) fail(path, "unknown key '" + it.key() + "'");
  }
}

const Json* maybe(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double num(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double num_or(const Json& obj, const char* key, double def, const std::string& path) {
  const Json* j = maybe(obj, key);
  return j ? num(*j, path + "." + key) : def;
}

long int_or(const Json& obj, const char* key, long def, const std::string& path) {
  const Json* j = maybe(obj, key);
  if (!j) return def;
  if (!j->is_number_integer() && !j->is_number_unsigned())
    fail(path + "." + key, "expected an integer");
  return j->get<long>();
}

std::string str(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> num_array(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) fail(path, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Matrix matrix_from(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected an array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) fail(path, "expected an array of rows");
  Matrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = num_array(j[r], path);
    if (row.size() != cols) fail(path, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
  }
  return m;
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

// ---- TOML subset -------------------------------------------------------------

namespace {

struct TomlValueParser {
  std::string_view s;
  std::size_t pos = 0;
  int line;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }

  [[noreturn]] void err(const std::string& what) {
    fail("toml line " + std::to_string(line), what);
  }

  Json parse() {
    skip_ws();
    const Json v = parse_value();
    skip_ws();
    if (pos != s.size()) err("trailing characters after value");
    return v;
  }

  Json parse_value() {
    if (pos >= s.size()) err("missing value");
    const char c = s[pos];
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    if (s.substr(pos, 4) == "true") { pos += 4; return Json(true); }
    if (s.substr(pos, 5) == "false") { pos += 5; return Json(false); }
    return parse_number();
  }

  Json parse_string() {
    ++pos;
    std::string out;
    while (pos < s.size() && s[pos] != '"') out.push_back(s[pos++]);
    if (pos >= s.size()) err("unterminated string");
    ++pos;
    return Json(out);
  }

  Json parse_array() {
    ++pos;
    Json arr = Json::array();
    skip_ws();
    if (pos < s.size() && s[pos] == ']') { ++pos; return arr; }
    while (true) {
      skip_ws();
      arr.push_back(parse_value());
      skip_ws();
      if (pos < s.size() && s[pos] == ',') { ++pos; continue; }
      if (pos < s.size() && s[pos] == ']') { ++pos; return arr; }
      err("expected ',' or ']' in array");
    }
  }

  Json parse_number() {
    const std::size_t start = pos;
    while (pos < s.size() && std::string_view("+-0123456789.eE_x").find(s[pos]) !=
                                std::string_view::npos)
      ++pos;
    std::string tok(s.substr(start, pos - start));
    if (tok.empty()) err("expected a value");
    const bool integral = tok.find_first_of(".eE") == std::string::npos;
    try {
      if (integral && tok[0] != '-') return Json(std::stoull(tok));
      if (integral) return Json(std::stoll(tok));
      return Json(std::stod(tok));
    } catch (const std::exception&) {
      err("malformed number '" + tok + "'");
    }
  }
};

std::vector<std::string> split_dotted(const std::string& key, int line) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : key) {
    if (c == '.') {
      if (cur.empty()) fail("toml line " + std::to_string(line), "empty key segment");
      parts.push_back(cur);
      cur.clear();
    } else if (c != ' ' && c != '\t') {
      cur.push_back(c);
    }
  }
  if (cur.empty()) fail("toml line " + std::to_string(line), "empty key segment");
  parts.push_back(cur);
  return parts;
}

Json* descend(Json& root, const std::vector<std::string>& path) {
  Json* cur = &root;
  for (const auto& p : path) {
    if (!cur->contains(p)) (*cur)[p] = Json::object();
    cur = &(*cur)[p];
  }
  return cur;
}

}  // namespace

Json toml_subset_to_json(const std::string& text) {
  Json root = Json::object();
  Json* table = &root;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    // strip comments outside strings
    std::string stripped;
    bool in_str = false;
    for (char c : raw) {
      if (c == '"') in_str = !in_str;
      if (c == '#' && !in_str) break;
      stripped.push_back(c);
    }
    const auto first = stripped.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = stripped.find_last_not_of(" \t\r");
    std::string body = stripped.substr(first, last - first + 1);

    if (body.front() == '[') {
      if (body.back() != ']') fail("toml line " + std::to_string(line), "unterminated table header");
      table = descend(root, split_dotted(body.substr(1, body.size() - 2), line));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      fail("toml line " + std::to_string(line), "expected 'key = value'");
    const auto path = split_dotted(body.substr(0, eq), line);
    TomlValueParser vp{std::string_view(body).substr(eq + 1), 0, line};
    Json* slot = table;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      if (!slot->contains(path[i])) (*slot)[path[i]] = Json::object();
      slot = &(*slot)[path[i]];
    }
    (*slot)[path.back()] = vp.parse();
  }
  return root;
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open configuration file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml")
    return toml_subset_to_json(text);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // byte offset -> line number for an anchored message
    int line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError(path + ": line " + std::to_string(line) + ": " + e.what());
  }
}

// ---- model construction --------------------------------------------------------

namespace {

ModelSpec build_named_model(const std::string& name, const Json* params) {
  const std::string path = "model.params";
  if (name == "scalar") {
    if (!params) return preset_model(name);
    reject_unknown(*params, {"alpha"}, path);
    return scalar_model(num_or(*params, "alpha", 1.0, path));
  }
  if (name == "multiphase") {
    if (!params) return preset_model(name);
    reject_unknown(*params, {"q11", "q12", "q22"}, path);
    return multiphase_model(num_or(*params, "q11", 1.0, path),
                            num_or(*params, "q12", 1.0, path),
                            num_or(*params, "q22", 1.0, path));
  }
  if (name == "tumor") {
    if (!params) return preset_model(name);
    reject_unknown(*params, {"beta", "theta"}, path);
    return tumor_model(num_or(*params, "beta", 1.0, path),
                       num_or(*params, "theta", 1.0, path));
  }
  if (name == "busenberg_travis") {
    if (!params) return preset_model(name);
    reject_unknown(*params, {"p"}, path);
    const Json* p = maybe(*params, "p");
    if (!p) return preset_model(name);
    return busenberg_travis_model(matrix_from(*p, path + ".p"));
  }
  if (name == "maxwell_stefan") {
    if (!params) return preset_model(name);
    reject_unknown(*params, {"d01", "d02", "d12"}, path);
    return maxwell_stefan_2(num_or(*params, "d01", 1.0, path),
                            num_or(*params, "d02", 2.0, path),
                            num_or(*params, "d12", 3.0, path));
  }
  if (name == "thin_film") {
    if (!params) return preset_model(name);
    reject_unknown(*params, {"a"}, path);
    const Json* a = maybe(*params, "a");
    if (!a) return preset_model(name);
    return thin_film_model(matrix_from(*a, path + ".a"));
  }
  if (name == "ion_channel") {
    if (!params) return preset_model(name);
    reject_unknown(*params, {"d"}, path);
    const Json* d = maybe(*params, "d");
    if (!d) return preset_model(name);
    const auto v = num_array(*d, path + ".d");
    return ion_channel_model(Eigen::Map<const Vector>(v.data(), v.size()));
  }
  fail("model.name", "unknown model '" + name + "'");
}

}  // namespace

ModelSpec model_from_config(const Json& block) {
  if (!block.is_object()) fail("model", "expected an object");
  reject_unknown(block, {"name", "params", "reaction"}, "model");
  const Json* namej = maybe(block, "name");
  if (!namej) fail("model", "missing required key 'name'");
  ModelSpec m = build_named_model(str(*namej, "model.name"), maybe(block, "params"));

  if (const Json* rb = maybe(block, "reaction")) {
    reject_unknown(*rb, {"name", "rate", "c_r_hint"}, "model.reaction");
    const Json* rn = maybe(*rb, "name");
    if (!rn) fail("model.reaction", "missing required key 'name'");
    const std::string rname = str(*rn, "model.reaction.name");
    if (rname != "logistic")
      fail("model.reaction.name", "unknown reaction '" + rname + "'");
    const double rate = num_or(*rb, "rate", 1.0, "model.reaction");
    const double hint = num_or(*rb, "c_r_hint", 0.0, "model.reaction");
    m = with_reaction(std::move(m), logistic_reaction(m.n, rate), hint);
    m.params["reaction_rate"] = rate;
  }
  return m;
}

InitialSettings default_initial(int species) {
  InitialSettings init;
  init.profile = "cosine";
  init.base.assign(species, 1.0 / (species + 1));
  init.amplitude.assign(species, 0.0);
  if (species == 1) {
    init.base[0] = 0.5;
    init.amplitude[0] = 0.1;
  } else {
    init.amplitude[0] = 0.05;
    init.amplitude[1] = -0.05;
  }
  return init;
}

GridField build_initial_field(const RunSettings& s) {
  const auto& init = s.initial;
  const int n = s.model.n;
  if (init.profile == "cosine") {
    if (static_cast<int>(init.base.size()) != n ||
        static_cast<int>(init.amplitude.size()) != n)
      fail("solver.initial", "base/amplitude size must match the species count");
    return cosine_profile(
        Composition(Eigen::Map<const Vector>(init.base.data(), n)),
        Eigen::Map<const Vector>(init.amplitude.data(), n), s.solver.cells,
        s.solver.length);
  }
  if (init.profile == "step") {
    if (static_cast<int>(init.left.size()) != n ||
        static_cast<int>(init.right.size()) != n)
      fail("solver.initial", "left/right size must match the species count");
    return step_profile(Composition(Eigen::Map<const Vector>(init.left.data(), n)),
                        Composition(Eigen::Map<const Vector>(init.right.data(), n)),
                        s.solver.cells, s.solver.length);
  }
  fail("solver.initial.profile", "unknown profile '" + init.profile + "'");
}

// ---- settings --------------------------------------------------------------------

RunSettings resolve_settings(const Json& config, std::optional<std::uint64_t> seed_override,
                             std::optional<std::string> out_override,
                             std::optional<std::string> format_override) {
  if (!config.is_object()) fail("config", "top level must be an object");
  reject_unknown(config, {"model", "solver", "experiment", "output"}, "config");
  const Json* mb = maybe(config, "model");
  if (!mb) fail("config", "missing required block 'model'");

  RunSettings s;
  s.model = model_from_config(*mb);

  if (const Json* sb = maybe(config, "solver")) {
    reject_unknown(*sb,
                   {"tau", "T", "epsilon", "cells", "length", "newton_tol",
                    "newton_max_iter", "linesearch", "initial"},
                   "solver");
    s.solver.tau = num_or(*sb, "tau", s.solver.tau, "solver");
    s.solver.T = num_or(*sb, "T", s.solver.T, "solver");
    s.solver.epsilon = num_or(*sb, "epsilon", s.solver.epsilon, "solver");
    s.solver.cells = static_cast<int>(int_or(*sb, "cells", s.solver.cells, "solver"));
    s.solver.length = num_or(*sb, "length", s.solver.length, "solver");
    s.solver.newton_tol = num_or(*sb, "newton_tol", s.solver.newton_tol, "solver");
    s.solver.newton_max_iter = static_cast<int>(
        int_or(*sb, "newton_max_iter", s.solver.newton_max_iter, "solver"));
    s.solver.linesearch = num_or(*sb, "linesearch", s.solver.linesearch, "solver");
    if (const Json* ib = maybe(*sb, "initial")) {
      reject_unknown(*ib, {"profile", "base", "amplitude", "left", "right"},
                     "solver.initial");
      InitialSettings init;
      init.profile = maybe(*ib, "profile")
                         ? str(*maybe(*ib, "profile"), "solver.initial.profile")
                         : "cosine";
      const InitialSettings defaults = default_initial(s.model.n);
      init.base = maybe(*ib, "base") ? num_array(*maybe(*ib, "base"), "solver.initial.base")
                                     : defaults.base;
      init.amplitude = maybe(*ib, "amplitude")
                           ? num_array(*maybe(*ib, "amplitude"), "solver.initial.amplitude")
                           : defaults.amplitude;
      if (maybe(*ib, "left")) init.left = num_array(*maybe(*ib, "left"), "solver.initial.left");
      if (maybe(*ib, "right"))
        init.right = num_array(*maybe(*ib, "right"), "solver.initial.right");
      s.initial = std::move(init);
    } else {
      s.initial = default_initial(s.model.n);
    }
  } else {
    s.initial = default_initial(s.model.n);
  }
  try {
    s.solver.validate();
  } catch (const InvalidParameter& e) {
    fail("solver", e.what());
  }

  if (const Json* eb = maybe(config, "experiment")) {
    reject_unknown(*eb,
                   {"checks", "samples", "pairs", "seed", "gamma", "delta",
                    "refine_tau", "refine_cells", "axis"},
                   "experiment");
    auto& e = s.experiment;
    if (const Json* cj = maybe(*eb, "checks")) {
      if (!cj->is_array()) fail("experiment.checks", "expected an array of check names");
      const double gamma = num_or(*eb, "gamma", 0.0, "experiment");
      for (const auto& c : *cj) {
        const std::string name = str(c, "experiment.checks");
        const auto parsed = check_from_string(name);
        if (!parsed) fail("experiment.checks", "unknown check '" + name + "'");
        CheckRequest req{*parsed, 0.0};
        if (*parsed == Check::H5prime) {
          if (!(gamma > 0.0 && gamma < 1.0))
            fail("experiment.gamma", "H5prime requires gamma in (0, 1)");
          req.gamma = gamma;
        }
        e.checks.push_back(req);
      }
    }
    e.samples = int_or(*eb, "samples", e.samples, "experiment");
    e.pairs = int_or(*eb, "pairs", e.pairs, "experiment");
    if (const Json* sj = maybe(*eb, "seed")) {
      if (!sj->is_number_integer() && !sj->is_number_unsigned())
        fail("experiment.seed", "expected an integer");
      e.seed = sj->get<std::uint64_t>();
    }
    e.delta = num_or(*eb, "delta", e.delta, "experiment");
    if (e.delta < 0.0) fail("experiment.delta", "delta must be >= 0");
    e.refine_tau = static_cast<int>(int_or(*eb, "refine_tau", e.refine_tau, "experiment"));
    e.refine_cells =
        static_cast<int>(int_or(*eb, "refine_cells", e.refine_cells, "experiment"));
    if (const Json* ab = maybe(*eb, "axis")) {
      reject_unknown(*ab, {"name", "values"}, "experiment.axis");
      const Json* an = maybe(*ab, "name");
      const Json* av = maybe(*ab, "values");
      if (!an || !av) fail("experiment.axis", "axis needs both 'name' and 'values'");
      e.axis_name = str(*an, "experiment.axis.name");
      e.axis_values = num_array(*av, "experiment.axis.values");
    }
    if (e.samples < 1 || e.pairs < 1)
      fail("experiment", "samples and pairs must be >= 1");
  }
  if (seed_override) s.experiment.seed = *seed_override;

  if (const Json* ob = maybe(config, "output")) {
    reject_unknown(*ob, {"dir", "formats"}, "output");
    if (const Json* dj = maybe(*ob, "dir")) s.output.dir = str(*dj, "output.dir");
    if (const Json* fj = maybe(*ob, "formats")) {
      const std::string f = str(*fj, "output.formats");
      if (f == "csv") {
        s.output.write_csv = true;
        s.output.write_json = false;
      } else if (f == "json") {
        s.output.write_csv = false;
        s.output.write_json = true;
      } else if (f == "both") {
        s.output.write_csv = s.output.write_json = true;
      } else {
        fail("output.formats", "expected csv, json, or both");
      }
    }
  }
  if (out_override) s.output.dir = *out_override;
  if (format_override) {
    if (*format_override == "csv") {
      s.output.write_csv = true;
      s.output.write_json = false;
    } else if (*format_override == "json") {
      s.output.write_csv = false;
      s.output.write_json = true;
    } else if (*format_override == "both") {
      s.output.write_csv = s.output.write_json = true;
    } else {
      fail("--format", "expected csv, json, or both");
    }
  }

  // Fully resolved configuration for provenance embedding.
  Json resolved;
  Json params;
  for (const auto& [k, v] : s.model.params) params[k] = v;
  if (s.model.name == "busenberg_travis" || s.model.name == "thin_film") {
    const int dim = static_cast<int>(std::lround(std::sqrt(
        static_cast<double>(s.model.param_table.size()))));
    params[s.model.name == "thin_film" ? "a" : "p"] = matrix_json(
        Eigen::Map<const Matrix>(s.model.param_table.data(), dim, dim));
  } else if (s.model.name == "ion_channel") {
    params["d"] = s.model.param_table;
  }
  resolved["model"] = {{"name", s.model.name}, {"params", params}};
  if (s.model.has_reaction())
    resolved["model"]["reaction"] = {{"name", "logistic"},
                                     {"rate", s.model.params.count("reaction_rate")
                                                  ? s.model.params.at("reaction_rate")
                                                  : 1.0},
                                     {"c_r_hint", s.model.reaction_rate_hint}};
  resolved["solver"] = {
      {"tau", s.solver.tau},           {"T", s.solver.T},
      {"epsilon", s.solver.epsilon},   {"cells", s.solver.cells},
      {"length", s.solver.length},     {"newton_tol", s.solver.newton_tol},
      {"newton_max_iter", s.solver.newton_max_iter},
      {"linesearch", s.solver.linesearch}};
  Json initj = {{"profile", s.initial.profile}};
  if (!s.initial.base.empty()) initj["base"] = s.initial.base;
  if (!s.initial.amplitude.empty()) initj["amplitude"] = s.initial.amplitude;
  if (!s.initial.left.empty()) initj["left"] = s.initial.left;
  if (!s.initial.right.empty()) initj["right"] = s.initial.right;
  resolved["solver"]["initial"] = std::move(initj);
  Json checks = Json::array();
  for (const auto& c : s.experiment.checks) checks.push_back(to_string(c.check));
  resolved["experiment"] = {{"checks", checks},
                            {"samples", s.experiment.samples},
                            {"pairs", s.experiment.pairs},
                            {"seed", s.experiment.seed},
                            {"delta", s.experiment.delta},
                            {"refine_tau", s.experiment.refine_tau},
                            {"refine_cells", s.experiment.refine_cells}};
  for (const auto& c : s.experiment.checks)
    if (c.check == Check::H5prime) resolved["experiment"]["gamma"] = c.gamma;
  if (!s.experiment.axis_name.empty())
    resolved["experiment"]["axis"] = {{"name", s.experiment.axis_name},
                                      {"values", s.experiment.axis_values}};
  resolved["output"] = {{"dir", s.output.dir},
                        {"formats", s.output.write_csv && s.output.write_json
                                        ? "both"
                                        : (s.output.write_csv ? "csv" : "json")}};
  s.resolved = std::move(resolved);
  return s;
}

}  // namespace xdiff

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xdiff/hypotheses.hpp"
#include "xdiff/models.hpp"
#include "xdiff/solver.hpp"

namespace xdiff {

using Json = nlohmann::json;

/// Configuration or schema violation; message carries a line- or
/// path-anchored location.
struct ConfigError : Error {
  using Error::Error;
};

struct OutputSettings {
  std::string dir = "out";
  bool write_csv = true;
  bool write_json = true;
};

struct InitialSettings {
  std::string profile = "cosine";    // "cosine" | "step"
  std::vector<double> base;          // cosine: center composition
  std::vector<double> amplitude;     // cosine: per-species amplitudes
  std::vector<double> left, right;   // step: half compositions
};

struct CheckRequest {
  Check check;
  double gamma = 0.0;  // H5prime only
};

struct ExperimentSettings {
  std::vector<CheckRequest> checks;
  long samples = 10000;
  long pairs = 10000;
  std::uint64_t seed = 1;
  double delta = 0.0;
  int refine_tau = 4;
  int refine_cells = 2;
  std::string axis_name;             // "delta" | "tau" | model parameter
  std::vector<double> axis_values;
};

struct RunSettings {
  ModelSpec model;
  SolverConfig solver;
  InitialSettings initial;
  ExperimentSettings experiment;
  OutputSettings output;
  Json resolved;  // full resolved configuration, embedded into every output
};

/// Reads a configuration document. Dispatching on the extension: .toml goes
/// through the bundled TOML-subset reader, everything else is parsed as JSON.
/// Throws ConfigError with a line-anchored message on parse failure.
Json load_config_file(const std::string& path);

/// Maps the TOML subset (tables, dotted keys, scalars, arrays) onto the JSON
/// configuration schema.
Json toml_subset_to_json(const std::string& text);

/// Validates against the schema (unknown keys rejected) and builds the
/// resolved settings. Overrides, when present, replace experiment.seed,
/// output.dir, and output formats.
RunSettings resolve_settings(const Json& config,
                             std::optional<std::uint64_t> seed_override = {},
                             std::optional<std::string> out_override = {},
                             std::optional<std::string> format_override = {});

/// Model described by a config block (name + optional params + reaction).
ModelSpec model_from_config(const Json& block);

/// Default initial profile for a model (cosine around the barycenter).
InitialSettings default_initial(int species);

/// Builds the initial grid field for settings (profile + solver grid).
GridField build_initial_field(const RunSettings& s);

}  // namespace xdiff

#pragma once

// Flat "key = value" text formats: run configurations and custom model files.
// '#' starts a comment; blank lines are ignored; keys may repeat only where
// the format says so (model files: `jump`).

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "qcsmooth/ensemble.hpp"
#include "qcsmooth/generators.hpp"

namespace qcsmooth {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(const std::string& text);
KeyValues read_key_values(const std::filesystem::path& path);

/// Applies recognised keys onto `cfg`. Throws ConfigError on unknown keys or bad values.
void apply_run_config(const KeyValues& kv, RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);

/// Matrix literal: rows separated by ';', entries by whitespace. Entries are
/// reals or complex numbers written a+bi / a-bi / bi.
CMatrix parse_matrix(const std::string& text);

/// Custom model description:
///   dim = 2
///   labels = d u
///   hamiltonian.d = 0 0.5; 0.5 0
///   jump = d u 0.2 hidden | 0 0; 1 0        (source target rate observed|hidden | operator)
///   initial.d = 0 0; 0 1
///   raw_L = ... / raw_J = ...                 (optional full superoperators)
ModelSpec parse_model(const KeyValues& kv);
ModelSpec load_model_file(const std::filesystem::path& path);

}  // namespace qcsmooth

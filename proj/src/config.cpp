#include "qcsmooth/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "qcsmooth/errors.hpp"

namespace qcsmooth {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* begin = value.data() + (value.size() > 1 && value[0] == '+' ? 1 : 0);
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("'" + key + "': not a number: '" + value + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("'" + key + "': not a non-negative integer: '" + value + "'");
  return out;
}

Complex parse_entry(const std::string& token) {
  if (token.empty()) throw ConfigError("empty matrix entry");
  if (token.back() != 'i') return {to_double("matrix", token), 0.0};
  const std::string body = token.substr(0, token.size() - 1);
  // Split a+bi at the last sign that is not an exponent sign.
  std::size_t split_at = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split_at = k;
      break;
    }
  }
  auto imag_part = [](const std::string& s) {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return to_double("matrix", s);
  };
  if (split_at == std::string::npos) return {0.0, imag_part(body)};
  return {to_double("matrix", body.substr(0, split_at)), imag_part(body.substr(split_at))};
}

int label_index(const std::vector<std::string>& labels, const std::string& name) {
  const auto it = std::find(labels.begin(), labels.end(), name);
  if (it == labels.end()) throw ConfigError("unknown classical label '" + name + "'");
  return static_cast<int>(it - labels.begin());
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(std::string_view(stripped).substr(0, eq));
    std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_key_values(buffer.str());
}

void apply_run_config(const KeyValues& kv, RunConfig& cfg) {
  for (const auto& [key, value] : kv) {
    if (key == "model") {
      cfg.model = value;
    } else if (key == "omega_over_gamma" || key == "omega") {
      cfg.omega_over_gamma = to_double(key, value);
    } else if (key == "eta") {
      cfg.eta = to_double(key, value);
    } else if (key == "t_total") {
      cfg.t_total = to_double(key, value);
    } else if (key == "dt") {
      cfg.dt = to_double(key, value);
    } else if (key == "lag") {
      cfg.lag = to_double(key, value);
    } else if (key == "n_traj") {
      cfg.n_traj = to_uint(key, value);
    } else if (key == "master_seed" || key == "seed") {
      cfg.master_seed = to_uint(key, value);
    } else if (key == "outputs" || key == "out") {
      cfg.outputs = value;
    } else if (key == "workers") {
      cfg.workers = static_cast<unsigned>(to_uint(key, value));
    } else if (key == "batches") {
      cfg.batches = to_uint(key, value);
    } else {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig cfg;
  apply_run_config(read_key_values(path), cfg);
  return cfg;
}

CMatrix parse_matrix(const std::string& text) {
  const auto rows = split(text, ';');
  if (rows.empty()) throw ConfigError("empty matrix literal");
  std::vector<std::vector<Complex>> entries;
  for (const auto& row : rows) {
    std::vector<Complex> parsed;
    for (const auto& tok : words(row)) parsed.push_back(parse_entry(tok));
    entries.push_back(std::move(parsed));
  }
  const std::size_t cols = entries.front().size();
  if (cols == 0) throw ConfigError("empty matrix row");
  CMatrix m(static_cast<Eigen::Index>(entries.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].size() != cols) throw ConfigError("ragged matrix literal");
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = entries[i][j];
  }
  return m;
}

ModelSpec parse_model(const KeyValues& kv) {
  ModelSpec spec;
  std::optional<int> dim;
  std::vector<std::string> labels;
  for (const auto& [key, value] : kv) {
    if (key == "dim") dim = static_cast<int>(to_uint(key, value));
    if (key == "labels") labels = words(value);
    if (key == "n_classical" && labels.empty()) {
      const auto n = to_uint(key, value);
      for (std::uint64_t r = 0; r < n; ++r) labels.push_back(std::to_string(r));
    }
  }
  if (!dim || *dim < 1) throw ConfigError("model file needs dim >= 1");
  if (labels.empty()) labels = {"0"};
  spec.dim = *dim;
  spec.n_classical = static_cast<int>(labels.size());
  spec.labels = labels;
  spec.hamiltonians.assign(labels.size(), CMatrix());

  std::map<int, CMatrix> initial_blocks;
  CMatrix raw_l;
  CMatrix raw_j;
  for (const auto& [key, value] : kv) {
    if (key == "dim" || key == "labels" || key == "n_classical") continue;
    if (key.starts_with("hamiltonian.")) {
      spec.hamiltonians[label_index(labels, key.substr(12))] = parse_matrix(value);
    } else if (key.starts_with("initial.")) {
      initial_blocks[label_index(labels, key.substr(8))] = parse_matrix(value);
    } else if (key == "jump") {
      const auto bar = value.find('|');
      if (bar == std::string::npos) throw ConfigError("jump needs 'source target rate observed|hidden | matrix'");
      const auto head = words(value.substr(0, bar));
      if (head.size() != 4) throw ConfigError("jump header needs source, target, rate and observed|hidden");
      if (head[3] != "observed" && head[3] != "hidden") throw ConfigError("jump flag must be observed or hidden");
      spec.jumps.push_back({.source = label_index(labels, head[0]),
                            .target = label_index(labels, head[1]),
                            .op = parse_matrix(value.substr(bar + 1)),
                            .rate = to_double("jump rate", head[2]),
                            .observed = head[3] == "observed"});
    } else if (key == "raw_L") {
      raw_l = parse_matrix(value);
    } else if (key == "raw_J") {
      raw_j = parse_matrix(value);
    } else {
      throw ConfigError("unknown model key '" + key + "'");
    }
  }
  if (raw_l.size() != 0 || raw_j.size() != 0) {
    const int n = spec.n_classical * spec.dim * spec.dim;
    if (raw_l.size() == 0) raw_l = CMatrix::Zero(n, n);
    if (raw_j.size() == 0) raw_j = CMatrix::Zero(n, n);
    spec.raw = RawGenerators{raw_l, raw_j};
  }
  if (!initial_blocks.empty()) {
    HybridOperator init(spec.n_classical, spec.dim);
    for (auto& [r, block] : initial_blocks) {
      if (block.rows() != spec.dim || block.cols() != spec.dim) throw ConfigError("initial block has wrong shape");
      init.block(r) = block;
    }
    spec.initial = init;
  }
  spec.validate();
  return spec;
}

ModelSpec load_model_file(const std::filesystem::path& path) { return parse_model(read_key_values(path)); }

}  // namespace qcsmooth

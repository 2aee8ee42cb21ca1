#include "qcsmooth/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "qcsmooth/config.hpp"
#include "qcsmooth/errors.hpp"
#include "qcsmooth/fluorescence.hpp"
#include "qcsmooth/jump_engine.hpp"
#include "qcsmooth/smoother.hpp"
#include "qcsmooth/stats.hpp"

namespace qcsmooth {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Row-major [row][column] values of one trajectory.
struct TrajectorySummary {
  std::vector<std::array<double, kColumnCount>> rows;
};

constexpr std::size_t idx(Column c) { return static_cast<std::size_t>(c); }

TrajectorySummary summarize(const GridPropagator& prop, const HybridOperator& rho0, const RunConfig& cfg,
                            std::uint64_t index) {
  Stream rng(cfg.master_seed, index);
  const FilteredPath path = simulate_trajectory(prop, rho0, cfg.t_total, rng);
  const auto smoothed = smooth_path(prop, path, cfg.lag);

  TrajectorySummary out;
  out.rows.resize(path.states.size());
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    auto& row = out.rows[k];
    row.fill(kNaN);
    const CMatrix q = reduce_quantum(path.states[k]);
    const ClassicalDist c = reduce_classical(path.states[k]);
    row[idx(Column::pop_f)] = q(0, 0).real();
    row[idx(Column::purq_f)] = purity(q);
    row[idx(Column::pd_f)] = c.probs[0];
    row[idx(Column::purc_f)] = c.purity();
    if (k < smoothed.size()) {
      const SmoothedRecord& s = smoothed[k];
      row[idx(Column::pop_s)] = s.quantum_partial(0, 0).real();
      row[idx(Column::purq_s)] = s.quantum_purity;
      row[idx(Column::pd_s)] = s.classical_partial.probs[0];
      row[idx(Column::purc_s)] = s.classical_purity;
    }
  }
  return out;
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

void RunConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (!(t_total >= 0.0)) throw ConfigError("t_total must be >= 0");
  if (!(lag >= 0.0)) throw ConfigError("lag must be >= 0");
  if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
  grid_steps(t_total, dt);
  grid_steps(lag, dt);
}

ModelSpec resolve_model(const RunConfig& cfg) {
  const fluor::FluorParams params{.omega = cfg.omega_over_gamma, .gamma = 1.0, .eta = cfg.eta};
  if (cfg.model == "hybrid") return fluor::build_hybrid(params);
  if (cfg.model == "plain") return fluor::build_plain(params);
  constexpr std::string_view prefix = "custom:";
  if (cfg.model.starts_with(prefix)) return load_model_file(cfg.model.substr(prefix.size()));
  throw ConfigError("unknown model '" + cfg.model + "' (expected plain, hybrid or custom:<path>)");
}

std::string_view column_name(Column c) {
  static constexpr std::array<std::string_view, kColumnCount> names = {
      "pop_f", "pop_s", "purq_f", "purq_s", "pd_f", "pd_s", "purc_f", "purc_s"};
  return names[idx(c)];
}

EnsembleStats run_ensemble(const ModelSpec& model, const RunConfig& cfg) {
  cfg.validate();
  const ModelGenerators g = build(model);
  const GridPropagator prop(g, cfg.dt);
  const HybridOperator rho0 = g.initial;

  const int n = grid_steps(cfg.t_total, cfg.dt);
  const int m = grid_steps(cfg.lag, cfg.dt);
  const std::size_t rows = static_cast<std::size_t>(n) + 1;

  EnsembleStats stats;
  stats.n_traj = cfg.n_traj;
  stats.t = uniform_grid(cfg.t_total, cfg.dt);
  stats.smoothed_rows = m <= n ? static_cast<std::size_t>(n - m + 1) : 0;

  std::vector<std::array<stats::RunningMoments, kColumnCount>> moments(rows);
  const std::size_t batches = std::min(cfg.batches, cfg.n_traj);
  std::vector<std::vector<stats::RunningMoments>> batch_pop(batches, std::vector<stats::RunningMoments>(rows));

  const unsigned workers = resolve_workers(cfg.workers);
  const std::size_t chunk = std::max<std::size_t>(64, 16 * static_cast<std::size_t>(workers));
  std::vector<TrajectorySummary> results;

  for (std::size_t start = 0; start < cfg.n_traj; start += chunk) {
    const std::size_t count = std::min(chunk, cfg.n_traj - start);
    results.assign(count, {});
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          results[i] = summarize(prop, rho0, cfg, start + i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const unsigned pool = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    if (pool <= 1) {
      work();
    } else {
      std::vector<std::jthread> threads;
      threads.reserve(pool);
      for (unsigned w = 0; w < pool; ++w) threads.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    // Fold in trajectory order so the result does not depend on scheduling.
    for (std::size_t i = 0; i < count; ++i) {
      const auto& summary = results[i];
      const std::size_t traj = start + i;
      for (std::size_t k = 0; k < rows; ++k) {
        for (std::size_t c = 0; c < kColumnCount; ++c) {
          const double v = summary.rows[k][c];
          if (!std::isnan(v)) moments[k][c].push(v);
        }
        if (batches > 0) batch_pop[traj * batches / cfg.n_traj][k].push(summary.rows[k][idx(Column::pop_f)]);
      }
    }
  }

  for (std::size_t c = 0; c < kColumnCount; ++c) {
    stats.mean[c].assign(rows, kNaN);
    stats.se[c].assign(rows, kNaN);
    for (std::size_t k = 0; k < rows; ++k) {
      if (moments[k][c].count() == 0) continue;
      stats.mean[c][k] = moments[k][c].mean();
      stats.se[c][k] = moments[k][c].standard_error();
    }
  }
  if (batches > 1) {
    stats.batch_se_pop_f.assign(rows, 0.0);
    for (std::size_t k = 0; k < rows; ++k) {
      stats::RunningMoments across;
      for (std::size_t b = 0; b < batches; ++b) across.push(batch_pop[b][k].mean());
      stats.batch_se_pop_f[k] = across.standard_error();
    }
  }
  return stats;
}

EnsembleStats run_ensemble(const RunConfig& cfg) { return run_ensemble(resolve_model(cfg), cfg); }

std::string format_value(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void emit_csv(const EnsembleStats& stats, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (std::size_t k = 0; k < stats.rows(); ++k) {
    out << format_value(stats.t[k]);
    for (std::size_t c = 0; c < kColumnCount; ++c) out << ',' << format_value(stats.mean[c][k]);
    out << ',' << format_value(stats.se[idx(Column::pop_f)][k]);
    out << ',' << format_value(stats.se[idx(Column::pop_s)][k]);
    out << '\n';
  }
}

void emit_csv(const EnsembleStats& stats, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  emit_csv(stats, out);
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

EnsembleStats read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw Error("unexpected CSV header");
  EnsembleStats stats;
  for (auto& col : stats.mean) col.clear();
  for (auto& col : stats.se) col.clear();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell.empty() ? kNaN : std::stod(cell));
    if (!line.empty() && line.back() == ',') cells.push_back(kNaN);
    if (cells.size() != 11) throw Error("CSV row has " + std::to_string(cells.size()) + " cells, expected 11");
    stats.t.push_back(cells[0]);
    for (std::size_t c = 0; c < kColumnCount; ++c) {
      stats.mean[c].push_back(cells[1 + c]);
      stats.se[c].push_back(kNaN);
    }
    stats.se[idx(Column::pop_f)].back() = cells[9];
    stats.se[idx(Column::pop_s)].back() = cells[10];
    if (!std::isnan(cells[2])) stats.smoothed_rows = stats.t.size();
  }
  return stats;
}

EnsembleStats read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_csv(in);
}

}  // namespace qcsmooth

#pragma once

// Monte Carlo ensembles of filtered and fixed-lag smoothed trajectories.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qcsmooth/generators.hpp"

namespace qcsmooth {

struct RunConfig {
  /// "plain", "hybrid" or "custom:<path>".
  std::string model = "hybrid";
  double omega_over_gamma = 1.0;
  double eta = 0.8;
  /// Times are in units of 1/gamma.
  double t_total = 60.0;
  double dt = 0.05;
  double lag = 30.0;
  std::size_t n_traj = 5000;
  std::uint64_t master_seed = 20190101;
  std::filesystem::path outputs = ".";
  /// 0 selects the hardware concurrency.
  unsigned workers = 0;
  /// When > 0, also estimate the filtered-population SE from this many batch means.
  std::size_t batches = 0;

  void validate() const;
};

ModelSpec resolve_model(const RunConfig& cfg);

enum class Column : std::size_t { pop_f, pop_s, purq_f, purq_s, pd_f, pd_s, purc_f, purc_s };
inline constexpr std::size_t kColumnCount = 8;
std::string_view column_name(Column c);

struct EnsembleStats {
  std::vector<double> t;
  std::array<std::vector<double>, kColumnCount> mean;
  std::array<std::vector<double>, kColumnCount> se;
  /// Rows [0, smoothed_rows) carry smoothed values; later smoothed cells are NaN.
  std::size_t smoothed_rows = 0;
  std::size_t n_traj = 0;
  /// Batch-means SE of pop_f, filled when RunConfig::batches > 0.
  std::vector<double> batch_se_pop_f;

  const std::vector<double>& operator[](Column c) const { return mean[static_cast<std::size_t>(c)]; }
  const std::vector<double>& error(Column c) const { return se[static_cast<std::size_t>(c)]; }
  std::size_t rows() const { return t.size(); }
};

/// Runs cfg.n_traj trajectories of `model`. The model fields of cfg are ignored.
/// Output is bit-identical for any worker count under the same master seed.
EnsembleStats run_ensemble(const ModelSpec& model, const RunConfig& cfg);
EnsembleStats run_ensemble(const RunConfig& cfg);

inline constexpr std::string_view kCsvHeader =
    "t,pop_f,pop_s,purq_f,purq_s,pd_f,pd_s,purc_f,purc_s,se_pop_f,se_pop_s";

void emit_csv(const EnsembleStats& stats, std::ostream& out);
void emit_csv(const EnsembleStats& stats, const std::filesystem::path& path);
/// Parses the format written by emit_csv. Only the CSV columns are restored.
EnsembleStats read_csv(std::istream& in);
EnsembleStats read_csv(const std::filesystem::path& path);

/// "%.12g" with empty output for NaN.
std::string format_value(double v);

}  // namespace qcsmooth

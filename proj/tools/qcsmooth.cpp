// qcsmooth: filtering and smoothing of monitored hybrid quantum-classical systems.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qcsmooth/config.hpp"
#include "qcsmooth/ensemble.hpp"
#include "qcsmooth/errors.hpp"
#include "qcsmooth/fluorescence.hpp"
#include "qcsmooth/jump_engine.hpp"
#include "qcsmooth/smoother.hpp"
#include "qcsmooth/stats.hpp"
#include "qcsmooth/validation.hpp"

namespace fs = std::filesystem;
using namespace qcsmooth;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

struct Overrides {
  std::string config;
  std::optional<double> omega;
  std::optional<double> eta;
  std::optional<double> t_total;
  std::optional<double> dt;
  std::optional<double> lag;
  std::optional<std::size_t> n_traj;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> model;
  std::optional<unsigned> workers;

  RunConfig resolve() const {
    RunConfig cfg = config.empty() ? RunConfig{} : load_run_config(config);
    if (omega) cfg.omega_over_gamma = *omega;
    if (eta) cfg.eta = *eta;
    if (t_total) cfg.t_total = *t_total;
    if (dt) cfg.dt = *dt;
    if (lag) cfg.lag = *lag;
    if (n_traj) cfg.n_traj = *n_traj;
    if (seed) cfg.master_seed = *seed;
    if (out) cfg.outputs = *out;
    if (model) cfg.model = *model;
    if (workers) cfg.workers = *workers;
    return cfg;
  }
};

fs::path output_file(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.outputs);
  return cfg.outputs / name;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

std::optional<fluor::FluorParams> fluor_params(const RunConfig& cfg) {
  if (cfg.model != "hybrid" && cfg.model != "plain") return std::nullopt;
  return fluor::FluorParams{.omega = cfg.omega_over_gamma, .gamma = 1.0, .eta = cfg.eta};
}

int cmd_solve(const RunConfig& cfg) {
  const ModelGenerators g = build(resolve_model(cfg));
  EnsembleStats st;
  st.n_traj = 1;
  st.t = uniform_grid(cfg.t_total, cfg.dt);
  st.smoothed_rows = st.rows();
  const auto states = master_solve(g, g.initial, st.t);
  for (std::size_t c = 0; c < kColumnCount; ++c) {
    st.mean[c].resize(st.rows());
    st.se[c].assign(st.rows(), 0.0);
  }
  for (std::size_t k = 0; k < st.rows(); ++k) {
    const CMatrix q = reduce_quantum(states[k]);
    const ClassicalDist c = reduce_classical(states[k]);
    const std::array<double, 4> values = {q(0, 0).real(), purity(q), c.probs[0], c.purity()};
    for (std::size_t v = 0; v < values.size(); ++v) {
      st.mean[2 * v][k] = values[v];
      st.mean[2 * v + 1][k] = values[v];
    }
  }
  const fs::path path = output_file(cfg, "solve.csv");
  emit_csv(st, path);

  const CMatrix q = reduce_quantum(states.back());
  const ClassicalDist c = reduce_classical(states.back());
  std::printf("t = %.12g\n", st.t.back());
  std::printf("upper population = %.12g\n", q(0, 0).real());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    std::printf("rho[%td] =", i);
    for (Eigen::Index j = 0; j < q.cols(); ++j) std::printf("  %+.10f%+.10fi", q(i, j).real(), q(i, j).imag());
    std::printf("\n");
  }
  for (std::size_t r = 0; r < c.probs.size(); ++r) std::printf("P[%s] = %.12g\n", g.labels[r].c_str(), c.probs[r]);
  if (const auto p = fluor_params(cfg)) {
    const double err = (q - fluor::steady_state(*p)).cwiseAbs().maxCoeff();
    std::printf("max |rho - rho_inf| = %.3g\n", err);
  }
  std::printf("wrote %s\n", path.string().c_str());
  return kExitOk;
}

int cmd_trajectory(const RunConfig& cfg, std::uint64_t index) {
  const ModelSpec spec = resolve_model(cfg);
  spec.validate(true);
  const ModelGenerators g = build(spec);
  const GridPropagator prop(g, cfg.dt);
  grid_steps(cfg.lag, cfg.dt);
  Stream rng(cfg.master_seed, index);
  const FilteredPath path = simulate_trajectory(prop, g.initial, cfg.t_total, rng);
  const auto smoothed = smooth_path(prop, path, cfg.lag);

  const fs::path traj_path = output_file(cfg, "trajectory.csv");
  auto out = open_output(traj_path);
  out << "t,pop_f,pop_s,purq_f,purq_s,pd_f,pd_s,purc_f,purc_s\n";
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    const CMatrix q = reduce_quantum(path.states[k]);
    const ClassicalDist c = reduce_classical(path.states[k]);
    std::array<std::string, 4> s;
    if (k < smoothed.size()) {
      const auto& r = smoothed[k];
      s = {format_value(r.quantum_partial(0, 0).real()), format_value(r.quantum_purity),
           format_value(r.classical_partial.probs[0]), format_value(r.classical_purity)};
    }
    out << format_value(path.times[k]) << ',' << format_value(q(0, 0).real()) << ',' << s[0] << ','
        << format_value(purity(q)) << ',' << s[1] << ',' << format_value(c.probs[0]) << ',' << s[2] << ','
        << format_value(c.purity()) << ',' << s[3] << '\n';
  }

  const fs::path jumps_path = output_file(cfg, "jumps.csv");
  auto jumps = open_output(jumps_path);
  jumps << "index,t\n";
  const auto& times = path.trajectory.jump_times;
  for (std::size_t i = 0; i < times.size(); ++i) jumps << i << ',' << format_value(times[i]) << '\n';

  std::printf("trajectory %llu: %zu detections in [0, %.12g]\n", static_cast<unsigned long long>(index),
              times.size(), cfg.t_total);
  std::printf("wrote %s and %s\n", traj_path.string().c_str(), jumps_path.string().c_str());
  return kExitOk;
}

int cmd_ensemble(const RunConfig& cfg) {
  const ModelSpec spec = resolve_model(cfg);
  spec.validate(true);
  const EnsembleStats st = run_ensemble(spec, cfg);
  const fs::path path = output_file(cfg, "ensemble.csv");
  emit_csv(st, path);
  std::printf("%zu trajectories, %zu grid rows, %zu smoothed rows\n", st.n_traj, st.rows(), st.smoothed_rows);
  if (!st.batch_se_pop_f.empty()) {
    const std::size_t k = st.rows() - 1;
    std::printf("final pop_f SE: reported %.4g, batch means %.4g\n", st.error(Column::pop_f)[k],
                st.batch_se_pop_f[k]);
  }
  std::printf("wrote %s\n", path.string().c_str());
  return kExitOk;
}

int cmd_waiting_time(const RunConfig& cfg, std::size_t samples) {
  const auto p = fluor_params(cfg);
  if (!p) throw ConfigError("waiting-time needs --model plain or hybrid");
  p->validate();
  const fluor::WaitingTimeLaw law(*p);

  const fs::path path = output_file(cfg, "waiting_time.csv");
  auto out = open_output(path);
  out << "t,density,cdf\n";
  for (double t : uniform_grid(cfg.t_total, cfg.dt)) {
    out << format_value(t) << ',' << format_value(law.density(t)) << ',' << format_value(law.cdf(t)) << '\n';
  }

  const ModelSpec spec = resolve_model(cfg);
  spec.validate(true);
  const ModelGenerators g = build(spec);
  const HybridOperator reset = measurement_map(g, HybridOperator::identity(g.n_classical, g.dim));
  const fluor::ThinningSampler thinning(*p);
  std::vector<double> inversion;
  std::vector<double> thinned;
  inversion.reserve(samples);
  thinned.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    Stream a(cfg.master_seed, 2 * i);
    Stream b(cfg.master_seed, 2 * i + 1);
    const auto tau = sample_jump_time(g, reset, 1e6, a);
    if (!tau) throw Error("no detection within 1e6 / gamma");
    inversion.push_back(*tau);
    thinned.push_back(thinning(b));
  }
  const auto two = stats::ks_two_sample(inversion, thinned);
  const auto one = stats::ks_one_sample(inversion, [&](double t) { return law.cdf(t); });
  const double m = stats::mean(inversion);
  const double se = stats::standard_error(inversion);
  const double expected = fluor::mean_waiting_time(*p);
  const bool mean_ok = std::abs(m - expected) <= 3.0 * se;

  std::printf("samples per method: %zu%s\n", samples, law.degenerate() ? " (repeated roots)" : "");
  std::printf("%s two-sample KS inversion vs thinning: D = %.5f, p = %.4g\n", two.passes(0.01) ? "PASS" : "FAIL",
              two.statistic, two.p_value);
  std::printf("%s one-sample KS inversion vs density: D = %.5f, p = %.4g\n", one.passes(0.01) ? "PASS" : "FAIL",
              one.statistic, one.p_value);
  std::printf("%s mean waiting time %.5f +- %.5f, expected %.5f\n", mean_ok ? "PASS" : "FAIL", m, se, expected);
  std::printf("wrote %s\n", path.string().c_str());
  return two.passes(0.01) && one.passes(0.01) && mean_ok ? kExitOk : kExitFailed;
}

int cmd_validate(const RunConfig& cfg, bool full) {
  ValidationOptions opts;
  opts.full = full;
  opts.seed = cfg.master_seed;
  opts.workers = cfg.workers;
  std::size_t failed = 0;
  const auto results = run_property_suite(opts, [&](const CheckResult& r) {
    if (!r.passed) ++failed;
    std::printf("%s %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    std::fflush(stdout);
  });
  std::printf("%zu/%zu checks passed\n", results.size() - failed, results.size());
  return failed == 0 ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Filtering and smoothing of monitored hybrid quantum-classical systems"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides ov;
  app.add_option("--config", ov.config, "key = value run configuration file")->check(CLI::ExistingFile);
  app.add_option("--omega", ov.omega, "Rabi frequency in units of gamma");
  app.add_option("--eta", ov.eta, "detector efficiency");
  app.add_option("--t-total", ov.t_total, "record length in units of 1/gamma");
  app.add_option("--dt", ov.dt, "grid step in units of 1/gamma");
  app.add_option("--lag", ov.lag, "smoothing lag in units of 1/gamma");
  app.add_option("--n-traj", ov.n_traj, "number of trajectories");
  app.add_option("--seed", ov.seed, "master seed");
  app.add_option("--out", ov.out, "output directory");
  app.add_option("--model", ov.model, "plain | hybrid | custom:<path>");
  app.add_option("--workers", ov.workers, "worker threads (0 = hardware)");

  auto* solve = app.add_subcommand("solve", "deterministic master-equation curves");
  auto* trajectory = app.add_subcommand("trajectory", "one filtered and smoothed realization");
  std::uint64_t index = 0;
  trajectory->add_option("--index", index, "trajectory index under the master seed");
  auto* ensemble = app.add_subcommand("ensemble", "Monte Carlo ensemble statistics");
  std::size_t batches = 0;
  ensemble->add_option("--batches", batches, "batch count for a batch-means SE estimate");
  auto* waiting = app.add_subcommand("waiting-time", "waiting-time density table and KS report");
  std::size_t samples = 10000;
  waiting->add_option("--samples", samples, "samples per sampling method")->check(CLI::PositiveNumber);
  auto* validate = app.add_subcommand("validate", "run the property suite");
  bool full = false;
  validate->add_flag("--full", full, "include ensemble-scale checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    RunConfig cfg = ov.resolve();
    cfg.batches = batches;
    cfg.validate();
    if (solve->parsed()) return cmd_solve(cfg);
    if (trajectory->parsed()) return cmd_trajectory(cfg, index);
    if (ensemble->parsed()) return cmd_ensemble(cfg);
    if (waiting->parsed()) return cmd_waiting_time(cfg, samples);
    if (validate->parsed()) return cmd_validate(cfg, full);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidModel& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  return kExitUsage;
}

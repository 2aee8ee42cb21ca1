#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qcsmooth/config.hpp"
#include "qcsmooth/ensemble.hpp"
#include "qcsmooth/errors.hpp"
#include "qcsmooth/fluorescence.hpp"
#include "qcsmooth/jump_engine.hpp"
#include "qcsmooth/smoother.hpp"
#include "qcsmooth/validation.hpp"

namespace py = pybind11;
using namespace qcsmooth;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::dict columns(const EnsembleStats& st) {
  py::dict out;
  out["t"] = to_array(st.t);
  for (std::size_t c = 0; c < kColumnCount; ++c) {
    const std::string name(column_name(static_cast<Column>(c)));
    out[py::str(name)] = to_array(st.mean[c]);
    out[py::str("se_" + name)] = to_array(st.se[c]);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Filtering and smoothing of monitored hybrid quantum-classical systems";
  m.attr("__version__") = "0.1.0";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", error);
  py::register_exception<NonFiniteValue>(m, "NonFiniteValue", error);
  py::register_exception<InvalidModel>(m, "InvalidModel", error);
  py::register_exception<NullJump>(m, "NullJump", error);
  py::register_exception<Extinct>(m, "Extinct", error);
  py::register_exception<InfeasibleFuture>(m, "InfeasibleFuture", error);
  py::register_exception<InconsistentWeight>(m, "InconsistentWeight", error);
  py::register_exception<ConfigError>(m, "ConfigError", error);

  py::class_<HybridOperator>(m, "HybridOperator")
      .def(py::init<int, int>(), py::arg("n_classical"), py::arg("dim"))
      .def(py::init<std::vector<CMatrix>>(), py::arg("blocks"))
      .def_static("identity", &HybridOperator::identity)
      .def_property_readonly("n_classical", &HybridOperator::n_classical)
      .def_property_readonly("dim", &HybridOperator::dim)
      .def_property_readonly("blocks", &HybridOperator::blocks)
      .def("block", py::overload_cast<int>(&HybridOperator::block, py::const_))
      .def("total_trace", &HybridOperator::total_trace)
      .def("is_state", &HybridOperator::is_state, py::arg("tol_herm") = 1e-10, py::arg("tol_psd") = 1e-10,
           py::arg("tol_trace") = 1e-9)
      .def("max_abs", &HybridOperator::max_abs)
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def("__repr__", [](const HybridOperator& h) {
        return "<HybridOperator n_classical=" + std::to_string(h.n_classical()) + " dim=" + std::to_string(h.dim()) +
               ">";
      });

  py::class_<HybridSuperop>(m, "HybridSuperop")
      .def(py::init<int, int, CMatrix>(), py::arg("n_classical"), py::arg("dim"), py::arg("matrix"))
      .def_static("identity", &HybridSuperop::identity)
      .def_property_readonly("n_classical", &HybridSuperop::n_classical)
      .def_property_readonly("dim", &HybridSuperop::dim)
      .def_property_readonly("matrix", &HybridSuperop::matrix)
      .def("__matmul__", [](const HybridSuperop& a, const HybridSuperop& b) { return a * b; });

  m.def("vectorize", &vectorize);
  m.def("devectorize", &devectorize, py::arg("v"), py::arg("n_classical"), py::arg("dim"));
  m.def("apply", &apply);
  m.def("expm", &expm, py::arg("s"), py::arg("t"));
  m.def("hs_pairing", &hs_pairing);
  m.def("dual", &dual);
  m.def("hermitize", &hermitize);
  m.def("purity", &purity);

  py::class_<JumpTerm>(m, "JumpTerm")
      .def(py::init([](int source, int target, CMatrix op, double rate, bool observed) {
             return JumpTerm{source, target, std::move(op), rate, observed};
           }),
           py::arg("source"), py::arg("target"), py::arg("op"), py::arg("rate"), py::arg("observed"))
      .def_readwrite("source", &JumpTerm::source)
      .def_readwrite("target", &JumpTerm::target)
      .def_readwrite("op", &JumpTerm::op)
      .def_readwrite("rate", &JumpTerm::rate)
      .def_readwrite("observed", &JumpTerm::observed);

  py::class_<ModelSpec>(m, "ModelSpec")
      .def(py::init<>())
      .def_readwrite("n_classical", &ModelSpec::n_classical)
      .def_readwrite("dim", &ModelSpec::dim)
      .def_readwrite("labels", &ModelSpec::labels)
      .def_readwrite("hamiltonians", &ModelSpec::hamiltonians)
      .def_readwrite("jumps", &ModelSpec::jumps)
      .def_readwrite("initial", &ModelSpec::initial)
      .def("validate", &ModelSpec::validate, py::arg("require_observed") = false);

  py::class_<ModelGenerators>(m, "ModelGenerators")
      .def_readonly("L", &ModelGenerators::L)
      .def_readonly("D", &ModelGenerators::D)
      .def_readonly("J", &ModelGenerators::J)
      .def_readonly("n_classical", &ModelGenerators::n_classical)
      .def_readonly("dim", &ModelGenerators::dim)
      .def_readonly("labels", &ModelGenerators::labels)
      .def_readonly("initial", &ModelGenerators::initial);

  m.def("build", &build);
  m.def("load_model_file", &load_model_file);
  m.def("measurement_map", &measurement_map);
  m.def("conditional_propagate",
        py::overload_cast<const ModelGenerators&, const HybridOperator&, double>(&conditional_propagate));
  m.def("master_solve", &master_solve, py::arg("g"), py::arg("rho0"), py::arg("times"));
  m.def("reduce_quantum", &reduce_quantum);
  m.def("reduce_classical", [](const HybridOperator& h) { return reduce_classical(h).probs; });
  m.def("uniform_grid", &uniform_grid);

  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init([](double window_end, std::vector<double> jump_times) {
             Trajectory t{window_end, std::move(jump_times)};
             t.validate();
             return t;
           }),
           py::arg("window_end"), py::arg("jump_times"))
      .def_readonly("window_end", &Trajectory::window_end)
      .def_readonly("jump_times", &Trajectory::jump_times);

  py::class_<FilteredPath>(m, "FilteredPath")
      .def_readonly("dt", &FilteredPath::dt)
      .def_readonly("times", &FilteredPath::times)
      .def_readonly("states", &FilteredPath::states)
      .def_readonly("trajectory", &FilteredPath::trajectory);

  py::class_<SmoothedRecord>(m, "SmoothedRecord")
      .def_readonly("t", &SmoothedRecord::t)
      .def_property_readonly("classical_dist", [](const SmoothedRecord& r) { return r.classical_dist.probs; })
      .def_readonly("smoothed_state", &SmoothedRecord::smoothed_state)
      .def_readonly("quantum_partial", &SmoothedRecord::quantum_partial)
      .def_property_readonly("classical_partial", [](const SmoothedRecord& r) { return r.classical_partial.probs; })
      .def_readonly("quantum_purity", &SmoothedRecord::quantum_purity)
      .def_readonly("classical_purity", &SmoothedRecord::classical_purity);

  m.def("survival", &survival);
  m.def(
      "sample_jump_time",
      [](const ModelGenerators& g, const HybridOperator& rho, double t_max, std::uint64_t seed, std::uint64_t index) {
        Stream rng(seed, index);
        return sample_jump_time(g, rho, t_max, rng);
      },
      py::arg("g"), py::arg("rho"), py::arg("t_max"), py::arg("seed"), py::arg("index") = 0);
  m.def(
      "sample_trajectory",
      [](const ModelGenerators& g, const HybridOperator& rho0, double t_total, std::uint64_t seed,
         std::uint64_t index) {
        Stream rng(seed, index);
        return sample_trajectory(g, rho0, t_total, rng);
      },
      py::arg("g"), py::arg("rho0"), py::arg("t_total"), py::arg("seed"), py::arg("index") = 0);
  m.def("filter_trajectory",
        py::overload_cast<const ModelGenerators&, const HybridOperator&, const Trajectory&, double>(&filter_trajectory),
        py::arg("g"), py::arg("rho0"), py::arg("trajectory"), py::arg("dt"));
  m.def("trajectory_log_weight", &trajectory_log_weight);
  m.def("effect_backward", [](const ModelGenerators& g, const Trajectory& traj, double t_start, double t_end,
                              double dt) { return effect_backward(g, traj, t_start, t_end, dt).effects; });
  m.def("smoothed_classical",
        [](const HybridOperator& f, const HybridOperator& e) { return smoothed_classical(f, e).probs; });
  m.def("smoothed_state", [](const HybridOperator& f, std::vector<double> p) {
    return smoothed_state(f, ClassicalDist{std::move(p)});
  });
  m.def("smooth_path", py::overload_cast<const ModelGenerators&, const FilteredPath&, double>(&smooth_path),
        py::arg("g"), py::arg("path"), py::arg("lag"));

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("model", &RunConfig::model)
      .def_readwrite("omega_over_gamma", &RunConfig::omega_over_gamma)
      .def_readwrite("eta", &RunConfig::eta)
      .def_readwrite("t_total", &RunConfig::t_total)
      .def_readwrite("dt", &RunConfig::dt)
      .def_readwrite("lag", &RunConfig::lag)
      .def_readwrite("n_traj", &RunConfig::n_traj)
      .def_readwrite("master_seed", &RunConfig::master_seed)
      .def_readwrite("outputs", &RunConfig::outputs)
      .def_readwrite("workers", &RunConfig::workers)
      .def_readwrite("batches", &RunConfig::batches)
      .def("validate", &RunConfig::validate);
  m.def("load_run_config", &load_run_config);

  py::class_<EnsembleStats>(m, "EnsembleStats")
      .def_readonly("smoothed_rows", &EnsembleStats::smoothed_rows)
      .def_readonly("n_traj", &EnsembleStats::n_traj)
      .def_property_readonly("columns", &columns)
      .def("__len__", &EnsembleStats::rows);
  m.def(
      "run_ensemble",
      [](const RunConfig& cfg, std::optional<ModelSpec> model) {
        py::gil_scoped_release release;
        return model ? run_ensemble(*model, cfg) : run_ensemble(cfg);
      },
      py::arg("cfg"), py::arg("model") = py::none());
  m.def("emit_csv", py::overload_cast<const EnsembleStats&, const std::filesystem::path&>(&emit_csv));
  m.def("read_csv", py::overload_cast<const std::filesystem::path&>(&read_csv));

  m.def(
      "run_property_suite",
      [](bool full, std::uint64_t seed) {
        std::vector<CheckResult> results;
        {
          py::gil_scoped_release release;
          results = run_property_suite({.full = full, .seed = seed, .workers = 0});
        }
        py::list out;
        for (const auto& r : results) out.append(py::make_tuple(r.name, r.passed, r.detail));
        return out;
      },
      py::arg("full") = false, py::arg("seed") = 20190101);

  auto f = m.def_submodule("fluor", "Resonance fluorescence with an inefficient detector");
  py::class_<fluor::FluorParams>(f, "FluorParams")
      .def(py::init([](double omega, double gamma, double eta) {
             fluor::FluorParams p{omega, gamma, eta};
             p.validate();
             return p;
           }),
           py::arg("omega") = 1.0, py::arg("gamma") = 1.0, py::arg("eta") = 0.8)
      .def_readwrite("omega", &fluor::FluorParams::omega)
      .def_readwrite("gamma", &fluor::FluorParams::gamma)
      .def_readwrite("eta", &fluor::FluorParams::eta);
  f.def("build_plain", &fluor::build_plain);
  f.def("build_hybrid", &fluor::build_hybrid);
  f.def("steady_state", &fluor::steady_state);
  f.def("steady_upper_population", &fluor::steady_upper_population);
  f.def("waiting_laplace", &fluor::waiting_laplace);
  f.def("mean_waiting_time", &fluor::mean_waiting_time);
  f.def("waiting_density", &fluor::waiting_density);
  py::class_<fluor::WaitingTimeLaw>(f, "WaitingTimeLaw")
      .def(py::init<const fluor::FluorParams&>())
      .def("density", py::vectorize(&fluor::WaitingTimeLaw::density))
      .def("cdf", py::vectorize(&fluor::WaitingTimeLaw::cdf))
      .def("quantile", &fluor::WaitingTimeLaw::quantile)
      .def_property_readonly("degenerate", &fluor::WaitingTimeLaw::degenerate)
      .def_property_readonly("roots", &fluor::WaitingTimeLaw::roots);
  f.def(
      "thinning_samples",
      [](const fluor::FluorParams& p, std::size_t n, std::uint64_t seed) {
        const fluor::ThinningSampler sampler(p);
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
          Stream rng(seed, i);
          out[i] = sampler(rng);
        }
        return to_array(out);
      },
      py::arg("p"), py::arg("n"), py::arg("seed") = 20190101);
}

// Python bindings. Batches are numpy arrays with one sample per row.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "peerlab/agents.hpp"
#include "peerlab/config.hpp"
#include "peerlab/envs.hpp"
#include "peerlab/errors.hpp"
#include "peerlab/experiment.hpp"
#include "peerlab/metrics.hpp"
#include "peerlab/peer_core.hpp"
#include "peerlab/plot.hpp"
#include "peerlab/tensor_nn.hpp"

namespace py = pybind11;
using namespace peerlab;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace {

nn::Matrix columns(const RowMatrix& rows) { return rows.transpose(); }
RowMatrix rows(const nn::Matrix& cols) { return cols.transpose(); }

py::dict drd_dict(const metrics::DrdReport& r) {
  py::dict d;
  d["mean_similarity"] = r.mean_similarity;
  d["mean_bound"] = r.mean_bound;
  d["mean_drd"] = r.mean_drd;
  d["batch_size"] = r.batch_size;
  d["degenerate_rows"] = r.degenerate_rows;
  d["satisfied"] = r.satisfied();
  return d;
}

py::dict step_dict(const envs::StepResult& s) {
  py::dict d;
  d["observation"] = s.observation;
  d["reward"] = s.reward;
  d["done"] = s.done;
  d["terminal"] = s.terminal;
  return d;
}

py::dict summary_dict(const harness::ExperimentSummary& s) {
  py::list seeds;
  for (const auto& r : s.seeds) {
    py::dict d;
    d["seed"] = r.seed;
    d["csv_path"] = r.csv_path;
    d["evaluations"] = r.evaluations;
    d["final_score"] = r.final_score;
    d["failed"] = r.failed;
    d["failure"] = r.failure;
    seeds.append(d);
  }
  py::dict out;
  out["seeds"] = seeds;
  out["mean"] = s.mean;
  out["std"] = s.std;
  out["summary_path"] = s.summary_path;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "PEER value-representation regularizer lab";

  auto base = py::register_exception<Error>(m, "PeerlabError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ProtocolError>(m, "ProtocolError", base.ptr());
  py::register_exception<DegenerateNetworkError>(m, "DegenerateNetworkError", base.ptr());

  // losses
  m.def("peer_loss", [](const RowMatrix& phi, const RowMatrix& target) {
    return peer::peer_loss(columns(phi), columns(target));
  }, py::arg("phi"), py::arg("target_phi"));
  m.def("peer_loss_grad", [](const RowMatrix& phi, const RowMatrix& target) {
    return rows(peer::peer_loss_grad(columns(phi), columns(target)));
  }, py::arg("phi"), py::arg("target_phi"));
  m.def("pe_loss", &peer::pe_loss, py::arg("q"), py::arg("targets"));
  m.def("combined_loss", &peer::combined_loss, py::arg("pe"), py::arg("peer"), py::arg("beta"));
  m.def("td_target_dqn", &peer::td_target_dqn, py::arg("reward"), py::arg("done"), py::arg("gamma"),
        py::arg("q_next_target"));
  m.def("td_target_td3", &peer::td_target_td3, py::arg("reward"), py::arg("done"), py::arg("gamma"),
        py::arg("q1_next"), py::arg("q2_next"));

  // metrics
  m.def("l2_normalize", [](const nn::Vector& v) {
    const auto n = metrics::l2_normalize(v);
    return py::make_tuple(n.value, n.degenerate);
  }, py::arg("v"), "Returns (unit vector, degenerate flag).");
  m.def("cosine_similarity", [](const nn::Vector& u, const nn::Vector& v) {
    return metrics::cosine_similarity(u, v).value;
  }, py::arg("u"), py::arg("v"));
  m.def("theorem1_bound", &metrics::theorem1_bound, py::arg("reward"), py::arg("gamma"), py::arg("last_layer_norm"));
  m.def("drd_batch", [](const RowMatrix& phi, const RowMatrix& target, const nn::Vector& rewards, double gamma,
                        double norm) {
    return drd_dict(metrics::drd_batch(columns(phi), columns(target), rewards, gamma, norm));
  }, py::arg("phi"), py::arg("target_phi_next"), py::arg("rewards"), py::arg("gamma"), py::arg("last_layer_norm"));
  m.def("q_gap", &metrics::q_gap, py::arg("q_s1"), py::arg("q_s2"));

  // networks
  py::class_<nn::MlpParams>(m, "Mlp")
      .def(py::init([](const std::vector<int>& sizes, std::uint64_t seed, bool final_bias) {
             return nn::init_mlp(sizes, seed, final_bias);
           }),
           py::arg("sizes"), py::arg("seed") = 0, py::arg("final_bias") = false)
      .def("forward", [](const nn::MlpParams& p, const nn::Vector& x) {
        const auto r = nn::forward(p, x);
        return py::make_tuple(r.representation, r.output);
      }, py::arg("x"), "Returns (representation, output).")
      .def("last_layer_norm", &nn::last_layer_norm)
      .def("flatten", [](const nn::MlpParams& p) { return nn::flatten(p); })
      .def("unflatten", [](nn::MlpParams& p, const std::vector<double>& v) { nn::unflatten(v, p); }, py::arg("values"))
      .def_property_readonly("num_layers", [](const nn::MlpParams& p) { return p.layers.size(); })
      .def("weights", [](const nn::MlpParams& p, std::size_t k) { return p.layers.at(k).weights; }, py::arg("layer"))
      .def("copy", [](const nn::MlpParams& p) { return p; });
  m.def("soft_update", [](const nn::MlpParams& online, nn::MlpParams& target, double eta) {
    agents::soft_update(online, target, eta);
  }, py::arg("online"), py::arg("target"), py::arg("eta"), "Mixes target in place.");

  // environments
  py::class_<envs::GridWorld>(m, "GridWorld")
      .def(py::init<>())
      .def("reset", &envs::GridWorld::reset)
      .def("step", [](envs::GridWorld& e, int a) { return step_dict(e.step(a)); }, py::arg("action"))
      .def("set_state", &envs::GridWorld::set_state, py::arg("cell"))
      .def_property_readonly("state", &envs::GridWorld::state)
      .def_property_readonly("step_count", &envs::GridWorld::step_count);
  py::class_<envs::Pendulum>(m, "Pendulum")
      .def(py::init<>())
      .def("reset", [](envs::Pendulum& e, std::uint64_t seed) {
        Rng rng(seed);
        return e.reset(rng);
      }, py::arg("seed"))
      .def("step", [](envs::Pendulum& e, double u) { return step_dict(e.step(u)); }, py::arg("torque"))
      .def("set_state", &envs::Pendulum::set_state, py::arg("theta"), py::arg("theta_dot"))
      .def_property_readonly("theta", &envs::Pendulum::theta)
      .def_property_readonly("theta_dot", &envs::Pendulum::theta_dot);

  // harness
  m.def("parse_config", [](const std::string& text, const std::vector<std::string>& overrides) {
    return harness::to_config_text(harness::parse_config_text(text, overrides));
  }, py::arg("text"), py::arg("overrides") = std::vector<std::string>{},
     "Validates config text and returns it in canonical form.");
  m.def("run_experiment", [](const std::string& text, const std::vector<std::string>& overrides) {
    const auto config = harness::parse_config_text(text, overrides);
    harness::ExperimentSummary summary;
    {
      py::gil_scoped_release release;
      summary = harness::run_experiment(config);
    }
    return summary_dict(summary);
  }, py::arg("config_text"), py::arg("overrides") = std::vector<std::string>{});
  m.def("plot", [](const std::vector<std::filesystem::path>& csvs, const std::string& column,
                   const std::filesystem::path& out, int window, double band) {
    harness::PlotOptions options;
    options.column = column;
    options.window = window;
    options.band_scale = band;
    harness::plot(csvs, out, options);
  }, py::arg("csvs"), py::arg("column"), py::arg("out"), py::arg("window") = 10, py::arg("band") = 1.0);
}

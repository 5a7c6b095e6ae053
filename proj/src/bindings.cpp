#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pbrl/estimation.hpp"
#include "pbrl/harness.hpp"
#include "pbrl/known_model.hpp"
#include "pbrl/preference.hpp"
#include "pbrl/unknown_model.hpp"

namespace py = pybind11;

namespace {

pbrl::Mdp make_mdp(int num_states, int num_actions, int horizon, Eigen::VectorXd initial_dist,
                   std::vector<Eigen::VectorXd> transition) {
  pbrl::Mdp mdp{num_states, num_actions, horizon, std::move(initial_dist), std::move(transition)};
  pbrl::validate_mdp(mdp);
  return mdp;
}

pbrl::DuelDataset make_dataset(const std::vector<Eigen::VectorXd>& zs,
                               const std::vector<int>& outcomes) {
  if (zs.empty()) throw std::invalid_argument("dataset: need at least one record to infer dim");
  pbrl::DuelDataset data(static_cast<int>(zs.front().size()));
  for (std::size_t i = 0; i < zs.size(); ++i) data.append(zs[i], outcomes[i]);
  return data;
}

}  // namespace

PYBIND11_MODULE(pbrl, m) {
  m.doc() = "Preference-based dueling RL: core operations and the experiment harness";

  m.def("sigmoid", &pbrl::sigmoid, py::arg("x"));
  m.def("kappa", &pbrl::kappa, py::arg("feature_bound"), py::arg("param_bound"));
  m.def("confidence_radius", &pbrl::confidence_radius, py::arg("t"), py::arg("delta"),
        py::arg("lambda_"), py::arg("param_bound"), py::arg("feature_bound"), py::arg("dim"),
        py::arg("kappa"));
  m.def("expected_feature_margin", &pbrl::expected_feature_margin, py::arg("dim"),
        py::arg("rounds"), py::arg("delta"), py::arg("feature_bound"), py::arg("param_bound"));
  m.def("visit_bonus", &pbrl::visit_bonus, py::arg("n"), py::arg("eta"), py::arg("log_inv_delta"),
        py::arg("horizon"), py::arg("num_states"), py::arg("num_actions"));
  m.def("uniform_visit_bonus", &pbrl::uniform_visit_bonus, py::arg("n"), py::arg("eps"),
        py::arg("eta"), py::arg("log_inv_delta"), py::arg("horizon"), py::arg("num_states"),
        py::arg("num_actions"));

  py::class_<pbrl::Mdp>(m, "Mdp")
      .def(py::init(&make_mdp), py::arg("num_states"), py::arg("num_actions"), py::arg("horizon"),
           py::arg("initial_dist"), py::arg("transitions"))
      .def_readonly("num_states", &pbrl::Mdp::num_states)
      .def_readonly("num_actions", &pbrl::Mdp::num_actions)
      .def_readonly("horizon", &pbrl::Mdp::horizon);

  py::class_<pbrl::Policy>(m, "Policy")
      .def_static("markov", &pbrl::make_markov_policy, py::arg("rule"));

  py::class_<pbrl::Trajectory>(m, "Trajectory")
      .def_readonly("steps", &pbrl::Trajectory::steps);

  py::class_<pbrl::Rng>(m, "Rng").def(py::init<std::uint64_t>(), py::arg("seed"));

  m.def("sample_trajectory", &pbrl::sample_trajectory, py::arg("mdp"), py::arg("policy"),
        py::arg("rng"));
  m.def(
      "occupancy_measures",
      [](const pbrl::Mdp& mdp, const pbrl::Policy& policy) {
        return pbrl::occupancy_measures(mdp, policy);
      },
      py::arg("mdp"), py::arg("policy"));

  m.def(
      "mle_fit",
      [](const std::vector<Eigen::VectorXd>& zs, const std::vector<int>& outcomes, double lambda) {
        return pbrl::mle_fit(make_dataset(zs, outcomes), lambda);
      },
      py::arg("zs"), py::arg("outcomes"), py::arg("lambda_"));
  m.def(
      "log_likelihood",
      [](const Eigen::VectorXd& w, const std::vector<Eigen::VectorXd>& zs,
         const std::vector<int>& outcomes, double lambda) {
        return pbrl::log_likelihood(w, make_dataset(zs, outcomes), lambda);
      },
      py::arg("w"), py::arg("zs"), py::arg("outcomes"), py::arg("lambda_"));

  m.def(
      "run_experiment_json",
      [](const std::string& config_text) {
        const pbrl::ExperimentConfig cfg = pbrl::ExperimentConfig::from_json_text(config_text);
        const pbrl::ExperimentResult result = pbrl::run_experiment(cfg);
        return pbrl::summary_to_json(cfg, result);
      },
      py::arg("config_text"), "Run a full experiment from a JSON config; returns the summary JSON");
  m.def(
      "check_instance_json",
      [](const std::string& config_text) {
        const pbrl::ExperimentConfig cfg = pbrl::ExperimentConfig::from_json_text(config_text);
        const pbrl::CheckReport report = pbrl::check_instance(cfg);
        std::vector<std::pair<std::string, bool>> entries = report.entries;
        return entries;
      },
      py::arg("config_text"), "Run the instance invariant suite; returns (name, ok) pairs");
}

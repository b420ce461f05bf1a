#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cts/bench.hpp"
#include "cts/core.hpp"
#include "cts/gmm.hpp"
#include "cts/kdtree.hpp"
#include "cts/teachers.hpp"
#include "cts/toyenv.hpp"

namespace py = pybind11;

PYBIND11_MODULE(ctsteach, m) {
  m.doc() = "curriculum teachers, toy student space and benchmark harness";

  py::register_exception<cts::ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<cts::FitError>(m, "FitError", PyExc_RuntimeError);

  // ---- core ----
  py::class_<cts::ParameterSpace>(m, "ParameterSpace")
      .def(py::init<cts::Vec, cts::Vec>(), py::arg("lower"), py::arg("upper"))
      .def_static("unit", &cts::ParameterSpace::unit, py::arg("dims"))
      .def_readonly("lower", &cts::ParameterSpace::lower)
      .def_readonly("upper", &cts::ParameterSpace::upper)
      .def_property_readonly("dims", &cts::ParameterSpace::dims)
      .def("contains",
           [](const cts::ParameterSpace& s, const cts::Vec& p) { return s.contains(p); },
           py::arg("p"));

  m.def("normalize",
        [](const cts::Vec& p, const cts::ParameterSpace& s) { return cts::normalize(p, s); },
        py::arg("p"), py::arg("space"));
  m.def("denormalize",
        [](const cts::Vec& u, const cts::ParameterSpace& s) { return cts::denormalize(u, s); },
        py::arg("u"), py::arg("space"));
  m.def("clip_to_space",
        [](const cts::Vec& p, const cts::ParameterSpace& s) { return cts::clip_to_space(p, s); },
        py::arg("p"), py::arg("space"));

  py::class_<cts::History>(m, "History")
      .def_property_readonly("size", &cts::History::size)
      .def_property_readonly("dims", &cts::History::dims)
      .def("param",
           [](const cts::History& h, std::size_t i) {
             const auto p = h.param(i);
             return cts::Vec(p.begin(), p.end());
           },
           py::arg("episode"))
      .def("reward", &cts::History::reward, py::arg("episode"));

  // ---- teachers ----
  py::class_<cts::EmConfig>(m, "EmConfig")
      .def(py::init<>())
      .def_readwrite("max_iters", &cts::EmConfig::max_iters)
      .def_readwrite("rel_tol", &cts::EmConfig::rel_tol)
      .def_readwrite("cov_floor", &cts::EmConfig::cov_floor)
      .def_readwrite("n_init", &cts::EmConfig::n_init);

  py::class_<cts::GmmTeacherConfig>(m, "GmmTeacherConfig")
      .def(py::init<>())
      .def_readwrite("fit_rate", &cts::GmmTeacherConfig::fit_rate)
      .def_readwrite("k_max", &cts::GmmTeacherConfig::k_max)
      .def_readwrite("p_rnd", &cts::GmmTeacherConfig::p_rnd)
      .def_readwrite("em", &cts::GmmTeacherConfig::em);

  py::class_<cts::RiacConfig>(m, "RiacConfig")
      .def(py::init<>())
      .def_readwrite("max_region_size", &cts::RiacConfig::max_region_size)
      .def_readwrite("n_candidates", &cts::RiacConfig::n_candidates)
      .def_readwrite("min_region_size", &cts::RiacConfig::min_region_size)
      .def_readwrite("min_extent_ratio", &cts::RiacConfig::min_extent_ratio)
      .def_readwrite("mutation_sigma", &cts::RiacConfig::mutation_sigma)
      .def_readwrite("mix_random", &cts::RiacConfig::mix_random)
      .def_readwrite("mix_alp", &cts::RiacConfig::mix_alp)
      .def_readwrite("mix_mutate", &cts::RiacConfig::mix_mutate);

  py::class_<cts::OracleConfig>(m, "OracleConfig")
      .def(py::init<>())
      .def_readwrite("window_ratio", &cts::OracleConfig::window_ratio)
      .def_readwrite("step_ratio", &cts::OracleConfig::step_ratio)
      .def_readwrite("reward_threshold", &cts::OracleConfig::reward_threshold)
      .def_readwrite("memory_size", &cts::OracleConfig::memory_size)
      .def_readwrite("direction", &cts::OracleConfig::direction)
      .def_readwrite("start", &cts::OracleConfig::start);

  py::class_<cts::TeacherParams>(m, "TeacherParams")
      .def(py::init<>())
      .def_readwrite("gmm", &cts::TeacherParams::gmm)
      .def_readwrite("riac", &cts::TeacherParams::riac)
      .def_readwrite("oracle", &cts::TeacherParams::oracle);

  py::class_<cts::Teacher>(m, "Teacher")
      .def("propose", &cts::Teacher::propose)
      .def("observe",
           [](cts::Teacher& t, const cts::Vec& p, double reward) { t.observe(p, reward); },
           py::arg("p"), py::arg("reward"))
      .def_property_readonly("space", &cts::Teacher::space,
                             py::return_value_policy::reference_internal)
      .def_property_readonly("history", &cts::Teacher::history,
                             py::return_value_policy::reference_internal);

  m.def("teacher_names", [] {
    return std::vector<std::string>{"alp-gmm", "covar-gmm", "riac", "oracle", "random"};
  });
  m.def("make_teacher",
        [](const std::string& name, const cts::ParameterSpace& space,
           std::uint64_t seed, const cts::TeacherParams& params) {
          return cts::make_teacher(cts::teacher_kind_from_string(name), space, params, seed);
        },
        py::arg("name"), py::arg("space"), py::arg("seed") = 1,
        py::arg("params") = cts::TeacherParams{});

  // ---- mixture fitting ----
  py::class_<cts::GaussianComponent>(m, "GaussianComponent")
      .def_readonly("weight", &cts::GaussianComponent::weight)
      .def_readonly("mean", &cts::GaussianComponent::mean)
      .def_readonly("covariance", &cts::GaussianComponent::covariance);

  py::class_<cts::GmmModel>(m, "GmmModel")
      .def_readonly("components", &cts::GmmModel::components)
      .def_readonly("log_likelihood", &cts::GmmModel::log_likelihood)
      .def_readonly("ll_trace", &cts::GmmModel::ll_trace)
      .def_readonly("n_points", &cts::GmmModel::n_points)
      .def_readonly("fit_dim", &cts::GmmModel::fit_dim)
      .def_property_readonly("k", &cts::GmmModel::k);

  m.def("em_fit",
        [](const Eigen::MatrixXd& data, int k, const cts::EmConfig& cfg, std::uint64_t seed) {
          cts::Rng rng(seed);
          return cts::em_fit(data, k, cfg, rng);
        },
        py::arg("data"), py::arg("k"), py::arg("config") = cts::EmConfig{},
        py::arg("seed") = 1);
  m.def("select_best_gmm",
        [](const Eigen::MatrixXd& data, int k_min, int k_max, const cts::EmConfig& cfg,
           std::uint64_t seed) {
          cts::Rng rng(seed);
          return cts::select_best_gmm(data, k_min, k_max, cfg, rng);
        },
        py::arg("data"), py::arg("k_min") = 2, py::arg("k_max") = 10,
        py::arg("config") = cts::EmConfig{}, py::arg("seed") = 1);
  m.def("aic", &cts::aic, py::arg("model"));

  // ---- toy student space ----
  py::class_<cts::ToySpaceConfig>(m, "ToySpaceConfig")
      .def(py::init<>())
      .def_readwrite("relevant_dims", &cts::ToySpaceConfig::relevant_dims)
      .def_readwrite("irrelevant_dims", &cts::ToySpaceConfig::irrelevant_dims)
      .def_readwrite("cubes_per_dim", &cts::ToySpaceConfig::cubes_per_dim)
      .def_readwrite("unlock_count", &cts::ToySpaceConfig::unlock_count)
      .def_readwrite("reward_cap", &cts::ToySpaceConfig::reward_cap)
      .def_property_readonly("dims", &cts::ToySpaceConfig::dims);

  py::class_<cts::ToySpace>(m, "ToySpace")
      .def(py::init<cts::ToySpaceConfig>(), py::arg("config"))
      .def_property_readonly("space", &cts::ToySpace::space,
                             py::return_value_policy::reference_internal)
      .def("cube_index",
           [](const cts::ToySpace& t, const cts::Vec& p) { return t.cube_index(p); },
           py::arg("p"))
      .def("episode",
           [](cts::ToySpace& t, const cts::Vec& p) { return t.episode(p); },
           py::arg("p"))
      .def_property_readonly("total_cubes", &cts::ToySpace::total_cubes)
      .def_property_readonly("unlocked_count", &cts::ToySpace::unlocked_count)
      .def_property_readonly("unlocked_fraction", &cts::ToySpace::unlocked_fraction);

  // ---- benchmark harness ----
  py::class_<cts::ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_property(
          "teacher",
          [](const cts::ExperimentConfig& c) { return cts::to_string(c.teacher); },
          [](cts::ExperimentConfig& c, const std::string& name) {
            c.teacher = cts::teacher_kind_from_string(name);
          })
      .def_readwrite("env", &cts::ExperimentConfig::env)
      .def_readwrite("budget", &cts::ExperimentConfig::budget)
      .def_readwrite("repeats", &cts::ExperimentConfig::repeats)
      .def_readwrite("eval_every", &cts::ExperimentConfig::eval_every)
      .def_readwrite("base_seed", &cts::ExperimentConfig::base_seed)
      .def_readwrite("eval_at_zero", &cts::ExperimentConfig::eval_at_zero)
      .def_readwrite("params", &cts::ExperimentConfig::params);

  py::class_<cts::MetricRow>(m, "MetricRow")
      .def_readonly("run_id", &cts::MetricRow::run_id)
      .def_readonly("episode", &cts::MetricRow::episode)
      .def_readonly("unlocked", &cts::MetricRow::unlocked)
      .def_readonly("cumulative_reward", &cts::MetricRow::cumulative_reward);

  py::class_<cts::CampaignResult>(m, "CampaignResult")
      .def_readonly("runs", &cts::CampaignResult::runs)
      .def_readonly("median_curve", &cts::CampaignResult::median_curve)
      .def_readonly("final_median", &cts::CampaignResult::final_median);

  m.def("run_single", &cts::run_single, py::arg("config"), py::arg("seed"),
        py::arg("run_id") = 0);
  m.def("run_campaign", &cts::run_campaign, py::arg("config"));
  m.def("median", &cts::median, py::arg("values"));
  m.def("format_double", &cts::format_double, py::arg("x"));
  m.def("csv_string", [](const std::vector<std::vector<cts::MetricRow>>& runs) {
    std::ostringstream out;
    cts::write_csv(out, runs);
    return out.str();
  });
  m.def("write_csv_file", &cts::write_csv_file, py::arg("path"), py::arg("runs"));
  m.def("parse_config_text", &cts::parse_config_text, py::arg("text"),
        py::arg("source_name") = "<string>");
  m.def("load_config_file", &cts::load_config_file, py::arg("path"));
  m.def("presets", [] {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& p : cts::presets()) out.emplace_back(p.name, p.summary, p.text);
    return out;
  });
}

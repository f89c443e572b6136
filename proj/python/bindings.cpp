#include "eblab/divergence.hpp"
#include "eblab/experiments.hpp"
#include "eblab/hermite.hpp"
#include "eblab/lowerbound.hpp"
#include "eblab/npmle.hpp"
#include "eblab/orthopoly.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace eblab;

namespace {

py::dict solution_dict(const NpmleSolution& s) {
  py::dict d;
  d["atoms"] = std::vector<double>(s.prior.atoms().begin(), s.prior.atoms().end());
  d["weights"] = std::vector<double>(s.prior.weights().begin(), s.prior.weights().end());
  d["loglik"] = s.loglik;
  d["gradient_cert"] = s.gradient_cert;
  d["iterations"] = s.iterations;
  d["converged"] = s.converged;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gaussian-mixture empirical Bayes numerics";

  py::register_exception<ToleranceNotMet>(m, "ToleranceNotMet", PyExc_RuntimeError);
  py::register_exception<FormMismatch>(m, "FormMismatch", PyExc_RuntimeError);
  py::register_exception<UnknownExperiment>(m, "UnknownExperiment", PyExc_ValueError);
  py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);

  py::class_<DiscretePrior>(m, "DiscretePrior")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("atoms"), py::arg("weights"))
      .def_static("point_mass", &DiscretePrior::point_mass)
      .def_property_readonly("atoms",
                             [](const DiscretePrior& p) { return std::vector<double>(p.atoms().begin(), p.atoms().end()); })
      .def_property_readonly(
          "weights", [](const DiscretePrior& p) { return std::vector<double>(p.weights().begin(), p.weights().end()); })
      .def("moment", &DiscretePrior::moment)
      .def("support_radius", &DiscretePrior::support_radius)
      .def("__len__", &DiscretePrior::size);

  py::class_<MarginalModel>(m, "MarginalModel")
      .def(py::init<const DiscretePrior&>())
      .def("density", &MarginalModel::density)
      .def("log_density", &MarginalModel::log_density)
      .def("posterior_mean", &MarginalModel::posterior_mean)
      .def("score", &MarginalModel::score)
      .def("regularized_rule", &MarginalModel::regularized_rule, py::arg("rho"), py::arg("y"));

  m.def("hellinger_sq", [](const DiscretePrior& g, const DiscretePrior& h) {
    return hellinger_sq(MarginalModel(g), MarginalModel(h));
  });
  m.def("delta_stat", [](const DiscretePrior& g, const DiscretePrior& h) {
    return delta_stat(MarginalModel(g), MarginalModel(h));
  });
  m.def("Delta_stat", [](const DiscretePrior& g, const DiscretePrior& h) {
    return Delta_stat(MarginalModel(g), MarginalModel(h));
  });
  m.def("regret", [](const DiscretePrior& g, const DiscretePrior& h) {
    return regret(MarginalModel(g), MarginalModel(h));
  }, "Regret(H || G) = ∫ (m_H - m_G)² f_G", py::arg("G"), py::arg("H"));
  m.def("regret_regularized", [](const DiscretePrior& g, const DiscretePrior& h, double rho) {
    return regret_regularized(MarginalModel(g), MarginalModel(h), rho);
  }, py::arg("G"), py::arg("H"), py::arg("rho"));

  m.def("arcsine_moment", &arcsine_moment);
  m.def("moment_gap", &moment_gap, py::arg("m"), py::arg("j"));
  m.def("moment_gap_table", [](int mm, int j_max) {
    const MomentGapTable t = moment_gap_table(mm, j_max);
    py::dict d;
    d["gaps"] = t.gaps;
    d["alpha"] = t.alpha_m;
    d["beta"] = t.beta_m;
    return d;
  }, py::arg("m"), py::arg("j_max") = 200);
  m.def("bernstein_constant", &bernstein_constant, py::arg("nu"), py::arg("k"));
  m.def("bernstein_bound", &bernstein_bound, py::arg("M"), py::arg("k"));

  m.def("sample_mixture", &sample_mixture, py::arg("prior"), py::arg("n"), py::arg("seed"));
  m.def("solve_npmle", [](std::vector<double> y, const std::string& algorithm, int grid_size, double tol) {
    NpmleProblem p = NpmleProblem::unconstrained(std::move(y), grid_size);
    p.algorithm = parse_npmle_algorithm(algorithm);
    p.tol = tol;
    return solution_dict(solve_npmle(p));
  }, py::arg("observations"), py::arg("algorithm") = "cnm", py::arg("grid_size") = 400, py::arg("tol") = 1e-6);

  m.def("lowerbound_instance", [](int mm) {
    const LowerBoundInstance i = build_lowerbound_instance(mm);
    py::dict d;
    d["m"] = i.m;
    d["tau"] = i.tau_m;
    d["alpha"] = i.alpha_m;
    d["beta"] = i.beta_m;
    d["eps_sq"] = i.eps_sq;
    d["delta"] = i.delta;
    d["regret"] = i.regret_val;
    return d;
  }, py::arg("m"));

  // JSON crosses the boundary as text; the Python wrapper encodes and decodes it.
  m.def("_run_experiment", [](const std::string& name, const std::string& params, std::uint64_t seed, int threads) {
    ExperimentSpec spec;
    spec.name = name;
    spec.parameters = nlohmann::json::parse(params);
    spec.seed = seed;
    spec.threads = threads;
    ExperimentReport r;
    {
      py::gil_scoped_release release;
      r = run(spec);
    }
    return py::make_tuple(r.columns, r.rows, r.metadata.dump(), r.to_csv());
  });
  m.def("experiment_names", &experiment_names);
  m.attr("__version__") = kToolVersion;
}

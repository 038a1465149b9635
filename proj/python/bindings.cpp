#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ampc/basis.hpp"
#include "ampc/cli.hpp"
#include "ampc/config.hpp"
#include "ampc/diagnostics.hpp"
#include "ampc/error.hpp"
#include "ampc/mcmc.hpp"
#include "ampc/models.hpp"
#include "ampc/regression.hpp"

namespace py = pybind11;
using namespace ampc;
using nlohmann::json;

namespace {

std::shared_ptr<const ForwardModel> callable_model(py::function fn, int n_params, int n_outputs) {
  // Python callables are treated as expensive so that repeated points are memoized.
  return std::make_shared<FunctionModel>(
      "python-callable", n_params, n_outputs,
      [fn](const Eigen::VectorXd& z) -> Eigen::VectorXd {
        py::gil_scoped_acquire gil;
        Eigen::VectorXd out = fn(z).cast<Eigen::VectorXd>();
        return out;
      },
      CostClass::Expensive);
}

std::shared_ptr<const ForwardModel> resolve_model(const py::object& model, int n_params, int n_outputs) {
  if (py::isinstance<py::str>(model)) return build_model(json::parse(model.cast<std::string>()));
  if (n_outputs < 1) throw InputError("n_outputs must be given for a Python callable model");
  return callable_model(model.cast<py::function>(), n_params, n_outputs);
}

py::dict chain_dict(const Chain& c) {
  py::dict d;
  Eigen::VectorXd lp = Eigen::Map<const Eigen::VectorXd>(c.log_posteriors.data(),
                                                         static_cast<Eigen::Index>(c.log_posteriors.size()));
  std::vector<bool> acc(c.accepted.begin(), c.accepted.end());
  d["states"] = c.matrix();
  d["log_posterior"] = lp;
  d["accepted"] = acc;
  d["acceptance_rate"] = c.acceptance_rate();
  d["ledger"] = c.ledger.to_json().dump();
  d["refinement_events"] = refinement_events_json(c).dump();
  std::ostringstream os;
  write_chain_csv(c, os);
  d["csv"] = os.str();
  return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adaptive multi-fidelity polynomial chaos MCMC (C++ core)";

  static py::exception<Error> base(m, "AmpcError");
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<DegeneracyError>(m, "DegeneracyError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<SupportError>(m, "SupportError", base.ptr());
  py::register_exception<ModelError>(m, "ModelError", base.ptr());
  py::register_exception<CapacityError>(m, "CapacityError", base.ptr());

  m.def("legendre", [](int n, double x) { return evaluate_univariate(BasisFamily::LegendreUniform, n, x); },
        py::arg("degree"), py::arg("x"), "Orthonormal Legendre polynomial for the uniform density on [-1, 1].");
  m.def("hermite", [](int n, double x) { return evaluate_univariate(BasisFamily::HermiteGaussian, n, x); },
        py::arg("degree"), py::arg("x"), "Orthonormal probabilists' Hermite polynomial.");
  m.def("cardinality", &total_degree_cardinality, py::arg("n_z"), py::arg("order"));
  m.def(
      "total_degree_indices",
      [](int n_z, int order) {
        std::vector<std::vector<int>> out;
        for (const auto& idx : total_degree_index_set(n_z, order)) out.push_back(idx.entries());
        return out;
      },
      py::arg("n_z"), py::arg("order"));

  py::class_<PcSurrogate>(m, "Surrogate")
      .def("evaluate", &PcSurrogate::evaluate, py::arg("z"))
      .def_property_readonly("order", &PcSurrogate::order)
      .def_property_readonly("n_params", &PcSurrogate::n_params)
      .def_property_readonly("n_outputs", &PcSurrogate::n_outputs)
      .def_property_readonly("coefficients", &PcSurrogate::coefficients)
      .def_property_readonly("offline_evaluations",
                             [](const PcSurrogate& s) { return s.provenance().hf_evaluations; })
      .def("to_json", [](const PcSurrogate& s) { return to_json(s).dump(); })
      .def_static("from_json", [](const std::string& text) { return surrogate_from_json(json::parse(text)); });

  m.def(
      "fit_surrogate",
      [](const py::object& model, const std::string& prior, int order, std::uint64_t seed, int n_outputs) {
        const PriorSpec spec = prior_spec_from_json(json::parse(prior));
        ModelEvaluator eval(resolve_model(model, spec.dimension(), n_outputs));
        return fit_prior_surrogate(eval, spec, order, seed);
      },
      py::arg("model"), py::arg("prior"), py::arg("order"), py::arg("seed") = 0, py::arg("n_outputs") = 0);

  m.def(
      "sample",
      [](const py::object& model, const std::string& prior, const Eigen::VectorXd& data, double sigma,
         const std::string& method, const Eigen::VectorXd& steps, const Eigen::VectorXd& start,
         std::int64_t n_steps, std::uint64_t seed, const py::dict& options) {
        const PriorSpec spec = prior_spec_from_json(json::parse(prior));
        auto eval = std::make_shared<ModelEvaluator>(
            resolve_model(model, spec.dimension(), static_cast<int>(data.size())));
        const InverseProblem problem(eval, spec, data, NoiseModel::known(sigma));
        ProposalSpec proposal{steps.size() == 1 ? Eigen::VectorXd::Constant(spec.dimension(), steps[0]) : steps};
        AmpcConfig cfg;
        cfg.seed = seed;
        if (options.contains("N")) cfg.order = options["N"].cast<int>();
        if (options.contains("N_C")) cfg.correction_order = options["N_C"].cast<int>();
        if (options.contains("epsilon")) cfg.epsilon = options["epsilon"].cast<double>();
        if (options.contains("epsilon0")) cfg.epsilon0 = options["epsilon0"].cast<double>();
        if (options.contains("R")) cfg.radius = options["R"].cast<double>();
        if (options.contains("rho")) cfg.rho = options["rho"].cast<double>();
        if (options.contains("m")) cfg.subchain_length = options["m"].cast<int>();
        if (options.contains("I_max")) cfg.max_iterations = options["I_max"].cast<int>();
        if (method != "direct" && method != "prior_pc" && method != "ampc") {
          throw InputError("method must be direct, prior_pc or ampc");
        }
        Chain chain;
        {
          py::gil_scoped_release release;
          if (method == "direct") {
            chain = run_mh(problem, proposal, n_steps, start, MhTarget::exact(), seed);
          } else if (method == "prior_pc") {
            const PcSurrogate s = fit_prior_surrogate(*eval, spec, cfg.order, derive_seed(seed, 0));
            chain = run_mh(problem, proposal, n_steps, start, MhTarget::with_surrogate(s), seed);
          } else {
            chain = run_ampc(problem, cfg, proposal, start).chain;
          }
        }
        return chain_dict(chain);
      },
      py::arg("model"), py::arg("prior"), py::arg("data"), py::arg("sigma"), py::arg("method"), py::arg("steps"),
      py::arg("start"), py::arg("n_steps") = 50000, py::arg("seed") = 0, py::arg("options") = py::dict());

  m.def(
      "linear_gaussian_posterior",
      [](const Eigen::MatrixXd& a, const Eigen::VectorXd& c, const Eigen::VectorXd& d, double sigma,
         const Eigen::VectorXd& m0, const Eigen::MatrixXd& c0) {
        const GaussianPosterior p = linear_gaussian_posterior(a, c, d, sigma, m0, c0);
        return py::make_tuple(p.mean, p.covariance);
      },
      py::arg("a"), py::arg("c"), py::arg("data"), py::arg("sigma"), py::arg("prior_mean"), py::arg("prior_cov"));

  m.def(
      "effective_sample_size",
      [](const Eigen::VectorXd& x) { return effective_sample_size({x.data(), static_cast<std::size_t>(x.size())}); },
      py::arg("series"));
  m.def(
      "grid_divergences",
      [](const std::vector<Eigen::VectorXd>& axes, const Eigen::VectorXd& log_approx, const Eigen::VectorXd& log_exact) {
        const GridPosterior a(axes, log_approx);
        const GridPosterior e(axes, log_exact);
        return py::make_tuple(kl_divergence(a, e), hellinger_distance(a, e));
      },
      py::arg("axes"), py::arg("log_approx"), py::arg("log_exact"),
      "(KL(approx || exact), Hellinger) of two unnormalized log densities on a tensor grid, last axis fastest.");

  auto command = [](auto fn) {
    return [fn](const std::string& config) {
      const RunConfig c = parse_run_config(json::parse(config));
      py::gil_scoped_release release;
      return fn(c).dump();
    };
  };
  m.def("_generate_data", command([](const RunConfig& c) { return cmd_generate_data(c); }));
  m.def("_build_surrogate", command([](const RunConfig& c) { return cmd_build_surrogate(c); }));
  m.def("_run", command([](const RunConfig& c) { return cmd_run(c); }));
  m.def("_diagnose", command([](const RunConfig& c) { return cmd_diagnose(c); }));
  m.def("_validate_config", [](const std::string& config) { return to_json(parse_run_config(json::parse(config))).dump(); });
  m.def("_compare", [](const std::vector<std::string>& configs, const std::string& out, int nodes) {
    std::vector<RunConfig> parsed;
    for (const auto& c : configs) parsed.push_back(parse_run_config(json::parse(c)));
    py::gil_scoped_release release;
    return cmd_compare(parsed, out, nodes).dump();
  });
}

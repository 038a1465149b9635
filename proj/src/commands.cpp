#include "ampc/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ampc/diagnostics.hpp"
#include "ampc/error.hpp"
#include "ampc/regression.hpp"
#include "ampc/surrogate.hpp"

namespace ampc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Seed streams derived from the run seed.
constexpr std::uint64_t kSurrogateStream = 0;

std::string prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory '" + dir + "'");
  const fs::path probe = fs::path(dir) / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw InputError("output directory '" + dir + "' is not writable");
  }
  fs::remove(probe, ec);
  return dir;
}

std::string path_in(const RunConfig& c, const char* name) { return (fs::path(c.output_dir) / name).string(); }

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path + "'");
  json j;
  in >> j;
  return j;
}

std::vector<std::string> coordinate_names(int parameters, bool log_sigma2) {
  std::vector<std::string> names;
  for (int i = 0; i < parameters; ++i) names.push_back("z" + std::to_string(i + 1));
  if (log_sigma2) names.push_back("log_sigma2");
  return names;
}

struct Setup {
  std::shared_ptr<const ForwardModel> model;
  std::shared_ptr<ModelEvaluator> evaluator;
  LoadedData data;
  std::optional<InverseProblem> problem;
};

Setup make_setup(const RunConfig& c) {
  Setup s;
  s.model = build_model(c.model);
  s.evaluator = std::make_shared<ModelEvaluator>(s.model);
  s.data = resolve_data(c, *s.model);
  s.problem.emplace(s.evaluator, c.prior, s.data.values, resolve_noise(c, s.data));
  return s;
}

void write_data_files(const RunConfig& c, const LoadedData& data, json& written) {
  if (!c.data.synthetic) return;
  write_data_csv(data.values, path_in(c, "data.csv"));
  write_json(data.provenance, path_in(c, "data.provenance.json"));
  written.push_back(path_in(c, "data.csv"));
  written.push_back(path_in(c, "data.provenance.json"));
}

} // namespace

json error_json(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  return {{"status", "error"}, {"error_type", err ? err->kind() : "internal_error"}, {"message", e.what()}};
}

json cmd_generate_data(const RunConfig& c) {
  prepare_dir(c.output_dir);
  const auto model = build_model(c.model);
  if (!c.data.synthetic) throw InputError("generate-data needs a 'data.synthetic' block");
  const LoadedData data = resolve_data(c, *model);
  json written = json::array();
  write_data_files(c, data, written);
  return {{"status", "ok"}, {"command", "generate-data"}, {"n_values", data.values.size()}, {"written", written}};
}

json cmd_build_surrogate(const RunConfig& c) {
  prepare_dir(c.output_dir);
  const auto model = build_model(c.model);
  ModelEvaluator eval(model);
  const PcSurrogate s =
      fit_prior_surrogate(eval, c.prior, c.method.ampc.order, derive_seed(c.seed, kSurrogateStream));
  save_surrogate(s, path_in(c, "surrogate.json"));
  write_json(eval.ledger().snapshot().to_json(), path_in(c, "ledger.json"));
  return {{"status", "ok"},
          {"command", "build-surrogate"},
          {"order", s.order()},
          {"terms", s.index_set().size()},
          {"offline_evaluations", s.provenance().hf_evaluations},
          {"written", {path_in(c, "surrogate.json"), path_in(c, "ledger.json")}}};
}

json cmd_run(const RunConfig& c) {
  prepare_dir(c.output_dir);
  Setup s = make_setup(c);
  const InverseProblem& problem = *s.problem;
  const int dim = problem.state_dimension();
  const ProposalSpec proposal = resolve_proposal(c, dim);
  const Eigen::VectorXd start = resolve_start(c, dim);
  json written = json::array();
  write_data_files(c, s.data, written);

  std::optional<PcSurrogate> loaded;
  if (c.method.surrogate_file) loaded = load_surrogate(*c.method.surrogate_file);

  Chain chain;
  json method_info = {{"name", std::string(to_string(c.method.kind))}};
  switch (c.method.kind) {
  case Method::Direct:
    chain = run_mh(problem, proposal, c.method.n_steps, start, MhTarget::exact(), c.seed);
    break;
  case Method::PriorPc: {
    const PcSurrogate surrogate =
        loaded ? *loaded
               : fit_prior_surrogate(*s.evaluator, c.prior, c.method.ampc.order, derive_seed(c.seed, kSurrogateStream));
    save_surrogate(surrogate, path_in(c, "prior_surrogate.json"));
    written.push_back(path_in(c, "prior_surrogate.json"));
    chain = run_mh(problem, proposal, c.method.n_steps, start, MhTarget::with_surrogate(surrogate), c.seed);
    method_info["N"] = surrogate.order();
    break;
  }
  case Method::Ampc: {
    AmpcConfig cfg = c.method.ampc;
    cfg.seed = c.seed;
    AmpcResult r = run_ampc(problem, cfg, proposal, start, loaded);
    save_surrogate(r.prior_surrogate, path_in(c, "prior_surrogate.json"));
    save_surrogate(r.final_surrogate, path_in(c, "final_surrogate.json"));
    written.push_back(path_in(c, "prior_surrogate.json"));
    written.push_back(path_in(c, "final_surrogate.json"));
    method_info["N"] = cfg.order;
    method_info["N_C"] = cfg.correction_order;
    method_info["final_radius"] = r.final_radius;
    method_info["radius_shrinks"] = r.shrink_count;
    chain = std::move(r.chain);
    break;
  }
  }

  write_chain_csv(chain, path_in(c, "chain.csv"));
  write_json(refinement_events_json(chain), path_in(c, "refinement_events.json"));
  json ledger = chain.ledger.to_json();
  ledger["refinement_batches"] = json::array();
  for (const auto& e : chain.refinement_events) ledger["refinement_batches"].push_back(e.design_size);
  write_json(ledger, path_in(c, "ledger.json"));

  const auto names = coordinate_names(chain.parameter_dimension, chain.has_log_sigma2);
  const ChainSummary summary = chain_summary(chain, c.method.burn_in);
  json sj = to_json(summary, names);
  sj["method"] = method_info;
  sj["states"] = chain.size();
  sj["refinement_events"] = chain.refinement_events.size();
  sj["ledger"] = chain.ledger.to_json();
  if (!problem.noise().is_hierarchical()) sj["sigma"] = problem.noise().sigma;
  if (s.data.provenance.is_object() && s.data.provenance.contains("true_params")) {
    sj["true_params"] = s.data.provenance["true_params"];
  }
  write_json(sj, path_in(c, "summary.json"));
  {
    std::ofstream out(path_in(c, "histograms.csv"));
    if (!out) throw InputError("cannot write '" + path_in(c, "histograms.csv") + "'");
    write_histograms_csv(summary, names, out);
  }
  write_json(to_json(c), path_in(c, "config.resolved.json"));
  for (const char* f : {"chain.csv", "refinement_events.json", "ledger.json", "summary.json", "histograms.csv",
                        "config.resolved.json"}) {
    written.push_back(path_in(c, f));
  }
  return {{"status", "ok"},
          {"command", "run"},
          {"method", std::string(to_string(c.method.kind))},
          {"states", chain.size()},
          {"acceptance_rate", chain.acceptance_rate()},
          {"ledger", chain.ledger.to_json()},
          {"written", written}};
}

json cmd_diagnose(const RunConfig& c, const DiagnoseOptions& o) {
  prepare_dir(c.output_dir);
  const std::string chain_path = o.chain_path.value_or(path_in(c, "chain.csv"));
  const Chain chain = read_chain_csv(chain_path);
  const auto names = coordinate_names(chain.parameter_dimension, chain.has_log_sigma2);
  const ChainSummary summary = chain_summary(chain, c.method.burn_in, o.bins);
  json report = {{"status", "ok"}, {"command", "diagnose"}, {"chain", chain_path}};
  report["summary"] = to_json(summary, names);

  std::optional<std::string> surrogate_path = o.surrogate_path;
  if (!surrogate_path) {
    for (const char* f : {"final_surrogate.json", "prior_surrogate.json"}) {
      if (fs::exists(path_in(c, f))) {
        surrogate_path = path_in(c, f);
        break;
      }
    }
  }
  const double epsilon = o.epsilon.value_or(c.method.ampc.epsilon);
  if (surrogate_path && std::isfinite(epsilon)) {
    if (o.feasible_samples < 1) throw InputError("feasible-set estimate needs at least one sample");
    Setup s = make_setup(c);
    const PcSurrogate surrogate = load_surrogate(*surrogate_path);
    const Eigen::MatrixXd all = chain.matrix(summary.burn_in);
    const Eigen::Index take = std::min<Eigen::Index>(all.rows(), o.feasible_samples);
    Eigen::MatrixXd thinned(take, all.cols());
    for (Eigen::Index i = 0; i < take; ++i) thinned.row(i) = all.row(i * all.rows() / take);
    const FeasibleSetEstimate est = feasible_set_measure(*s.problem, surrogate, epsilon, thinned);
    json fj = to_json(est);
    fj["epsilon"] = epsilon;
    fj["surrogate"] = *surrogate_path;
    fj["diagnostic_evaluations"] = s.evaluator->ledger().snapshot()[EvalCategory::Diagnostic];
    report["feasible_set"] = fj;
  }
  write_json(report, path_in(c, "diagnostics.json"));
  {
    std::ofstream out(path_in(c, "histograms.csv"));
    if (!out) throw InputError("cannot write '" + path_in(c, "histograms.csv") + "'");
    write_histograms_csv(summary, names, out);
  }
  report["written"] = {path_in(c, "diagnostics.json"), path_in(c, "histograms.csv")};
  return report;
}

json cmd_compare(const std::vector<RunConfig>& configs, const std::string& output_dir, int grid_nodes) {
  if (configs.empty()) throw InputError("compare needs at least one config");
  if (grid_nodes < 2) throw InputError("compare grid needs at least 2 nodes per axis");
  prepare_dir(output_dir);

  struct Row {
    const RunConfig* config;
    Chain chain;
  };
  std::vector<Row> rows;
  for (const auto& c : configs) {
    cmd_run(c);
    rows.push_back({&c, read_chain_csv(path_in(c, "chain.csv"))});
    rows.back().chain.ledger = LedgerSnapshot{};
    const json ledger = read_json(path_in(c, "ledger.json"));
    for (std::size_t k = 0; k < static_cast<std::size_t>(EvalCategory::kCount); ++k) {
      rows.back().chain.ledger.evaluations[k] =
          ledger.at("evaluations").at(std::string(to_string(static_cast<EvalCategory>(k)))).get<std::uint64_t>();
    }
  }

  // Shared histogram grid over the parameters when a direct reference exists.
  const Row* reference = nullptr;
  for (const auto& r : rows) {
    if (r.config->method.kind == Method::Direct) {
      reference = &r;
      break;
    }
  }
  const int dim = configs.front().prior.dimension();
  bool grid_ok = reference != nullptr && dim <= 3;
  for (const auto& c : configs) grid_ok = grid_ok && c.prior.dimension() == dim;
  std::vector<Eigen::MatrixXd> params;
  std::vector<Eigen::VectorXd> axes;
  if (grid_ok) {
    for (const auto& r : rows) {
      const std::size_t burn = static_cast<std::size_t>(r.config->method.burn_in * static_cast<double>(r.chain.size()));
      params.push_back(r.chain.matrix(burn).leftCols(dim));
    }
    for (int d = 0; d < dim; ++d) {
      const auto& m = configs.front().prior.marginals()[static_cast<std::size_t>(d)];
      double lo = m.a;
      double hi = m.b;
      if (m.kind == PriorMarginal::Kind::Gaussian) {
        lo = std::numeric_limits<double>::infinity();
        hi = -lo;
        for (const auto& p : params) {
          lo = std::min(lo, p.col(d).minCoeff());
          hi = std::max(hi, p.col(d).maxCoeff());
        }
        if (!(hi > lo)) hi = lo + 1.0;
      }
      const double h = (hi - lo) / grid_nodes;
      axes.push_back(linspace(lo + 0.5 * h, hi - 0.5 * h, grid_nodes));
    }
  }
  std::optional<GridPosterior> ref_grid;
  if (grid_ok) {
    const std::size_t k = static_cast<std::size_t>(reference - rows.data());
    ref_grid = GridPosterior::from_samples(axes, params[k]);
  }

  json table = json::array();
  std::ofstream csv((fs::path(output_dir) / "compare.csv").string());
  if (!csv) throw InputError("cannot write compare.csv in '" + output_dir + "'");
  csv << "run,method,N,N_C,offline,refinement,ratio,indicator,direct,online,total,refinement_events,"
         "acceptance_rate,kl_vs_direct,hellinger_vs_direct\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    const RunConfig& c = *r.config;
    const LedgerSnapshot& l = r.chain.ledger;
    const json refinement = read_json(path_in(c, "refinement_events.json"));
    json row = {{"run", c.output_dir},
                {"method", std::string(to_string(c.method.kind))},
                {"N", c.method.kind == Method::Direct ? json(nullptr) : json(c.method.ampc.order)},
                {"N_C", c.method.kind == Method::Ampc ? json(c.method.ampc.correction_order) : json(nullptr)},
                {"offline", l[EvalCategory::Offline]},
                {"refinement", l[EvalCategory::Refinement]},
                {"ratio", l[EvalCategory::Ratio]},
                {"indicator", l[EvalCategory::Indicator]},
                {"direct", l[EvalCategory::Direct]},
                {"online", l.online()},
                {"total", l.total()},
                {"refinement_events", refinement.at("refinement_events").size()},
                {"acceptance_rate", r.chain.acceptance_rate()},
                {"kl_vs_direct", nullptr},
                {"hellinger_vs_direct", nullptr}};
    if (ref_grid) {
      const GridPosterior g = GridPosterior::from_samples(axes, params[i]);
      row["hellinger_vs_direct"] = hellinger_distance(g, *ref_grid);
      try {
        row["kl_vs_direct"] = kl_divergence(g, *ref_grid);
      } catch (const SupportError&) {
        // Binned chain has mass where the reference histogram is empty.
      }
    }
    table.push_back(row);
    auto cell = [](const json& v) {
      if (v.is_null()) return std::string();
      if (v.is_number_float()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return std::string(buf);
      }
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    csv << cell(row["run"]);
    for (const char* k : {"method", "N", "N_C", "offline", "refinement", "ratio", "indicator", "direct", "online",
                          "total", "refinement_events", "acceptance_rate", "kl_vs_direct", "hellinger_vs_direct"}) {
      csv << ',' << cell(row[k]);
    }
    csv << '\n';
  }
  json report = {{"status", "ok"}, {"command", "compare"}, {"rows", table}};
  if (ref_grid) {
    report["grid_reference"] = {{"run", reference->config->output_dir},
                                {"nodes_per_axis", grid_nodes},
                                {"note", "chains binned on a shared grid; KL is null where a binned chain "
                                         "has mass in a bin the direct chain never visited"}};
  }
  write_json(report, (fs::path(output_dir) / "compare.json").string());
  report["written"] = {(fs::path(output_dir) / "compare.csv").string(),
                       (fs::path(output_dir) / "compare.json").string()};
  return report;
}

} // namespace ampc

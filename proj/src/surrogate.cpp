#include "ampc/surrogate.hpp"

#include <fstream>

#include "ampc/error.hpp"

namespace ampc {

PcSurrogate::PcSurrogate(BasisFamily family, MultiIndexSet index_set, Eigen::MatrixXd coefficients,
                         PriorMap prior_map, SurrogateProvenance provenance)
    : family_(family), index_set_(std::move(index_set)), coefficients_(std::move(coefficients)),
      prior_map_(std::move(prior_map)), provenance_(std::move(provenance)) {
  if (static_cast<std::size_t>(coefficients_.rows()) != index_set_.size()) {
    throw InputError("coefficient rows (" + std::to_string(coefficients_.rows()) +
                     ") must equal the index set size (" + std::to_string(index_set_.size()) + ")");
  }
  if (coefficients_.cols() < 1) throw InputError("surrogate needs at least one output");
  if (prior_map_.dimension() != static_cast<std::size_t>(index_set_.dimension())) {
    throw InputError("prior map dimension does not match the index set dimension");
  }
}

Eigen::VectorXd PcSurrogate::evaluate(const Eigen::VectorXd& z) const {
  return evaluate_reference(prior_map_.to_reference(z));
}

Eigen::VectorXd PcSurrogate::evaluate_reference(const Eigen::VectorXd& zhat) const {
  const Eigen::VectorXd row = evaluate_basis_row(family_, index_set_, as_span(zhat));
  return coefficients_.transpose() * row;
}

PcSurrogate merge(const PcSurrogate& low, const PcSurrogate& correction) {
  if (low.family() != correction.family()) {
    throw InputError("cannot merge surrogates of different basis families");
  }
  if (!(low.prior_map() == correction.prior_map())) {
    throw InputError("cannot merge surrogates with different prior maps");
  }
  if (low.n_outputs() != correction.n_outputs()) {
    throw InputError("cannot merge surrogates with different output dimensions");
  }
  if (!correction.index_set().is_prefix_of(low.index_set())) {
    throw InputError("correction index set must be a subset of the low-fidelity index set");
  }
  Eigen::MatrixXd coefficients = low.coefficients();
  coefficients.topRows(correction.coefficients().rows()) += correction.coefficients();
  SurrogateProvenance provenance = low.provenance();
  provenance.generation = low.provenance().generation + 1;
  provenance.hf_evaluations += correction.provenance().hf_evaluations;
  return PcSurrogate(low.family(), low.index_set(), std::move(coefficients), low.prior_map(),
                     std::move(provenance));
}

SurrogateModel::SurrogateModel(std::shared_ptr<const PcSurrogate> surrogate, std::string id)
    : surrogate_(std::move(surrogate)), id_(std::move(id)) {
  if (!surrogate_) throw InputError("surrogate model needs a surrogate");
}

std::shared_ptr<const ForwardModel> SurrogateModel::refined(int) const {
  return std::make_shared<SurrogateModel>(*this);
}

nlohmann::json to_json(const PcSurrogate& s) {
  nlohmann::json coefficients = nlohmann::json::array();
  for (std::size_t k = 0; k < s.index_set().size(); ++k) {
    std::vector<double> values(static_cast<std::size_t>(s.n_outputs()));
    for (int j = 0; j < s.n_outputs(); ++j) {
      values[static_cast<std::size_t>(j)] = s.coefficients()(static_cast<Eigen::Index>(k), j);
    }
    coefficients.push_back({{"index", s.index_set()[k].entries()}, {"values", values}});
  }
  const auto& p = s.provenance();
  return {{"format", "ampc-pc-surrogate"},
          {"version", kSurrogateFormatVersion},
          {"family", to_string(s.family())},
          {"n_z", s.n_params()},
          {"n_d", s.n_outputs()},
          {"N", s.order()},
          {"ordering", kGradedLexOrdering},
          {"prior_map", to_json(s.prior_map())},
          {"coefficients", coefficients},
          {"provenance",
           {{"seed", p.seed},
            {"design_size", p.design_size},
            {"fit_residuals", p.fit_residuals},
            {"hf_evaluations", p.hf_evaluations},
            {"generation", p.generation},
            {"model_id", p.model_id}}}};
}

PcSurrogate surrogate_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != "ampc-pc-surrogate") {
    throw InputError("not an ampc surrogate file");
  }
  if (j.at("version").get<int>() != kSurrogateFormatVersion) {
    throw InputError("unsupported surrogate format version");
  }
  if (j.at("ordering").get<std::string>() != kGradedLexOrdering) {
    throw InputError("unsupported index ordering '" + j.at("ordering").get<std::string>() + "'");
  }
  const auto family = basis_family_from_string(j.at("family").get<std::string>());
  const int n_z = j.at("n_z").get<int>();
  const int n_d = j.at("n_d").get<int>();
  const int order = j.at("N").get<int>();
  auto set = total_degree_index_set(n_z, order);
  const auto& entries = j.at("coefficients");
  if (entries.size() != set.size()) {
    throw InputError("surrogate file has " + std::to_string(entries.size()) +
                     " coefficient rows, expected " + std::to_string(set.size()));
  }
  Eigen::MatrixXd coefficients = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(set.size()), n_d);
  std::vector<bool> seen(set.size(), false);
  for (const auto& e : entries) {
    const MultiIndex index(e.at("index").get<std::vector<int>>());
    const auto pos = set.position(index);
    if (!pos) throw InputError("surrogate file contains a multi-index outside the total-degree set");
    if (seen[*pos]) throw InputError("surrogate file repeats a multi-index");
    seen[*pos] = true;
    const auto values = e.at("values").get<std::vector<double>>();
    if (static_cast<int>(values.size()) != n_d) throw InputError("coefficient row has wrong width");
    for (int c = 0; c < n_d; ++c) {
      coefficients(static_cast<Eigen::Index>(*pos), c) = values[static_cast<std::size_t>(c)];
    }
  }
  SurrogateProvenance provenance;
  if (j.contains("provenance")) {
    const auto& p = j.at("provenance");
    provenance.seed = p.value("seed", std::uint64_t{0});
    provenance.design_size = p.value("design_size", std::int64_t{0});
    provenance.fit_residuals = p.value("fit_residuals", std::vector<double>{});
    provenance.hf_evaluations = p.value("hf_evaluations", std::uint64_t{0});
    provenance.generation = p.value("generation", 0);
    provenance.model_id = p.value("model_id", std::string{});
  }
  return PcSurrogate(family, std::move(set), std::move(coefficients),
                     prior_map_from_json(j.at("prior_map")), std::move(provenance));
}

void save_surrogate(const PcSurrogate& surrogate, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write surrogate file '" + path + "'");
  out << to_json(surrogate).dump(2) << '\n';
}

PcSurrogate load_surrogate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read surrogate file '" + path + "'");
  try {
    return surrogate_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed surrogate file '" + path + "': " + e.what());
  }
}

} // namespace ampc

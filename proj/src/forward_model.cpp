#include "ampc/forward_model.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "ampc/error.hpp"

namespace ampc {

FunctionModel::FunctionModel(std::string id, int n_params, int n_outputs, Fn fn, CostClass cost)
    : id_(std::move(id)), n_params_(n_params), n_outputs_(n_outputs), fn_(std::move(fn)),
      cost_(cost) {
  if (n_params_ < 1 || n_outputs_ < 1) throw InputError("model dimensions must be positive");
  if (!fn_) throw InputError("function model needs a callable");
}

Eigen::VectorXd FunctionModel::evaluate(const Eigen::VectorXd& z) const {
  if (z.size() != n_params_) {
    throw InputError("model '" + id_ + "' expects " + std::to_string(n_params_) +
                     " parameters, got " + std::to_string(z.size()));
  }
  Eigen::VectorXd out = fn_(z);
  if (out.size() != n_outputs_) {
    throw InputError("model '" + id_ + "' returned " + std::to_string(out.size()) +
                     " outputs, expected " + std::to_string(n_outputs_));
  }
  return out;
}

std::shared_ptr<const ForwardModel> FunctionModel::refined(int) const {
  return std::make_shared<FunctionModel>(*this);
}

std::string_view to_string(EvalCategory category) {
  switch (category) {
  case EvalCategory::Offline: return "offline";
  case EvalCategory::Refinement: return "refinement";
  case EvalCategory::Ratio: return "ratio";
  case EvalCategory::Indicator: return "indicator";
  case EvalCategory::Diagnostic: return "diagnostic";
  case EvalCategory::Direct: return "direct";
  case EvalCategory::kCount: break;
  }
  return "unknown";
}

std::uint64_t LedgerSnapshot::total() const {
  std::uint64_t sum = 0;
  for (auto c : evaluations) sum += c;
  return sum;
}

std::uint64_t LedgerSnapshot::total_cache_hits() const {
  std::uint64_t sum = 0;
  for (auto c : cache_hits) sum += c;
  return sum;
}

nlohmann::json LedgerSnapshot::to_json() const {
  nlohmann::json evals = nlohmann::json::object();
  nlohmann::json hits = nlohmann::json::object();
  for (std::size_t i = 0; i < evaluations.size(); ++i) {
    const auto name = std::string(to_string(static_cast<EvalCategory>(i)));
    evals[name] = evaluations[i];
    hits[name] = cache_hits[i];
  }
  return {{"evaluations", evals},
          {"cache_hits", hits},
          {"offline", (*this)[EvalCategory::Offline]},
          {"online", online()},
          {"total", total()}};
}

LedgerSnapshot EvaluationLedger::snapshot() const {
  LedgerSnapshot s;
  for (std::size_t i = 0; i < s.evaluations.size(); ++i) {
    s.evaluations[i] = counts_[i].load(std::memory_order_relaxed);
    s.cache_hits[i] = hits_[i].load(std::memory_order_relaxed);
  }
  return s;
}

ModelEvaluator::ModelEvaluator(std::shared_ptr<const ForwardModel> model,
                               std::shared_ptr<EvaluationLedger> ledger)
    : model_(std::move(model)),
      ledger_(ledger ? std::move(ledger) : std::make_shared<EvaluationLedger>()) {
  if (!model_) throw InputError("model evaluator needs a model");
  caching_ = model_->cost_class() == CostClass::Expensive;
}

std::string ModelEvaluator::key(const Eigen::VectorXd& z) const {
  std::string k = model_->id();
  k.push_back('\0');
  const auto bytes = static_cast<std::size_t>(z.size()) * sizeof(double);
  const auto offset = k.size();
  k.resize(offset + bytes);
  std::memcpy(k.data() + offset, z.data(), bytes);
  return k;
}

Eigen::VectorXd ModelEvaluator::evaluate(const Eigen::VectorXd& z, EvalCategory category) const {
  std::string k;
  if (caching_) {
    k = key(z);
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(k); it != cache_.end()) {
      ledger_->record_hit(category);
      return it->second;
    }
  }
  Eigen::VectorXd out;
  try {
    out = model_->evaluate(z);
  } catch (const std::exception& e) {
    throw ModelError("forward model '" + model_->id() + "' failed at z = " + format_point(z) +
                     ": " + e.what());
  }
  ledger_->record(category);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) {
      throw ModelError("forward model '" + model_->id() + "' returned a non-finite output at z = " +
                       format_point(z));
    }
  }
  if (caching_) {
    std::lock_guard lock(mutex_);
    cache_.emplace(std::move(k), out);
  }
  return out;
}

Eigen::MatrixXd ModelEvaluator::evaluate_rows(const Eigen::MatrixXd& points,
                                              EvalCategory category) const {
  Eigen::MatrixXd values(points.rows(), model_->n_outputs());
  for (Eigen::Index q = 0; q < points.rows(); ++q) {
    values.row(q) = evaluate(points.row(q).transpose(), category).transpose();
  }
  return values;
}

std::string format_point(const Eigen::VectorXd& z) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Eigen::Index i = 0; i < z.size(); ++i) os << (i ? ", " : "") << z[i];
  os << ')';
  return os.str();
}

} // namespace ampc

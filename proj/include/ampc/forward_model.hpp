#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include <Eigen/Dense>
#include <json.hpp>

namespace ampc {

enum class CostClass { Cheap, Expensive };

/// G : R^{n_z} -> R^{n_d}. Implementations must be pure and reentrant:
/// the same input gives bit-identical output from any thread.
class ForwardModel {
public:
  virtual ~ForwardModel() = default;

  virtual int n_params() const = 0;
  virtual int n_outputs() const = 0;
  virtual Eigen::VectorXd evaluate(const Eigen::VectorXd& z) const = 0;

  /// Stable identifier; part of the evaluation-cache key.
  virtual std::string id() const = 0;
  virtual CostClass cost_class() const { return CostClass::Expensive; }

  /// The same model on a mesh refined by `factor` (used for synthetic data
  /// generation). Mesh-free models return a copy of themselves.
  virtual std::shared_ptr<const ForwardModel> refined(int factor) const = 0;
};

/// Adapter for closures (analytic toys, Python callables).
class FunctionModel final : public ForwardModel {
public:
  using Fn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  FunctionModel(std::string id, int n_params, int n_outputs, Fn fn,
                CostClass cost = CostClass::Cheap);

  int n_params() const override { return n_params_; }
  int n_outputs() const override { return n_outputs_; }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& z) const override;
  std::string id() const override { return id_; }
  CostClass cost_class() const override { return cost_; }
  std::shared_ptr<const ForwardModel> refined(int) const override;

private:
  std::string id_;
  int n_params_;
  int n_outputs_;
  Fn fn_;
  CostClass cost_;
};

/// Why a high-fidelity evaluation was requested.
enum class EvalCategory : std::size_t {
  Offline = 0,   // prior-surrogate design
  Refinement,    // correction design points
  Ratio,         // high-fidelity acceptance ratio
  Indicator,     // error indicator at the refinement candidate
  Diagnostic,    // feasible-set estimation and other post-processing
  Direct,        // conventional MCMC on the full model
  kCount
};

std::string_view to_string(EvalCategory category);

struct LedgerSnapshot {
  std::array<std::uint64_t, static_cast<std::size_t>(EvalCategory::kCount)> evaluations{};
  std::array<std::uint64_t, static_cast<std::size_t>(EvalCategory::kCount)> cache_hits{};

  std::uint64_t operator[](EvalCategory c) const {
    return evaluations[static_cast<std::size_t>(c)];
  }
  std::uint64_t total() const;
  /// Everything except the offline design.
  std::uint64_t online() const { return total() - (*this)[EvalCategory::Offline]; }
  std::uint64_t total_cache_hits() const;

  nlohmann::json to_json() const;
};

/// Global high-fidelity evaluation counter. Increments are atomic.
class EvaluationLedger {
public:
  void record(EvalCategory category) {
    counts_[static_cast<std::size_t>(category)].fetch_add(1, std::memory_order_relaxed);
  }
  void record_hit(EvalCategory category) {
    hits_[static_cast<std::size_t>(category)].fetch_add(1, std::memory_order_relaxed);
  }
  LedgerSnapshot snapshot() const;

private:
  std::array<std::atomic<std::uint64_t>, static_cast<std::size_t>(EvalCategory::kCount)> counts_{};
  std::array<std::atomic<std::uint64_t>, static_cast<std::size_t>(EvalCategory::kCount)> hits_{};
};

/// Counting, caching front end for a high-fidelity model. Expensive models
/// are memoized by (model id, exact point bytes); cheap ones are not.
/// Failures are rethrown as ModelError naming the offending point.
class ModelEvaluator {
public:
  explicit ModelEvaluator(std::shared_ptr<const ForwardModel> model,
                          std::shared_ptr<EvaluationLedger> ledger = nullptr);

  Eigen::VectorXd evaluate(const Eigen::VectorXd& z, EvalCategory category) const;
  /// Row-wise batch evaluation: returns Q x n_d.
  Eigen::MatrixXd evaluate_rows(const Eigen::MatrixXd& points, EvalCategory category) const;

  const ForwardModel& model() const { return *model_; }
  std::shared_ptr<const ForwardModel> model_ptr() const { return model_; }
  EvaluationLedger& ledger() const { return *ledger_; }
  std::shared_ptr<EvaluationLedger> ledger_ptr() const { return ledger_; }
  bool caching() const { return caching_; }

private:
  std::string key(const Eigen::VectorXd& z) const;

  std::shared_ptr<const ForwardModel> model_;
  std::shared_ptr<EvaluationLedger> ledger_;
  bool caching_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, Eigen::VectorXd> cache_;
};

std::string format_point(const Eigen::VectorXd& z);

} // namespace ampc

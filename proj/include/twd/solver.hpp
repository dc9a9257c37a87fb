#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twd/instance.hpp"
#include "twd/penalties.hpp"
#include "twd/routing.hpp"
#include "twd/window_design.hpp"

namespace twd {

// --- cut generators -------------------------------------------------------

/// ω >= intercept + coefficientsᵀ(y - anchor).
struct Cut {
  NodeId customer = 0;
  double intercept = 0.0;
  std::vector<double> coefficients;
  std::vector<double> anchor;

  double value_at(std::span<const double> y) const;
};

using PhiEvaluator = std::function<double(std::span<const double>)>;

/// Optimal sample-average window cost when arrivals are τ_q = Σ_a t_qa·y_a.
double saa_phi(std::span<const double> y, const SampleSet& samples, const CustomerPenalty& pen);
/// √(yᵀ C y).
double dro_phi(std::span<const double> y, const Eigen::MatrixXd& robust_cov);
/// C + α₂·I.
Eigen::MatrixXd robust_covariance(const Eigen::MatrixXd& cov, double alpha2);

Cut benders_cut(std::span<const double> y_hat, const SampleSet& samples, const PenaltyConfig& pen,
                NodeId customer);
/// Throws InputError("singular anchor") when ŷᵀCŷ <= 1e-18.
Cut oa_cut(std::span<const double> y_hat, const Eigen::MatrixXd& robust_cov, NodeId customer = 0);

/// φ(y) >= cut value at y, less 1e-9.
bool cut_check(const Cut& cut, std::span<const double> y, const PhiEvaluator& phi);

std::uint64_t anchor_hash(std::span<const double> anchor);
/// customer, anchor_hash, intercept, coefficients ("i->j:value" joined by ';', nonzeros only).
std::string cut_log_csv(std::span<const Cut> cuts, const Network& net);

// --- integrated route + window search ------------------------------------

enum class ModelKind { sm, rm };

struct ModelSpec {
  ModelKind kind = ModelKind::sm;
  const SampleSet* samples = nullptr;  // sm
  double alpha1 = 0.0;                 // rm budget
  double alpha2 = 0.0;                 // rm covariance radius

  static ModelSpec sm(const SampleSet& s) { return {ModelKind::sm, &s, 0.0, 0.0}; }
  static ModelSpec rm(double alpha1, double alpha2) { return {ModelKind::rm, nullptr, alpha1, alpha2}; }
};

struct SolveOptions {
  bool prune_bound = true;
  bool prune_budget = true;
  std::optional<std::vector<NodeId>> initial_route;
  int threads = 1;
};

struct SolveResult {
  std::vector<NodeId> route;
  WindowPlan plan;
  double objective = 0.0;
  double budget_value = 0.0;
  std::int64_t node_count = 0;
  std::int64_t pruned_count = 0;
  bool proof_of_optimality = false;
  bool node_counts_approximate = false;
  double wall_time = 0.0;  // seconds
};

/// Budget value of the active model (sample mean or robust mean length).
double route_budget(const Network& net, const Route& route, const ModelSpec& model);
/// Integrated objective of a route with its optimal windows.
double route_objective(const Network& net, const Route& route, const ModelSpec& model,
                       const PenaltyConfig& pen);
WindowPlan route_plan(const Network& net, const Route& route, const ModelSpec& model,
                      const PenaltyConfig& pen);

/// Every permutation; |V₀| <= 9. Throws InfeasibleError("budget infeasible")
/// with the smallest achievable budget value when no tour fits.
SolveResult enumerate_exact(const Network& net, const ModelSpec& model, const PenaltyConfig& pen);

/// Depth-first search over visit sequences with admissible cost and budget
/// bounds. Ties resolve to the lexicographically smallest sequence.
SolveResult branch_and_bound(const Network& net, const ModelSpec& model, const PenaltyConfig& pen,
                             const SolveOptions& options = {});

}  // namespace twd

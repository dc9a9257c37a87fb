#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "twd/instance.hpp"
#include "twd/routing.hpp"
#include "twd/solver.hpp"
#include "twd/window_design.hpp"

namespace twd {

struct CustomerEval {
  NodeId customer = 0;
  double lower = 0.0, upper = 0.0;
  std::int64_t early_count = 0, late_count = 0;
  double early_rate = 0.0, late_rate = 0.0;
  /// Mean over the violating samples only (0 when there are none).
  double early_amount_mean = 0.0, late_amount_mean = 0.0;
  double early_amount_total = 0.0, late_amount_total = 0.0;

  double window_length() const { return upper - lower; }
};

struct EvalReport {
  std::vector<CustomerEval> customers;  // route visit order
  /// Pooled over all customers: violations / (Q_test · customers).
  double early_rate = 0.0, late_rate = 0.0;
  std::int64_t early_count = 0, late_count = 0;
  double mean_length = 0.0;
  double total_violation_amount = 0.0;
  int q_test = 0;
  std::uint64_t seed = 0;
};

/// Out-of-sample check; arrivals equal to a bound count as inside.
EvalReport evaluate_plan(const Route& route, const WindowPlan& plan, const SampleSet& test);
std::string eval_report_csv(const EvalReport& report);

/// Service starts under waiting: T^k = max(T^prev + t, l^k), T at the depot = 0.
/// Rows are samples, columns visit positions; `lowers` follows visit order.
Eigen::MatrixXd simulate_waiting(const Route& route, std::span<const double> lowers,
                                 const SampleSet& samples);
/// Same quantity as the max over earlier nodes r of l^r plus the arc times from r.
Eigen::MatrixXd simulate_waiting_unrolled(const Route& route, std::span<const double> lowers,
                                          const SampleSet& samples);

struct SweepConfig {
  std::vector<std::pair<double, double>> betas;  // (β_l, β_u)
  std::vector<std::string> models{"sm", "rm", "smf"};
  std::vector<std::uint64_t> seeds{0};
  int q_train = 1000;
  int q_test = 1000;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  int threads = 1;
};

/// One line of the sweep table. customer == 0 marks the per-cell aggregate,
/// where width is the mean length and the amounts are pooled means.
struct SweepRow {
  std::string model;
  double beta_l = 0.0, beta_u = 0.0;
  std::uint64_t seed = 0;
  NodeId customer = 0;
  double lower = 0.0, upper = 0.0, width = 0.0;
  double early_rate = 0.0, late_rate = 0.0;
  double early_amt = 0.0, late_amt = 0.0;
  double objective = 0.0;
  double budget_used = 0.0;
  std::int64_t early_count = 0, late_count = 0;
};

/// Samples come from the "sampling-train" / "sampling-test" substreams of
/// each seed. "smf" keeps the sm route and fits one shared width on it.
/// Rows are sorted by (model, β_l, β_u, seed, customer).
std::vector<SweepRow> guideline_sweep(const Network& net, const SweepConfig& config);
std::string sweep_csv(std::span<const SweepRow> rows);

/// Training and test draws of a sweep seed.
std::pair<SampleSet, SampleSet> sweep_samples(const Network& net, std::uint64_t seed, int q_train,
                                              int q_test);

}  // namespace twd

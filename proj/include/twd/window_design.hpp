#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "twd/instance.hpp"
#include "twd/kernels.hpp"
#include "twd/penalties.hpp"
#include "twd/routing.hpp"

namespace twd {

struct CustomerWindow {
  NodeId customer = 0;
  double lower = 0.0;
  double upper = 0.0;
  double cost = 0.0;
  /// In-sample rates; absent for moment-based designs.
  std::optional<double> early_rate, late_rate;
  /// The DRO lower bound came out negative and was raised to 0.
  bool clamped = false;

  double width() const { return upper - lower; }
};

struct WindowPlan {
  std::vector<NodeId> route;
  std::vector<CustomerWindow> windows;  // route visit order
  std::optional<double> shared_width;
  double total_cost = 0.0;

  /// Window of customer k. Throws InputError when k has none.
  const CustomerWindow& window(NodeId k) const;
  std::vector<double> lowers() const;
  std::vector<double> uppers() const;
};

/// Duals of one customer's sample-average subproblem, unsorted sample order.
struct DualPair {
  NodeId customer = 0;
  std::vector<double> rho1, rho2;
  int p1 = 0, p2 = 0;
};

struct StochasticDesign {
  WindowPlan plan;
  std::vector<DualPair> duals;  // route visit order
};

/// 1-based sorted positions of the optimal SAA endpoints. Bounds within
/// 1e-12 of a_w count as reaching it. Throws "no valid quantile index" when
/// a_w exceeds a_l or a_u.
std::pair<int, int> critical_indices(int sample_count, double a_w, double a_l, double a_u);

/// a_w(u-l) + (a_l/Q)Σ(l-τ)⁺ + (a_u/Q)Σ(τ-u)⁺.
double saa_objective(std::span<const double> tau, const CustomerPenalty& pen, double lower,
                     double upper);

struct SaaWindow {
  double lower = 0.0, upper = 0.0, cost = 0.0;
  int p1 = 0, p2 = 0;
};

/// Closed-form optimum for one customer's arrival samples.
SaaWindow saa_window(std::span<const double> tau, const CustomerPenalty& pen);
/// Closed-form duals aligned with `tau`.
DualPair saa_duals(std::span<const double> tau, const CustomerPenalty& pen);
/// Exhaustive search over sample pairs; ties go to the narrower, then lower window.
SaaWindow brute_force_window(std::span<const double> tau, const CustomerPenalty& pen);

StochasticDesign design_from_arrivals(const kernels::ArrivalMatrix& arrivals,
                                      std::span<const NodeId> visits, const PenaltyConfig& pen);
StochasticDesign design_stochastic(const Route& route, const SampleSet& samples,
                                   const PenaltyConfig& pen);
/// Oracle for design_stochastic; Q <= 500.
WindowPlan brute_force_windows(const Route& route, const SampleSet& samples,
                               const PenaltyConfig& pen);

/// Largest candidate set design_fixed_width will sort.
inline constexpr std::size_t kMaxWidthCandidates = 10'000'000;

/// One shared width w for all customers; every pen entry must carry
/// a_w == a_w_shared. Throws InputError when the width candidate set is too
/// large (subsample first).
WindowPlan design_fixed_width(const Route& route, const SampleSet& samples,
                              const PenaltyConfig& pen, double a_w_shared);
/// Same result by scanning every candidate width. Test reference.
WindowPlan design_fixed_width_scan(const Route& route, const SampleSet& samples,
                                   const PenaltyConfig& pen, double a_w_shared);

struct FixedWidthResult {
  double width = 0.0;
  std::vector<double> lowers;
  std::vector<double> costs;
  double total_cost = 0.0;
};

/// Optimal shared width given per-customer arrival columns.
FixedWidthResult fixed_width_from_arrivals(const kernels::ArrivalMatrix& arrivals,
                                           std::span<const CustomerPenalty> pen, double a_w,
                                           bool full_scan = false);
/// min over l >= 0 of the fixed-width cost of one customer. Returns (l, cost).
std::pair<double, double> fixed_width_lower(std::span<const double> sorted_tau,
                                            std::span<const double> prefix_sums,
                                            const CustomerPenalty& pen, double a_w, double width);

double scarf_earliness(double lower, double mean, double variance);
double scarf_tardiness(double upper, double mean, double variance);
/// a_w(u-l) + a_l·scarf_earliness(l) + a_u·scarf_tardiness(u).
double scarf_cost(const CustomerPenalty& pen, double lower, double upper, double mean,
                  double variance);

/// Per-unit-σ worst-case cost of each side: √(a_w(a_l - a_w)), √(a_w(a_u - a_w)).
std::pair<double, double> gamma_coeffs(double a_w, double a_l, double a_u,
                                       bool allow_boundary = false);

struct DroWindow {
  double lower = 0.0, upper = 0.0, cost = 0.0;
  bool clamped = false;
};

/// Minimiser of scarf_cost over (l, u) for mean m and std sigma.
DroWindow dro_window(const CustomerPenalty& pen, double mean, double sigma,
                     bool allow_boundary = false);

WindowPlan design_dro(const Route& route, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                      double alpha2, const PenaltyConfig& pen);

}  // namespace twd

#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twd/instance.hpp"
#include "twd/penalties.hpp"

namespace twd {

/// Single-vehicle Hamiltonian circuit [0, c1, ..., cn, 0] plus its arc
/// indicator x and, per customer, the indicator y^k of the depot-to-k prefix.
class Route {
 public:
  const std::vector<NodeId>& seq() const { return seq_; }
  int customer_count() const { return static_cast<int>(seq_.size()) - 2; }
  /// Customers in visit order.
  std::span<const NodeId> visits() const { return {seq_.data() + 1, seq_.size() - 2}; }
  /// Tour arcs in order, the return arc last.
  std::span<const ArcId> arcs() const { return arcs_; }
  /// Arcs leading to the last customer (the return arc excluded).
  std::span<const ArcId> path() const { return {arcs_.data(), arcs_.size() - 1}; }
  /// Visit position (0-based) of customer k.
  int position(NodeId k) const { return position_[static_cast<std::size_t>(k)]; }
  std::span<const ArcId> prefix(NodeId k) const {
    return {arcs_.data(), static_cast<std::size_t>(position(k) + 1)};
  }

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y(NodeId k) const { return y_[static_cast<std::size_t>(k - 1)]; }
  const std::vector<std::vector<double>>& y_all() const { return y_; }

 private:
  friend Route route_to_xy(std::span<const NodeId> seq, const Network& net);
  std::vector<NodeId> seq_;
  std::vector<ArcId> arcs_;
  std::vector<int> position_;
  std::vector<double> x_;
  std::vector<std::vector<double>> y_;
};

/// Throws InputError naming the missing arc or repeated customer.
Route route_to_xy(std::span<const NodeId> seq, const Network& net);
inline Route route_to_xy(const std::vector<NodeId>& seq, const Network& net) {
  return route_to_xy(std::span<const NodeId>(seq), net);
}

/// Follows x from the depot. Throws InputError when x is not one circuit.
std::vector<NodeId> seq_from_x(std::span<const double> x, const Network& net);

struct MembershipViolation {
  char family;  // 'a'..'d' of the route polytope, 'x' for a non-binary entry
  int node = -1;
  int customer = -1;
  ArcId arc = -1;
  std::string message;
};

/// Lists every violated route-polytope constraint. On top of the literal
/// families it reports (c) for any customer that x cannot reach from the
/// depot, since no flow y^k can then exist.
std::vector<MembershipViolation> validate_membership(std::span<const double> x,
                                                     const std::vector<std::vector<double>>& y,
                                                     const Network& net);

/// (1/Q)·Σ_q Σ_a t_qa·x_a.
double budget_saa(std::span<const double> x, const SampleSet& samples);
/// μᵀx + √(α₁·xᵀCx).
double budget_dro(std::span<const double> x, const Eigen::VectorXd& mean,
                  const Eigen::MatrixXd& cov, double alpha1);

/// Σ_k of the optimal sample-average window cost given the route.
double route_cost_sm(const Route& route, const SampleSet& samples, const PenaltyConfig& pen);
/// Σ_k (Γ_l + Γ_u)·√(y^kᵀ(C + α₂I)y^k).
double route_cost_rm(const Route& route, const Eigen::MatrixXd& cov, double alpha2,
                     const PenaltyConfig& pen);

/// √(y_prefᵀ(C + α₂I)y_pref) where y_pref is the indicator of `arcs`.
double prefix_std(std::span<const ArcId> arcs, const Eigen::MatrixXd& cov, double alpha2);

}  // namespace twd

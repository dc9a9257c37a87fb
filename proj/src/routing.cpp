#include "twd/routing.hpp"

#include <cmath>
#include <string>

#include "twd/error.hpp"
#include "twd/window_design.hpp"

namespace twd {

namespace {

std::string pair_label(NodeId i, NodeId j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

bool is_one(double v) { return std::abs(v - 1.0) <= 1e-9; }
bool is_zero(double v) { return std::abs(v) <= 1e-9; }

}  // namespace

Route route_to_xy(std::span<const NodeId> seq, const Network& net) {
  if (seq.size() < 2 || seq.front() != 0 || seq.back() != 0)
    throw InputError("route: sequence must start and end at depot 0");
  if (seq.size() == 2) throw InputError("route: no customers");
  const int n = net.customer_count();
  Route r;
  r.position_.assign(static_cast<std::size_t>(net.node_count()), -1);
  for (std::size_t p = 1; p + 1 < seq.size(); ++p) {
    const NodeId k = seq[p];
    if (k < 1 || k > n) throw InputError("route: node " + std::to_string(k) + " is not a customer");
    auto& pos = r.position_[static_cast<std::size_t>(k)];
    if (pos >= 0) throw InputError("route: customer " + std::to_string(k) + " repeated");
    pos = static_cast<int>(p - 1);
  }
  for (NodeId k = 1; k <= n; ++k)
    if (r.position_[static_cast<std::size_t>(k)] < 0)
      throw InputError("route: customer " + std::to_string(k) + " not visited");
  r.seq_.assign(seq.begin(), seq.end());
  for (std::size_t p = 0; p + 1 < seq.size(); ++p) {
    const auto a = net.find_arc(seq[p], seq[p + 1]);
    if (!a) throw InputError("route: missing arc " + pair_label(seq[p], seq[p + 1]));
    r.arcs_.push_back(*a);
  }
  const auto m = static_cast<std::size_t>(net.arc_count());
  r.x_.assign(m, 0.0);
  for (ArcId a : r.arcs_) r.x_[static_cast<std::size_t>(a)] = 1.0;
  r.y_.assign(static_cast<std::size_t>(n), std::vector<double>(m, 0.0));
  for (NodeId k = 1; k <= n; ++k)
    for (ArcId a : r.prefix(k)) r.y_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(a)] = 1.0;
  return r;
}

std::vector<NodeId> seq_from_x(std::span<const double> x, const Network& net) {
  require(x.size() == static_cast<std::size_t>(net.arc_count()), "route: x has wrong length");
  std::vector<ArcId> next(static_cast<std::size_t>(net.node_count()), -1);
  for (ArcId a = 0; a < net.arc_count(); ++a) {
    const double v = x[static_cast<std::size_t>(a)];
    if (is_zero(v)) continue;
    if (!is_one(v)) throw InputError("route: x is not binary at arc " + net.arc_label(a));
    auto& slot = next[static_cast<std::size_t>(net.arc(a).from)];
    if (slot >= 0) throw InputError("route: node " + std::to_string(net.arc(a).from) + " has two successors");
    slot = a;
  }
  std::vector<NodeId> seq{0};
  NodeId cur = 0;
  for (int step = 0; step < net.node_count(); ++step) {
    const ArcId a = next[static_cast<std::size_t>(cur)];
    if (a < 0) throw InputError("route: node " + std::to_string(cur) + " has no successor");
    cur = net.arc(a).to;
    seq.push_back(cur);
    if (cur == 0) break;
  }
  if (seq.back() != 0 || static_cast<int>(seq.size()) != net.node_count() + 1)
    throw InputError("route: x is not a single circuit through every customer");
  route_to_xy(seq, net);
  return seq;
}

std::vector<MembershipViolation> validate_membership(std::span<const double> x,
                                                     const std::vector<std::vector<double>>& y,
                                                     const Network& net) {
  const auto m = static_cast<std::size_t>(net.arc_count());
  const int n = net.customer_count();
  require(x.size() == m, "validate_membership: x has wrong length");
  require(y.size() == static_cast<std::size_t>(n), "validate_membership: need one y per customer");
  for (const auto& yk : y) require(yk.size() == m, "validate_membership: y has wrong length");

  std::vector<MembershipViolation> out;
  for (ArcId a = 0; a < net.arc_count(); ++a) {
    const double v = x[static_cast<std::size_t>(a)];
    if (!is_zero(v) && !is_one(v))
      out.push_back({'x', -1, -1, a, "x[" + net.arc_label(a) + "] is not binary"});
  }
  std::vector<double> out_deg(static_cast<std::size_t>(net.node_count()), 0.0), in_deg = out_deg;
  for (ArcId a = 0; a < net.arc_count(); ++a) {
    out_deg[static_cast<std::size_t>(net.arc(a).from)] += x[static_cast<std::size_t>(a)];
    in_deg[static_cast<std::size_t>(net.arc(a).to)] += x[static_cast<std::size_t>(a)];
  }
  for (NodeId i = 0; i < net.node_count(); ++i) {
    if (!is_one(out_deg[static_cast<std::size_t>(i)]))
      out.push_back({'a', i, -1, -1, "node " + std::to_string(i) + " out-degree " +
                                         std::to_string(out_deg[static_cast<std::size_t>(i)])});
    if (!is_one(in_deg[static_cast<std::size_t>(i)]))
      out.push_back({'b', i, -1, -1, "node " + std::to_string(i) + " in-degree " +
                                         std::to_string(in_deg[static_cast<std::size_t>(i)])});
  }

  for (NodeId k = 1; k <= n; ++k) {
    const auto& yk = y[static_cast<std::size_t>(k - 1)];
    std::vector<double> balance(static_cast<std::size_t>(net.node_count()), 0.0);
    for (ArcId a = 0; a < net.arc_count(); ++a) {
      const double v = yk[static_cast<std::size_t>(a)];
      if (v < -1e-9)
        out.push_back({'y', -1, k, a, "y^" + std::to_string(k) + "[" + net.arc_label(a) + "] negative"});
      balance[static_cast<std::size_t>(net.arc(a).from)] += v;
      balance[static_cast<std::size_t>(net.arc(a).to)] -= v;
      if (v > x[static_cast<std::size_t>(a)] + 1e-9)
        out.push_back({'d', -1, k, a,
                       "y^" + std::to_string(k) + "[" + net.arc_label(a) + "] exceeds x"});
    }
    for (NodeId i = 0; i < net.node_count(); ++i) {
      const double rhs = i == 0 ? 1.0 : (i == k ? -1.0 : 0.0);
      if (std::abs(balance[static_cast<std::size_t>(i)] - rhs) > 1e-9)
        out.push_back({'c', i, k, -1,
                       "flow of y^" + std::to_string(k) + " unbalanced at node " + std::to_string(i)});
    }
  }

  // No flow y^k <= x can reach a customer that x does not connect to the depot.
  std::vector<char> seen(static_cast<std::size_t>(net.node_count()), 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const NodeId i = stack.back();
    stack.pop_back();
    for (ArcId a = 0; a < net.arc_count(); ++a) {
      const auto& arc = net.arc(a);
      if (arc.from == i && x[static_cast<std::size_t>(a)] > 1e-9 && !seen[static_cast<std::size_t>(arc.to)]) {
        seen[static_cast<std::size_t>(arc.to)] = 1;
        stack.push_back(arc.to);
      }
    }
  }
  for (NodeId k = 1; k <= n; ++k)
    if (!seen[static_cast<std::size_t>(k)])
      out.push_back({'c', k, k, -1,
                     "customer " + std::to_string(k) + " is unreachable from the depot along x"});
  return out;
}

double budget_saa(std::span<const double> x, const SampleSet& samples) {
  require(x.size() == static_cast<std::size_t>(samples.arc_count()), "budget: x has wrong length");
  if (samples.count() < 1) throw InputError("budget: no samples");
  double total = 0.0;
  for (int q = 0; q < samples.count(); ++q) {
    double row = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a)
      if (x[a] != 0.0) row += samples.values(q, static_cast<Eigen::Index>(a)) * x[a];
    total += row;
  }
  return total / samples.count();
}

double budget_dro(std::span<const double> x, const Eigen::VectorXd& mean,
                  const Eigen::MatrixXd& cov, double alpha1) {
  if (!(alpha1 >= 0.0)) throw InputError("alpha1: must be nonnegative");
  const auto m = static_cast<Eigen::Index>(x.size());
  require(mean.size() == m && cov.rows() == m && cov.cols() == m, "budget: dimension mismatch");
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), m);
  const double quad = xv.dot(cov * xv);
  return mean.dot(xv) + std::sqrt(alpha1 * std::max(quad, 0.0));
}

double prefix_std(std::span<const ArcId> arcs, const Eigen::MatrixXd& cov, double alpha2) {
  double v = 0.0;
  for (ArcId a : arcs)
    for (ArcId b : arcs) v += cov(a, b);
  v += alpha2 * static_cast<double>(arcs.size());
  return std::sqrt(std::max(v, 0.0));
}

double route_cost_sm(const Route& route, const SampleSet& samples, const PenaltyConfig& pen) {
  return design_stochastic(route, samples, pen).plan.total_cost;
}

double route_cost_rm(const Route& route, const Eigen::MatrixXd& cov, double alpha2,
                     const PenaltyConfig& pen) {
  if (!(alpha2 >= 0.0)) throw InputError("alpha2: must be nonnegative");
  pen.validate();
  double total = 0.0;
  for (NodeId k : route.visits()) {
    const auto& p = pen.at(k);
    const auto [g_l, g_u] = gamma_coeffs(p.a_w, p.a_l, p.a_u, pen.allow_dro_boundary);
    total += (g_l + g_u) * prefix_std(route.prefix(k), cov, alpha2);
  }
  return total;
}

}  // namespace twd

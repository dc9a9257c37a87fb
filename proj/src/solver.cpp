#include "twd/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>

#include "twd/error.hpp"

namespace twd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double tie_tol(double v) { return 1e-12 * std::max(1.0, std::abs(v)); }

double budget_slack(double tb) { return std::isfinite(tb) ? 1e-9 * std::max(1.0, std::abs(tb)) : 0.0; }

void check_model(const Network& net, const ModelSpec& model, const PenaltyConfig& pen) {
  if (pen.customer_count() != net.customer_count())
    throw InputError("penalties: expected " + std::to_string(net.customer_count()) + " customers, got " +
                     std::to_string(pen.customer_count()));
  pen.validate();
  if (model.kind == ModelKind::sm) {
    if (!model.samples) throw InputError("model sm: samples required");
    if (model.samples->count() < 1) throw InputError("model sm: Q must be at least 1");
    if (model.samples->arc_count() != net.arc_count())
      throw InputError("model sm: sample columns do not match network arcs");
  } else {
    if (!(model.alpha1 >= 0.0)) throw InputError("alpha1: must be nonnegative");
    if (!(model.alpha2 >= 0.0)) throw InputError("alpha2: must be nonnegative");
    if (!pen.dro_valid())
      throw InputError("penalties outside the DRO domain: 2*a_w must be below min(a_l, a_u)");
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

[[noreturn]] void throw_budget(double min_budget, double tb) {
  throw InfeasibleError("budget infeasible: minimum achievable budget value " + fmt(min_budget) +
                        " exceeds time budget " + fmt(tb));
}

[[noreturn]] void throw_no_circuit() {
  throw InfeasibleError("budget infeasible: no Hamiltonian circuit through every customer exists");
}

// Per-arc additive budget weights: sample means (sm) or μ̂ (rm).
std::vector<double> budget_weights(const Network& net, const ModelSpec& model) {
  std::vector<double> w(static_cast<std::size_t>(net.arc_count()));
  if (model.kind == ModelKind::sm) {
    const Eigen::VectorXd m = model.samples->column_means();
    for (ArcId a = 0; a < net.arc_count(); ++a) w[static_cast<std::size_t>(a)] = m[a];
  } else {
    for (ArcId a = 0; a < net.arc_count(); ++a) w[static_cast<std::size_t>(a)] = net.mean()[a];
  }
  return w;
}

struct SearchData {
  const Network& net;
  const ModelSpec& model;
  const PenaltyConfig& pen;
  int n = 0;
  double tb = kInf;
  std::vector<std::vector<ArcId>> out;  // per node, ascending head
  std::vector<double> weight;           // additive budget weight per arc
  std::vector<double> min_in;           // per node, cheapest incoming weight
  double min_return = kInf;
  Eigen::MatrixXd samples_col;          // sm, column-major copy
  Eigen::MatrixXd rcov;                 // rm
  std::vector<double> gamma;            // rm, Γ_l + Γ_u per customer

  SearchData(const Network& net_, const ModelSpec& model_, const PenaltyConfig& pen_)
      : net(net_), model(model_), pen(pen_), n(net_.customer_count()), tb(net_.time_budget()) {
    out.resize(static_cast<std::size_t>(net.node_count()));
    for (ArcId a = 0; a < net.arc_count(); ++a) out[static_cast<std::size_t>(net.arc(a).from)].push_back(a);
    for (auto& v : out)
      std::sort(v.begin(), v.end(), [&](ArcId a, ArcId b) { return net.arc(a).to < net.arc(b).to; });
    weight = budget_weights(net, model);
    min_in.assign(static_cast<std::size_t>(net.node_count()), kInf);
    for (ArcId a = 0; a < net.arc_count(); ++a) {
      auto& m = min_in[static_cast<std::size_t>(net.arc(a).to)];
      m = std::min(m, weight[static_cast<std::size_t>(a)]);
    }
    min_return = min_in[0];
    if (model.kind == ModelKind::sm) {
      samples_col = model.samples->values;
    } else {
      rcov = robust_covariance(net.cov(), model.alpha2);
      for (NodeId k = 1; k <= n; ++k) {
        const auto& p = pen.at(k);
        const auto [gl, gu] = gamma_coeffs(p.a_w, p.a_l, p.a_u, pen.allow_dro_boundary);
        gamma.push_back(gl + gu);
      }
    }
  }
};

struct Incumbent {
  std::mutex mu;
  std::atomic<double> best{kInf};
  std::vector<NodeId> seq;
  double budget = 0.0;

  double load() const { return best.load(std::memory_order_relaxed); }
};

bool improves(double cost, const std::vector<NodeId>& seq, double best,
              const std::vector<NodeId>& best_seq) {
  if (best_seq.empty()) return true;
  if (cost < best - tie_tol(best)) return true;
  return cost <= best + tie_tol(best) && seq < best_seq;
}

class Searcher {
 public:
  Searcher(const SearchData& d, Incumbent& inc, const SolveOptions& opt)
      : d_(d), inc_(inc), opt_(opt) {
    const auto depth = static_cast<std::size_t>(d.n) + 1;
    visited_.assign(static_cast<std::size_t>(d.net.node_count()), 0);
    path_.reserve(depth);
    seq_.assign(1, 0);
    if (d.model.kind == ModelKind::sm) {
      const auto q = static_cast<std::size_t>(d.model.samples->count());
      arrivals_.assign(depth, std::vector<double>(q, 0.0));
    } else {
      quad_.assign(depth, 0.0);
    }
    rem_in_ = 0.0;
    for (NodeId k = 1; k <= d.n; ++k) rem_in_ += d.min_in[static_cast<std::size_t>(k)];
  }

  std::int64_t nodes = 0, pruned = 0;

  /// Explores the subtree below the depot arc `first`.
  void run_from(ArcId first) {
    visited_[0] = 1;
    step(first, 0.0, 0.0);
  }

  void run_all() {
    visited_[0] = 1;
    ++nodes;
    for (ArcId a : d_.out[0]) step(a, 0.0, 0.0);
  }

 private:
  // Extends the partial tour by arc a (ending at a customer).
  void step(ArcId a, double acc, double bmean) {
    const NodeId k = d_.net.arc(a).to;
    if (k == 0 || visited_[static_cast<std::size_t>(k)]) return;
    const std::size_t depth = path_.size();  // 0-based position of k
    const double bmean2 = bmean + d_.weight[static_cast<std::size_t>(a)];
    const double rem_in2 = rem_in_ - d_.min_in[static_cast<std::size_t>(k)];
    if (opt_.prune_budget && std::isfinite(d_.tb) &&
        bmean2 + rem_in2 + d_.min_return > d_.tb + budget_slack(d_.tb)) {
      ++pruned;
      return;
    }
    const double c = place_cost(a, k, depth);
    const double acc2 = acc + c;
    if (opt_.prune_bound) {
      const double best = inc_.load();
      if (acc2 > best + tie_tol(best)) {
        ++pruned;
        return;
      }
    }
    ++nodes;
    visited_[static_cast<std::size_t>(k)] = 1;
    path_.push_back(a);
    seq_.push_back(k);
    const double saved = rem_in_;
    rem_in_ = rem_in2;
    if (static_cast<int>(seq_.size()) - 1 == d_.n) {
      close(k, acc2, bmean2);
    } else {
      for (ArcId b : d_.out[static_cast<std::size_t>(k)]) step(b, acc2, bmean2);
    }
    rem_in_ = saved;
    seq_.pop_back();
    path_.pop_back();
    visited_[static_cast<std::size_t>(k)] = 0;
  }

  double place_cost(ArcId a, NodeId k, std::size_t depth) {
    if (d_.model.kind == ModelKind::sm) {
      auto& tau = arrivals_[depth];
      const auto col = d_.samples_col.col(a);
      if (depth == 0) {
        for (std::size_t q = 0; q < tau.size(); ++q) tau[q] = 0.0 + col[static_cast<Eigen::Index>(q)];
      } else {
        const auto& prev = arrivals_[depth - 1];
        for (std::size_t q = 0; q < tau.size(); ++q) tau[q] = prev[q] + col[static_cast<Eigen::Index>(q)];
      }
      return saa_window(tau, d_.pen.at(k)).cost;
    }
    double add = d_.rcov(a, a);
    for (ArcId b : path_) add += 2.0 * d_.rcov(a, b);
    const double quad = (depth == 0 ? 0.0 : quad_[depth - 1]) + add;
    quad_[depth] = quad;
    return d_.gamma[static_cast<std::size_t>(k - 1)] * std::sqrt(std::max(quad, 0.0));
  }

  void close(NodeId last, double cost, double bmean) {
    const auto ret = d_.net.find_arc(last, 0);
    if (!ret) return;
    const double approx = bmean + d_.weight[static_cast<std::size_t>(*ret)];
    if (std::isfinite(d_.tb) && approx > d_.tb + budget_slack(d_.tb)) return;
    seq_.push_back(0);
    {
      std::lock_guard<std::mutex> lock(inc_.mu);
      if (improves(cost, seq_, inc_.load(), inc_.seq)) {
        const Route r = route_to_xy(seq_, d_.net);
        const double b = route_budget(d_.net, r, d_.model);
        if (b <= d_.tb) {
          inc_.seq = seq_;
          inc_.budget = b;
          inc_.best.store(cost, std::memory_order_relaxed);
        }
      }
    }
    seq_.pop_back();
  }

  const SearchData& d_;
  Incumbent& inc_;
  const SolveOptions& opt_;
  std::vector<char> visited_;
  std::vector<ArcId> path_;
  std::vector<NodeId> seq_;
  std::vector<std::vector<double>> arrivals_;
  std::vector<double> quad_;
  double rem_in_ = 0.0;
};

// Smallest exact budget value over all Hamiltonian circuits (kInf if none).
double min_budget_value(const SearchData& d) {
  double best = kInf;
  std::vector<char> visited(static_cast<std::size_t>(d.net.node_count()), 0);
  std::vector<NodeId> seq{0};
  visited[0] = 1;
  auto dfs = [&](auto&& self, NodeId cur, double bmean, double rem_in) -> void {
    if (static_cast<int>(seq.size()) - 1 == d.n) {
      if (!d.net.find_arc(cur, 0)) return;
      seq.push_back(0);
      best = std::min(best, route_budget(d.net, route_to_xy(seq, d.net), d.model));
      seq.pop_back();
      return;
    }
    for (ArcId a : d.out[static_cast<std::size_t>(cur)]) {
      const NodeId k = d.net.arc(a).to;
      if (k == 0 || visited[static_cast<std::size_t>(k)]) continue;
      const double b = bmean + d.weight[static_cast<std::size_t>(a)];
      const double r = rem_in - d.min_in[static_cast<std::size_t>(k)];
      if (b + r + d.min_return > best + budget_slack(best)) continue;
      visited[static_cast<std::size_t>(k)] = 1;
      seq.push_back(k);
      self(self, k, b, r);
      seq.pop_back();
      visited[static_cast<std::size_t>(k)] = 0;
    }
  };
  double rem = 0.0;
  for (NodeId k = 1; k <= d.n; ++k) rem += d.min_in[static_cast<std::size_t>(k)];
  dfs(dfs, 0, 0.0, rem);
  return best;
}

SolveResult finish(const Network& net, const ModelSpec& model, const PenaltyConfig& pen,
                   std::vector<NodeId> seq, double budget) {
  SolveResult r;
  const Route route = route_to_xy(seq, net);
  r.route = std::move(seq);
  r.plan = route_plan(net, route, model, pen);
  r.objective = route_objective(net, route, model, pen);
  r.budget_value = budget;
  r.proof_of_optimality = true;
  return r;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double route_budget(const Network& net, const Route& route, const ModelSpec& model) {
  if (model.kind == ModelKind::sm) {
    if (!model.samples) throw InputError("model sm: samples required");
    return budget_saa(route.x(), *model.samples);
  }
  return budget_dro(route.x(), net.mean(), net.cov(), model.alpha1);
}

double route_objective(const Network& net, const Route& route, const ModelSpec& model,
                       const PenaltyConfig& pen) {
  if (model.kind == ModelKind::sm) {
    if (!model.samples) throw InputError("model sm: samples required");
    return route_cost_sm(route, *model.samples, pen);
  }
  return route_cost_rm(route, net.cov(), model.alpha2, pen);
}

WindowPlan route_plan(const Network& net, const Route& route, const ModelSpec& model,
                      const PenaltyConfig& pen) {
  if (model.kind == ModelKind::sm) {
    if (!model.samples) throw InputError("model sm: samples required");
    return design_stochastic(route, *model.samples, pen).plan;
  }
  return design_dro(route, net.mean(), net.cov(), model.alpha2, pen);
}

SolveResult enumerate_exact(const Network& net, const ModelSpec& model, const PenaltyConfig& pen) {
  const auto t0 = std::chrono::steady_clock::now();
  check_model(net, model, pen);
  const int n = net.customer_count();
  if (n > 9) throw InputError("enumerate_exact: at most 9 customers");
  std::vector<NodeId> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 1);
  std::vector<NodeId> seq(static_cast<std::size_t>(n) + 2, 0);
  std::vector<NodeId> best_seq;
  double best = kInf, best_budget = 0.0, min_budget = kInf;
  std::int64_t count = 0;
  do {
    std::copy(perm.begin(), perm.end(), seq.begin() + 1);
    bool ok = true;
    for (std::size_t p = 0; p + 1 < seq.size() && ok; ++p) ok = net.find_arc(seq[p], seq[p + 1]).has_value();
    if (!ok) continue;
    ++count;
    const Route r = route_to_xy(seq, net);
    const double b = route_budget(net, r, model);
    min_budget = std::min(min_budget, b);
    if (!(b <= net.time_budget())) continue;
    const double c = route_objective(net, r, model, pen);
    if (improves(c, seq, best, best_seq)) {
      best = c;
      best_seq = seq;
      best_budget = b;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (count == 0) throw_no_circuit();
  if (best_seq.empty()) throw_budget(min_budget, net.time_budget());
  SolveResult r = finish(net, model, pen, best_seq, best_budget);
  r.node_count = count;
  r.wall_time = seconds_since(t0);
  return r;
}

SolveResult branch_and_bound(const Network& net, const ModelSpec& model, const PenaltyConfig& pen,
                             const SolveOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  check_model(net, model, pen);
  if (options.threads < 1) throw InputError("threads: must be at least 1");
  const SearchData data(net, model, pen);
  Incumbent inc;
  if (options.initial_route) {
    const Route r = route_to_xy(*options.initial_route, net);
    const double b = route_budget(net, r, model);
    if (b <= net.time_budget()) {
      inc.seq = r.seq();
      inc.budget = b;
      inc.best.store(route_objective(net, r, model, pen));
    }
  }

  std::int64_t nodes = 0, pruned = 0;
  if (options.threads == 1) {
    Searcher s(data, inc, options);
    s.run_all();
    nodes = s.nodes;
    pruned = s.pruned;
  } else {
    const auto& first = data.out[0];
    const int m = static_cast<int>(first.size());
    nodes = 1;
#pragma omp parallel for schedule(dynamic, 1) num_threads(options.threads) reduction(+ : nodes, pruned)
    for (int i = 0; i < m; ++i) {
      Searcher s(data, inc, options);
      s.run_from(first[static_cast<std::size_t>(i)]);
      nodes += s.nodes;
      pruned += s.pruned;
    }
  }

  if (inc.seq.empty()) {
    const double mb = min_budget_value(data);
    if (!std::isfinite(mb)) throw_no_circuit();
    throw_budget(mb, net.time_budget());
  }
  SolveResult r = finish(net, model, pen, inc.seq, inc.budget);
  r.node_count = nodes;
  r.pruned_count = pruned;
  r.node_counts_approximate = options.threads > 1;
  r.wall_time = seconds_since(t0);
  return r;
}

}  // namespace twd

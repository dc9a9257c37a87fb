#include "twd/window_design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "twd/error.hpp"

namespace twd {

namespace {

constexpr double kIndexTol = 1e-12;

std::string customer_tag(int k) { return "customer " + std::to_string(k); }

}  // namespace

// --- penalties ------------------------------------------------------------

PenaltyConfig PenaltyConfig::uniform(int customer_count, CustomerPenalty p) {
  require(customer_count >= 1, "penalties: need at least one customer");
  PenaltyConfig c;
  c.customers.assign(static_cast<std::size_t>(customer_count), p);
  return c;
}

const CustomerPenalty& PenaltyConfig::at(int customer) const {
  if (customer < 1 || customer > customer_count())
    throw InputError("penalties: no entry for " + customer_tag(customer));
  return customers[static_cast<std::size_t>(customer - 1)];
}

PenaltyConfig PenaltyConfig::scaled(double lambda) const {
  PenaltyConfig c = *this;
  for (auto& p : c.customers) p = p.scaled(lambda);
  return c;
}

void PenaltyConfig::validate() const {
  if (customers.empty()) throw InputError("penalties: empty");
  for (int k = 1; k <= customer_count(); ++k) {
    const auto& p = at(k);
    const std::string tag = "penalties[" + std::to_string(k) + "]";
    if (!(p.a_w >= 0.0 && p.a_w <= 1.0)) throw InputError(tag + ".a_w: outside [0, 1]");
    if (!(p.a_l > 0.0 && p.a_l <= 1.0)) throw InputError(tag + ".a_l: outside (0, 1]");
    if (!(p.a_u > 0.0 && p.a_u <= 1.0)) throw InputError(tag + ".a_u: outside (0, 1]");
    if (p.a_w / p.a_l + p.a_w / p.a_u > 1.0 + kIndexTol)
      throw InputError(tag + ": a_w/a_l + a_w/a_u exceeds 1");
  }
}

bool dro_valid(const CustomerPenalty& p, bool allow_boundary) {
  const double lim = std::min(p.a_l, p.a_u);
  if (!(p.a_w > 0.0)) return false;
  return allow_boundary ? 2.0 * p.a_w <= lim : 2.0 * p.a_w < lim;
}

bool PenaltyConfig::dro_valid() const {
  return std::all_of(customers.begin(), customers.end(),
                     [&](const CustomerPenalty& p) { return twd::dro_valid(p, allow_dro_boundary); });
}

PenaltyConfig penalties_from_beta(double beta_l, double beta_u, int customer_count) {
  if (!(beta_l > 0.0) || !std::isfinite(beta_l)) throw InputError("beta_l: must be positive");
  if (!(beta_u > 0.0) || !std::isfinite(beta_u)) throw InputError("beta_u: must be positive");
  if (beta_l + beta_u > 1.0) throw InputError("infeasible confidence: beta_l + beta_u > 1");
  const double a_w = std::min(beta_l, beta_u);
  return PenaltyConfig::uniform(customer_count, {a_w, a_w / beta_l, a_w / beta_u});
}

// --- window plans ---------------------------------------------------------

const CustomerWindow& WindowPlan::window(NodeId k) const {
  for (const auto& w : windows)
    if (w.customer == k) return w;
  throw InputError("plan: no window for " + customer_tag(k));
}

std::vector<double> WindowPlan::lowers() const {
  std::vector<double> v;
  for (const auto& w : windows) v.push_back(w.lower);
  return v;
}

std::vector<double> WindowPlan::uppers() const {
  std::vector<double> v;
  for (const auto& w : windows) v.push_back(w.upper);
  return v;
}

// --- sample-average design ------------------------------------------------

std::pair<int, int> critical_indices(int sample_count, double a_w, double a_l, double a_u) {
  require(sample_count >= 1, "critical_indices: Q must be at least 1");
  if (a_w > a_l + kIndexTol || a_w > a_u + kIndexTol)
    throw InputError("no valid quantile index: a_w exceeds a_l or a_u");
  const int q = sample_count;
  auto smallest = [&](double a) {
    int lo = 1, hi = q;
    while (lo < hi) {
      const int mid = lo + (hi - lo) / 2;
      if (a_w <= mid * a / q + kIndexTol)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  };
  const int p1 = smallest(a_l);
  const int p2 = q - smallest(a_u) + 1;
  if (p1 > p2) throw InputError("no valid quantile index: a_w/a_l + a_w/a_u exceeds 1");
  return {p1, p2};
}

double saa_objective(std::span<const double> tau, const CustomerPenalty& pen, double lower,
                     double upper) {
  double early = 0.0, late = 0.0;
  for (double t : tau) {
    if (t < lower) early += lower - t;
    if (t > upper) late += t - upper;
  }
  const double q = static_cast<double>(tau.size());
  return pen.a_w * (upper - lower) + pen.a_l * early / q + pen.a_u * late / q;
}

SaaWindow saa_window(std::span<const double> tau, const CustomerPenalty& pen) {
  if (tau.empty()) throw InputError("design: no samples");
  const auto [p1, p2] = critical_indices(static_cast<int>(tau.size()), pen.a_w, pen.a_l, pen.a_u);
  std::vector<double> v(tau.begin(), tau.end());
  auto i1 = v.begin() + (p1 - 1);
  std::nth_element(v.begin(), i1, v.end());
  auto i2 = v.begin() + (p2 - 1);
  if (i2 != i1) std::nth_element(i1 + 1, i2, v.end());
  SaaWindow w;
  w.lower = *i1;
  w.upper = *i2;
  w.p1 = p1;
  w.p2 = p2;
  w.cost = saa_objective(tau, pen, w.lower, w.upper);
  return w;
}

DualPair saa_duals(std::span<const double> tau, const CustomerPenalty& pen) {
  if (tau.empty()) throw InputError("design: no samples");
  const int q = static_cast<int>(tau.size());
  const auto [p1, p2] = critical_indices(q, pen.a_w, pen.a_l, pen.a_u);
  std::vector<int> order(static_cast<std::size_t>(q));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return tau[a] < tau[b]; });

  DualPair d;
  d.p1 = p1;
  d.p2 = p2;
  d.rho1.assign(static_cast<std::size_t>(q), 0.0);
  d.rho2.assign(static_cast<std::size_t>(q), 0.0);
  const double cap_l = pen.a_l / q, cap_u = pen.a_u / q;
  double sum = 0.0;
  for (int i = 0; i < p1 - 1; ++i) {
    d.rho1[static_cast<std::size_t>(order[i])] = cap_l;
    sum += cap_l;
  }
  d.rho1[static_cast<std::size_t>(order[p1 - 1])] = pen.a_w - sum;
  sum = 0.0;
  for (int i = q - 1; i > p2 - 1; --i) {
    d.rho2[static_cast<std::size_t>(order[i])] = cap_u;
    sum += cap_u;
  }
  d.rho2[static_cast<std::size_t>(order[p2 - 1])] = pen.a_w - sum;
  return d;
}

SaaWindow brute_force_window(std::span<const double> tau, const CustomerPenalty& pen) {
  if (tau.empty()) throw InputError("design: no samples");
  std::vector<double> cand(tau.begin(), tau.end());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  SaaWindow best;
  bool have = false;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    for (std::size_t j = i; j < cand.size(); ++j) {
      const double c = saa_objective(tau, pen, cand[i], cand[j]);
      const double width = cand[j] - cand[i];
      const bool better =
          !have || c < best.cost ||
          (c == best.cost && (width < best.upper - best.lower ||
                              (width == best.upper - best.lower && cand[i] < best.lower)));
      if (better) {
        best.lower = cand[i];
        best.upper = cand[j];
        best.cost = c;
        have = true;
      }
    }
  }
  return best;
}

namespace {

CustomerWindow saa_customer_window(NodeId k, std::span<const double> tau, const SaaWindow& w) {
  CustomerWindow cw;
  cw.customer = k;
  cw.lower = w.lower;
  cw.upper = w.upper;
  cw.cost = w.cost;
  std::int64_t early = 0, late = 0;
  for (double t : tau) {
    early += t < w.lower;
    late += t > w.upper;
  }
  const double q = static_cast<double>(tau.size());
  cw.early_rate = static_cast<double>(early) / q;
  cw.late_rate = static_cast<double>(late) / q;
  return cw;
}

std::span<const double> column(const kernels::ArrivalMatrix& m, Eigen::Index p) {
  return {m.col(p).data(), static_cast<std::size_t>(m.rows())};
}

void check_route_samples(const Route& route, const SampleSet& samples) {
  if (route.customer_count() < 1) throw InputError("design: empty route");
  if (samples.count() < 1) throw InputError("design: Q must be at least 1");
  for (ArcId a : route.arcs())
    if (a >= samples.arc_count()) throw InputError("design: samples do not cover the route arcs");
}

}  // namespace

StochasticDesign design_from_arrivals(const kernels::ArrivalMatrix& arrivals,
                                      std::span<const NodeId> visits, const PenaltyConfig& pen) {
  require(static_cast<std::size_t>(arrivals.cols()) == visits.size(),
          "design: arrival columns do not match route");
  if (arrivals.rows() < 1) throw InputError("design: Q must be at least 1");
  pen.validate();
  StochasticDesign out;
  out.plan.route.push_back(0);
  for (std::size_t p = 0; p < visits.size(); ++p) {
    const NodeId k = visits[p];
    const auto tau = column(arrivals, static_cast<Eigen::Index>(p));
    const auto& cp = pen.at(k);
    const SaaWindow w = saa_window(tau, cp);
    out.plan.windows.push_back(saa_customer_window(k, tau, w));
    out.plan.total_cost += w.cost;
    DualPair d = saa_duals(tau, cp);
    d.customer = k;
    out.duals.push_back(std::move(d));
    out.plan.route.push_back(k);
  }
  out.plan.route.push_back(0);
  return out;
}

StochasticDesign design_stochastic(const Route& route, const SampleSet& samples,
                                   const PenaltyConfig& pen) {
  check_route_samples(route, samples);
  const auto arrivals = kernels::arrival_times(route.path(), samples.values);
  StochasticDesign d = design_from_arrivals(arrivals, route.visits(), pen);
  d.plan.route = route.seq();
  return d;
}

WindowPlan brute_force_windows(const Route& route, const SampleSet& samples,
                               const PenaltyConfig& pen) {
  check_route_samples(route, samples);
  if (samples.count() > 500) throw InputError("brute_force_windows: Q above 500");
  pen.validate();
  const auto arrivals = kernels::arrival_times_serial(route.path(), samples.values);
  WindowPlan plan;
  plan.route = route.seq();
  const auto visits = route.visits();
  for (std::size_t p = 0; p < visits.size(); ++p) {
    const auto tau = column(arrivals, static_cast<Eigen::Index>(p));
    const SaaWindow w = brute_force_window(tau, pen.at(visits[p]));
    plan.windows.push_back(saa_customer_window(visits[p], tau, w));
    plan.total_cost += w.cost;
  }
  return plan;
}

// --- moment-based design --------------------------------------------------

double scarf_earliness(double lower, double mean, double variance) {
  const double d = lower - mean;
  return 0.5 * (d + std::sqrt(variance + d * d));
}

double scarf_tardiness(double upper, double mean, double variance) {
  const double d = mean - upper;
  return 0.5 * (d + std::sqrt(variance + d * d));
}

double scarf_cost(const CustomerPenalty& pen, double lower, double upper, double mean,
                  double variance) {
  return pen.a_w * (upper - lower) + pen.a_l * scarf_earliness(lower, mean, variance) +
         pen.a_u * scarf_tardiness(upper, mean, variance);
}

namespace {

// Offset of the optimal endpoint from the mean, per unit σ.
double wing(double a_w, double a_side) {
  const double c = 1.0 - 2.0 * a_w / a_side;
  if (!(c > -1.0 && c < 1.0)) throw InputError("coefficient domain: need 0 < a_w < a_l, a_u");
  return c / std::sqrt(1.0 - c * c);
}

void check_dro(const CustomerPenalty& p, bool allow_boundary) {
  if (!(p.a_w > 0.0) || !(p.a_w < p.a_l) || !(p.a_w < p.a_u))
    throw InputError("coefficient domain: need 0 < a_w < a_l, a_u");
  if (!dro_valid(p, allow_boundary))
    throw InputError("penalties outside the DRO domain: 2*a_w must be below min(a_l, a_u)");
}

}  // namespace

std::pair<double, double> gamma_coeffs(double a_w, double a_l, double a_u, bool allow_boundary) {
  check_dro({a_w, a_l, a_u}, allow_boundary);
  return {std::sqrt(a_w * (a_l - a_w)), std::sqrt(a_w * (a_u - a_w))};
}

DroWindow dro_window(const CustomerPenalty& pen, double mean, double sigma, bool allow_boundary) {
  require(sigma >= 0.0 && std::isfinite(sigma), "design_dro: invalid standard deviation");
  const auto [g_l, g_u] = gamma_coeffs(pen.a_w, pen.a_l, pen.a_u, allow_boundary);
  DroWindow w;
  w.lower = mean - sigma * wing(pen.a_w, pen.a_l);
  w.upper = mean + sigma * wing(pen.a_w, pen.a_u);
  w.cost = (g_l + g_u) * sigma;
  if (w.lower < 0.0) {
    w.lower = 0.0;
    w.clamped = true;
    w.cost = scarf_cost(pen, w.lower, w.upper, mean, sigma * sigma);
  }
  return w;
}

WindowPlan design_dro(const Route& route, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                      double alpha2, const PenaltyConfig& pen) {
  if (route.customer_count() < 1) throw InputError("design: empty route");
  if (!(alpha2 >= 0.0)) throw InputError("alpha2: must be nonnegative");
  pen.validate();
  if (!pen.dro_valid())
    throw InputError("penalties outside the DRO domain: 2*a_w must be below min(a_l, a_u)");
  WindowPlan plan;
  plan.route = route.seq();
  for (NodeId k : route.visits()) {
    const auto prefix = route.prefix(k);
    double m = 0.0;
    for (ArcId a : prefix) m += mean[a];
    const double sigma = prefix_std(prefix, cov, alpha2);
    const DroWindow w = dro_window(pen.at(k), m, sigma, pen.allow_dro_boundary);
    CustomerWindow cw;
    cw.customer = k;
    cw.lower = w.lower;
    cw.upper = w.upper;
    cw.cost = w.cost;
    cw.clamped = w.clamped;
    plan.windows.push_back(cw);
    plan.total_cost += w.cost;
  }
  return plan;
}

}  // namespace twd

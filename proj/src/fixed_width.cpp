#include <algorithm>
#include <cmath>

#include "twd/error.hpp"
#include "twd/window_design.hpp"

namespace twd {

namespace {

struct SortedColumn {
  std::vector<double> tau;     // ascending
  std::vector<double> prefix;  // prefix[i] = tau[0] + ... + tau[i-1]
};

SortedColumn sorted_column(const kernels::ArrivalMatrix& m, Eigen::Index p) {
  SortedColumn c;
  c.tau.assign(m.col(p).data(), m.col(p).data() + m.rows());
  std::sort(c.tau.begin(), c.tau.end());
  c.prefix.assign(c.tau.size() + 1, 0.0);
  for (std::size_t i = 0; i < c.tau.size(); ++i) c.prefix[i + 1] = c.prefix[i] + c.tau[i];
  return c;
}

double cost_at(std::span<const double> tau, std::span<const double> prefix,
               const CustomerPenalty& pen, double a_w, double lower, double width) {
  const double q = static_cast<double>(tau.size());
  const double upper = lower + width;
  const auto c = static_cast<std::size_t>(std::lower_bound(tau.begin(), tau.end(), lower) - tau.begin());
  const auto j = static_cast<std::size_t>(std::upper_bound(tau.begin(), tau.end(), upper) - tau.begin());
  const double early = static_cast<double>(c) * lower - prefix[c];
  const double late = (prefix[tau.size()] - prefix[j]) - static_cast<double>(tau.size() - j) * upper;
  return a_w * width + pen.a_l * std::max(early, 0.0) / q + pen.a_u * std::max(late, 0.0) / q;
}

}  // namespace

std::pair<double, double> fixed_width_lower(std::span<const double> sorted_tau,
                                            std::span<const double> prefix_sums,
                                            const CustomerPenalty& pen, double a_w, double width) {
  double best_l = 0.0;
  double best = cost_at(sorted_tau, prefix_sums, pen, a_w, 0.0, width);
  auto consider = [&](double l) {
    if (l < 0.0) l = 0.0;
    const double c = cost_at(sorted_tau, prefix_sums, pen, a_w, l, width);
    if (c < best || (c == best && l < best_l)) {
      best = c;
      best_l = l;
    }
  };
  for (double t : sorted_tau) {
    consider(t);
    consider(t - width);
  }
  return {best_l, best};
}

FixedWidthResult fixed_width_from_arrivals(const kernels::ArrivalMatrix& arrivals,
                                           std::span<const CustomerPenalty> pen, double a_w,
                                           bool full_scan) {
  require(static_cast<std::size_t>(arrivals.cols()) == pen.size(),
          "fixed width: penalty count does not match route");
  if (arrivals.rows() < 1) throw InputError("design: Q must be at least 1");
  const auto n = static_cast<std::size_t>(arrivals.cols());
  const auto q = static_cast<std::size_t>(arrivals.rows());

  const std::size_t pairs = q * (q - 1) / 2;
  if (n * (pairs + q) + 1 > kMaxWidthCandidates)
    throw InputError("fixed width: " + std::to_string(n * (pairs + q) + 1) +
                     " candidate widths exceed the limit of " +
                     std::to_string(kMaxWidthCandidates) + "; subsample the arrivals");

  std::vector<SortedColumn> cols;
  cols.reserve(n);
  for (std::size_t p = 0; p < n; ++p) cols.push_back(sorted_column(arrivals, static_cast<Eigen::Index>(p)));

  std::vector<double> cand;
  cand.reserve(n * (pairs + q) + 1);
  cand.push_back(0.0);
  for (const auto& c : cols) {
    for (std::size_t i = 0; i < q; ++i) {
      cand.push_back(c.tau[i]);
      for (std::size_t j = i + 1; j < q; ++j) cand.push_back(c.tau[j] - c.tau[i]);
    }
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  auto g = [&](double w) {
    double total = 0.0;
    for (std::size_t p = 0; p < n; ++p) total += fixed_width_lower(cols[p].tau, cols[p].prefix, pen[p], a_w, w).second;
    return total;
  };

  std::size_t best = 0;
  if (full_scan) {
    double best_g = g(cand[0]);
    for (std::size_t i = 1; i < cand.size(); ++i) {
      const double v = g(cand[i]);
      if (v < best_g) {
        best_g = v;
        best = i;
      }
    }
  } else {
    std::size_t lo = 0, hi = cand.size() - 1;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (g(cand[mid + 1]) < g(cand[mid]))
        lo = mid + 1;
      else
        hi = mid;
    }
    best = lo;
  }

  FixedWidthResult r;
  r.width = cand[best];
  for (std::size_t p = 0; p < n; ++p) {
    const double l = fixed_width_lower(cols[p].tau, cols[p].prefix, pen[p], a_w, r.width).first;
    CustomerPenalty cp = pen[p];
    cp.a_w = a_w;
    const std::span<const double> tau(arrivals.col(static_cast<Eigen::Index>(p)).data(), q);
    const double c = saa_objective(tau, cp, l, l + r.width);
    r.lowers.push_back(l);
    r.costs.push_back(c);
    r.total_cost += c;
  }
  return r;
}

namespace {

WindowPlan fixed_width_plan(const Route& route, const SampleSet& samples, const PenaltyConfig& pen,
                            double a_w_shared, bool full_scan) {
  if (route.customer_count() < 1) throw InputError("design: empty route");
  if (samples.count() < 1) throw InputError("design: Q must be at least 1");
  pen.validate();
  if (!(a_w_shared >= 0.0)) throw InputError("fixed width: a_w must be nonnegative");
  std::vector<CustomerPenalty> cp;
  for (NodeId k : route.visits()) {
    cp.push_back(pen.at(k));
    if (std::abs(cp.back().a_w - a_w_shared) > 1e-12)
      throw InputError("fixed width: customer " + std::to_string(k) +
                       " has a_w different from the shared a_w");
  }
  const auto arrivals = kernels::arrival_times(route.path(), samples.values);
  const FixedWidthResult r = fixed_width_from_arrivals(arrivals, cp, a_w_shared, full_scan);

  WindowPlan plan;
  plan.route = route.seq();
  plan.shared_width = r.width;
  const auto visits = route.visits();
  const double q = samples.count();
  for (std::size_t p = 0; p < visits.size(); ++p) {
    CustomerWindow w;
    w.customer = visits[p];
    w.lower = r.lowers[p];
    w.upper = r.lowers[p] + r.width;
    w.cost = r.costs[p];
    std::int64_t early = 0, late = 0;
    for (Eigen::Index s = 0; s < arrivals.rows(); ++s) {
      const double t = arrivals(s, static_cast<Eigen::Index>(p));
      early += t < w.lower;
      late += t > w.upper;
    }
    w.early_rate = static_cast<double>(early) / q;
    w.late_rate = static_cast<double>(late) / q;
    plan.windows.push_back(w);
  }
  plan.total_cost = r.total_cost;
  return plan;
}

}  // namespace

WindowPlan design_fixed_width(const Route& route, const SampleSet& samples,
                              const PenaltyConfig& pen, double a_w_shared) {
  return fixed_width_plan(route, samples, pen, a_w_shared, false);
}

WindowPlan design_fixed_width_scan(const Route& route, const SampleSet& samples,
                                   const PenaltyConfig& pen, double a_w_shared) {
  return fixed_width_plan(route, samples, pen, a_w_shared, true);
}

}  // namespace twd

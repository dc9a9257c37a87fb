#include "twd/evaluate.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <tuple>

#include "format.hpp"
#include "twd/error.hpp"
#include "twd/kernels.hpp"
#include "twd/rng.hpp"

namespace twd {

EvalReport evaluate_plan(const Route& route, const WindowPlan& plan, const SampleSet& test) {
  if (test.count() < 1) throw InputError("evaluate: Q_test must be at least 1");
  for (ArcId a : route.arcs())
    if (a >= test.arc_count()) throw InputError("evaluate: test samples do not match network arcs");
  std::vector<double> lower, upper;
  for (NodeId k : route.visits()) {
    const auto& w = plan.window(k);
    lower.push_back(w.lower);
    upper.push_back(w.upper);
  }
  const auto arrivals = kernels::arrival_times(route.path(), test.values);
  const auto tally = kernels::tally_violations(arrivals, lower, upper);

  EvalReport r;
  r.q_test = test.count();
  r.seed = test.seed;
  const double q = test.count();
  const auto visits = route.visits();
  for (std::size_t p = 0; p < visits.size(); ++p) {
    CustomerEval c;
    c.customer = visits[p];
    c.lower = lower[p];
    c.upper = upper[p];
    c.early_count = tally.early_count[p];
    c.late_count = tally.late_count[p];
    c.early_rate = static_cast<double>(c.early_count) / q;
    c.late_rate = static_cast<double>(c.late_count) / q;
    c.early_amount_total = tally.early_amount[p];
    c.late_amount_total = tally.late_amount[p];
    c.early_amount_mean = c.early_count ? c.early_amount_total / static_cast<double>(c.early_count) : 0.0;
    c.late_amount_mean = c.late_count ? c.late_amount_total / static_cast<double>(c.late_count) : 0.0;
    r.early_count += c.early_count;
    r.late_count += c.late_count;
    r.mean_length += c.window_length();
    r.total_violation_amount += c.early_amount_total + c.late_amount_total;
    r.customers.push_back(c);
  }
  const double n = static_cast<double>(visits.size());
  r.mean_length /= n;
  r.early_rate = static_cast<double>(r.early_count) / (q * n);
  r.late_rate = static_cast<double>(r.late_count) / (q * n);
  return r;
}

std::string eval_report_csv(const EvalReport& report) {
  using fmt::num;
  std::string out =
      "customer,lower,upper,width,early_count,late_count,early_rate,late_rate,"
      "early_amt_mean,late_amt_mean,early_amt_total,late_amt_total,q_test,seed\n";
  const std::string tail = "," + std::to_string(report.q_test) + "," + std::to_string(report.seed) + "\n";
  for (const auto& c : report.customers) {
    out += std::to_string(c.customer) + "," + num(c.lower) + "," + num(c.upper) + "," +
           num(c.window_length()) + "," + std::to_string(c.early_count) + "," +
           std::to_string(c.late_count) + "," + num(c.early_rate) + "," + num(c.late_rate) + "," +
           num(c.early_amount_mean) + "," + num(c.late_amount_mean) + "," +
           num(c.early_amount_total) + "," + num(c.late_amount_total) + tail;
  }
  double early_total = 0.0, late_total = 0.0;
  for (const auto& c : report.customers) {
    early_total += c.early_amount_total;
    late_total += c.late_amount_total;
  }
  auto mean = [](double total, std::int64_t n) { return n ? total / static_cast<double>(n) : 0.0; };
  out += "all,,," + num(report.mean_length) + "," + std::to_string(report.early_count) + "," +
         std::to_string(report.late_count) + "," + num(report.early_rate) + "," +
         num(report.late_rate) + "," + num(mean(early_total, report.early_count)) + "," +
         num(mean(late_total, report.late_count)) + "," + num(early_total) + "," + num(late_total) +
         tail;
  return out;
}

namespace {

void check_waiting(const Route& route, std::span<const double> lowers, const SampleSet& samples) {
  if (lowers.size() != static_cast<std::size_t>(route.customer_count()))
    throw InputError("simulate_waiting: need a lower bound for every visited customer (got " +
                     std::to_string(lowers.size()) + ", route visits " +
                     std::to_string(route.customer_count()) + ")");
  for (ArcId a : route.arcs())
    if (a >= samples.arc_count()) throw InputError("simulate_waiting: samples do not match network arcs");
}

}  // namespace

Eigen::MatrixXd simulate_waiting(const Route& route, std::span<const double> lowers,
                                 const SampleSet& samples) {
  check_waiting(route, lowers, samples);
  const auto path = route.path();
  Eigen::MatrixXd t(samples.count(), static_cast<Eigen::Index>(path.size()));
  for (int q = 0; q < samples.count(); ++q) {
    double prev = 0.0;
    for (std::size_t p = 0; p < path.size(); ++p) {
      prev = std::max(prev + samples.values(q, path[p]), lowers[p]);
      t(q, static_cast<Eigen::Index>(p)) = prev;
    }
  }
  return t;
}

Eigen::MatrixXd simulate_waiting_unrolled(const Route& route, std::span<const double> lowers,
                                          const SampleSet& samples) {
  check_waiting(route, lowers, samples);
  const auto path = route.path();
  const std::size_t n = path.size();
  Eigen::MatrixXd t(samples.count(), static_cast<Eigen::Index>(n));
  for (int q = 0; q < samples.count(); ++q) {
    for (std::size_t p = 0; p < n; ++p) {
      // r = 0 is the depot (bound 0); r >= 1 is the customer at position r-1.
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r <= p + 1; ++r) {
        double v;
        std::size_t first;
        if (r == 0) {
          v = 0.0;
          first = 0;
        } else {
          v = lowers[r - 1];
          first = r;
        }
        for (std::size_t s = first; s <= p; ++s) v += samples.values(q, path[s]);
        best = std::max(best, v);
      }
      t(q, static_cast<Eigen::Index>(p)) = best;
    }
  }
  return t;
}

std::pair<SampleSet, SampleSet> sweep_samples(const Network& net, std::uint64_t seed, int q_train,
                                              int q_test) {
  if (q_train < 1) throw InputError("q_train: must be at least 1");
  if (q_test < 1) throw InputError("q_test: must be at least 1");
  return {sample_travel_times(net, q_train, derive_seed(seed, "sampling-train")),
          sample_travel_times(net, q_test, derive_seed(seed, "sampling-test"))};
}

namespace {

struct Cell {
  std::string model;
  double beta_l, beta_u;
  std::uint64_t seed;
};

std::vector<SweepRow> run_cell(const Network& net, const SweepConfig& cfg, const Cell& cell) {
  const auto [train, test] = sweep_samples(net, cell.seed, cfg.q_train, cfg.q_test);
  const PenaltyConfig pen = penalties_from_beta(cell.beta_l, cell.beta_u, net.customer_count());
  SolveResult res;
  WindowPlan plan;
  if (cell.model == "rm") {
    res = branch_and_bound(net, ModelSpec::rm(cfg.alpha1, cfg.alpha2), pen);
    plan = res.plan;
  } else if (cell.model == "sm" || cell.model == "smf") {
    res = branch_and_bound(net, ModelSpec::sm(train), pen);
    plan = res.plan;
    if (cell.model == "smf") {
      plan = design_fixed_width(route_to_xy(res.route, net), train, pen, pen.at(1).a_w);
      res.objective = plan.total_cost;
    }
  } else {
    throw InputError("models: unknown model '" + cell.model + "' (expected sm, rm or smf)");
  }
  const Route route = route_to_xy(res.route, net);
  const EvalReport ev = evaluate_plan(route, plan, test);

  std::vector<SweepRow> rows;
  SweepRow base;
  base.model = cell.model;
  base.beta_l = cell.beta_l;
  base.beta_u = cell.beta_u;
  base.seed = cell.seed;
  base.objective = res.objective;
  base.budget_used = res.budget_value;
  for (const auto& c : ev.customers) {
    SweepRow r = base;
    r.customer = c.customer;
    r.lower = c.lower;
    r.upper = c.upper;
    r.width = c.window_length();
    r.early_rate = c.early_rate;
    r.late_rate = c.late_rate;
    r.early_amt = c.early_amount_mean;
    r.late_amt = c.late_amount_mean;
    r.early_count = c.early_count;
    r.late_count = c.late_count;
    rows.push_back(r);
  }
  SweepRow agg = base;
  agg.width = ev.mean_length;
  agg.early_rate = ev.early_rate;
  agg.late_rate = ev.late_rate;
  agg.early_count = ev.early_count;
  agg.late_count = ev.late_count;
  double early_total = 0.0, late_total = 0.0;
  for (const auto& c : ev.customers) {
    early_total += c.early_amount_total;
    late_total += c.late_amount_total;
  }
  agg.early_amt = ev.early_count ? early_total / static_cast<double>(ev.early_count) : 0.0;
  agg.late_amt = ev.late_count ? late_total / static_cast<double>(ev.late_count) : 0.0;
  rows.push_back(agg);
  return rows;
}

}  // namespace

std::vector<SweepRow> guideline_sweep(const Network& net, const SweepConfig& cfg) {
  if (cfg.betas.empty()) throw InputError("betas: grid is empty");
  if (cfg.seeds.empty()) throw InputError("seeds: list is empty");
  if (cfg.threads < 1) throw InputError("threads: must be at least 1");
  for (const auto& [bl, bu] : cfg.betas)
    if (!(bl + bu < 1.0)) throw InputError("betas: beta_l + beta_u must be below 1");
  std::vector<Cell> cells;
  for (const auto& m : cfg.models)
    for (const auto& [bl, bu] : cfg.betas)
      for (auto s : cfg.seeds) cells.push_back({m, bl, bu, s});

  std::vector<std::vector<SweepRow>> out(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  const int count = static_cast<int>(cells.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.threads)
  for (int i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = run_cell(net, cfg, cells[static_cast<std::size_t>(i)]);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<SweepRow> rows;
  for (auto& v : out) rows.insert(rows.end(), v.begin(), v.end());
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.model, a.beta_l, a.beta_u, a.seed, a.customer) <
           std::tie(b.model, b.beta_l, b.beta_u, b.seed, b.customer);
  });
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  using fmt::num;
  std::string out =
      "model,beta_l,beta_u,seed,customer,lower,upper,width,early_rate,late_rate,early_amt,"
      "late_amt,objective,budget_used\n";
  for (const auto& r : rows) {
    out += r.model + "," + num(r.beta_l) + "," + num(r.beta_u) + "," + std::to_string(r.seed) + ",";
    if (r.customer > 0)
      out += std::to_string(r.customer) + "," + num(r.lower) + "," + num(r.upper) + ",";
    else
      out += ",,,";
    out += num(r.width) + "," + num(r.early_rate) + "," + num(r.late_rate) + "," + num(r.early_amt) +
           "," + num(r.late_amt) + "," + num(r.objective) + "," + num(r.budget_used) + "\n";
  }
  return out;
}

}  // namespace twd

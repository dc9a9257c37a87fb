#include "cli_app.hpp"

#include <chrono>
#include <climits>
#include <ctime>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "twd/error.hpp"
#include "twd/evaluate.hpp"
#include "twd/instance.hpp"
#include "twd/plan_io.hpp"
#include "twd/rng.hpp"
#include "twd/routing.hpp"
#include "twd/solver.hpp"
#include "twd/window_design.hpp"

namespace twd::cli {

namespace {

struct PenaltyFlags {
  std::optional<double> beta_l, beta_u, a_w, a_l, a_u;
  bool allow_boundary = false;
};

struct Options {
  std::string instance, route, plan, samples, test_samples, out, plan_out, report, cut_log;
  std::string model = "sm";
  PenaltyFlags pen;
  double alpha1 = 0.0, alpha2 = 0.0;
  int q_train = 1000, q_test = 1000;
  std::uint64_t seed = 0;
  bool fixed_width = false, exact = false, no_timestamp = false;
  int threads = 1;
  // gen
  int customers = 10, arcs = 0;
  bool complete = false;
  double tb_factor = 1.25, grid = 100.0, service = 10.0;
  double cv_min = 0.01, cv_max = 0.2, flip = 0.05;
  // guideline
  std::string betas = "0.05:0.05,0.025:0.025", models = "sm,rm,smf", seeds = "0";
};

void add_penalty_flags(CLI::App* app, PenaltyFlags& p) {
  auto* bl = app->add_option("--beta-l", p.beta_l, "early violation rate (default 0.05)");
  auto* bu = app->add_option("--beta-u", p.beta_u, "late violation rate (default 0.05)");
  auto* aw = app->add_option("--a-w", p.a_w, "width weight");
  auto* al = app->add_option("--a-l", p.a_l, "earliness weight");
  auto* au = app->add_option("--a-u", p.a_u, "tardiness weight");
  for (auto* b : {bl, bu})
    for (auto* a : {aw, al, au}) b->excludes(a);
  app->add_flag("--allow-dro-boundary", p.allow_boundary, "admit 2*a_w == min(a_l, a_u)");
}

PenaltyConfig make_penalties(const PenaltyFlags& p, int customers) {
  PenaltyConfig pen;
  if (p.a_w || p.a_l || p.a_u) {
    if (!(p.a_w && p.a_l && p.a_u)) throw InputError("--a-w, --a-l and --a-u must be given together");
    pen = PenaltyConfig::uniform(customers, {*p.a_w, *p.a_l, *p.a_u});
  } else {
    pen = penalties_from_beta(p.beta_l.value_or(0.05), p.beta_u.value_or(0.05), customers);
  }
  pen.allow_dro_boundary = p.allow_boundary;
  pen.validate();
  return pen;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-")
    out << text;
  else
    write_text_file(path, text);
}

std::string timestamp_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

SampleSet training_samples(const Network& net, const Options& o) {
  if (!o.samples.empty()) return load_samples_csv(net, o.samples);
  return sample_travel_times(net, o.q_train, derive_seed(o.seed, "sampling-train"));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

double parse_double(const std::string& s, const std::string& flag) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError(flag + ": '" + s + "' is not a number");
  }
}

// --- subcommands ----------------------------------------------------------

int cmd_gen(const Options& o, std::ostream& out) {
  RandomInstanceParams p;
  p.customers = o.customers;
  p.complete = o.complete;
  p.arc_count = o.arcs;
  p.grid = o.grid;
  p.service_time = o.service;
  p.tb_factor = o.tb_factor;
  p.cov.cv_min = o.cv_min;
  p.cov.cv_max = o.cv_max;
  p.cov.neg_flip_prob = o.flip;
  p.seed = o.seed;
  emit(o.out, instance_to_json(random_instance(p)), out);
  return kExitOk;
}

int cmd_design(const Options& o, std::ostream& out) {
  const Network net = load_instance(o.instance);
  const Route route = route_to_xy(route_from_json(read_text_file(o.route)), net);
  const PenaltyConfig pen = make_penalties(o.pen, net.customer_count());
  WindowPlan plan;
  if (o.model == "rm") {
    if (o.fixed_width) throw InputError("--fixed-width: requires --model sm");
    plan = design_dro(route, net.mean(), net.cov(), o.alpha2, pen);
  } else {
    const SampleSet s = training_samples(net, o);
    plan = o.fixed_width ? design_fixed_width(route, s, pen, pen.at(1).a_w)
                         : design_stochastic(route, s, pen).plan;
  }
  emit(o.out, plan_to_json(plan), out);
  if (!o.report.empty()) write_text_file(o.report, cost_report_csv(plan));
  return kExitOk;
}

int cmd_solve(const Options& o, std::ostream& out) {
  const Network net = load_instance(o.instance);
  const PenaltyConfig pen = make_penalties(o.pen, net.customer_count());
  std::optional<SampleSet> samples;
  ModelSpec model;
  if (o.model == "rm") {
    if (o.fixed_width) throw InputError("--fixed-width: requires --model sm");
    model = ModelSpec::rm(o.alpha1, o.alpha2);
  } else {
    samples = training_samples(net, o);
    model = ModelSpec::sm(*samples);
  }
  SolveOptions opt;
  opt.threads = o.threads;
  SolveResult res = o.exact ? enumerate_exact(net, model, pen) : branch_and_bound(net, model, pen, opt);
  const Route route = route_to_xy(res.route, net);
  if (o.fixed_width) res.plan = design_fixed_width(route, *samples, pen, pen.at(1).a_w);

  std::string text = solve_result_to_json(res, !o.no_timestamp);
  if (!o.no_timestamp) {
    auto j = nlohmann::json::parse(text);
    j["timestamp"] = timestamp_now();
    text = j.dump(2) + "\n";
  }
  emit(o.out, text, out);
  if (!o.plan_out.empty()) write_text_file(o.plan_out, plan_to_json(res.plan));
  if (!o.report.empty()) write_text_file(o.report, cost_report_csv(res.plan));
  if (!o.cut_log.empty()) {
    std::vector<Cut> cuts;
    const Eigen::MatrixXd rcov = robust_covariance(net.cov(), o.alpha2);
    for (NodeId k : route.visits()) {
      const auto& y = route.y(k);
      if (o.model == "rm") {
        try {
          cuts.push_back(oa_cut(y, rcov, k));
        } catch (const InputError&) {
          // zero-variance prefix: no tangent exists
        }
      } else {
        cuts.push_back(benders_cut(y, *samples, pen, k));
      }
    }
    write_text_file(o.cut_log, cut_log_csv(cuts, net));
  }
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const Network net = load_instance(o.instance);
  const WindowPlan plan = plan_from_json(read_text_file(o.plan));
  const Route route = route_to_xy(plan.route, net);
  const SampleSet test = o.test_samples.empty()
                             ? sample_travel_times(net, o.q_test, derive_seed(o.seed, "sampling-test"))
                             : load_samples_csv(net, o.test_samples);
  emit(o.out, eval_report_csv(evaluate_plan(route, plan, test)), out);
  return kExitOk;
}

int cmd_guideline(const Options& o, std::ostream& out) {
  const Network net = load_instance(o.instance);
  SweepConfig cfg;
  cfg.betas.clear();
  for (const auto& cell : split(o.betas, ',')) {
    const auto parts = split(cell, ':');
    if (parts.size() != 2) throw InputError("--betas: expected beta_l:beta_u pairs, got '" + cell + "'");
    cfg.betas.emplace_back(parse_double(parts[0], "--betas"), parse_double(parts[1], "--betas"));
  }
  cfg.models = split(o.models, ',');
  for (const auto& m : cfg.models)
    if (m != "sm" && m != "rm" && m != "smf")
      throw InputError("--models: unknown model '" + m + "' (expected sm, rm or smf)");
  cfg.seeds.clear();
  for (const auto& s : split(o.seeds, ',')) {
    try {
      std::size_t used = 0;
      cfg.seeds.push_back(std::stoull(s, &used));
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw InputError("--seeds: '" + s + "' is not an unsigned integer");
    }
  }
  cfg.q_train = o.q_train;
  cfg.q_test = o.q_test;
  cfg.alpha1 = o.alpha1;
  cfg.alpha2 = o.alpha2;
  cfg.threads = o.threads;
  const auto rows = guideline_sweep(net, cfg);
  emit(o.out, sweep_csv(rows), out);
  return kExitOk;
}

// Turns {"beta_l": 0.05, "fixed_width": true, ...} into flags that the
// command line did not set already.
std::vector<std::string> config_args(const std::string& path, const std::vector<std::string>& given) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("--config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("--config: top level must be an object");
  std::set<std::string> present;
  for (const auto& a : given)
    if (a.rfind("--", 0) == 0) present.insert(a.substr(0, a.find('=')));
  std::vector<std::string> extra;
  for (const auto& [key, value] : j.items()) {
    if (key == "subcommand") continue;
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (present.count(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back(flag);
    } else if (value.is_string()) {
      extra.push_back(flag);
      extra.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      extra.push_back(flag);
      extra.push_back(value.dump());
    } else {
      throw InputError("--config: key '" + key + "' must be a string, number or boolean");
    }
  }
  return extra;
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args = args_in;
  try {
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == "--config") {
        const std::string path = args[i + 1];
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        const auto extra = config_args(path, args);
        if (args.empty()) {
          nlohmann::json j = nlohmann::json::parse(read_text_file(path));
          if (j.contains("subcommand")) args.push_back(j["subcommand"].get<std::string>());
        }
        args.insert(args.end(), extra.begin(), extra.end());
        break;
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  Options o;
  CLI::App app{"Service time window design for single-vehicle delivery routes", "twd"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  app.add_option("--config", "JSON file of flag values (keys use underscores)");

  auto q_range = CLI::Range(1, INT_MAX);
  auto nonneg = CLI::NonNegativeNumber;

  auto* gen = app.add_subcommand("gen", "generate a random instance");
  gen->add_option("--customers", o.customers, "customer count")->check(q_range);
  gen->add_flag("--complete", o.complete, "complete directed graph");
  gen->add_option("--arcs", o.arcs, "total arc count for sparse graphs (0 = 3 per customer)")->check(nonneg);
  gen->add_option("--tb-factor", o.tb_factor, "time budget over the planted tour mean")->check(CLI::PositiveNumber);
  gen->add_option("--grid", o.grid, "side of the square layout")->check(CLI::PositiveNumber);
  gen->add_option("--service-time", o.service, "service minutes folded into arc times")->check(nonneg);
  gen->add_option("--cv-min", o.cv_min)->check(nonneg);
  gen->add_option("--cv-max", o.cv_max)->check(nonneg);
  gen->add_option("--flip-prob", o.flip)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", o.seed);
  gen->add_option("--out", o.out, "instance JSON path (stdout if absent)");

  auto* design = app.add_subcommand("design", "design windows for a given route");
  design->add_option("--instance", o.instance)->required();
  design->add_option("--route", o.route, "route JSON {\"seq\": [...]}")->required();
  design->add_option("--model", o.model)->check(CLI::IsMember({"sm", "rm"}));
  add_penalty_flags(design, o.pen);
  design->add_option("--alpha2", o.alpha2)->check(nonneg);
  design->add_option("--q-train", o.q_train)->check(q_range);
  design->add_option("--samples", o.samples, "training samples CSV");
  design->add_option("--seed", o.seed);
  design->add_flag("--fixed-width", o.fixed_width, "one shared width (sm only)");
  design->add_option("--out", o.out, "plan JSON path");
  design->add_option("--report", o.report, "cost report CSV path");

  auto* solve = app.add_subcommand("solve", "optimise route and windows together");
  solve->add_option("--instance", o.instance)->required();
  solve->add_option("--model", o.model)->check(CLI::IsMember({"sm", "rm"}));
  add_penalty_flags(solve, o.pen);
  solve->add_option("--alpha1", o.alpha1)->check(nonneg);
  solve->add_option("--alpha2", o.alpha2)->check(nonneg);
  solve->add_option("--q-train", o.q_train)->check(q_range);
  solve->add_option("--samples", o.samples, "training samples CSV");
  solve->add_option("--seed", o.seed);
  solve->add_option("--threads", o.threads)->check(q_range);
  solve->add_flag("--exact", o.exact, "enumerate every permutation instead of searching");
  solve->add_flag("--fixed-width", o.fixed_width, "fit one shared width on the sm route");
  solve->add_flag("--no-timestamp", o.no_timestamp, "omit timestamp and wall time");
  solve->add_option("--out", o.out, "result JSON path");
  solve->add_option("--plan-out", o.plan_out, "plan JSON path");
  solve->add_option("--report", o.report, "cost report CSV path");
  solve->add_option("--cut-log", o.cut_log, "cut CSV at the winning route");

  auto* eval = app.add_subcommand("eval", "out-of-sample evaluation of a plan");
  eval->add_option("--instance", o.instance)->required();
  eval->add_option("--plan", o.plan, "plan JSON")->required();
  eval->add_option("--q-test", o.q_test)->check(q_range);
  eval->add_option("--test-samples", o.test_samples, "test samples CSV");
  eval->add_option("--seed", o.seed);
  eval->add_option("--out", o.out, "report CSV path");

  auto* guide = app.add_subcommand("guideline", "sweep models and confidence levels");
  guide->add_option("--instance", o.instance)->required();
  guide->add_option("--betas", o.betas, "beta_l:beta_u pairs, comma separated");
  guide->add_option("--models", o.models, "subset of sm,rm,smf");
  guide->add_option("--seeds", o.seeds, "comma separated seeds");
  guide->add_option("--q-train", o.q_train)->check(q_range);
  guide->add_option("--q-test", o.q_test)->check(q_range);
  guide->add_option("--alpha1", o.alpha1)->check(nonneg);
  guide->add_option("--alpha2", o.alpha2)->check(nonneg);
  guide->add_option("--threads", o.threads)->check(q_range);
  guide->add_option("--out", o.out, "table CSV path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (gen->parsed()) return cmd_gen(o, out);
    if (design->parsed()) return cmd_design(o, out);
    if (solve->parsed()) return cmd_solve(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
    if (guide->parsed()) return cmd_guideline(o, out);
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace twd::cli

#include "twd/plan_io.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "format.hpp"
#include "twd/error.hpp"

namespace twd {

using nlohmann::json;

namespace {

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

double number_or_inf(const json& v, const std::string& where) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw InputError(where + ": expected a number");
  return v.get<double>();
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json plan_json(const WindowPlan& plan) {
  json j;
  j["route"] = plan.route;
  json windows = json::array(), per = json::array();
  for (const auto& w : plan.windows) {
    windows.push_back({{"customer", w.customer}, {"lower", w.lower}, {"upper", w.upper}});
    per.push_back({{"customer", w.customer},
                   {"cost", w.cost},
                   {"width", w.width()},
                   {"early_rate", optional_number(w.early_rate)},
                   {"late_rate", optional_number(w.late_rate)},
                   {"clamped", w.clamped}});
  }
  j["windows"] = std::move(windows);
  j["shared_width"] = optional_number(plan.shared_width);
  j["cost"] = plan.total_cost;
  j["per_customer"] = std::move(per);
  return j;
}

}  // namespace

std::string plan_to_json(const WindowPlan& plan) { return plan_json(plan).dump(2) + "\n"; }

WindowPlan plan_from_json(const std::string& text) {
  const json j = parse(text, "plan");
  if (!j.is_object()) throw InputError("plan: top level must be an object");
  WindowPlan p;
  try {
    p.route = j.at("route").get<std::vector<NodeId>>();
    const auto& ws = j.at("windows");
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const std::string where = "windows[" + std::to_string(i) + "]";
      CustomerWindow w;
      w.customer = ws[i].at("customer").get<NodeId>();
      w.lower = number_or_inf(ws[i].at("lower"), where + ".lower");
      w.upper = number_or_inf(ws[i].at("upper"), where + ".upper");
      if (!(w.lower >= 0.0 && w.lower <= w.upper))
        throw InputError(where + ": need 0 <= lower <= upper");
      p.windows.push_back(w);
    }
    if (j.contains("per_customer")) {
      const auto& pc = j["per_customer"];
      for (std::size_t i = 0; i < pc.size() && i < p.windows.size(); ++i) {
        auto& w = p.windows[i];
        if (pc[i].contains("cost")) w.cost = pc[i]["cost"].get<double>();
        if (pc[i].contains("early_rate") && !pc[i]["early_rate"].is_null())
          w.early_rate = pc[i]["early_rate"].get<double>();
        if (pc[i].contains("late_rate") && !pc[i]["late_rate"].is_null())
          w.late_rate = pc[i]["late_rate"].get<double>();
        if (pc[i].contains("clamped")) w.clamped = pc[i]["clamped"].get<bool>();
      }
    }
    if (j.contains("shared_width") && !j["shared_width"].is_null())
      p.shared_width = j["shared_width"].get<double>();
    if (j.contains("cost")) p.total_cost = j["cost"].get<double>();
  } catch (const json::exception& e) {
    throw InputError(std::string("plan: ") + e.what());
  }
  return p;
}

std::string solve_result_to_json(const SolveResult& r, bool with_timing) {
  json j;
  j["route"] = r.route;
  j["objective"] = r.objective;
  j["budget_value"] = r.budget_value;
  j["node_count"] = r.node_count;
  j["pruned_count"] = r.pruned_count;
  j["node_counts_approximate"] = r.node_counts_approximate;
  j["proof_of_optimality"] = r.proof_of_optimality;
  if (with_timing) j["wall_time"] = r.wall_time;
  j["plan"] = plan_json(r.plan);
  return j.dump(2) + "\n";
}

std::string route_to_json(const std::vector<NodeId>& seq) {
  return json{{"seq", seq}}.dump() + "\n";
}

std::vector<NodeId> route_from_json(const std::string& text) {
  const json j = parse(text, "route");
  if (!j.is_object() || !j.contains("seq") || !j["seq"].is_array())
    throw InputError("route: expected {\"seq\": [...]}");
  std::vector<NodeId> seq;
  for (std::size_t i = 0; i < j["seq"].size(); ++i) {
    const auto& v = j["seq"][i];
    if (!v.is_number_integer()) throw InputError("route.seq[" + std::to_string(i) + "]: expected an integer");
    seq.push_back(v.get<NodeId>());
  }
  return seq;
}

std::string cost_report_csv(const WindowPlan& plan) {
  using fmt::num;
  std::string out = "customer,lower,upper,width,cost_component\n";
  for (const auto& w : plan.windows)
    out += std::to_string(w.customer) + "," + num(w.lower) + "," + num(w.upper) + "," +
           num(w.width()) + "," + num(w.cost) + "\n";
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

}  // namespace twd

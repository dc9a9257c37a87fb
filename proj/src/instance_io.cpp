#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "twd/error.hpp"
#include "twd/instance.hpp"

namespace twd {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(where + key + ": missing field");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw InputError(where + ": expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw InputError(where + ": expected an integer");
  return v.get<int>();
}

// Writes doubles with round-trip precision and '.' as separator.
void append_double(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

std::string instance_to_json(const Network& net) {
  json j;
  j["nodes"] = net.node_count();
  json arcs = json::array();
  for (const auto& a : net.arcs()) arcs.push_back({{"from", a.from}, {"to", a.to}, {"mean", a.mean}});
  j["arcs"] = std::move(arcs);
  json cov = json::array();
  for (Eigen::Index r = 0; r < net.cov().rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < net.cov().cols(); ++c) row.push_back(net.cov()(r, c));
    cov.push_back(std::move(row));
  }
  j["cov"] = std::move(cov);
  j["time_budget"] = net.time_budget();
  return j.dump(2) + "\n";
}

Network instance_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("instance: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("instance: top level must be an object");
  const int nodes = integer(field(j, "nodes", ""), "nodes");
  const auto& arcs_json = field(j, "arcs", "");
  if (!arcs_json.is_array()) throw InputError("arcs: expected an array");
  std::vector<Arc> arcs;
  for (std::size_t i = 0; i < arcs_json.size(); ++i) {
    const std::string where = "arcs[" + std::to_string(i) + "].";
    const auto& a = arcs_json[i];
    if (!a.is_object()) throw InputError("arcs[" + std::to_string(i) + "]: expected an object");
    Arc arc;
    arc.from = integer(field(a, "from", where), where + "from");
    arc.to = integer(field(a, "to", where), where + "to");
    arc.mean = number(field(a, "mean", where), where + "mean");
    if (arc.mean < 0.0) throw InputError(where + "mean: negative mean");
    arcs.push_back(arc);
  }
  const auto& tb = field(j, "time_budget", "");
  const double budget =
      tb.is_null() ? std::numeric_limits<double>::infinity() : number(tb, "time_budget");

  const bool has_cov = j.contains("cov"), has_gen = j.contains("cov_gen");
  if (has_cov == has_gen) throw InputError("instance: exactly one of cov or cov_gen is required");
  const auto m = static_cast<Eigen::Index>(arcs.size());
  if (has_cov) {
    const auto& c = j["cov"];
    if (!c.is_array() || static_cast<Eigen::Index>(c.size()) != m)
      throw InputError("cov: expected " + std::to_string(m) + " rows");
    Eigen::MatrixXd cov(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto& row = c[static_cast<std::size_t>(r)];
      const std::string where = "cov[" + std::to_string(r) + "]";
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m)
        throw InputError(where + ": row length " +
                         std::to_string(row.is_array() ? row.size() : 0) + ", expected " +
                         std::to_string(m));
      for (Eigen::Index col = 0; col < m; ++col)
        cov(r, col) = number(row[static_cast<std::size_t>(col)],
                             where + "[" + std::to_string(col) + "]");
    }
    return Network(nodes, std::move(arcs), std::move(cov), budget);
  }
  const auto& g = j["cov_gen"];
  if (!g.is_object()) throw InputError("cov_gen: expected an object");
  CovGenParams p;
  if (g.contains("cv_min")) p.cv_min = number(g["cv_min"], "cov_gen.cv_min");
  if (g.contains("cv_max")) p.cv_max = number(g["cv_max"], "cov_gen.cv_max");
  if (g.contains("neg_flip_prob")) p.neg_flip_prob = number(g["neg_flip_prob"], "cov_gen.neg_flip_prob");
  if (g.contains("seed")) {
    if (!g["seed"].is_number_unsigned() && !g["seed"].is_number_integer())
      throw InputError("cov_gen.seed: expected an integer");
    p.seed = g["seed"].get<std::uint64_t>();
  }
  Network skeleton(nodes, std::move(arcs), budget);
  return skeleton.with_covariance(generate_covariance(skeleton, p));
}

Network load_instance(const std::filesystem::path& path) {
  return instance_from_json(read_file(path));
}

void save_instance(const Network& net, const std::filesystem::path& path) {
  write_file(path, instance_to_json(net));
}

std::string samples_to_csv(const Network& net, const SampleSet& samples) {
  require(samples.arc_count() == net.arc_count(), "samples: arc count does not match network");
  std::string out;
  for (ArcId a = 0; a < net.arc_count(); ++a) {
    if (a) out += ',';
    out += net.arc_label(a);
  }
  out += '\n';
  for (int q = 0; q < samples.count(); ++q) {
    for (ArcId a = 0; a < net.arc_count(); ++a) {
      if (a) out += ',';
      append_double(out, samples.values(q, a));
    }
    out += '\n';
  }
  return out;
}

SampleSet samples_from_csv(const Network& net, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("samples: empty file");
  {
    std::istringstream header(line);
    std::string label;
    ArcId a = 0;
    while (std::getline(header, label, ',')) {
      if (!label.empty() && label.back() == '\r') label.pop_back();
      if (a >= net.arc_count() || label != net.arc_label(a))
        throw InputError("samples: header column " + std::to_string(a) + " '" + label +
                         "' does not match network arc order");
      ++a;
    }
    if (a != net.arc_count()) throw InputError("samples: header has too few columns");
  }
  std::vector<double> values;
  int rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (ArcId a = 0; a < net.arc_count(); ++a) {
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc())
        throw InputError("samples: row " + std::to_string(rows + 1) + " column " +
                         std::to_string(a) + ": not a number");
      if (v < 0.0) throw InputError("samples: row " + std::to_string(rows + 1) + ": negative travel time");
      values.push_back(v);
      p = res.ptr;
      if (a + 1 < net.arc_count()) {
        if (p == end || *p != ',')
          throw InputError("samples: row " + std::to_string(rows + 1) + ": too few columns");
        ++p;
      }
    }
    if (p != end) throw InputError("samples: row " + std::to_string(rows + 1) + ": too many columns");
    ++rows;
  }
  if (rows == 0) throw InputError("samples: no data rows");
  SampleSet s;
  s.values = Eigen::Map<RowMatrix>(values.data(), rows, net.arc_count());
  return s;
}

void save_samples_csv(const Network& net, const SampleSet& samples,
                      const std::filesystem::path& path) {
  write_file(path, samples_to_csv(net, samples));
}

SampleSet load_samples_csv(const Network& net, const std::filesystem::path& path) {
  return samples_from_csv(net, read_file(path));
}

}  // namespace twd

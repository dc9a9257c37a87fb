#include "twd/instance.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "twd/error.hpp"
#include "twd/kernels.hpp"
#include "twd/rng.hpp"

namespace twd {

namespace {

std::vector<bool> reachable(int n, std::span<const Arc> arcs, NodeId source, bool forward) {
  std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(n));
  for (const auto& a : arcs) {
    if (forward)
      adj[static_cast<std::size_t>(a.from)].push_back(a.to);
    else
      adj[static_cast<std::size_t>(a.to)].push_back(a.from);
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::deque<NodeId> queue{source};
  seen[static_cast<std::size_t>(source)] = true;
  while (!queue.empty()) {
    NodeId v = queue.front();
    queue.pop_front();
    for (NodeId w : adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        queue.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace

Network::Network(int node_count, std::vector<Arc> arcs, double time_budget)
    : Network(node_count, std::move(arcs),
              Eigen::MatrixXd::Zero(0, 0), time_budget) {}

Network::Network(int node_count, std::vector<Arc> arcs, Eigen::MatrixXd cov, double time_budget)
    : node_count_(node_count), arcs_(std::move(arcs)), cov_(std::move(cov)),
      time_budget_(time_budget) {
  const auto m = static_cast<Eigen::Index>(arcs_.size());
  if (cov_.size() == 0 && m > 0) cov_ = Eigen::MatrixXd::Zero(m, m);
  mean_.resize(m);
  for (Eigen::Index a = 0; a < m; ++a) mean_[a] = arcs_[static_cast<std::size_t>(a)].mean;
  validate();
}

void Network::validate() {
  require(node_count_ >= 2, "network: need a depot and at least one customer");
  require(time_budget_ > 0.0, "network: time_budget must be > 0");
  auto& index = index_;
  index.assign(static_cast<std::size_t>(node_count_ * node_count_), -1);
  for (std::size_t a = 0; a < arcs_.size(); ++a) {
    const Arc& arc = arcs_[a];
    std::ostringstream where;
    where << "arcs[" << a << "]";
    require(arc.from >= 0 && arc.from < node_count_ && arc.to >= 0 && arc.to < node_count_,
            where.str() + ": node id out of range");
    require(arc.from != arc.to, where.str() + ": self loop");
    require(std::isfinite(arc.mean) && arc.mean >= 0.0, where.str() + ".mean: negative mean");
    auto& slot = index[static_cast<std::size_t>(arc.from * node_count_ + arc.to)];
    require(slot < 0, where.str() + ": duplicate arc " + std::to_string(arc.from) + "->" +
                          std::to_string(arc.to));
    slot = static_cast<ArcId>(a);
  }
  auto out = reachable(node_count_, arcs_, 0, true);
  auto in = reachable(node_count_, arcs_, 0, false);
  for (int k = 1; k < node_count_; ++k) {
    require(out[static_cast<std::size_t>(k)],
            "network: customer " + std::to_string(k) + " unreachable from depot");
    require(in[static_cast<std::size_t>(k)],
            "network: customer " + std::to_string(k) + " cannot reach depot");
  }
  const auto m = static_cast<Eigen::Index>(arcs_.size());
  require(cov_.rows() == m && cov_.cols() == m, "cov: dimension must equal |A|");
  for (Eigen::Index a = 0; a < m; ++a) {
    require(cov_(a, a) >= 0.0, "cov[" + std::to_string(a) + "][" + std::to_string(a) +
                                   "]: negative variance");
    for (Eigen::Index b = a + 1; b < m; ++b)
      require(std::abs(cov_(a, b) - cov_(b, a)) <= kSymmetryTol,
              "cov[" + std::to_string(a) + "][" + std::to_string(b) + "]: asymmetric covariance");
  }
  require(m == 0 || is_psd_with_jitter(cov_), "cov: covariance not PSD");
}

std::optional<ArcId> Network::find_arc(NodeId from, NodeId to) const {
  if (from < 0 || to < 0 || from >= node_count_ || to >= node_count_) return std::nullopt;
  ArcId a = index_[static_cast<std::size_t>(from * node_count_ + to)];
  if (a < 0) return std::nullopt;
  return a;
}

std::string Network::arc_label(ArcId a) const {
  const Arc& arc = this->arc(a);
  return std::to_string(arc.from) + "->" + std::to_string(arc.to);
}

Network Network::with_covariance(Eigen::MatrixXd cov) const {
  return Network(node_count_, arcs_, std::move(cov), time_budget_);
}

Network Network::with_time_budget(double time_budget) const {
  return Network(node_count_, arcs_, cov_, time_budget);
}

bool Network::operator==(const Network& other) const {
  return node_count_ == other.node_count_ && arcs_ == other.arcs_ &&
         time_budget_ == other.time_budget_ && cov_ == other.cov_;
}

bool is_psd_with_jitter(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols()) return false;
  Eigen::MatrixXd jittered = cov;
  jittered.diagonal().array() += kPsdJitter;
  Eigen::LLT<Eigen::MatrixXd> llt(jittered);
  return llt.info() == Eigen::Success;
}

void CovGenParams::validate() const {
  require(cv_min >= 0.0 && cv_min <= cv_max, "cov_gen: need 0 <= cv_min <= cv_max");
  require(neg_flip_prob >= 0.0 && neg_flip_prob <= 1.0,
          "cov_gen: neg_flip_prob must lie in [0, 1]");
}

Eigen::VectorXd SampleSet::column_means() const {
  Eigen::VectorXd means = Eigen::VectorXd::Zero(values.cols());
  if (values.rows() == 0) return means;
  for (Eigen::Index q = 0; q < values.rows(); ++q) means += values.row(q).transpose();
  return means / static_cast<double>(values.rows());
}

Eigen::MatrixXi arc_node_hops(const Network& net) {
  const int n = net.node_count();
  std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(n));
  for (const auto& a : net.arcs()) {
    adj[static_cast<std::size_t>(a.from)].push_back(a.to);
    adj[static_cast<std::size_t>(a.to)].push_back(a.from);
  }
  // all-pairs BFS on the undirected skeleton
  Eigen::MatrixXi hops = Eigen::MatrixXi::Constant(n, n, -1);
  for (NodeId s = 0; s < n; ++s) {
    std::deque<NodeId> queue{s};
    hops(s, s) = 0;
    while (!queue.empty()) {
      NodeId v = queue.front();
      queue.pop_front();
      for (NodeId w : adj[static_cast<std::size_t>(v)]) {
        if (hops(s, w) < 0) {
          hops(s, w) = hops(s, v) + 1;
          queue.push_back(w);
        }
      }
    }
    for (NodeId k = 0; k < n; ++k)
      if (hops(s, k) < 0) throw InputError("disconnected network");
  }
  Eigen::MatrixXi d(net.arc_count(), n);
  for (ArcId a = 0; a < net.arc_count(); ++a) {
    const Arc& arc = net.arc(a);
    for (NodeId k = 0; k < n; ++k) d(a, k) = std::min(hops(arc.from, k), hops(arc.to, k));
  }
  return d;
}

Eigen::MatrixXd generate_covariance(const Network& net, const CovGenParams& params) {
  params.validate();
  const Eigen::MatrixXi d = arc_node_hops(net);
  const Eigen::Index m = net.arc_count();
  const Eigen::Index n = net.node_count();

  Engine engine = make_engine(params.seed);
  std::bernoulli_distribution flip(params.neg_flip_prob);
  Eigen::MatrixXd e(m, n);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index k = 0; k < n; ++k) {
      double v = 1.0 / (1.0 + d(a, k));
      if (flip(engine)) v = -v;
      e(a, k) = v;
    }
  for (Eigen::Index a = 0; a < m; ++a) {
    const double norm = e.row(a).norm();
    if (!(norm > 0.0)) throw InternalError("generate_covariance: zero row in distance matrix");
    e.row(a) /= norm;
  }

  std::uniform_real_distribution<double> cv(params.cv_min, params.cv_max);
  Eigen::VectorXd sigma(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const double c = params.cv_min == params.cv_max ? params.cv_min : cv(engine);
    sigma[a] = c * net.mean()[a];
  }

  Eigen::MatrixXd cov(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    cov(a, a) = sigma[a] * sigma[a];
    for (Eigen::Index b = a + 1; b < m; ++b) {
      const double v = e.row(a).dot(e.row(b)) * sigma[a] * sigma[b];
      cov(a, b) = v;
      cov(b, a) = v;
    }
  }
  return cov;
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
  const Eigen::Index m = cov.rows();
  if (m == 0) return Eigen::MatrixXd(0, 0);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  // info() also flags roundoff-level negative pivots of singular input;
  // the tolerance test below is the one that matters.
  const double scale = std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff());
  Eigen::VectorXd dvec = ldlt.vectorD();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (dvec[i] < -kPsdJitter * scale) throw InputError("covariance not PSD");
    dvec[i] = dvec[i] > 0.0 ? std::sqrt(dvec[i]) : 0.0;
  }
  // cov = Pᵀ L D Lᵀ P  =>  B = Pᵀ L √D
  Eigen::MatrixXd l = ldlt.matrixL();
  Eigen::MatrixXd b = l * dvec.asDiagonal();
  return ldlt.transpositionsP().transpose() * b;
}

SampleSet sample_travel_times(const Network& net, int sample_count, std::uint64_t seed) {
  require(sample_count >= 1, "sample_travel_times: sample count must be >= 1");
  const Eigen::MatrixXd factor = covariance_factor(net.cov());
  auto draw = kernels::draw_normal_rows(net.mean(), factor, sample_count, seed);
  SampleSet s;
  s.values = std::move(draw.values);
  s.seed = seed;
  const double entries = static_cast<double>(sample_count) * net.arc_count();
  s.clamp_rate = entries > 0 ? static_cast<double>(draw.clamped) / entries : 0.0;
  return s;
}

Network random_instance(const RandomInstanceParams& p) {
  require(p.customers >= 1, "random_instance: need at least one customer");
  require(p.tb_factor > 0.0, "random_instance: tb_factor must be > 0");
  const int n = p.customers + 1;
  Engine engine = make_engine(derive_seed(p.seed, "layout"));
  std::uniform_real_distribution<double> coord(0.0, p.grid);
  std::vector<double> xs(static_cast<std::size_t>(n)), ys(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    xs[static_cast<std::size_t>(v)] = coord(engine);
    ys[static_cast<std::size_t>(v)] = coord(engine);
  }
  auto mean_of = [&](NodeId i, NodeId j) {
    const double dx = xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(j)];
    const double dy = ys[static_cast<std::size_t>(i)] - ys[static_cast<std::size_t>(j)];
    return std::hypot(dx, dy) + (j == 0 ? 0.0 : p.service_time);
  };

  std::vector<NodeId> tour(static_cast<std::size_t>(p.customers));
  std::iota(tour.begin(), tour.end(), 1);
  std::shuffle(tour.begin(), tour.end(), engine);
  tour.insert(tour.begin(), 0);
  tour.push_back(0);

  std::set<std::pair<NodeId, NodeId>> used;
  std::vector<Arc> arcs;
  double planted_length = 0.0;
  for (std::size_t i = 0; i + 1 < tour.size(); ++i) {
    const NodeId a = tour[i], b = tour[i + 1];
    if (used.insert({a, b}).second) {
      arcs.push_back({a, b, mean_of(a, b)});
    }
    planted_length += mean_of(a, b);
  }

  const int max_arcs = n * (n - 1);
  int target = p.complete ? max_arcs : (p.arc_count > 0 ? p.arc_count : 3 * p.customers);
  target = std::clamp(target, static_cast<int>(arcs.size()), max_arcs);
  if (p.complete) {
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = 0; j < n; ++j)
        if (i != j && used.insert({i, j}).second) arcs.push_back({i, j, mean_of(i, j)});
  } else {
    std::uniform_int_distribution<NodeId> node(0, n - 1);
    while (static_cast<int>(arcs.size()) < target) {
      const NodeId i = node(engine), j = node(engine);
      if (i != j && used.insert({i, j}).second) arcs.push_back({i, j, mean_of(i, j)});
    }
  }
  std::sort(arcs.begin(), arcs.end(), [](const Arc& a, const Arc& b) {
    return std::pair(a.from, a.to) < std::pair(b.from, b.to);
  });

  Network skeleton(n, arcs, planted_length * p.tb_factor);
  CovGenParams cov = p.cov;
  cov.seed = derive_seed(p.seed, "covgen");
  return skeleton.with_covariance(generate_covariance(skeleton, cov));
}

}  // namespace twd

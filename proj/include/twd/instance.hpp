#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace twd {

using NodeId = int;
using ArcId = int;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Jitter added to the diagonal when testing a covariance for semidefiniteness.
inline constexpr double kPsdJitter = 1e-8;
inline constexpr double kSymmetryTol = 1e-12;

struct Arc {
  NodeId from = 0;
  NodeId to = 0;
  double mean = 0.0;  // minutes, service time at `to` included

  bool operator==(const Arc&) const = default;
};

/// Directed travel network. Node 0 is the depot, nodes 1..n are customers.
/// Immutable once built; the constructor enforces every invariant.
class Network {
 public:
  /// Builds a network with a zero covariance matrix.
  Network(int node_count, std::vector<Arc> arcs, double time_budget);
  Network(int node_count, std::vector<Arc> arcs, Eigen::MatrixXd cov, double time_budget);

  int node_count() const { return node_count_; }
  int customer_count() const { return node_count_ - 1; }
  int arc_count() const { return static_cast<int>(arcs_.size()); }
  std::span<const Arc> arcs() const { return arcs_; }
  const Arc& arc(ArcId a) const { return arcs_[static_cast<std::size_t>(a)]; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  double time_budget() const { return time_budget_; }

  /// Index of arc (i, j), or nullopt when the network has no such arc.
  std::optional<ArcId> find_arc(NodeId from, NodeId to) const;
  std::string arc_label(ArcId a) const;

  Network with_covariance(Eigen::MatrixXd cov) const;
  Network with_time_budget(double time_budget) const;

  bool operator==(const Network& other) const;

 private:
  void validate();

  int node_count_;
  std::vector<Arc> arcs_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  double time_budget_;
  std::vector<ArcId> index_;  // node_count² lookup, -1 when absent
};

/// Cholesky of cov + kPsdJitter·I succeeds.
bool is_psd_with_jitter(const Eigen::MatrixXd& cov);

struct CovGenParams {
  double cv_min = 0.01;
  double cv_max = 0.2;
  double neg_flip_prob = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const CovGenParams&) const = default;
};

/// Q×|A| nonnegative travel times; column order follows the network's arcs.
struct SampleSet {
  RowMatrix values;
  std::uint64_t seed = 0;
  double clamp_rate = 0.0;

  int count() const { return static_cast<int>(values.rows()); }
  int arc_count() const { return static_cast<int>(values.cols()); }
  /// Per-arc average over samples.
  Eigen::VectorXd column_means() const;
};

/// d[a][k]: undirected hop distance from node k to the nearer endpoint of arc a.
/// Throws InputError("disconnected network") if some node is unreachable.
Eigen::MatrixXi arc_node_hops(const Network& net);

/// Distance-decaying correlated covariance: R = E·Eᵀ from the row-normalised
/// (and randomly sign-flipped) matrix [1/(1+d)], scaled by σ = CV·μ.
Eigen::MatrixXd generate_covariance(const Network& net, const CovGenParams& params);

/// Q i.i.d. draws from Normal(mean, cov), negative entries clamped to zero.
/// Bit-identical for equal (net, Q, seed) whatever the thread count.
SampleSet sample_travel_times(const Network& net, int sample_count, std::uint64_t seed);

/// Square factor B with B·Bᵀ = cov, via pivoted LDLᵀ (works for singular PSD
/// input). Throws InputError("covariance not PSD") on a negative pivot.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov);

struct RandomInstanceParams {
  int customers = 10;
  bool complete = false;
  /// Total arc count for sparse instances; 0 means 3·customers.
  int arc_count = 0;
  double grid = 100.0;
  double service_time = 10.0;
  /// Time budget as a multiple of the planted tour's expected length.
  double tb_factor = 1.25;
  CovGenParams cov;
  std::uint64_t seed = 0;
};

/// Euclidean instance on a random grid. Sparse instances contain a planted
/// random Hamiltonian circuit, which keeps them strongly connected and
/// budget-feasible in expectation.
Network random_instance(const RandomInstanceParams& params);

// --- file formats ---------------------------------------------------------

Network load_instance(const std::filesystem::path& path);
void save_instance(const Network& net, const std::filesystem::path& path);
std::string instance_to_json(const Network& net);
/// Parses the instance schema; the "cov_gen" variant is resolved here.
Network instance_from_json(const std::string& text);

void save_samples_csv(const Network& net, const SampleSet& samples,
                      const std::filesystem::path& path);
SampleSet load_samples_csv(const Network& net, const std::filesystem::path& path);
std::string samples_to_csv(const Network& net, const SampleSet& samples);
SampleSet samples_from_csv(const Network& net, const std::string& text);

}  // namespace twd

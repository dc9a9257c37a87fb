#include <cmath>
#include <cstdio>
#include <cstring>

#include "twd/error.hpp"
#include "twd/solver.hpp"
#include "format.hpp"

namespace twd {

namespace {

std::vector<double> arrivals_for(std::span<const double> y, const SampleSet& samples) {
  require(y.size() == static_cast<std::size_t>(samples.arc_count()), "cut: y has wrong length");
  std::vector<double> tau(static_cast<std::size_t>(samples.count()), 0.0);
  for (int q = 0; q < samples.count(); ++q) {
    double acc = 0.0;
    for (std::size_t a = 0; a < y.size(); ++a)
      if (y[a] != 0.0) acc += samples.values(q, static_cast<Eigen::Index>(a)) * y[a];
    tau[static_cast<std::size_t>(q)] = acc;
  }
  return tau;
}

}  // namespace

double Cut::value_at(std::span<const double> y) const {
  require(y.size() == coefficients.size(), "cut: y has wrong length");
  double v = intercept;
  for (std::size_t a = 0; a < y.size(); ++a) v += coefficients[a] * (y[a] - anchor[a]);
  return v;
}

double saa_phi(std::span<const double> y, const SampleSet& samples, const CustomerPenalty& pen) {
  return saa_window(arrivals_for(y, samples), pen).cost;
}

double dro_phi(std::span<const double> y, const Eigen::MatrixXd& robust_cov) {
  const auto m = static_cast<Eigen::Index>(y.size());
  require(robust_cov.rows() == m && robust_cov.cols() == m, "cut: covariance dimension mismatch");
  const Eigen::Map<const Eigen::VectorXd> v(y.data(), m);
  return std::sqrt(std::max(v.dot(robust_cov * v), 0.0));
}

Eigen::MatrixXd robust_covariance(const Eigen::MatrixXd& cov, double alpha2) {
  if (!(alpha2 >= 0.0)) throw InputError("alpha2: must be nonnegative");
  Eigen::MatrixXd c = cov;
  c.diagonal().array() += alpha2;
  return c;
}

Cut benders_cut(std::span<const double> y_hat, const SampleSet& samples, const PenaltyConfig& pen,
                NodeId customer) {
  const auto& cp = pen.at(customer);
  const auto tau = arrivals_for(y_hat, samples);
  const DualPair d = saa_duals(tau, cp);
  Cut c;
  c.customer = customer;
  c.anchor.assign(y_hat.begin(), y_hat.end());
  c.intercept = saa_window(tau, cp).cost;
  c.coefficients.assign(y_hat.size(), 0.0);
  for (int q = 0; q < samples.count(); ++q) {
    const double w = d.rho2[static_cast<std::size_t>(q)] - d.rho1[static_cast<std::size_t>(q)];
    if (w == 0.0) continue;
    for (std::size_t a = 0; a < y_hat.size(); ++a)
      c.coefficients[a] += samples.values(q, static_cast<Eigen::Index>(a)) * w;
  }
  return c;
}

Cut oa_cut(std::span<const double> y_hat, const Eigen::MatrixXd& robust_cov, NodeId customer) {
  const auto m = static_cast<Eigen::Index>(y_hat.size());
  require(robust_cov.rows() == m && robust_cov.cols() == m, "cut: covariance dimension mismatch");
  const Eigen::Map<const Eigen::VectorXd> v(y_hat.data(), m);
  const Eigen::VectorXd cy = robust_cov * v;
  const double quad = v.dot(cy);
  if (!(quad > 1e-18)) throw InputError("singular anchor: yᵀCy is not positive");
  const double phi = std::sqrt(quad);
  Cut c;
  c.customer = customer;
  c.anchor.assign(y_hat.begin(), y_hat.end());
  c.intercept = phi;
  c.coefficients.resize(y_hat.size());
  for (Eigen::Index a = 0; a < m; ++a) c.coefficients[static_cast<std::size_t>(a)] = cy[a] / phi;
  return c;
}

bool cut_check(const Cut& cut, std::span<const double> y, const PhiEvaluator& phi) {
  return phi(y) >= cut.value_at(y) - 1e-9;
}

std::uint64_t anchor_hash(std::span<const double> anchor) {
  std::uint64_t h = 1469598103934665603ull;
  for (double v : anchor) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ull;
    }
  }
  return h;
}

std::string cut_log_csv(std::span<const Cut> cuts, const Network& net) {
  std::string out = "customer,anchor_hash,intercept,coefficients\n";
  for (const auto& c : cuts) {
    require(c.coefficients.size() == static_cast<std::size_t>(net.arc_count()),
            "cut log: coefficient count does not match network");
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(anchor_hash(c.anchor)));
    out += std::to_string(c.customer) + "," + hex + "," + fmt::num(c.intercept) + ",";
    bool first = true;
    for (ArcId a = 0; a < net.arc_count(); ++a) {
      const double v = c.coefficients[static_cast<std::size_t>(a)];
      if (v == 0.0) continue;
      if (!first) out += ';';
      out += net.arc_label(a) + ":" + fmt::num(v);
      first = false;
    }
    out += '\n';
  }
  return out;
}

}  // namespace twd

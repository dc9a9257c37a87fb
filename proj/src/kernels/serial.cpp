#include "twd/kernels.hpp"

#include <algorithm>
#include <random>

#include "twd/error.hpp"
#include "twd/rng.hpp"
#include "detail.hpp"

namespace twd::kernels {

namespace detail {

std::int64_t draw_row(const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor,
                      std::uint64_t seed, int q, double* out) {
  const Eigen::Index n = mean.size();
  Engine engine = make_engine(derive_seed(seed, static_cast<std::uint64_t>(q)));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(static_cast<std::size_t>(n));
  for (auto& v : z) v = normal(engine);
  std::int64_t clamped = 0;
  for (Eigen::Index a = 0; a < n; ++a) {
    double value = mean[a];
    for (Eigen::Index b = 0; b < n; ++b) value += factor(a, b) * z[static_cast<std::size_t>(b)];
    if (value < 0.0) {
      value = 0.0;
      ++clamped;
    }
    out[a] = value;
  }
  return clamped;
}

void tally_column(const ArrivalMatrix& arrivals, Eigen::Index p, double lower, double upper,
                  ViolationTally& t) {
  std::int64_t early = 0, late = 0;
  double early_amt = 0.0, late_amt = 0.0;
  for (Eigen::Index q = 0; q < arrivals.rows(); ++q) {
    const double tau = arrivals(q, p);
    if (tau < lower) {
      ++early;
      early_amt += lower - tau;
    } else if (tau > upper) {
      ++late;
      late_amt += tau - upper;
    }
  }
  const auto i = static_cast<std::size_t>(p);
  t.early_count[i] = early;
  t.late_count[i] = late;
  t.early_amount[i] = early_amt;
  t.late_amount[i] = late_amt;
}

ViolationTally make_tally(std::size_t n) {
  ViolationTally t;
  t.early_count.assign(n, 0);
  t.late_count.assign(n, 0);
  t.early_amount.assign(n, 0.0);
  t.late_amount.assign(n, 0.0);
  return t;
}

}  // namespace detail

DrawResult draw_normal_rows_serial(const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor,
                                   int rows, std::uint64_t seed) {
  DrawResult r;
  r.values.resize(rows, mean.size());
  for (int q = 0; q < rows; ++q) r.clamped += detail::draw_row(mean, factor, seed, q, r.values.row(q).data());
  return r;
}

ArrivalMatrix arrival_times_serial(std::span<const ArcId> path, const RowMatrix& samples) {
  ArrivalMatrix out(samples.rows(), static_cast<Eigen::Index>(path.size()));
  for (Eigen::Index q = 0; q < samples.rows(); ++q) {
    double acc = 0.0;
    for (std::size_t p = 0; p < path.size(); ++p) {
      acc += samples(q, path[p]);
      out(q, static_cast<Eigen::Index>(p)) = acc;
    }
  }
  return out;
}

ViolationTally tally_violations_serial(const ArrivalMatrix& arrivals,
                                       std::span<const double> lower,
                                       std::span<const double> upper) {
  require(lower.size() == static_cast<std::size_t>(arrivals.cols()) &&
              upper.size() == lower.size(),
          "tally_violations: window count does not match route");
  auto t = detail::make_tally(lower.size());
  for (Eigen::Index p = 0; p < arrivals.cols(); ++p)
    detail::tally_column(arrivals, p, lower[static_cast<std::size_t>(p)],
                         upper[static_cast<std::size_t>(p)], t);
  return t;
}

}  // namespace twd::kernels

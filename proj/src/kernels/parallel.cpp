#include "twd/kernels.hpp"

#include "twd/error.hpp"
#include "detail.hpp"

namespace twd::kernels {

DrawResult draw_normal_rows(const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor,
                            int rows, std::uint64_t seed) {
  DrawResult r;
  r.values.resize(rows, mean.size());
  std::int64_t clamped = 0;
#pragma omp parallel for schedule(static) reduction(+ : clamped)
  for (int q = 0; q < rows; ++q) clamped += detail::draw_row(mean, factor, seed, q, r.values.row(q).data());
  r.clamped = clamped;
  return r;
}

ArrivalMatrix arrival_times(std::span<const ArcId> path, const RowMatrix& samples) {
  const auto rows = static_cast<long>(samples.rows());
  ArrivalMatrix out(samples.rows(), static_cast<Eigen::Index>(path.size()));
#pragma omp parallel for schedule(static)
  for (long q = 0; q < rows; ++q) {
    double acc = 0.0;
    for (std::size_t p = 0; p < path.size(); ++p) {
      acc += samples(q, path[p]);
      out(q, static_cast<Eigen::Index>(p)) = acc;
    }
  }
  return out;
}

ViolationTally tally_violations(const ArrivalMatrix& arrivals, std::span<const double> lower,
                                std::span<const double> upper) {
  require(lower.size() == static_cast<std::size_t>(arrivals.cols()) &&
              upper.size() == lower.size(),
          "tally_violations: window count does not match route");
  auto t = detail::make_tally(lower.size());
  const auto cols = static_cast<long>(arrivals.cols());
#pragma omp parallel for schedule(dynamic)
  for (long p = 0; p < cols; ++p)
    detail::tally_column(arrivals, p, lower[static_cast<std::size_t>(p)],
                         upper[static_cast<std::size_t>(p)], t);
  return t;
}

}  // namespace twd::kernels

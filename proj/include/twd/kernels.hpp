#pragma once

// Data-parallel inner loops. Every kernel has an OpenMP version (used by the
// library) and a serial reference with the same floating-point evaluation
// order; the two must agree bit for bit.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "twd/instance.hpp"

namespace twd::kernels {

/// Q × P arrival times, column p = customer at visit position p.
using ArrivalMatrix = Eigen::MatrixXd;

struct DrawResult {
  RowMatrix values;
  std::int64_t clamped = 0;
};

/// values(q, :) = max(0, mean + factor · z_q) where z_q comes from the
/// engine seeded with derive_seed(seed, q).
DrawResult draw_normal_rows(const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor,
                            int rows, std::uint64_t seed);
DrawResult draw_normal_rows_serial(const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor,
                                   int rows, std::uint64_t seed);

/// Cumulative travel time along `path` (tour arcs up to the last customer).
ArrivalMatrix arrival_times(std::span<const ArcId> path, const RowMatrix& samples);
ArrivalMatrix arrival_times_serial(std::span<const ArcId> path, const RowMatrix& samples);

struct ViolationTally {
  std::vector<std::int64_t> early_count, late_count;
  std::vector<double> early_amount, late_amount;  // totals, minutes
};

/// Early when arrival < lower, late when arrival > upper; endpoints are inside.
ViolationTally tally_violations(const ArrivalMatrix& arrivals, std::span<const double> lower,
                                std::span<const double> upper);
ViolationTally tally_violations_serial(const ArrivalMatrix& arrivals,
                                       std::span<const double> lower,
                                       std::span<const double> upper);

}  // namespace twd::kernels

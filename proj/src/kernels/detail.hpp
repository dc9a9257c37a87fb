#pragma once

#include <cstdint>

#include "twd/kernels.hpp"

// Row and column bodies shared by the serial and OpenMP drivers.
namespace twd::kernels::detail {

std::int64_t draw_row(const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor,
                      std::uint64_t seed, int q, double* out);
void tally_column(const ArrivalMatrix& arrivals, Eigen::Index p, double lower, double upper,
                  ViolationTally& t);
ViolationTally make_tally(std::size_t n);

}  // namespace twd::kernels::detail

#pragma once

#include <vector>

namespace twd {

/// Weights of window width, earliness and tardiness for one customer.
struct CustomerPenalty {
  double a_w = 0.0;
  double a_l = 1.0;
  double a_u = 1.0;

  double beta_l() const { return a_w / a_l; }
  double beta_u() const { return a_w / a_u; }
  CustomerPenalty scaled(double lambda) const { return {a_w * lambda, a_l * lambda, a_u * lambda}; }
  bool operator==(const CustomerPenalty&) const = default;
};

/// Per-customer penalty weights; entry k-1 belongs to customer k.
struct PenaltyConfig {
  std::vector<CustomerPenalty> customers;
  /// Admit the DRO boundary 2·a_w == min(a_l, a_u).
  bool allow_dro_boundary = false;

  static PenaltyConfig uniform(int customer_count, CustomerPenalty p);

  const CustomerPenalty& at(int customer) const;
  int customer_count() const { return static_cast<int>(customers.size()); }
  PenaltyConfig scaled(double lambda) const;

  /// Weights in (0, 1] and a_w/a_l + a_w/a_u <= 1 for every customer.
  void validate() const;
  /// 2·a_w < min(a_l, a_u) for every customer (<= with the boundary override).
  bool dro_valid() const;
};

bool dro_valid(const CustomerPenalty& p, bool allow_boundary = false);

/// a_w = min(β_l, β_u), a_l = a_w/β_l, a_u = a_w/β_u for every customer.
/// Throws InputError("infeasible confidence") when β_l + β_u > 1.
PenaltyConfig penalties_from_beta(double beta_l, double beta_u, int customer_count);

}  // namespace twd

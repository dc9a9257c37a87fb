#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "twd/error.hpp"
#include "twd/window_design.hpp"

using namespace twd;
using helpers::OneCustomer;

TEST(PenaltiesFromBeta, Mapping) {
  auto p = penalties_from_beta(0.05, 0.05, 3).at(2);
  EXPECT_DOUBLE_EQ(p.a_w, 0.05);
  EXPECT_DOUBLE_EQ(p.a_l, 1.0);
  EXPECT_DOUBLE_EQ(p.a_u, 1.0);
  p = penalties_from_beta(0.075, 0.025, 1).at(1);
  EXPECT_DOUBLE_EQ(p.a_w, 0.025);
  EXPECT_NEAR(p.a_l, 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(p.a_u, 1.0);
  EXPECT_THROW(penalties_from_beta(0.6, 0.6, 1), InputError);
  EXPECT_TRUE(penalties_from_beta(0.05, 0.025, 2).dro_valid());
}

TEST(CriticalIndices, Examples) {
  EXPECT_EQ(critical_indices(4, 0.3, 1, 1), std::make_pair(2, 3));
  EXPECT_EQ(critical_indices(1000, 0.05, 1, 1), std::make_pair(50, 951));
  EXPECT_EQ(critical_indices(1, 0.3, 1, 1), std::make_pair(1, 1));
  EXPECT_THROW(critical_indices(10, 0.5, 0.4, 1), InputError);
}

TEST(CriticalIndices, SatisfyBothInequalityChains) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 2000; ++t) {
    const auto g = oracle::random_grid_penalty(rng);
    const int q = std::uniform_int_distribution<int>(1, 300)(rng);
    const auto [p1, p2] = critical_indices(q, g.a_w(), g.a_l(), g.a_u());
    // (P1-1) l < w Q <= P1 l   and   (Q-P2) u < w Q <= (Q-P2+1) u, in thousandths
    EXPECT_LT((p1 - 1) * g.l, g.w * q);
    EXPECT_LE(g.w * q, p1 * g.l);
    EXPECT_LT((q - p2) * g.u, g.w * q);
    EXPECT_LE(g.w * q, (q - p2 + 1) * g.u);
    EXPECT_LE(p1, p2);
  }
}

TEST(DesignStochastic, WorkedExample) {
  const OneCustomer c{20, 8, 12, 10};
  const auto pen = PenaltyConfig::uniform(1, {0.3, 1, 1});
  const auto d = design_stochastic(c.route, c.samples, pen);
  const auto& w = d.plan.window(1);
  EXPECT_EQ(w.lower, 10);
  EXPECT_EQ(w.upper, 12);
  EXPECT_NEAR(w.cost, 3.1, 1e-12);
  EXPECT_NEAR(d.plan.total_cost, 3.1, 1e-12);
  // duals back in the input order 20, 8, 12, 10
  const auto& dp = d.duals[0];
  const std::vector<double> rho1{0, 0.25, 0, 0.05}, rho2{0.25, 0, 0.05, 0};
  for (int q = 0; q < 4; ++q) {
    EXPECT_NEAR(dp.rho1[q], rho1[q], 1e-15);
    EXPECT_NEAR(dp.rho2[q], rho2[q], 1e-15);
  }
  const std::vector<double> tau{20, 8, 12, 10};
  double dual = 0.0;
  for (int q = 0; q < 4; ++q) dual += tau[q] * (dp.rho2[q] - dp.rho1[q]);
  EXPECT_NEAR(dual, 3.1, 1e-12);
  EXPECT_DOUBLE_EQ(*w.early_rate, 0.25);
  EXPECT_DOUBLE_EQ(*w.late_rate, 0.25);
}

TEST(DesignStochastic, DegenerateCases) {
  const OneCustomer single{37};
  const auto pen = PenaltyConfig::uniform(1, {0.3, 1, 1});
  const auto w = design_stochastic(single.route, single.samples, pen).plan.window(1);
  EXPECT_EQ(w.lower, 37);
  EXPECT_EQ(w.upper, 37);
  EXPECT_EQ(w.cost, 0);

  std::vector<double> tau;
  std::mt19937_64 rng(1);
  for (int q = 0; q < 100; ++q) tau.push_back(std::uniform_real_distribution<double>(5, 50)(rng));
  const OneCustomer many(tau);
  const auto tiny = PenaltyConfig::uniform(1, {1e-9, 1, 1});
  const auto wt = design_stochastic(many.route, many.samples, tiny).plan.window(1);
  EXPECT_EQ(wt.lower, *std::min_element(tau.begin(), tau.end()));
  EXPECT_EQ(wt.upper, *std::max_element(tau.begin(), tau.end()));
}

TEST(DesignStochastic, TiesShareValues) {
  const OneCustomer c{5, 5, 5, 7, 7, 9};
  const auto pen = PenaltyConfig::uniform(1, {0.2, 1, 1});
  const auto d = design_stochastic(c.route, c.samples, pen);
  EXPECT_NEAR(d.plan.total_cost, brute_force_windows(c.route, c.samples, pen).total_cost, 1e-12);
}

TEST(BruteForce, Examples) {
  const OneCustomer c{8, 10, 12, 20};
  EXPECT_NEAR(brute_force_windows(c.route, c.samples, PenaltyConfig::uniform(1, {0.3, 1, 1})).total_cost,
              3.1, 1e-12);
  const auto free_width = brute_force_windows(c.route, c.samples, PenaltyConfig::uniform(1, {0.0, 1, 1}));
  EXPECT_EQ(free_width.total_cost, 0.0);
  EXPECT_EQ(free_width.window(1).lower, 8);
  EXPECT_EQ(free_width.window(1).upper, 20);
  const OneCustomer single{4};
  EXPECT_EQ(brute_force_windows(single.route, single.samples, PenaltyConfig::uniform(1, {0.3, 1, 1})).total_cost, 0);
}

TEST(FixedWidth, SingleCustomerMatchesVariableWidth) {
  const OneCustomer c{8, 10, 12, 20};
  const auto pen = PenaltyConfig::uniform(1, {0.3, 1, 1});
  const auto plan = design_fixed_width(c.route, c.samples, pen, 0.3);
  EXPECT_NEAR(plan.total_cost, 3.1, 1e-12);
  EXPECT_NEAR(*plan.shared_width, 2.0, 1e-12);
  EXPECT_THROW(design_fixed_width(c.route, c.samples, pen, 0.2), InputError);
}

TEST(FixedWidth, IdenticalCustomersRecoverVariableWidth) {
  // Two customers reached by a zero-time hop share every arrival sample.
  const Network net(3, {{0, 1, 10}, {1, 2, 0}, {2, 0, 10}}, 1e9);
  const Route r = route_to_xy(std::vector<int>{0, 1, 2, 0}, net);
  SampleSet s;
  std::mt19937_64 rng(3);
  s.values.resize(40, 3);
  for (int q = 0; q < 40; ++q) {
    s.values(q, 0) = std::uniform_real_distribution<double>(5, 30)(rng);
    s.values(q, 1) = 0.0;
    s.values(q, 2) = 10.0;
  }
  // a_w·Q/a_l and a_w·Q/a_u are not integers, so the optimal width is unique
  const auto pen = PenaltyConfig::uniform(2, {0.11, 1, 0.8});
  const auto var = design_stochastic(r, s, pen).plan;
  const auto fixed = design_fixed_width(r, s, pen, 0.11);
  EXPECT_NEAR(*fixed.shared_width, var.window(1).width(), 1e-12);
  EXPECT_NEAR(fixed.total_cost, var.total_cost, 1e-9);
}

TEST(FixedWidth, DisjointSupportsCostAtLeastVariable) {
  const Network net(3, {{0, 1, 10}, {1, 2, 50}, {2, 0, 10}}, 1e9);
  const Route r = route_to_xy(std::vector<int>{0, 1, 2, 0}, net);
  std::mt19937_64 rng(4);
  SampleSet s;
  s.values.resize(30, 3);
  for (int q = 0; q < 30; ++q) {
    s.values(q, 0) = std::uniform_real_distribution<double>(8, 12)(rng);
    s.values(q, 1) = std::uniform_real_distribution<double>(30, 90)(rng);
    s.values(q, 2) = 1.0;
  }
  const auto pen = PenaltyConfig::uniform(2, {0.05, 1, 1});
  const auto var = design_stochastic(r, s, pen).plan;
  const auto fixed = design_fixed_width(r, s, pen, 0.05);
  EXPECT_GE(fixed.total_cost, var.total_cost - 1e-12);
  for (const auto& w : fixed.windows) EXPECT_NEAR(w.width(), *fixed.shared_width, 1e-12);
}

TEST(FixedWidth, BinarySearchMatchesFullScanAndGrid) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 25; ++t) {
    const int n = std::uniform_int_distribution<int>(1, 4)(rng);
    const Network net = helpers::complete_instance(n, 100 + t);
    const Route r = route_to_xy(helpers::random_tour(n, rng), net);
    const SampleSet s = sample_travel_times(net, std::uniform_int_distribution<int>(1, 25)(rng), t);
    PenaltyConfig pen;
    const double a_w = 0.02 + 0.1 * std::uniform_real_distribution<double>()(rng);
    for (int k = 0; k < n; ++k)
      pen.customers.push_back({a_w, std::uniform_real_distribution<double>(0.3, 1)(rng),
                               std::uniform_real_distribution<double>(0.3, 1)(rng)});
    const auto fast = design_fixed_width(r, s, pen, a_w);
    const auto scan = design_fixed_width_scan(r, s, pen, a_w);
    EXPECT_NEAR(fast.total_cost, scan.total_cost, 1e-9);

    // Dense grid on w with a per-customer dense grid on l never beats the optimum.
    const auto arr = oracle::arrivals(r.seq(), net, s.values);
    double tmax = 0.0;
    for (const auto& col : arr) tmax = std::max(tmax, *std::max_element(col.begin(), col.end()));
    for (int iw = 0; iw <= 60; ++iw) {
      const double w = tmax * iw / 60.0;
      double total = 0.0;
      for (std::size_t p = 0; p < arr.size(); ++p) {
        const auto& pk = pen.at(r.visits()[p]);
        double best = 1e300;
        for (int il = 0; il <= 200; ++il)
          best = std::min(best, oracle::saa_cost(arr[p], a_w, pk.a_l, pk.a_u, tmax * il / 200.0,
                                                 tmax * il / 200.0 + w));
        total += best;
      }
      EXPECT_GE(total, fast.total_cost - 1e-9);
    }
  }
}

TEST(Scarf, Examples) {
  EXPECT_DOUBLE_EQ(scarf_earliness(100, 100, 100), 5.0);
  EXPECT_DOUBLE_EQ(scarf_tardiness(100, 100, 100), 5.0);
  EXPECT_EQ(scarf_earliness(90, 100, 0), 0.0);
  EXPECT_NEAR(scarf_earliness(79.353, 100, 100), 1.1475, 1e-3);
  EXPECT_NEAR(scarf_earliness(79.353, 100, 100), oracle::scarf_e(79.353, 100, 100), 1e-12);
}

TEST(Scarf, DominatesNormalExpectation) {
  // E[(l - T)+] for T ~ N(m, s²) is s·(z Φ(z) + φ(z)) with z = (l - m)/s.
  for (double l : {60.0, 80.0, 95.0, 100.0, 110.0, 140.0}) {
    const double m = 100, s = 10, z = (l - m) / s;
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI);
    const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
    EXPECT_GE(scarf_earliness(l, m, s * s), s * (z * cdf + pdf) - 1e-12);
    EXPECT_GE(scarf_tardiness(2 * m - l, m, s * s), s * (z * cdf + pdf) - 1e-12);
  }
}

TEST(Gamma, Examples) {
  const auto [gl, gu] = gamma_coeffs(0.05, 1, 1);
  EXPECT_NEAR(gl, 0.21795, 1e-5);
  EXPECT_DOUBLE_EQ(gl, gu);
  const auto [bl, bu] = gamma_coeffs(0.1, 0.2, 0.2, true);
  EXPECT_NEAR(bl, 0.1, 1e-15);
  EXPECT_NEAR(bu, 0.1, 1e-15);
  EXPECT_THROW(gamma_coeffs(0.1, 0.2, 0.2, false), InputError);
  const auto [sl, su] = gamma_coeffs(0.05, 0.7, 0.3);
  const auto [tl, tu] = gamma_coeffs(0.05, 0.3, 0.7);
  EXPECT_DOUBLE_EQ(sl, tu);
  EXPECT_DOUBLE_EQ(su, tl);
}

TEST(Gamma, EqualsSupCostPerSigmaAtOptimum) {
  const CustomerPenalty p{0.05, 1, 1};
  const auto w = dro_window(p, 100, 10);
  EXPECT_NEAR(w.cost, scarf_cost(p, w.lower, w.upper, 100, 100), 1e-12);
  EXPECT_NEAR(w.cost, 10 * (gamma_coeffs(0.05, 1, 1).first * 2), 1e-12);
}

TEST(DesignDro, WorkedCase) {
  const auto w = dro_window({0.05, 1, 1}, 100, 10);
  EXPECT_NEAR(w.lower, 79.353, 1e-3);
  EXPECT_NEAR(w.upper, 120.647, 1e-3);
  EXPECT_NEAR(w.cost, 4.3589, 1e-4);
  EXPECT_FALSE(w.clamped);
}

TEST(DesignDro, DegenerateAndBoundary) {
  const auto z = dro_window({0.05, 1, 1}, 100, 0);
  EXPECT_EQ(z.lower, 100);
  EXPECT_EQ(z.upper, 100);
  EXPECT_EQ(z.cost, 0);
  const auto b = dro_window({0.1, 0.2, 0.2}, 50, 7, true);
  EXPECT_NEAR(b.lower, 50, 1e-12);
  EXPECT_NEAR(b.upper, 50, 1e-12);
  EXPECT_THROW(dro_window({0.1, 0.2, 0.2}, 50, 7, false), InputError);
  EXPECT_THROW(dro_window({0.0, 1, 1}, 50, 7), InputError);
}

TEST(DesignDro, ClampsNegativeLower) {
  const CustomerPenalty p{0.01, 1, 1};
  const auto w = dro_window(p, 10, 30);
  EXPECT_TRUE(w.clamped);
  EXPECT_EQ(w.lower, 0.0);
  EXPECT_NEAR(w.cost, scarf_cost(p, 0.0, w.upper, 10, 900), 1e-12);
}

TEST(DesignDro, WidthShrinksAsWidthWeightGrows) {
  double prev = 1e300;
  for (int i = 1; i < 35; ++i) {
    const auto w = dro_window({i / 100.0, 0.7, 0.9}, 200, 15);
    EXPECT_LE(w.upper - w.lower, prev);
    prev = w.upper - w.lower;
  }
}

TEST(DesignDro, RouteLevelMatchesClosedForm) {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(4, 4);
  cov.diagonal() << 4, 9, 1, 16;
  cov(0, 1) = cov(1, 0) = 2;
  const Network net(3, {{0, 1, 30}, {1, 2, 40}, {2, 0, 20}, {0, 2, 35}}, cov, 1e9);
  const Route r = route_to_xy(std::vector<int>{0, 1, 2, 0}, net);
  const auto pen = penalties_from_beta(0.05, 0.05, 2);
  const auto plan = design_dro(r, net.mean(), net.cov(), 0.5, pen);
  // customer 2: prefix {0->1, 1->2}: var = 4 + 9 + 2*2 + 2*0.5
  const auto w2 = dro_window(pen.at(2), 70, std::sqrt(18.0));
  EXPECT_NEAR(plan.window(2).lower, w2.lower, 1e-12);
  EXPECT_NEAR(plan.window(2).upper, w2.upper, 1e-12);
  const auto w1 = dro_window(pen.at(1), 30, std::sqrt(4.5));
  EXPECT_NEAR(plan.window(1).lower, w1.lower, 1e-12);
  EXPECT_NEAR(plan.total_cost, w1.cost + w2.cost, 1e-12);
  EXPECT_FALSE(plan.window(1).early_rate.has_value());
}

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "twd/error.hpp"
#include "twd/solver.hpp"

using namespace twd;

namespace {

std::vector<double> random_point(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> y(n);
  for (auto& v : y) v = u(rng);
  return y;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

// --- cuts -----------------------------------------------------------------

TEST(BendersCut, SingleSampleGivesZeroCut) {
  const helpers::OneCustomer c{12.5};
  const auto pen = PenaltyConfig::uniform(1, {0.3, 1, 1});
  const Cut cut = benders_cut(c.route.y(1), c.samples, pen, 1);
  EXPECT_EQ(cut.intercept, 0.0);
  for (double s : cut.coefficients) EXPECT_EQ(s, 0.0);
}

TEST(BendersCut, WorkedExampleAndValidity) {
  const helpers::OneCustomer c{20, 8, 12, 10};
  const auto pen = PenaltyConfig::uniform(1, {0.3, 1, 1});
  const Cut cut = benders_cut(c.route.y(1), c.samples, pen, 1);
  EXPECT_NEAR(cut.intercept, 3.1, 1e-12);
  // Σ τ_q (ρ₂ − ρ₁) with ρ₁ = (0, .25, 0, .05), ρ₂ = (.25, 0, .05, 0) in input order
  EXPECT_NEAR(cut.coefficients[0], 20 * 0.25 - 8 * 0.25 + 12 * 0.05 - 10 * 0.05, 1e-12);
  EXPECT_NEAR(cut.coefficients[1], 0.0, 1e-15);
  std::mt19937_64 rng(3);
  const PhiEvaluator phi = [&](std::span<const double> y) { return saa_phi(y, c.samples, pen.at(1)); };
  for (int t = 0; t < 1000; ++t) {
    const auto y = random_point(2, rng);
    // direct φ: window cost of arrivals Σ_a t_qa y_a
    std::vector<double> tau;
    for (int q = 0; q < 4; ++q) tau.push_back(c.samples.values(q, 0) * y[0] + c.samples.values(q, 1) * y[1]);
    const double direct = oracle::saa_min(tau, 0.3, 1, 1);
    EXPECT_NEAR(phi(y), direct, 1e-9);
    EXPECT_GE(direct, cut.value_at(y) - 1e-9);
  }
}

TEST(BendersCut, ScalesWithPenalties) {
  const Network net = helpers::complete_instance(4, 2);
  std::mt19937_64 rng(5);
  const Route r = route_to_xy(helpers::random_tour(4, rng), net);
  const SampleSet s = sample_travel_times(net, 40, 1);
  const auto pen = penalties_from_beta(0.1, 0.05, 4);
  for (double lambda : {0.1, 0.5}) {
    const NodeId k = r.visits()[2];
    const Cut a = benders_cut(r.y(k), s, pen, k);
    const Cut b = benders_cut(r.y(k), s, pen.scaled(lambda), k);
    EXPECT_NEAR(b.intercept, lambda * a.intercept, 1e-9 * std::abs(a.intercept));
    for (std::size_t i = 0; i < a.coefficients.size(); ++i)
      EXPECT_NEAR(b.coefficients[i], lambda * a.coefficients[i], 1e-9 * (1 + std::abs(a.coefficients[i])));
  }
}

TEST(OaCut, DiagonalExampleMatchesFiniteDifferences) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 2);
  c.diagonal() << 4, 9;
  const std::vector<double> y{1, 1};
  const Cut cut = oa_cut(y, c);
  EXPECT_NEAR(cut.intercept, std::sqrt(13.0), 1e-15);
  EXPECT_NEAR(cut.coefficients[0], 4 / std::sqrt(13.0), 1e-15);
  EXPECT_NEAR(cut.coefficients[1], 9 / std::sqrt(13.0), 1e-15);
  const double h = 1e-6;
  for (int a = 0; a < 2; ++a) {
    auto yp = y, ym = y;
    yp[a] += h;
    ym[a] -= h;
    const double fd = (std::sqrt(oracle::quad(yp, c)) - std::sqrt(oracle::quad(ym, c))) / (2 * h);
    EXPECT_NEAR(cut.coefficients[a], fd, 1e-5);
  }
}

TEST(OaCut, IdentityUnitVectorAndTightness) {
  const Eigen::MatrixXd c = Eigen::MatrixXd::Identity(3, 3);
  const std::vector<double> e{0, 1, 0};
  const Cut cut = oa_cut(e, c);
  EXPECT_DOUBLE_EQ(cut.intercept, 1.0);
  EXPECT_EQ(cut.coefficients, e);
  const PhiEvaluator phi = [&](std::span<const double> y) { return dro_phi(y, c); };
  EXPECT_DOUBLE_EQ(cut.value_at(e), phi(e));
  EXPECT_TRUE(cut_check(cut, e, phi));
  EXPECT_THROW(oa_cut(std::vector<double>{0, 0, 0}, c), InputError);
}

TEST(CutCheck, CorruptedCoefficientIsCaught) {
  const Network net = helpers::complete_instance(5, 9);
  std::mt19937_64 rng(11);
  const Route r = route_to_xy(helpers::random_tour(5, rng), net);
  const SampleSet s = sample_travel_times(net, 30, 2);
  const auto pen = penalties_from_beta(0.05, 0.05, 5);
  const NodeId k = r.visits()[3];
  const auto rcov = robust_covariance(net.cov(), 0.1);

  Cut bc = benders_cut(r.y(k), s, pen, k);
  Cut oc = oa_cut(r.y(k), rcov, k);
  const PhiEvaluator phi_b = [&](std::span<const double> y) { return saa_phi(y, s, pen.at(k)); };
  const PhiEvaluator phi_o = [&](std::span<const double> y) { return dro_phi(y, rcov); };
  const auto n = static_cast<std::size_t>(net.arc_count());
  for (int t = 0; t < 500; ++t) {
    const auto y = random_point(n, rng);
    ASSERT_TRUE(cut_check(bc, y, phi_b));
    ASSERT_TRUE(cut_check(oc, y, phi_o));
  }
  // Corrupt an arc outside the prefix, where random points can push y above the anchor.
  std::size_t off = 0;
  while (r.y(k)[off] != 0.0) ++off;
  bc.coefficients[off] += 1.0;
  oc.coefficients[off] += 1.0;
  bool caught_b = false, caught_o = false;
  auto probe = [&](const std::vector<double>& y) {
    caught_b = caught_b || !cut_check(bc, y, phi_b);
    caught_o = caught_o || !cut_check(oc, y, phi_o);
  };
  for (double step : {1.0, 1e-2, 1e-4}) {
    auto y = r.y(k);
    y[off] = step;
    probe(y);
  }
  for (int t = 0; t < 10000 && !(caught_b && caught_o); ++t) probe(random_point(n, rng));
  EXPECT_TRUE(caught_b);
  EXPECT_TRUE(caught_o);
}

TEST(CutLog, FormatAndHash) {
  const helpers::OneCustomer c{20, 8, 12, 10};
  const auto pen = PenaltyConfig::uniform(1, {0.3, 1, 1});
  const std::vector<Cut> cuts{benders_cut(c.route.y(1), c.samples, pen, 1)};
  const std::string csv = cut_log_csv(cuts, c.net);
  EXPECT_EQ(csv.rfind("customer,anchor_hash,intercept,coefficients\n", 0), 0u);
  EXPECT_NE(csv.find("0->1:"), std::string::npos);
  EXPECT_EQ(csv.find("1->0:"), std::string::npos);  // zero coefficient omitted
  EXPECT_EQ(anchor_hash(std::vector<double>{1, 0}), anchor_hash(std::vector<double>{1, 0}));
  EXPECT_NE(anchor_hash(std::vector<double>{1, 0}), anchor_hash(std::vector<double>{0, 1}));
}

// --- search ---------------------------------------------------------------

TEST(EnumerateExact, TwoCustomerHandEvaluation) {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(6, 6);
  // arcs 0->1, 0->2, 1->2, 2->1, 1->0, 2->0
  cov.diagonal() << 4, 1, 9, 16, 1, 1;
  const Network net(3, {{0, 1, 10}, {0, 2, 10}, {1, 2, 10}, {2, 1, 10}, {1, 0, 10}, {2, 0, 10}}, cov,
                    1e9);
  const auto pen = penalties_from_beta(0.05, 0.05, 2);
  const auto [gl, gu] = gamma_coeffs(0.05, 1, 1);
  const double order12 = (gl + gu) * (2.0 + std::sqrt(13.0));
  const double order21 = (gl + gu) * (1.0 + std::sqrt(17.0));
  const auto model = ModelSpec::rm(0.0, 0.0);
  const SolveResult e = enumerate_exact(net, model, pen);
  EXPECT_NEAR(e.objective, std::min(order12, order21), 1e-12);
  EXPECT_EQ(e.route, (std::vector<int>{0, 2, 1, 0}));
  EXPECT_TRUE(e.proof_of_optimality);
  const SolveResult b = branch_and_bound(net, model, pen);
  EXPECT_NEAR(b.objective, e.objective, 1e-12);
  EXPECT_EQ(b.route, e.route);
}

TEST(EnumerateExact, PointWindowsCostNothing) {
  RandomInstanceParams p;
  p.customers = 4;
  p.complete = true;
  p.seed = 1;
  p.cov.cv_min = p.cov.cv_max = 0.0;
  const Network net = random_instance(p).with_time_budget(std::numeric_limits<double>::infinity());
  const SampleSet s = sample_travel_times(net, 20, 0);
  const auto r = enumerate_exact(net, ModelSpec::sm(s), penalties_from_beta(0.05, 0.05, 4));
  EXPECT_EQ(r.objective, 0.0);
  EXPECT_EQ(r.route, (std::vector<int>{0, 1, 2, 3, 4, 0}));  // lexicographic tie-break
}

TEST(EnumerateExact, BudgetInfeasibleNamesMinimum) {
  const Network net = helpers::complete_instance(4, 3).with_time_budget(1.0);
  const SampleSet s = sample_travel_times(net, 20, 0);
  const auto pen = penalties_from_beta(0.05, 0.05, 4);
  const std::string e1 = error_of([&] { enumerate_exact(net, ModelSpec::sm(s), pen); });
  const std::string e2 = error_of([&] { branch_and_bound(net, ModelSpec::sm(s), pen); });
  EXPECT_NE(e1.find("budget infeasible"), std::string::npos) << e1;
  EXPECT_NE(e1.find("minimum achievable budget value"), std::string::npos) << e1;
  EXPECT_EQ(e1, e2);
  EXPECT_THROW(enumerate_exact(net, ModelSpec::sm(s), pen), InfeasibleError);
}

TEST(BranchAndBound, NoHamiltonianCircuit) {
  // Star: every customer only connects to the depot.
  const Network net(3, {{0, 1, 1}, {1, 0, 1}, {0, 2, 1}, {2, 0, 1}}, 100.0);
  const SampleSet s = sample_travel_times(net, 5, 0);
  const std::string e = error_of(
      [&] { branch_and_bound(net, ModelSpec::sm(s), penalties_from_beta(0.05, 0.05, 2)); });
  EXPECT_NE(e.find("no Hamiltonian circuit"), std::string::npos) << e;
}

TEST(BranchAndBound, MatchesEnumerationOnSmallInstances) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const int n = 4 + static_cast<int>(seed % 3);
    const Network net = helpers::complete_instance(n, seed, 1.1);
    const SampleSet s = sample_travel_times(net, 50, seed);
    const auto pen = penalties_from_beta(0.05, 0.1, n);
    for (const ModelSpec& m : {ModelSpec::sm(s), ModelSpec::rm(0.5, 0.1)}) {
      const SolveResult e = enumerate_exact(net, m, pen);
      const SolveResult b = branch_and_bound(net, m, pen);
      EXPECT_NEAR(b.objective, e.objective, 1e-9) << seed;
      EXPECT_EQ(b.route, e.route) << seed;
      const Route r = route_to_xy(b.route, net);
      EXPECT_NEAR(route_objective(net, r, m, pen), b.objective, 1e-9);
      EXPECT_LE(route_budget(net, r, m), net.time_budget());
      EXPECT_NEAR(b.plan.total_cost, b.objective, 1e-9);
    }
  }
}

TEST(BranchAndBound, InitialRouteDominance) {
  const Network net = helpers::complete_instance(6, 4);
  const SampleSet s = sample_travel_times(net, 50, 4);
  const auto pen = penalties_from_beta(0.05, 0.05, 6);
  const ModelSpec m = ModelSpec::sm(s);
  std::mt19937_64 rng(8);
  for (int t = 0; t < 5; ++t) {
    const auto seq = helpers::random_tour(6, rng);
    const Route r = route_to_xy(seq, net);
    if (route_budget(net, r, m) > net.time_budget()) continue;
    SolveOptions o;
    o.initial_route = seq;
    EXPECT_LE(branch_and_bound(net, m, pen, o).objective, route_objective(net, r, m, pen) + 1e-12);
  }
}

TEST(BranchAndBound, PruningReducesNodes) {
  const Network net = helpers::complete_instance(6, 5);
  const SampleSet s = sample_travel_times(net, 50, 5);
  const auto pen = penalties_from_beta(0.05, 0.05, 6);
  SolveOptions off;
  off.prune_bound = off.prune_budget = false;
  const auto pruned = branch_and_bound(net, ModelSpec::sm(s), pen);
  const auto full = branch_and_bound(net, ModelSpec::sm(s), pen, off);
  EXPECT_LE(pruned.node_count, full.node_count);
  EXPECT_NEAR(pruned.objective, full.objective, 1e-9);
  EXPECT_EQ(pruned.route, full.route);
}

TEST(BranchAndBound, DeterministicWithOneThreadAndStableWithMore) {
  const Network net = helpers::complete_instance(7, 6);
  const SampleSet s = sample_travel_times(net, 40, 6);
  const auto pen = penalties_from_beta(0.05, 0.05, 7);
  const auto a = branch_and_bound(net, ModelSpec::sm(s), pen);
  const auto b = branch_and_bound(net, ModelSpec::sm(s), pen);
  EXPECT_EQ(a.route, b.route);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.node_count, b.node_count);
  EXPECT_EQ(a.pruned_count, b.pruned_count);
  EXPECT_FALSE(a.node_counts_approximate);
  SolveOptions o;
  o.threads = 3;
  const auto c = branch_and_bound(net, ModelSpec::sm(s), pen, o);
  EXPECT_EQ(c.route, a.route);
  EXPECT_EQ(c.objective, a.objective);
  EXPECT_TRUE(c.node_counts_approximate);
}

#pragma once

#include <algorithm>
#include <initializer_list>
#include <random>
#include <vector>

#include "twd/instance.hpp"
#include "twd/routing.hpp"

namespace helpers {

/// Depot plus one customer; sample q has travel time tau[q] on 0->1.
struct OneCustomer {
  twd::Network net{2, {{0, 1, 10.0}, {1, 0, 10.0}}, 1e9};
  twd::SampleSet samples;
  twd::Route route = twd::route_to_xy(std::vector<int>{0, 1, 0}, net);

  explicit OneCustomer(std::initializer_list<double> tau) : OneCustomer(std::vector<double>(tau)) {}
  explicit OneCustomer(const std::vector<double>& tau) {
    samples.values.resize(static_cast<Eigen::Index>(tau.size()), 2);
    for (std::size_t q = 0; q < tau.size(); ++q) {
      samples.values(static_cast<Eigen::Index>(q), 0) = tau[q];
      samples.values(static_cast<Eigen::Index>(q), 1) = 1.0;
    }
  }
};

inline twd::Network complete_instance(int customers, std::uint64_t seed, double tb_factor = 1.25) {
  twd::RandomInstanceParams p;
  p.customers = customers;
  p.complete = true;
  p.seed = seed;
  p.tb_factor = tb_factor;
  return twd::random_instance(p);
}

inline std::vector<int> random_tour(int customers, std::mt19937_64& rng) {
  std::vector<int> seq(static_cast<std::size_t>(customers));
  for (int i = 0; i < customers; ++i) seq[static_cast<std::size_t>(i)] = i + 1;
  std::shuffle(seq.begin(), seq.end(), rng);
  seq.insert(seq.begin(), 0);
  seq.push_back(0);
  return seq;
}

}  // namespace helpers

#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "softgate/ingest.hpp"

namespace fixtures {

inline softgate::PredictionRecord record(std::vector<double> probs, std::size_t true_label,
                                         std::size_t predicted_label) {
  return softgate::PredictionRecord{std::move(probs), true_label, predicted_label};
}

inline std::vector<double> one_hot(std::size_t k, std::size_t c) {
  std::vector<double> v(k, 0.0);
  v[c] = 1.0;
  return v;
}

// A point at Euclidean distance d from vertex c of the K-simplex, moving
// toward the barycentre of the other vertices. Valid while d < sqrt((K-1)/K)
// keeps c the argmax.
inline std::vector<double> at_distance_from_vertex(std::size_t k, std::size_t c, double d) {
  const double others = static_cast<double>(k - 1);
  // |(-a, a/(k-1), ...)| = a * sqrt(1 + 1/(k-1))
  const double a = d / std::sqrt(1.0 + 1.0 / others);
  std::vector<double> v(k, a / others);
  v[c] = 1.0 - a;
  return v;
}

// Uniform draw from the simplex (normalized exponentials).
inline std::vector<double> random_simplex(std::size_t k, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(k);
  double s = 0.0;
  for (double& x : v) s += (x = e(rng));
  for (double& x : v) x /= s;
  return v;
}

}  // namespace fixtures

#include "softgate/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "softgate/error.hpp"
#include "softgate/geometry.hpp"
#include "softgate/summation.hpp"

namespace softgate {

NearestCentroid assign_nearest(std::span<const double> probs, const CentroidSet& centroids) {
  if (probs.size() != centroids.k())
    throw ValidationError("probability vector has " + std::to_string(probs.size()) +
                          " entries, centroids have " + std::to_string(centroids.k()));
  NearestCentroid best{0, std::numeric_limits<double>::infinity()};
  bool any = false;
  for (ClassId c = 0; c < centroids.k(); ++c) {
    if (!centroids.defined(c)) continue;
    const double d = simplex_distance(probs, centroids.centroid(c));
    if (!any || d < best.distance) {
      best = {c, d};
      any = true;
    }
  }
  if (!any) throw ValidationError("no defined centroids to assign against");
  return best;
}

std::vector<ClusterAssignment> assign_all(const PredictionSet& set,
                                          const CentroidSet& centroids,
                                          const Execution& exec) {
  if (!set.empty() && set.k() != centroids.k())
    throw ValidationError("prediction set and centroids disagree on k");
  std::vector<ClusterAssignment> out(set.row_count());
  parallel_for(set.row_count(), exec, [&](std::size_t i) {
    const auto nearest = assign_nearest(set[i].probs, centroids);
    out[i] = {i, nearest.cluster, nearest.distance};
  });
  return out;
}

namespace {

double inertia_of(std::span<const ClusterAssignment> assignments) {
  CompensatedSum acc;
  for (const auto& a : assignments) acc.add(a.distance * a.distance);
  return acc.value();
}

}  // namespace

KMeansResult kmeans(const PredictionSet& set, const CentroidSet& init,
                    const KMeansOptions& options) {
  if (options.max_iter < 1) throw ValidationError("max_iter must be at least 1");
  if (!(options.tol > 0.0)) throw ValidationError("tol must be positive");
  if (!set.empty() && set.k() != init.k())
    throw ValidationError("prediction set and initial centroids disagree on k");
  if (!init.undefined_classes().empty())
    throw ValidationError("k-means needs an initial centroid for every class");

  const std::size_t k = init.k();
  std::vector<std::vector<double>> current = init.rows();
  std::vector<std::size_t> members(k, 0);
  KMeansResult result;

  for (std::size_t iter = 1; iter <= options.max_iter; ++iter) {
    const CentroidSet step(k, current, std::vector<std::size_t>(k, 1));
    const auto assignments = assign_all(set, step, options.exec);
    result.inertia_history.push_back(inertia_of(assignments));

    std::vector<std::vector<CompensatedSum>> sums(k, std::vector<CompensatedSum>(k));
    std::fill(members.begin(), members.end(), 0);
    for (const auto& a : assignments) {
      ++members[a.cluster];
      const auto& probs = set[a.row_index].probs;
      for (std::size_t j = 0; j < k; ++j) sums[a.cluster][j].add(probs[j]);
    }

    double movement = 0.0;
    for (ClassId c = 0; c < k; ++c) {
      if (members[c] == 0) continue;
      const double n = static_cast<double>(members[c]);
      for (std::size_t j = 0; j < k; ++j) {
        const double updated = sums[c][j].value() / n;
        movement = std::max(movement, std::abs(updated - current[c][j]));
        current[c][j] = updated;
      }
    }
    result.iterations = iter;
    if (movement < options.tol) {
      result.converged = true;
      break;
    }
  }

  std::vector<std::size_t> support(k);
  for (ClassId c = 0; c < k; ++c) support[c] = members[c] > 0 ? members[c] : init.support(c);
  result.final_centroids = CentroidSet(k, std::move(current), std::move(support));
  result.assignments = assign_all(set, result.final_centroids, options.exec);
  result.inertia = inertia_of(result.assignments);
  return result;
}

FidelityReport fidelity(std::span<const ClusterAssignment> assignments,
                        const PredictionSet& set) {
  if (assignments.size() != set.row_count())
    throw ValidationError("assignments cover " + std::to_string(assignments.size()) +
                          " rows, set has " + std::to_string(set.row_count()));
  FidelityReport report;
  for (const auto& a : assignments) {
    if (a.row_index >= set.row_count())
      throw ValidationError("assignment row index out of range");
    const auto& rec = set[a.row_index];
    if (!rec.correct()) continue;
    ++report.total_correct;
    if (a.cluster == rec.true_label) ++report.matching;
  }
  if (report.total_correct > 0)
    report.fidelity = static_cast<double>(report.matching) /
                      static_cast<double>(report.total_correct);
  return report;
}

FidelityReport fidelity(const KMeansResult& result, const PredictionSet& set) {
  return fidelity(result.assignments, set);
}

}  // namespace softgate

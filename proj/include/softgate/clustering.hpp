#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "softgate/calibration.hpp"
#include "softgate/ingest.hpp"
#include "softgate/parallel.hpp"

namespace softgate {

struct NearestCentroid {
  ClassId cluster = 0;
  double distance = 0.0;
};

struct ClusterAssignment {
  std::size_t row_index = 0;
  ClassId cluster = 0;
  double distance = 0.0;
};

struct KMeansOptions {
  std::size_t max_iter = 100;
  // Convergence when the largest per-coordinate centroid movement of an
  // update step falls below this value.
  double tol = 1e-6;
  Execution exec;
};

struct KMeansResult {
  std::vector<ClusterAssignment> assignments;  // against final_centroids
  CentroidSet final_centroids;
  std::size_t iterations = 0;
  bool converged = false;
  double inertia = 0.0;  // sum of squared distances to final_centroids
  // Inertia after each assignment step, measured against the centroids that
  // step assigned to. Non-increasing for Lloyd iteration.
  std::vector<double> inertia_history;
};

struct FidelityReport {
  std::size_t total_correct = 0;
  std::size_t matching = 0;
  std::optional<double> fidelity;  // unset when total_correct == 0
};

// Closest defined centroid; ties go to the lowest class index.
NearestCentroid assign_nearest(std::span<const double> probs, const CentroidSet& centroids);

// Nearest-centroid labelling of every row.
std::vector<ClusterAssignment> assign_all(const PredictionSet& set,
                                          const CentroidSet& centroids,
                                          const Execution& exec = {});

// Lloyd iteration on the simplex starting from `init`. A cluster that loses
// all of its points keeps its previous centroid, so cluster c stays tied to
// class c.
KMeansResult kmeans(const PredictionSet& set, const CentroidSet& init,
                    const KMeansOptions& options = {});

// Fraction of correct predictions whose cluster equals their class.
FidelityReport fidelity(std::span<const ClusterAssignment> assignments,
                        const PredictionSet& set);
FidelityReport fidelity(const KMeansResult& result, const PredictionSet& set);

}  // namespace softgate

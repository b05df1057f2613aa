#include "softgate/gate.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "softgate/clustering.hpp"
#include "softgate/error.hpp"
#include "softgate/geometry.hpp"

namespace softgate {

GateDecision gate_one(std::span<const double> probs, const CalibrationArtifact& calibration,
                      const GateMode& mode, const GateOptions& options) {
  const std::size_t k = calibration.k();
  if (probs.size() != k)
    throw ValidationError("probability vector has " + std::to_string(probs.size()) +
                          " entries, calibration expects " + std::to_string(k));
  if (!on_simplex(probs, options.sum_tolerance))
    throw ValidationError("input is not a probability vector");
  if (mode.is_global() && !(*mode.global_threshold >= 0.0))
    throw ValidationError("global threshold must be nonnegative");

  GateDecision d;
  d.global_mode = mode.is_global();
  d.predicted_class = argmax(probs);

  if (!calibration.centroids.defined(d.predicted_class)) {
    if (!options.unknown_on_undefined)
      throw ValidationError("no centroid for predicted class " +
                            std::to_string(d.predicted_class));
    const auto nearest = assign_nearest(probs, calibration.centroids);
    d.status = GateStatus::Unknown;
    d.distance_to_predicted_centroid = std::numeric_limits<double>::infinity();
    d.threshold_applied = mode.is_global() ? *mode.global_threshold
                                           : calibration.thresholds[d.predicted_class].threshold;
    d.nearest_centroid = nearest.cluster;
    d.nearest_distance = nearest.distance;
    return d;
  }

  d.distance_to_predicted_centroid =
      simplex_distance(probs, calibration.centroids.centroid(d.predicted_class));
  d.threshold_applied = mode.is_global() ? *mode.global_threshold
                                         : calibration.thresholds[d.predicted_class].threshold;
  d.status = d.distance_to_predicted_centroid < d.threshold_applied ? GateStatus::Accept
                                                                    : GateStatus::Unknown;
  const auto nearest = assign_nearest(probs, calibration.centroids);
  d.nearest_centroid = nearest.cluster;
  d.nearest_distance = nearest.distance;
  return d;
}

GateBatchResult gate_batch(const PredictionSet& set, const CalibrationArtifact& calibration,
                           const GateMode& mode, const GateOptions& options,
                           const Execution& exec) {
  GateBatchResult result;
  result.decisions.resize(set.row_count());
  parallel_for(set.row_count(), exec, [&](std::size_t i) {
    try {
      result.decisions[i] = gate_one(set[i].probs, calibration, mode, options);
    } catch (const Error& e) {
      throw GateRowError(i, e.what());
    }
  });
  for (const auto& d : result.decisions) (d.accepted() ? result.summary.accepted
                                                       : result.summary.unknown)++;
  if (!result.decisions.empty())
    result.summary.accept_rate = static_cast<double>(result.summary.accepted) /
                                 static_cast<double>(result.decisions.size());
  return result;
}

std::string to_string(GateStatus s) { return s == GateStatus::Accept ? "accept" : "unknown"; }

namespace {

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

std::string decision_json_line(const GateDecision& d) {
  const nlohmann::json j = {
      {"status", to_string(d.status)},
      {"predicted_class", d.predicted_class},
      {"distance", number_or_null(d.distance_to_predicted_centroid)},
      {"threshold", number_or_null(d.threshold_applied)},
      {"nearest_centroid", d.nearest_centroid},
      {"nearest_distance", d.nearest_distance},
      {"mode", d.global_mode ? "global" : "per-class"},
  };
  return j.dump();
}

void write_decisions_jsonl(std::span<const GateDecision> decisions, std::ostream& sink) {
  for (const auto& d : decisions) sink << decision_json_line(d) << '\n';
  if (!sink) throw Error("write failure on decision stream");
}

}  // namespace softgate

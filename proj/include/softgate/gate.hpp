#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "softgate/calibration.hpp"
#include "softgate/error.hpp"
#include "softgate/ingest.hpp"
#include "softgate/parallel.hpp"

namespace softgate {

enum class GateStatus { Accept, Unknown };

// Per-class mode applies thresholds[predicted_class]; global mode applies a
// single distance to every class.
struct GateMode {
  std::optional<double> global_threshold;

  static GateMode per_class() { return {}; }
  static GateMode global(double t) { return GateMode{t}; }
  bool is_global() const noexcept { return global_threshold.has_value(); }
};

struct GateOptions {
  // Tolerance used to check that an incoming vector is a probability vector.
  double sum_tolerance = 1e-6;
  // When the argmax class has no centroid: throw (default) or answer unknown.
  bool unknown_on_undefined = false;
};

struct GateDecision {
  GateStatus status = GateStatus::Unknown;
  ClassId predicted_class = 0;
  double distance_to_predicted_centroid = 0.0;
  double threshold_applied = 0.0;  // may be +inf
  ClassId nearest_centroid = 0;
  double nearest_distance = 0.0;
  bool global_mode = false;

  bool accepted() const noexcept { return status == GateStatus::Accept; }
  bool operator==(const GateDecision&) const = default;
};

struct GateSummary {
  std::size_t accepted = 0;
  std::size_t unknown = 0;
  double accept_rate = 0.0;  // 0 for an empty batch
};

struct GateBatchResult {
  std::vector<GateDecision> decisions;
  GateSummary summary;
};

// Thrown by gate_batch; carries the index of the offending row.
class GateRowError : public ValidationError {
 public:
  GateRowError(std::size_t row, const std::string& what)
      : ValidationError("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Accept iff the distance to the argmax class centroid is strictly below
// the applied threshold.
GateDecision gate_one(std::span<const double> probs, const CalibrationArtifact& calibration,
                      const GateMode& mode = GateMode::per_class(),
                      const GateOptions& options = {});

GateBatchResult gate_batch(const PredictionSet& set, const CalibrationArtifact& calibration,
                           const GateMode& mode = GateMode::per_class(),
                           const GateOptions& options = {}, const Execution& exec = {});

std::string to_string(GateStatus s);

// One JSON object per decision:
// {status, predicted_class, distance, threshold, nearest_centroid, nearest_distance, mode}
// Infinite thresholds are written as null.
std::string decision_json_line(const GateDecision& d);
void write_decisions_jsonl(std::span<const GateDecision> decisions, std::ostream& sink);

}  // namespace softgate

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "softgate/ingest.hpp"

namespace softgate {

inline constexpr int kCalibrationSchemaVersion = 1;

// Per-class mean softmax vector over correct predictions. A class with zero
// support has no centroid; its row is stored as zeros and reported through
// undefined_classes().
class CentroidSet {
 public:
  CentroidSet() = default;
  // Throws ValidationError if shapes disagree or a supported row is not a
  // probability vector.
  CentroidSet(std::size_t k, std::vector<std::vector<double>> rows,
              std::vector<std::size_t> support);

  // Every class defined with unit support. Used for hand-built fixtures.
  static CentroidSet from_rows(std::vector<std::vector<double>> rows);

  std::size_t k() const noexcept { return k_; }
  bool defined(ClassId c) const { return c < k_ && support_[c] > 0; }
  std::span<const double> centroid(ClassId c) const { return rows_.at(c); }
  std::size_t support(ClassId c) const { return support_.at(c); }
  const std::vector<std::vector<double>>& rows() const noexcept { return rows_; }
  const std::vector<std::size_t>& supports() const noexcept { return support_; }
  std::vector<ClassId> defined_classes() const;
  std::vector<ClassId> undefined_classes() const;

  bool operator==(const CentroidSet&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<std::vector<double>> rows_;
  std::vector<std::size_t> support_;
};

enum class ThresholdSource { MinIncorrect, FallbackMaxCorrect, FallbackInfinite };

// Used when a class has no incorrect predictions to take a minimum over.
enum class ThresholdFallback { MaxCorrect, Infinite };

// Which label of an incorrect record selects its class bucket (and the
// centroid it is measured against). PredictedClass is the default reading;
// TrueClass is the alternative reading of the grouping key.
enum class ThresholdGrouping { PredictedClass, TrueClass };

struct ThresholdEntry {
  ClassId cls = 0;
  double threshold = 0.0;  // +inf for FallbackInfinite
  ThresholdSource source = ThresholdSource::MinIncorrect;

  bool finite() const noexcept;
  bool operator==(const ThresholdEntry&) const = default;
};

class ThresholdTable {
 public:
  ThresholdTable() = default;
  // Entries must be indexed 0..k-1 in order.
  explicit ThresholdTable(std::vector<ThresholdEntry> entries);

  std::size_t k() const noexcept { return entries_.size(); }
  const ThresholdEntry& operator[](ClassId c) const { return entries_.at(c); }
  std::span<const ThresholdEntry> entries() const noexcept { return entries_; }

  bool operator==(const ThresholdTable&) const = default;

 private:
  std::vector<ThresholdEntry> entries_;
};

struct ThresholdOptions {
  ThresholdFallback fallback = ThresholdFallback::MaxCorrect;
  ThresholdGrouping grouping = ThresholdGrouping::PredictedClass;
};

struct PairwiseStats {
  double d_min = 0.0;
  double d_max = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t pair_count = 0;
};

struct CalibrationMetadata {
  std::string provenance;
  std::string created;  // ISO-8601 UTC
  std::string tool_version;
  ThresholdOptions options;
};

struct CalibrationArtifact {
  CentroidSet centroids;
  ThresholdTable thresholds;
  CalibrationMetadata metadata;

  std::size_t k() const noexcept { return centroids.k(); }
};

// Mean probability vector per class, grouped by argmax(probs). Throws
// ValidationError on empty input, on a record with true != predicted, or on
// a record whose argmax disagrees with its label.
CentroidSet compute_centroids(const PredictionSet& correct);

// Minimum distance from the incorrect records of each class to that class's
// centroid. `correct` supplies the data for the MaxCorrect fallback and may
// be empty when that fallback is never reached.
ThresholdTable compute_thresholds(const PredictionSet& incorrect,
                                  const CentroidSet& centroids,
                                  const ThresholdOptions& options = {},
                                  const PredictionSet& correct = {});

// Statistics over all unordered pairs of defined centroids. Throws
// ValidationError with fewer than two defined centroids.
PairwiseStats pairwise_centroid_stats(const CentroidSet& centroids);

// Full calibration from a training set: split, centroids, thresholds.
// `created` defaults to the current UTC time.
CalibrationArtifact calibrate(const PredictionSet& train,
                              const ThresholdOptions& options = {},
                              std::optional<std::string> created = std::nullopt);

// Throws ValidationError when centroid and threshold class sets disagree.
void validate_artifact(const CalibrationArtifact& artifact);

void save_calibration(const CalibrationArtifact& artifact, std::ostream& sink);
// Throws CorruptionError on truncated or malformed payloads and on schema
// version mismatch.
CalibrationArtifact load_calibration(std::istream& source);

// Short stable fingerprint of the serialized artifact (16 hex digits).
std::string calibration_digest(const CalibrationArtifact& artifact);

std::string to_string(ThresholdSource s);
std::string to_string(ThresholdFallback f);
std::string to_string(ThresholdGrouping g);
ThresholdSource parse_threshold_source(const std::string& s);
ThresholdFallback parse_threshold_fallback(const std::string& s);
ThresholdGrouping parse_threshold_grouping(const std::string& s);

std::string utc_timestamp_now();

}  // namespace softgate

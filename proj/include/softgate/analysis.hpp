#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "softgate/calibration.hpp"
#include "softgate/clustering.hpp"
#include "softgate/ingest.hpp"
#include "softgate/parallel.hpp"

namespace softgate {

// Thresholds 0.8, 0.7, ..., 0.1, 0.05.
std::vector<double> default_threshold_grid();
// Shell boundaries 0.8 ... 0.1, 0.05; the inner sphere ends at the last one.
std::vector<double> default_shell_boundaries();
inline constexpr double kDefaultInnerRadius = 0.05;

// Distance of every record to the centroid of its predicted class. Throws
// ValidationError naming the row when that centroid is undefined.
std::vector<double> predicted_class_distances(const PredictionSet& set,
                                              const CentroidSet& centroids,
                                              const Execution& exec = {});

// 100 * r / (r + 1): accuracy among retained predictions when they hold r
// correct predictions per incorrect one.
double accuracy_from_ratio(double ratio);

struct SweepRow {
  double threshold = 0.0;
  double retention_pct = 0.0;  // correct retained / all correct
  double accuracy_pct = 0.0;   // correct retained / all retained
  std::size_t correct_retained = 0;
  std::size_t incorrect_retained = 0;
  double ratio = 0.0;  // +inf when incorrect_retained == 0

  bool operator==(const SweepRow&) const = default;
};

// A record is retained at t when its predicted-class distance is < t.
// `grid` must be non-empty, strictly descending and inside (0, sqrt(2)].
std::vector<SweepRow> threshold_sweep(const PredictionSet& set, const CentroidSet& centroids,
                                      std::span<const double> grid,
                                      const Execution& exec = {});

struct ExclusionRow {
  double threshold = 0.0;
  double below_pct = 0.0;
  double at_above_pct = 0.0;
  std::size_t below_count = 0;
  std::size_t at_above_count = 0;

  bool operator==(const ExclusionRow&) const = default;
};

struct ExclusionColumn {
  std::string dataset;
  std::size_t total = 0;
  std::vector<ExclusionRow> rows;

  bool operator==(const ExclusionColumn&) const = default;
};

struct ExclusionTable {
  std::vector<ExclusionColumn> columns;
  bool operator==(const ExclusionTable&) const = default;
};

struct NamedSet {
  std::string name;
  PredictionSet set;
};

// Below is strict (<). Centroids come from the reference calibration and
// are shared by all sets. Empty sets are rejected.
ExclusionTable exclusion_table(std::span<const NamedSet> sets, const CentroidSet& centroids,
                               std::span<const double> grid, const Execution& exec = {});

struct ShellRow {
  double r_inner = 0.0;
  double r_outer = 0.0;
  double volume = 0.0;
  std::size_t count = 0;
  double density = 0.0;
};

struct InnerSphere {
  double radius = 0.0;
  double volume = 0.0;
  std::size_t count = 0;
  double density = 0.0;
};

// Membership uses the cumulative count N(r) = #{d <= r}; a shell (r1, r2]
// holds N(r2) - N(r1) points.
struct ShellReport {
  std::size_t dim = 0;
  std::vector<ShellRow> shells;  // outermost first
  InnerSphere inner;
  std::size_t beyond_count = 0;  // points farther than the outermost boundary
  std::size_t row_count = 0;
};

// Boundaries must be strictly descending and positive; 0 < inner_radius <=
// last boundary. When inner_radius is below the last boundary the gap is
// reported as one more shell so that counts always add up to row_count.
ShellReport shell_density(std::size_t dim, std::span<const double> distances,
                          std::span<const double> boundaries, double inner_radius);
ShellReport shell_density(const PredictionSet& set, const CentroidSet& centroids,
                          std::span<const double> boundaries, double inner_radius,
                          const Execution& exec = {});

struct SourceAverage {
  std::size_t source_label = 0;
  std::size_t count = 0;
  double mean_distance = 0.0;
};

struct ExemplarEntry {
  ClassId target_class = 0;
  std::size_t nearest_row_index = 0;
  std::size_t nearest_source_label = 0;
  double nearest_distance = 0.0;
  std::vector<SourceAverage> averages;  // ascending source label
};

struct NearestExemplarReport {
  std::vector<ExemplarEntry> entries;  // one per defined centroid
};

// For every defined centroid, the probe row closest to it and the mean
// distance to it per source label (the row's true_label).
NearestExemplarReport nearest_exemplars(const PredictionSet& ood_set,
                                        const CentroidSet& centroids,
                                        const Execution& exec = {});

struct ClusteringReport {
  std::size_t iterations = 0;
  bool converged = false;
  double inertia = 0.0;
  FidelityReport initial;  // nearest-centroid labelling with the seed centroids
  FidelityReport final;    // labelling after Lloyd iteration
  std::vector<ClusterAssignment> assignments;
};

enum class ReportFormat { Csv, Json };
ReportFormat parse_report_format(const std::string& s);

// CSV percentages carry one decimal; JSON carries full precision and writes
// infinities as null.
void emit_report(const std::vector<SweepRow>& rows, ReportFormat format, std::ostream& sink);
void emit_report(const ExclusionTable& table, ReportFormat format, std::ostream& sink);
void emit_report(const ShellReport& report, ReportFormat format, std::ostream& sink);
void emit_report(const NearestExemplarReport& report, ReportFormat format, std::ostream& sink);
void emit_report(const ClusteringReport& report, ReportFormat format, std::ostream& sink);

// Inverse of the JSON emitters, for consumers and round-trip checks.
std::vector<SweepRow> parse_sweep_json(std::istream& source);
ExclusionTable parse_exclusion_json(std::istream& source);

}  // namespace softgate

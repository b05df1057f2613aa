#include "softgate/calibration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>

#include <json.hpp>

#include "softgate/error.hpp"
#include "softgate/geometry.hpp"
#include "softgate/summation.hpp"
#include "softgate/version.hpp"

namespace softgate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Slack allowed above sqrt(2) for rounding in computed distances.
constexpr double kBoundSlack = 1e-12;
// Centroids average rows that were accepted at the ingest tolerance.
constexpr double kCentroidSumTolerance = 1e-6;

}  // namespace

CentroidSet::CentroidSet(std::size_t k, std::vector<std::vector<double>> rows,
                         std::vector<std::size_t> support)
    : k_(k), rows_(std::move(rows)), support_(std::move(support)) {
  if (k_ < 2) throw ValidationError("centroid set needs k >= 2");
  if (rows_.size() != k_ || support_.size() != k_)
    throw ValidationError("centroid set needs exactly k rows and k support counts");
  for (ClassId c = 0; c < k_; ++c) {
    if (rows_[c].size() != k_)
      throw ValidationError("centroid " + std::to_string(c) + " has wrong dimension");
    if (support_[c] > 0 && !on_simplex(rows_[c], kCentroidSumTolerance))
      throw ValidationError("centroid " + std::to_string(c) +
                            " is not a probability vector");
  }
}

CentroidSet CentroidSet::from_rows(std::vector<std::vector<double>> rows) {
  const std::size_t k = rows.size();
  return CentroidSet(k, std::move(rows), std::vector<std::size_t>(k, 1));
}

std::vector<ClassId> CentroidSet::defined_classes() const {
  std::vector<ClassId> out;
  for (ClassId c = 0; c < k_; ++c)
    if (support_[c] > 0) out.push_back(c);
  return out;
}

std::vector<ClassId> CentroidSet::undefined_classes() const {
  std::vector<ClassId> out;
  for (ClassId c = 0; c < k_; ++c)
    if (support_[c] == 0) out.push_back(c);
  return out;
}

bool ThresholdEntry::finite() const noexcept { return std::isfinite(threshold); }

ThresholdTable::ThresholdTable(std::vector<ThresholdEntry> entries)
    : entries_(std::move(entries)) {
  for (ClassId c = 0; c < entries_.size(); ++c) {
    const auto& e = entries_[c];
    if (e.cls != c) throw ValidationError("threshold entries must be ordered by class");
    if (e.source == ThresholdSource::FallbackInfinite) {
      if (e.threshold != kInf)
        throw ValidationError("fallback-infinite threshold must be infinite");
    } else if (!(e.threshold >= 0.0 && e.threshold <= std::numbers::sqrt2 + kBoundSlack)) {
      throw ValidationError("threshold for class " + std::to_string(c) +
                            " outside [0, sqrt(2)]");
    }
  }
}

CentroidSet compute_centroids(const PredictionSet& correct) {
  if (correct.empty()) throw ValidationError("no correct predictions to average");
  const std::size_t k = correct.k();
  std::vector<std::vector<CompensatedSum>> sums(k, std::vector<CompensatedSum>(k));
  std::vector<std::size_t> support(k, 0);

  for (std::size_t i = 0; i < correct.row_count(); ++i) {
    const auto& rec = correct[i];
    if (!rec.correct())
      throw ValidationError("row " + std::to_string(i) +
                            " is not a correct prediction");
    const ClassId group = argmax(rec.probs);
    if (group != rec.true_label)
      throw ValidationError("row " + std::to_string(i) + ": argmax " +
                            std::to_string(group) + " disagrees with label " +
                            std::to_string(rec.true_label));
    ++support[group];
    for (std::size_t j = 0; j < k; ++j) sums[group][j].add(rec.probs[j]);
  }

  std::vector<std::vector<double>> rows(k, std::vector<double>(k, 0.0));
  for (ClassId c = 0; c < k; ++c) {
    if (support[c] == 0) continue;
    const double n = static_cast<double>(support[c]);
    for (std::size_t j = 0; j < k; ++j) rows[c][j] = sums[c][j].value() / n;
  }
  return CentroidSet(k, std::move(rows), std::move(support));
}

ThresholdTable compute_thresholds(const PredictionSet& incorrect,
                                  const CentroidSet& centroids,
                                  const ThresholdOptions& options,
                                  const PredictionSet& correct) {
  const std::size_t k = centroids.k();
  if (!incorrect.empty() && incorrect.k() != k)
    throw ValidationError("incorrect set and centroids disagree on k");
  if (!correct.empty() && correct.k() != k)
    throw ValidationError("correct set and centroids disagree on k");

  std::vector<double> minimum(k, kInf);
  std::vector<bool> seen(k, false);
  for (std::size_t i = 0; i < incorrect.row_count(); ++i) {
    const auto& rec = incorrect[i];
    if (rec.correct())
      throw ValidationError("row " + std::to_string(i) + " is not an incorrect prediction");
    const ClassId group = options.grouping == ThresholdGrouping::PredictedClass
                              ? rec.predicted_label
                              : rec.true_label;
    if (group >= k)
      throw ValidationError("row " + std::to_string(i) + " has class " +
                            std::to_string(group) + " outside [0,k)");
    if (!centroids.defined(group))
      throw ValidationError("centroid for class " + std::to_string(group) +
                            " is undefined but needed for thresholds");
    const double d = simplex_distance(rec.probs, centroids.centroid(group));
    if (d < minimum[group]) minimum[group] = d;
    seen[group] = true;
  }

  std::vector<ThresholdEntry> entries(k);
  for (ClassId c = 0; c < k; ++c) {
    auto& e = entries[c];
    e.cls = c;
    if (seen[c]) {
      e.threshold = minimum[c];
      e.source = ThresholdSource::MinIncorrect;
      continue;
    }
    if (options.fallback == ThresholdFallback::Infinite || !centroids.defined(c)) {
      e.threshold = kInf;
      e.source = ThresholdSource::FallbackInfinite;
      continue;
    }
    double farthest = -1.0;
    for (const auto& rec : correct) {
      if (!rec.correct() || rec.predicted_label != c) continue;
      farthest = std::max(farthest, simplex_distance(rec.probs, centroids.centroid(c)));
    }
    if (farthest < 0.0)
      throw ValidationError("class " + std::to_string(c) +
                            " needs correct predictions for the max-correct fallback");
    e.threshold = farthest;
    e.source = ThresholdSource::FallbackMaxCorrect;
  }
  return ThresholdTable(std::move(entries));
}

PairwiseStats pairwise_centroid_stats(const CentroidSet& centroids) {
  const auto classes = centroids.defined_classes();
  if (classes.size() < 2)
    throw ValidationError("pairwise statistics need at least two defined centroids");

  std::vector<double> distances;
  distances.reserve(classes.size() * (classes.size() - 1) / 2);
  for (std::size_t a = 0; a < classes.size(); ++a)
    for (std::size_t b = a + 1; b < classes.size(); ++b)
      distances.push_back(simplex_distance(centroids.centroid(classes[a]),
                                           centroids.centroid(classes[b])));

  PairwiseStats stats;
  stats.pair_count = distances.size();
  stats.d_min = *std::min_element(distances.begin(), distances.end());
  stats.d_max = *std::max_element(distances.begin(), distances.end());
  if (stats.d_max > std::numbers::sqrt2 + kBoundSlack)
    throw ValidationError("centroid distance exceeds the simplex diameter");
  const double n = static_cast<double>(distances.size());
  stats.mean = std::clamp(compensated_sum(distances) / n, stats.d_min, stats.d_max);
  CompensatedSum sq;
  for (double d : distances) sq.add((d - stats.mean) * (d - stats.mean));
  stats.std = std::sqrt(sq.value() / n);
  return stats;
}

CalibrationArtifact calibrate(const PredictionSet& train, const ThresholdOptions& options,
                              std::optional<std::string> created) {
  const auto [correct, incorrect] = split_by_correctness(train);
  CalibrationArtifact artifact;
  artifact.centroids = compute_centroids(correct);
  artifact.thresholds = compute_thresholds(incorrect, artifact.centroids, options, correct);
  artifact.metadata.provenance = train.provenance();
  artifact.metadata.created = created ? *created : utc_timestamp_now();
  artifact.metadata.tool_version = kToolVersion;
  artifact.metadata.options = options;
  return artifact;
}

void validate_artifact(const CalibrationArtifact& artifact) {
  if (artifact.thresholds.k() != artifact.centroids.k())
    throw ValidationError("centroid and threshold class sets disagree");
}

std::string to_string(ThresholdSource s) {
  switch (s) {
    case ThresholdSource::MinIncorrect: return "min-incorrect";
    case ThresholdSource::FallbackMaxCorrect: return "fallback-max-correct";
    case ThresholdSource::FallbackInfinite: return "fallback-infinite";
  }
  return "unknown";
}

std::string to_string(ThresholdFallback f) {
  return f == ThresholdFallback::MaxCorrect ? "max-correct" : "infinite";
}

std::string to_string(ThresholdGrouping g) {
  return g == ThresholdGrouping::PredictedClass ? "predicted" : "true";
}

ThresholdSource parse_threshold_source(const std::string& s) {
  if (s == "min-incorrect") return ThresholdSource::MinIncorrect;
  if (s == "fallback-max-correct") return ThresholdSource::FallbackMaxCorrect;
  if (s == "fallback-infinite") return ThresholdSource::FallbackInfinite;
  throw ValidationError("unknown threshold source '" + s + "'");
}

ThresholdFallback parse_threshold_fallback(const std::string& s) {
  if (s == "max-correct") return ThresholdFallback::MaxCorrect;
  if (s == "infinite") return ThresholdFallback::Infinite;
  throw ValidationError("unknown threshold fallback '" + s + "'");
}

ThresholdGrouping parse_threshold_grouping(const std::string& s) {
  if (s == "predicted") return ThresholdGrouping::PredictedClass;
  if (s == "true") return ThresholdGrouping::TrueClass;
  throw ValidationError("unknown threshold grouping '" + s + "'");
}

std::string utc_timestamp_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---- persistence --------------------------------------------------------

namespace {

using nlohmann::json;

json to_json_document(const CalibrationArtifact& a) {
  json thresholds = json::array();
  for (const auto& e : a.thresholds.entries()) {
    thresholds.push_back({{"class", e.cls},
                          {"value", e.finite() ? json(e.threshold) : json(nullptr)},
                          {"source", to_string(e.source)}});
  }
  return json{
      {"schema_version", kCalibrationSchemaVersion},
      {"k", a.k()},
      {"centroids", a.centroids.rows()},
      {"support", a.centroids.supports()},
      {"thresholds", std::move(thresholds)},
      {"metadata",
       {{"provenance", a.metadata.provenance},
        {"created", a.metadata.created},
        {"tool_version", a.metadata.tool_version},
        {"fallback", to_string(a.metadata.options.fallback)},
        {"grouping", to_string(a.metadata.options.grouping)}}},
  };
}

const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key))
    throw CorruptionError(std::string("calibration is missing field '") + key + "'");
  return obj.at(key);
}

}  // namespace

void save_calibration(const CalibrationArtifact& artifact, std::ostream& sink) {
  validate_artifact(artifact);
  sink << to_json_document(artifact).dump(2) << '\n';
  if (!sink) throw Error("write failure on calibration stream");
}

CalibrationArtifact load_calibration(std::istream& source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("calibration payload is not valid JSON: ") + e.what());
  }

  try {
    const auto version = require(doc, "schema_version").get<int>();
    if (version != kCalibrationSchemaVersion)
      throw CorruptionError("unsupported calibration schema version " +
                            std::to_string(version));

    const auto k = require(doc, "k").get<std::size_t>();
    auto rows = require(doc, "centroids").get<std::vector<std::vector<double>>>();
    auto support = require(doc, "support").get<std::vector<std::size_t>>();

    std::vector<ThresholdEntry> entries;
    for (const auto& t : require(doc, "thresholds")) {
      ThresholdEntry e;
      e.cls = require(t, "class").get<ClassId>();
      e.source = parse_threshold_source(require(t, "source").get<std::string>());
      const auto& v = require(t, "value");
      e.threshold = v.is_null() ? kInf : v.get<double>();
      entries.push_back(e);
    }

    CalibrationArtifact a;
    a.centroids = CentroidSet(k, std::move(rows), std::move(support));
    a.thresholds = ThresholdTable(std::move(entries));
    const auto& meta = require(doc, "metadata");
    a.metadata.provenance = require(meta, "provenance").get<std::string>();
    a.metadata.created = require(meta, "created").get<std::string>();
    a.metadata.tool_version = require(meta, "tool_version").get<std::string>();
    if (meta.contains("fallback"))
      a.metadata.options.fallback = parse_threshold_fallback(meta.at("fallback").get<std::string>());
    if (meta.contains("grouping"))
      a.metadata.options.grouping = parse_threshold_grouping(meta.at("grouping").get<std::string>());
    validate_artifact(a);
    return a;
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("calibration payload has wrong shape: ") + e.what());
  } catch (const ValidationError& e) {
    throw CorruptionError(std::string("calibration payload is inconsistent: ") + e.what());
  }
}

std::string calibration_digest(const CalibrationArtifact& artifact) {
  const std::string text = to_json_document(artifact).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace softgate

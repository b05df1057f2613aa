#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace softgate {

using ClassId = std::size_t;

// One row of the prediction matrix: a K-way softmax output plus the true
// and the predicted class.
struct PredictionRecord {
  std::vector<double> probs;
  ClassId true_label = 0;
  ClassId predicted_label = 0;

  bool correct() const noexcept { return true_label == predicted_label; }
  bool operator==(const PredictionRecord&) const = default;
};

// Immutable, ordered collection of records sharing one class count.
class PredictionSet {
 public:
  PredictionSet() = default;
  // Throws ValidationError if k < 2 or any record's width differs from k.
  PredictionSet(std::size_t k, std::vector<PredictionRecord> records,
                std::string provenance = {});

  std::size_t k() const noexcept { return k_; }
  std::size_t row_count() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const std::string& provenance() const noexcept { return provenance_; }
  std::span<const PredictionRecord> records() const noexcept { return records_; }
  const PredictionRecord& operator[](std::size_t i) const { return records_[i]; }

  auto begin() const noexcept { return records_.begin(); }
  auto end() const noexcept { return records_.end(); }

 private:
  std::size_t k_ = 0;
  std::vector<PredictionRecord> records_;
  std::string provenance_;
};

enum class SumViolation { RejectRow, Renormalize, Fail };
enum class ArgmaxMismatch { RejectRow, TrustColumn, Recompute };

struct ValidationPolicy {
  double sum_tolerance = 1e-6;
  SumViolation on_sum_violation = SumViolation::Renormalize;
  ArgmaxMismatch on_argmax_mismatch = ArgmaxMismatch::Recompute;
  // Exclusive upper bound for true_label. Unset means k. Out-of-distribution
  // probe sets carry source-domain labels that can exceed the model's class
  // count; predicted_label is always bounded by k.
  std::optional<std::size_t> true_label_limit;
};

// What the parser did to the rows it read.
struct ValidationSummary {
  std::size_t rows_read = 0;
  std::size_t rows_accepted = 0;
  std::size_t rejected_sum = 0;
  std::size_t rejected_argmax = 0;
  std::size_t renormalized = 0;  // rows whose sum was outside tolerance
  std::size_t argmax_recomputed = 0;
  std::size_t argmax_flagged = 0;  // kept under TrustColumn despite mismatch

  std::size_t rejected() const noexcept { return rejected_sum + rejected_argmax; }
};

struct ParseResult {
  PredictionSet set;
  ValidationSummary summary;
};

// Header line expected for a K-class file: p_0,...,p_{K-1},true_label,predicted_label
std::string csv_header(std::size_t k);

// Reads the prediction CSV format. Lines starting with '#' and blank lines
// are skipped; the first remaining line must be the header. LF and CRLF
// line endings are accepted.
ParseResult parse_prediction_csv(std::istream& source, std::size_t k,
                                 const ValidationPolicy& policy = {},
                                 std::string provenance = {});

// Writes the same format with round-trip exact decimal values.
void write_prediction_csv(const PredictionSet& set, std::ostream& sink);

struct SyntheticSpec {
  std::size_t k = 0;
  std::vector<std::size_t> per_class;  // one count per class
  // Mixing weight of the one-hot anchor is concentration/(1+concentration).
  double concentration = 1.0;
  double label_noise = 0.0;

  static SyntheticSpec uniform(std::size_t k, std::size_t count_per_class,
                               double concentration, double label_noise);
};

// Deterministic fixture generator. Each row blends a one-hot vertex with a
// uniform draw from the simplex; with probability label_noise the vertex is
// a class other than the row's true label, making the row an incorrect
// prediction.
PredictionSet synthesize_dataset(const SyntheticSpec& spec, std::uint64_t seed);

// Partition into (correct, incorrect), each part preserving input order.
std::pair<PredictionSet, PredictionSet> split_by_correctness(const PredictionSet& set);

}  // namespace softgate

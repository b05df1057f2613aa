#include "softgate/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string_view>

#include "softgate/error.hpp"
#include "softgate/geometry.hpp"
#include "softgate/summation.hpp"
#include "softgate/text.hpp"

namespace softgate {

PredictionSet::PredictionSet(std::size_t k, std::vector<PredictionRecord> records,
                             std::string provenance)
    : k_(k), records_(std::move(records)), provenance_(std::move(provenance)) {
  if (k_ < 2) throw ValidationError("class count must be at least 2");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].probs.size() != k_)
      throw ValidationError("record " + std::to_string(i) + " has " +
                            std::to_string(records_[i].probs.size()) +
                            " probabilities, expected " + std::to_string(k_));
  }
}

std::string csv_header(std::size_t k) {
  std::string h;
  for (std::size_t i = 0; i < k; ++i) h += "p_" + std::to_string(i) + ",";
  h += "true_label,predicted_label";
  return h;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

ClassId parse_label(std::string_view cell, std::size_t limit, std::size_t line,
                    const char* column) {
  const auto v = parse_integer(cell);
  if (!v) throw ParseError(line, std::string("non-integer ") + column + " '" +
                                     std::string(trim(cell)) + "'");
  if (*v < 0 || static_cast<unsigned long long>(*v) >= limit)
    throw ValidationError("line " + std::to_string(line) + ": " + column + " " +
                          std::to_string(*v) + " outside [0," +
                          std::to_string(limit) + ")");
  return static_cast<ClassId>(*v);
}

}  // namespace

ParseResult parse_prediction_csv(std::istream& source, std::size_t k,
                                 const ValidationPolicy& policy,
                                 std::string provenance) {
  if (k < 2) throw ValidationError("class count must be at least 2");
  if (!(policy.sum_tolerance >= 0.0))
    throw ValidationError("sum tolerance must be nonnegative");
  const std::size_t true_limit = policy.true_label_limit.value_or(k);
  const std::string expected_header = csv_header(k);

  ValidationSummary summary;
  std::vector<PredictionRecord> records;
  bool header_seen = false;
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(source, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (!header_seen) {
      std::string normalized;
      for (auto cell : split_commas(line)) {
        if (!normalized.empty()) normalized += ',';
        normalized += trim(cell);
      }
      if (normalized != expected_header)
        throw ParseError(line_no, "expected header '" + expected_header + "'");
      header_seen = true;
      continue;
    }

    ++summary.rows_read;
    const auto cells = split_commas(line);
    if (cells.size() != k + 2)
      throw ParseError(line_no, "expected " + std::to_string(k + 2) +
                                    " columns, found " + std::to_string(cells.size()));

    PredictionRecord rec;
    rec.probs.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      const auto v = parse_double(cells[i]);
      if (!v) throw ParseError(line_no, "non-numeric probability '" +
                                            std::string(trim(cells[i])) + "'");
      rec.probs[i] = *v;
    }
    rec.true_label = parse_label(cells[k], true_limit, line_no, "true_label");
    rec.predicted_label = parse_label(cells[k + 1], k, line_no, "predicted_label");

    const bool in_range = std::all_of(rec.probs.begin(), rec.probs.end(),
                                      [](double p) { return p >= 0.0 && p <= 1.0; });
    const double sum = compensated_sum(rec.probs);
    const bool sum_ok = in_range && std::abs(sum - 1.0) <= policy.sum_tolerance;

    if (!sum_ok) {
      switch (policy.on_sum_violation) {
        case SumViolation::RejectRow:
          ++summary.rejected_sum;
          continue;
        case SumViolation::Fail:
          throw ValidationError("line " + std::to_string(line_no) +
                                ": probabilities sum to " + format_double(sum) +
                                " or leave [0,1]");
        case SumViolation::Renormalize: {
          const bool repairable =
              sum > 0.0 && std::all_of(rec.probs.begin(), rec.probs.end(),
                                       [](double p) { return p >= 0.0 && std::isfinite(p); });
          if (!repairable)
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": probabilities cannot be renormalized");
          ++summary.renormalized;
          break;
        }
      }
    }
    if (policy.on_sum_violation == SumViolation::Renormalize)
      for (double& p : rec.probs) p /= sum;

    const ClassId top = argmax(rec.probs);
    if (top != rec.predicted_label) {
      switch (policy.on_argmax_mismatch) {
        case ArgmaxMismatch::RejectRow:
          ++summary.rejected_argmax;
          continue;
        case ArgmaxMismatch::TrustColumn:
          ++summary.argmax_flagged;
          break;
        case ArgmaxMismatch::Recompute:
          ++summary.argmax_recomputed;
          rec.predicted_label = top;
          break;
      }
    }
    records.push_back(std::move(rec));
  }
  if (source.bad()) throw Error("read failure on prediction stream");
  if (!header_seen) throw ParseError(line_no, "missing header '" + expected_header + "'");

  summary.rows_accepted = records.size();
  return ParseResult{PredictionSet(k, std::move(records), std::move(provenance)),
                     summary};
}

void write_prediction_csv(const PredictionSet& set, std::ostream& sink) {
  sink << csv_header(set.k()) << '\n';
  for (const auto& rec : set) {
    for (double p : rec.probs) sink << format_double(p) << ',';
    sink << rec.true_label << ',' << rec.predicted_label << '\n';
  }
  if (!sink) throw Error("write failure on prediction stream");
}

SyntheticSpec SyntheticSpec::uniform(std::size_t k, std::size_t count_per_class,
                                     double concentration, double label_noise) {
  return SyntheticSpec{k, std::vector<std::size_t>(k, count_per_class),
                       concentration, label_noise};
}

PredictionSet synthesize_dataset(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.k < 2) throw ValidationError("synthetic spec needs k >= 2");
  if (spec.per_class.size() != spec.k)
    throw ValidationError("synthetic spec needs one count per class");
  if (std::any_of(spec.per_class.begin(), spec.per_class.end(),
                  [](std::size_t n) { return n == 0; }))
    throw ValidationError("synthetic per-class counts must be positive");
  if (!(spec.concentration > 0.0) || !std::isfinite(spec.concentration))
    throw ValidationError("concentration must be a positive finite number");
  if (!(spec.label_noise >= 0.0 && spec.label_noise <= 1.0))
    throw ValidationError("label noise must lie in [0,1]");

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution flip(spec.label_noise);
  std::uniform_int_distribution<std::size_t> other(0, spec.k - 2);
  const double weight = spec.concentration / (1.0 + spec.concentration);

  std::vector<PredictionRecord> records;
  std::size_t total = 0;
  for (std::size_t n : spec.per_class) total += n;
  records.reserve(total);

  std::vector<double> u(spec.k);
  for (ClassId cls = 0; cls < spec.k; ++cls) {
    for (std::size_t i = 0; i < spec.per_class[cls]; ++i) {
      ClassId anchor = cls;
      if (flip(rng)) {
        anchor = other(rng);
        if (anchor >= cls) ++anchor;
      }

      PredictionRecord rec;
      rec.true_label = cls;
      rec.predicted_label = anchor;
      do {
        double s = 0.0;
        for (double& x : u) s += (x = expo(rng));
        rec.probs.assign(spec.k, 0.0);
        for (std::size_t j = 0; j < spec.k; ++j)
          rec.probs[j] = (1.0 - weight) * (u[j] / s);
        rec.probs[anchor] += weight;
        // Move the largest component onto the anchor so argmax == anchor at
        // any concentration.
        const ClassId top = argmax(rec.probs);
        std::swap(rec.probs[top], rec.probs[anchor]);
      } while (argmax(rec.probs) != anchor);
      records.push_back(std::move(rec));
    }
  }
  return PredictionSet(spec.k, std::move(records), "synthetic:seed=" + std::to_string(seed));
}

std::pair<PredictionSet, PredictionSet> split_by_correctness(const PredictionSet& set) {
  std::vector<PredictionRecord> correct;
  std::vector<PredictionRecord> incorrect;
  for (const auto& rec : set) (rec.correct() ? correct : incorrect).push_back(rec);
  if (set.k() == 0) return {};
  return {PredictionSet(set.k(), std::move(correct), set.provenance()),
          PredictionSet(set.k(), std::move(incorrect), set.provenance())};
}

}  // namespace softgate

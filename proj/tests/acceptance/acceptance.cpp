// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "softgate/analysis.hpp"
#include "softgate/calibration.hpp"
#include "softgate/clustering.hpp"
#include "softgate/gate.hpp"
#include "softgate/geometry.hpp"
#include "softgate/ingest.hpp"
#include "support/fixtures.hpp"
#include "support/naive_reference.hpp"

using namespace softgate;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

CentroidSet vertices(std::size_t k) {
  std::vector<std::vector<double>> rows;
  for (std::size_t c = 0; c < k; ++c) rows.push_back(fixtures::one_hot(k, c));
  return CentroidSet::from_rows(std::move(rows));
}

Outcome shell_volumes() {
  const auto t0 = Clock::now();
  const double radii[9] = {0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05};
  const double table[9] = {2.01786e-1, 5.6616e-2,  1.29295e-2,  2.22299e-3, 2.52346e-4,
                           1.47973e-5, 2.60882e-7, 2.54767e-10, 2.49039e-13};
  double worst = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double v = shell_volume({10, radii[i + 1], radii[i]});
    worst = std::max(worst, std::abs(v - table[i]) / table[i]);
  }
  worst = std::max(worst, std::abs(hypersphere_volume(10, 0.05) - table[8]) / table[8]);
  const double took = seconds_since(t0);
  return {worst <= 1e-4 && took < 1.0, fmt("max rel err %.2e, %.4f s", worst, took)};
}

Outcome density_identity() {
  const auto boundaries = default_shell_boundaries();
  auto rho = [&](std::size_t n) {
    const std::vector<double> d(n, 0.75);
    return shell_density(10, d, boundaries, kDefaultInnerRadius).shells[0].density;
  };
  const double a = rho(4), b = rho(75);
  auto two_sig = [](double v) {
    const double scale = std::pow(10.0, std::floor(std::log10(v)) - 1);
    return std::round(v / scale) * scale;
  };
  const bool ok = std::abs(two_sig(a) - 20.0) < 1e-9 && std::abs(two_sig(b) - 370.0) < 1e-9;
  return {ok, fmt("rho(N=4)=%.4g, rho(N=75)=%.4g", a, b)};
}

Outcome sqrt2_bound() {
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  for (std::size_t dim : {2u, 3u, 10u, 100u}) {
    for (int i = 0; i < 100000; ++i) {
      const auto p = fixtures::random_simplex(dim, rng);
      const auto q = fixtures::random_simplex(dim, rng);
      worst = std::max(worst, simplex_distance(p, q));
    }
  }
  double onehot_err = 0.0;
  for (std::size_t dim : {2u, 3u, 10u, 100u})
    for (std::size_t a = 0; a < std::min<std::size_t>(dim, 10); ++a)
      for (std::size_t b = a + 1; b < std::min<std::size_t>(dim, 10); ++b)
        onehot_err = std::max(onehot_err, std::abs(simplex_distance(fixtures::one_hot(dim, a),
                                                                    fixtures::one_hot(dim, b)) -
                                                   std::numbers::sqrt2));
  const bool ok = worst <= std::numbers::sqrt2 + 1e-12 && onehot_err <= 1e-12;
  return {ok, fmt("max random distance %.12f, one-hot err %.1e", worst, onehot_err)};
}

Outcome ratio_identity() {
  // Sweep over a fixture with exactly r:1 correct to incorrect retained.
  auto accuracy_at = [](std::size_t r) {
    std::vector<PredictionRecord> rows;
    for (std::size_t i = 0; i < r; ++i)
      rows.push_back({fixtures::at_distance_from_vertex(10, i % 10, 0.01), i % 10, i % 10});
    rows.push_back({fixtures::at_distance_from_vertex(10, 3, 0.01), 4, 3});
    const std::vector<double> grid{0.05};
    return threshold_sweep(PredictionSet(10, std::move(rows)), vertices(10), grid)[0];
  };
  const auto a = accuracy_at(64), b = accuracy_at(632);
  const bool ok = a.ratio == 64.0 && b.ratio == 632.0 && std::abs(a.accuracy_pct - 98.4615) <= 1e-3 &&
                  std::abs(b.accuracy_pct - 99.8420) <= 1e-3;
  return {ok, fmt("64:1 -> %.4f%%, 632:1 -> %.4f%%", a.accuracy_pct, b.accuracy_pct)};
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(777);
  const std::size_t ks[3] = {3, 5, 10};
  const auto grid = default_threshold_grid();
  double worst = 0.0;
  std::size_t count_mismatch = 0;

  for (int s = 0; s < 50; ++s) {
    const std::size_t k = ks[s % 3];
    const std::size_t per_class = std::uniform_int_distribution<std::size_t>(30, 1000 / k)(rng);
    const double conc = std::uniform_real_distribution<double>(0.3, 20.0)(rng);
    const double noise = std::uniform_real_distribution<double>(0.0, 0.4)(rng);
    const auto set = synthesize_dataset(SyntheticSpec::uniform(k, per_class, conc, noise), rng());
    const auto [correct, incorrect] = split_by_correctness(set);

    const auto ref = naive::centroids(correct);
    const auto cs = compute_centroids(correct);
    for (std::size_t c = 0; c < k; ++c) {
      if (cs.support(c) != ref.support[c]) ++count_mismatch;
      for (std::size_t j = 0; j < k; ++j)
        worst = std::max(worst, std::abs(cs.centroid(c)[j] - ref.rows[c][j]));
    }

    const auto th = compute_thresholds(incorrect, cs, {ThresholdFallback::Infinite});
    const auto want = naive::min_incorrect(incorrect, ref);
    for (std::size_t c = 0; c < k; ++c) {
      if (std::isinf(want[c]) != std::isinf(th[c].threshold)) ++count_mismatch;
      else if (std::isfinite(want[c])) worst = std::max(worst, std::abs(th[c].threshold - want[c]));
    }

    const auto sweep = threshold_sweep(set, cs, grid);
    const std::vector<NamedSet> sets{{"s", set}};
    const auto excl = exclusion_table(sets, cs, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto w = naive::sweep_at(set, ref, grid[i]);
      if (sweep[i].correct_retained != w.correct || sweep[i].incorrect_retained != w.incorrect)
        ++count_mismatch;
      worst = std::max(worst, std::abs(sweep[i].retention_pct - w.retention_pct));
      worst = std::max(worst, std::abs(excl.columns[0].rows[i].below_pct -
                                       naive::below_pct(set, ref, grid[i])));
    }
  }
  const double took = seconds_since(t0);
  const bool ok = worst <= 1e-12 && count_mismatch == 0 && took < 10.0;
  return {ok, fmt("max abs diff %.2e, %.0f count mismatches, %.2f s", worst, double(count_mismatch), took)};
}

Outcome gate_soundness() {
  std::mt19937_64 rng(4242);
  std::size_t replayed = 0, violations = 0;
  for (int s = 0; s < 100; ++s) {
    const std::size_t k = 3 + s % 8;
    const double conc = std::uniform_real_distribution<double>(0.3, 10.0)(rng);
    const double noise = std::uniform_real_distribution<double>(0.05, 0.4)(rng);
    const auto train = synthesize_dataset(SyntheticSpec::uniform(k, 60, conc, noise), rng());
    const auto art = calibrate(train, {}, "acceptance");

    for (const auto& rec : train) {
      if (rec.correct() || art.thresholds[rec.predicted_label].source != ThresholdSource::MinIncorrect)
        continue;
      ++replayed;
      if (gate_one(rec.probs, art).accepted()) ++violations;
    }

    const auto sweep = threshold_sweep(train, art.centroids, default_threshold_grid());
    for (std::size_t i = 1; i < sweep.size(); ++i)
      if (sweep[i].retention_pct > sweep[i - 1].retention_pct ||
          sweep[i].correct_retained > sweep[i - 1].correct_retained)
        ++violations;

    const auto lo = gate_batch(train, art, GateMode::global(0.2));
    const auto hi = gate_batch(train, art, GateMode::global(0.6));
    for (std::size_t i = 0; i < train.row_count(); ++i)
      if (lo.decisions[i].accepted() && !hi.decisions[i].accepted()) ++violations;
  }
  return {violations == 0 && replayed > 0,
          fmt("%.0f incorrect rows replayed, %.0f violations", double(replayed), double(violations))};
}

Outcome clustering_fidelity() {
  const auto set = synthesize_dataset(SyntheticSpec::uniform(10, 1000, 50.0, 0.0), 11);
  const auto init = compute_centroids(set);
  const auto res = kmeans(set, init);
  const auto f = fidelity(res, set);
  const bool ok = res.converged && res.iterations <= 3 && f.fidelity && *f.fidelity == 1.0;
  return {ok, fmt("%.0f iterations, fidelity %.6f", double(res.iterations), f.fidelity.value_or(-1.0))};
}

Outcome pipeline_runs() {
  // Export-format CSV in, every report out; values are not asserted.
  const auto train = synthesize_dataset(SyntheticSpec::uniform(10, 200, 3.0, 0.1), 1);
  const auto probe = synthesize_dataset(SyntheticSpec::uniform(10, 50, 0.2, 0.6), 2);
  std::stringstream csv;
  write_prediction_csv(train, csv);
  const auto parsed = parse_prediction_csv(csv, 10);

  std::stringstream art_buf;
  save_calibration(calibrate(parsed.set, {}, "acceptance"), art_buf);
  const auto art = load_calibration(art_buf);

  std::ostringstream sink;
  const auto grid = default_threshold_grid();
  emit_report(threshold_sweep(parsed.set, art.centroids, grid), ReportFormat::Csv, sink);
  const std::vector<NamedSet> sets{{"train", parsed.set}, {"probe", probe}};
  emit_report(exclusion_table(sets, art.centroids, grid), ReportFormat::Json, sink);
  emit_report(shell_density(parsed.set, art.centroids, default_shell_boundaries(), kDefaultInnerRadius),
              ReportFormat::Json, sink);
  emit_report(nearest_exemplars(probe, art.centroids), ReportFormat::Csv, sink);
  const auto gated = gate_batch(probe, art);
  write_decisions_jsonl(gated.decisions, sink);
  const auto stats = pairwise_centroid_stats(art.centroids);

  const bool ok = parsed.summary.rejected() == 0 && !sink.str().empty() &&
                  gated.summary.accepted + gated.summary.unknown == probe.row_count();
  return {ok, fmt("reports written (%.0f bytes), centroid mean distance %.4f", double(sink.str().size()),
                  stats.mean)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"shell-volumes", shell_volumes},
      {"density-identity", density_identity},
      {"sqrt2-bound", sqrt2_bound},
      {"accuracy-ratio-identity", ratio_identity},
      {"oracle-equivalence", oracle_equivalence},
      {"gate-soundness", gate_soundness},
      {"clustering-fidelity", clustering_fidelity},
      {"pipeline-without-exporter", pipeline_runs},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %-26s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

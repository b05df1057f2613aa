#include "softgate/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>

#include <json.hpp>

#include "softgate/error.hpp"
#include "softgate/geometry.hpp"
#include "softgate/summation.hpp"
#include "softgate/text.hpp"

namespace softgate {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw ValidationError("threshold grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] <= std::numbers::sqrt2))
      throw ValidationError("threshold " + format_double(grid[i]) +
                            " outside (0, sqrt(2)]");
    if (i > 0 && !(grid[i] < grid[i - 1]))
      throw ValidationError("threshold grid must be strictly descending");
  }
}

double pct(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_inf(const json& v) { return v.is_null() ? kInf : v.get<double>(); }

void check_sink(std::ostream& sink) {
  if (!sink) throw Error("write failure on report stream");
}

}  // namespace

std::vector<double> default_threshold_grid() {
  return {0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05};
}

std::vector<double> default_shell_boundaries() { return default_threshold_grid(); }

std::vector<double> predicted_class_distances(const PredictionSet& set,
                                              const CentroidSet& centroids,
                                              const Execution& exec) {
  if (!set.empty() && set.k() != centroids.k())
    throw ValidationError("prediction set and centroids disagree on k");
  std::vector<double> out(set.row_count());
  parallel_for(set.row_count(), exec, [&](std::size_t i) {
    const ClassId c = set[i].predicted_label;
    if (!centroids.defined(c))
      throw ValidationError("row " + std::to_string(i) + ": no centroid for predicted class " +
                            std::to_string(c));
    out[i] = simplex_distance(set[i].probs, centroids.centroid(c));
  });
  return out;
}

double accuracy_from_ratio(double ratio) {
  if (std::isinf(ratio)) return 100.0;
  return 100.0 * ratio / (ratio + 1.0);
}

std::vector<SweepRow> threshold_sweep(const PredictionSet& set, const CentroidSet& centroids,
                                      std::span<const double> grid, const Execution& exec) {
  check_grid(grid);
  const auto distances = predicted_class_distances(set, centroids, exec);
  std::size_t total_correct = 0;
  for (const auto& rec : set) total_correct += rec.correct() ? 1 : 0;

  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double t : grid) {
    SweepRow row;
    row.threshold = t;
    for (std::size_t i = 0; i < distances.size(); ++i) {
      if (!(distances[i] < t)) continue;
      (set[i].correct() ? row.correct_retained : row.incorrect_retained)++;
    }
    row.retention_pct = pct(row.correct_retained, total_correct);
    if (row.incorrect_retained == 0) {
      row.ratio = kInf;
      row.accuracy_pct = row.correct_retained > 0 ? 100.0 : 0.0;
    } else {
      row.ratio = static_cast<double>(row.correct_retained) /
                  static_cast<double>(row.incorrect_retained);
      row.accuracy_pct = accuracy_from_ratio(row.ratio);
    }
    rows.push_back(row);
  }
  return rows;
}

ExclusionTable exclusion_table(std::span<const NamedSet> sets, const CentroidSet& centroids,
                               std::span<const double> grid, const Execution& exec) {
  check_grid(grid);
  ExclusionTable table;
  for (const auto& named : sets) {
    if (named.set.empty())
      throw ValidationError("dataset '" + named.name + "' has no rows");
    const auto distances = predicted_class_distances(named.set, centroids, exec);
    ExclusionColumn col;
    col.dataset = named.name;
    col.total = distances.size();
    for (double t : grid) {
      ExclusionRow row;
      row.threshold = t;
      row.below_count = static_cast<std::size_t>(
          std::count_if(distances.begin(), distances.end(), [t](double d) { return d < t; }));
      row.at_above_count = col.total - row.below_count;
      row.below_pct = pct(row.below_count, col.total);
      row.at_above_pct = pct(row.at_above_count, col.total);
      col.rows.push_back(row);
    }
    table.columns.push_back(std::move(col));
  }
  return table;
}

ShellReport shell_density(std::size_t dim, std::span<const double> distances,
                          std::span<const double> boundaries, double inner_radius) {
  if (dim == 0) throw ValidationError("shell dimension must be positive");
  if (boundaries.empty()) throw ValidationError("shell boundaries are empty");
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    if (!(boundaries[i] > 0.0) || !std::isfinite(boundaries[i]))
      throw ValidationError("shell boundaries must be positive and finite");
    if (i > 0 && !(boundaries[i] < boundaries[i - 1]))
      throw ValidationError("shell boundaries must be strictly descending");
  }
  if (!(inner_radius > 0.0 && inner_radius <= boundaries.back()))
    throw ValidationError("inner radius must lie in (0, smallest boundary]");

  const auto cumulative = [&](double r) {
    return static_cast<std::size_t>(
        std::count_if(distances.begin(), distances.end(), [r](double d) { return d <= r; }));
  };

  std::vector<double> radii(boundaries.begin(), boundaries.end());
  if (inner_radius < radii.back()) radii.push_back(inner_radius);

  ShellReport report;
  report.dim = dim;
  report.row_count = distances.size();
  report.beyond_count = report.row_count - cumulative(radii.front());
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
    ShellRow row;
    row.r_outer = radii[i];
    row.r_inner = radii[i + 1];
    row.volume = shell_volume({dim, row.r_inner, row.r_outer});
    row.count = cumulative(row.r_outer) - cumulative(row.r_inner);
    row.density = static_cast<double>(row.count) / row.volume;
    report.shells.push_back(row);
  }
  report.inner.radius = inner_radius;
  report.inner.volume = hypersphere_volume(dim, inner_radius);
  report.inner.count = cumulative(inner_radius);
  report.inner.density = static_cast<double>(report.inner.count) / report.inner.volume;
  return report;
}

ShellReport shell_density(const PredictionSet& set, const CentroidSet& centroids,
                          std::span<const double> boundaries, double inner_radius,
                          const Execution& exec) {
  const auto distances = predicted_class_distances(set, centroids, exec);
  return shell_density(centroids.k(), distances, boundaries, inner_radius);
}

NearestExemplarReport nearest_exemplars(const PredictionSet& ood_set,
                                        const CentroidSet& centroids,
                                        const Execution& exec) {
  if (ood_set.empty()) throw ValidationError("probe set has no rows");
  if (ood_set.k() != centroids.k())
    throw ValidationError("probe set and centroids disagree on k");
  const auto classes = centroids.defined_classes();
  if (classes.empty()) throw ValidationError("no defined centroids");

  NearestExemplarReport report;
  report.entries.resize(classes.size());
  parallel_for(classes.size(), exec, [&](std::size_t slot) {
    const ClassId c = classes[slot];
    ExemplarEntry entry;
    entry.target_class = c;
    entry.nearest_distance = kInf;
    std::map<std::size_t, std::pair<CompensatedSum, std::size_t>> by_source;
    for (std::size_t i = 0; i < ood_set.row_count(); ++i) {
      const auto& rec = ood_set[i];
      const double d = simplex_distance(rec.probs, centroids.centroid(c));
      if (d < entry.nearest_distance) {
        entry.nearest_distance = d;
        entry.nearest_row_index = i;
        entry.nearest_source_label = rec.true_label;
      }
      auto& acc = by_source[rec.true_label];
      acc.first.add(d);
      ++acc.second;
    }
    for (const auto& [label, acc] : by_source)
      entry.averages.push_back(
          {label, acc.second, acc.first.value() / static_cast<double>(acc.second)});
    report.entries[slot] = std::move(entry);
  });
  return report;
}

ReportFormat parse_report_format(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw ValidationError("unknown report format '" + s + "'");
}

// ---- emitters ------------------------------------------------------------

namespace {

json sweep_json(const std::vector<SweepRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"threshold", r.threshold},
                   {"retention_pct", r.retention_pct},
                   {"accuracy_pct", r.accuracy_pct},
                   {"correct_retained", r.correct_retained},
                   {"incorrect_retained", r.incorrect_retained},
                   {"ratio", number_or_null(r.ratio)}});
  return json{{"report", "threshold_sweep"}, {"rows", std::move(arr)}};
}

json exclusion_json(const ExclusionTable& table) {
  json cols = json::array();
  for (const auto& c : table.columns) {
    json rows = json::array();
    for (const auto& r : c.rows)
      rows.push_back({{"threshold", r.threshold},
                      {"below_pct", r.below_pct},
                      {"at_above_pct", r.at_above_pct},
                      {"below_count", r.below_count},
                      {"at_above_count", r.at_above_count}});
    cols.push_back({{"dataset", c.dataset}, {"total", c.total}, {"rows", std::move(rows)}});
  }
  return json{{"report", "exclusion_table"}, {"datasets", std::move(cols)}};
}

}  // namespace

void emit_report(const std::vector<SweepRow>& rows, ReportFormat format, std::ostream& sink) {
  if (format == ReportFormat::Json) {
    sink << sweep_json(rows).dump(2) << '\n';
  } else {
    sink << "threshold,retention_pct,accuracy_pct,correct_retained,incorrect_retained,ratio\n";
    for (const auto& r : rows)
      sink << format_double(r.threshold) << ',' << format_fixed(r.retention_pct, 1) << ','
           << format_fixed(r.accuracy_pct, 1) << ',' << r.correct_retained << ','
           << r.incorrect_retained << ',' << format_double(r.ratio) << '\n';
  }
  check_sink(sink);
}

void emit_report(const ExclusionTable& table, ReportFormat format, std::ostream& sink) {
  if (format == ReportFormat::Json) {
    sink << exclusion_json(table).dump(2) << '\n';
  } else {
    sink << "dataset,threshold,below_pct,at_above_pct,below_count,at_above_count\n";
    for (const auto& c : table.columns)
      for (const auto& r : c.rows)
        sink << c.dataset << ',' << format_double(r.threshold) << ','
             << format_fixed(r.below_pct, 1) << ',' << format_fixed(r.at_above_pct, 1) << ','
             << r.below_count << ',' << r.at_above_count << '\n';
  }
  check_sink(sink);
}

void emit_report(const ShellReport& report, ReportFormat format, std::ostream& sink) {
  if (format == ReportFormat::Json) {
    json shells = json::array();
    for (const auto& s : report.shells)
      shells.push_back({{"r_inner", s.r_inner},
                        {"r_outer", s.r_outer},
                        {"volume", s.volume},
                        {"count", s.count},
                        {"density", s.density}});
    const json doc = {
        {"report", "shell_density"},
        {"dim", report.dim},
        {"membership", "cumulative d <= r"},
        {"row_count", report.row_count},
        {"shells", std::move(shells)},
        {"inner_sphere",
         {{"radius", report.inner.radius},
          {"volume", report.inner.volume},
          {"count", report.inner.count},
          {"density", report.inner.density}}},
        {"beyond_count", report.beyond_count},
    };
    sink << doc.dump(2) << '\n';
  } else {
    sink << "region,r_inner,r_outer,volume,count,density\n";
    if (!report.shells.empty() || report.beyond_count > 0) {
      const double outer = report.shells.empty() ? report.inner.radius
                                                 : report.shells.front().r_outer;
      sink << "beyond," << format_double(outer) << ",inf,inf," << report.beyond_count << ",0\n";
    }
    for (std::size_t i = 0; i < report.shells.size(); ++i) {
      const auto& s = report.shells[i];
      sink << "shell_" << (i + 1) << ',' << format_double(s.r_inner) << ','
           << format_double(s.r_outer) << ',' << format_double(s.volume) << ',' << s.count
           << ',' << format_double(s.density) << '\n';
    }
    sink << "inner,0," << format_double(report.inner.radius) << ','
         << format_double(report.inner.volume) << ',' << report.inner.count << ','
         << format_double(report.inner.density) << '\n';
  }
  check_sink(sink);
}

void emit_report(const NearestExemplarReport& report, ReportFormat format, std::ostream& sink) {
  if (format == ReportFormat::Json) {
    json entries = json::array();
    for (const auto& e : report.entries) {
      json avgs = json::array();
      for (const auto& a : e.averages)
        avgs.push_back({{"source_label", a.source_label},
                        {"count", a.count},
                        {"mean_distance", a.mean_distance}});
      entries.push_back({{"target_class", e.target_class},
                         {"nearest_row_index", e.nearest_row_index},
                         {"nearest_source_label", e.nearest_source_label},
                         {"nearest_distance", e.nearest_distance},
                         {"averages", std::move(avgs)}});
    }
    sink << json{{"report", "nearest_exemplars"}, {"classes", std::move(entries)}}.dump(2)
         << '\n';
  } else {
    sink << "target_class,kind,source_label,row_index,count,distance\n";
    for (const auto& e : report.entries) {
      sink << e.target_class << ",nearest," << e.nearest_source_label << ','
           << e.nearest_row_index << ",1," << format_double(e.nearest_distance) << '\n';
      for (const auto& a : e.averages)
        sink << e.target_class << ",average," << a.source_label << ",," << a.count << ','
             << format_double(a.mean_distance) << '\n';
    }
  }
  check_sink(sink);
}

void emit_report(const ClusteringReport& report, ReportFormat format, std::ostream& sink) {
  const auto fid = [](const FidelityReport& f) {
    return json{{"total_correct", f.total_correct},
                {"matching", f.matching},
                {"fidelity", f.fidelity ? json(*f.fidelity) : json(nullptr)}};
  };
  if (format == ReportFormat::Json) {
    json assignments = json::array();
    for (const auto& a : report.assignments)
      assignments.push_back(
          {{"row_index", a.row_index}, {"cluster", a.cluster}, {"distance", a.distance}});
    const json doc = {{"report", "clustering"},
                      {"iterations", report.iterations},
                      {"converged", report.converged},
                      {"inertia", report.inertia},
                      {"initial_fidelity", fid(report.initial)},
                      {"final_fidelity", fid(report.final)},
                      {"assignments", std::move(assignments)}};
    sink << doc.dump(2) << '\n';
  } else {
    sink << "row_index,cluster,distance\n";
    for (const auto& a : report.assignments)
      sink << a.row_index << ',' << a.cluster << ',' << format_double(a.distance) << '\n';
  }
  check_sink(sink);
}

std::vector<SweepRow> parse_sweep_json(std::istream& source) {
  try {
    const json doc = json::parse(source);
    std::vector<SweepRow> rows;
    for (const auto& r : doc.at("rows"))
      rows.push_back({r.at("threshold").get<double>(), r.at("retention_pct").get<double>(),
                      r.at("accuracy_pct").get<double>(),
                      r.at("correct_retained").get<std::size_t>(),
                      r.at("incorrect_retained").get<std::size_t>(),
                      number_or_inf(r.at("ratio"))});
    return rows;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed sweep report: ") + e.what());
  }
}

ExclusionTable parse_exclusion_json(std::istream& source) {
  try {
    const json doc = json::parse(source);
    ExclusionTable table;
    for (const auto& c : doc.at("datasets")) {
      ExclusionColumn col;
      col.dataset = c.at("dataset").get<std::string>();
      col.total = c.at("total").get<std::size_t>();
      for (const auto& r : c.at("rows"))
        col.rows.push_back({r.at("threshold").get<double>(), r.at("below_pct").get<double>(),
                            r.at("at_above_pct").get<double>(),
                            r.at("below_count").get<std::size_t>(),
                            r.at("at_above_count").get<std::size_t>()});
      table.columns.push_back(std::move(col));
    }
    return table;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed exclusion report: ") + e.what());
  }
}

}  // namespace softgate

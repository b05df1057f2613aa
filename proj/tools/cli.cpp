#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <pthread.h>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "softgate/analysis.hpp"
#include "softgate/calibration.hpp"
#include "softgate/clustering.hpp"
#include "softgate/error.hpp"
#include "softgate/gate.hpp"
#include "softgate/ingest.hpp"
#include "softgate/server.hpp"
#include "softgate/text.hpp"
#include "softgate/version.hpp"

namespace softgate::cli {

namespace {

namespace fs = std::filesystem;

struct GlobalFlags {
  std::string format = "csv";
  bool quiet = false;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  double sum_tolerance = 1e-6;
  std::string on_sum = "renormalize";
  std::string on_argmax = "recompute";
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

ValidationPolicy policy_from(const GlobalFlags& g) {
  ValidationPolicy p;
  p.sum_tolerance = g.sum_tolerance;
  static const std::map<std::string, SumViolation> sums = {
      {"reject-row", SumViolation::RejectRow},
      {"renormalize", SumViolation::Renormalize},
      {"fail", SumViolation::Fail}};
  static const std::map<std::string, ArgmaxMismatch> argmaxes = {
      {"reject-row", ArgmaxMismatch::RejectRow},
      {"trust-column", ArgmaxMismatch::TrustColumn},
      {"recompute", ArgmaxMismatch::Recompute}};
  p.on_sum_violation = sums.at(g.on_sum);
  p.on_argmax_mismatch = argmaxes.at(g.on_argmax);
  return p;
}

Execution exec_from(const GlobalFlags& g) { return Execution{g.threads}; }

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return in;
}

ParseResult read_predictions(const std::string& path, std::size_t k, const ValidationPolicy& policy,
                             const GlobalFlags& g, Streams io) {
  auto in = open_input(path);
  auto result = parse_prediction_csv(in, k, policy, path);
  const auto& s = result.summary;
  if (!g.quiet && (s.rejected() > 0 || s.renormalized > 0 || s.argmax_recomputed > 0 ||
                   s.argmax_flagged > 0))
    io.err << path << ": read " << s.rows_read << " rows, accepted " << s.rows_accepted
           << ", rejected " << s.rejected() << " (sum " << s.rejected_sum << ", argmax "
           << s.rejected_argmax << "), renormalized " << s.renormalized
           << ", argmax recomputed " << s.argmax_recomputed << ", argmax flagged "
           << s.argmax_flagged << '\n';
  return result;
}

CalibrationArtifact read_artifact(const std::string& path) {
  auto in = open_input(path);
  return load_calibration(in);
}

// Output is buffered and written only after the command succeeded, so a
// failing command leaves no partial file behind.
void commit(const std::string& path, const std::string& data, Streams io) {
  if (path == "-") {
    io.out << data << std::flush;
    return;
  }
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write '" + tmp.string() + "'");
    f << data;
    if (!f) throw Error("write failure on '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto v = parse_double(cell);
    if (!v) throw ValidationError(std::string("bad value '") + cell + "' in " + what);
    out.push_back(*v);
  }
  if (out.empty()) throw ValidationError(std::string(what) + " is empty");
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Prefix every option with SOFTGATE_ (plus the subcommand name) so that it
// can be set from the environment.
void attach_env_names(CLI::App& app, const std::string& prefix) {
  for (CLI::Option* opt : app.get_options()) {
    std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    std::string env = prefix;
    for (char c : name) env += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    opt->envname(env);
  }
}

// ---- commands ------------------------------------------------------------

struct SynthArgs {
  std::size_t k = 10;
  std::size_t per_class = 100;
  double concentration = 20.0;
  double noise = 0.0;
  std::string out = "-";
};

int cmd_synth(const SynthArgs& a, const GlobalFlags& g, Streams io) {
  const auto set = synthesize_dataset(
      SyntheticSpec::uniform(a.k, a.per_class, a.concentration, a.noise), g.seed);
  std::ostringstream buf;
  write_prediction_csv(set, buf);
  commit(a.out, buf.str(), io);
  if (!g.quiet) {
    const auto [correct, incorrect] = split_by_correctness(set);
    io.err << "synthesized " << set.row_count() << " rows (" << incorrect.row_count()
           << " incorrect), seed " << g.seed << '\n';
  }
  return kOk;
}

struct CalibrateArgs {
  std::string train;
  std::size_t k = 10;
  std::string fallback = "max-correct";
  std::string grouping = "predicted";
  std::string out;
  std::string created;
};

int cmd_calibrate(const CalibrateArgs& a, const GlobalFlags& g, Streams io) {
  const auto parsed = read_predictions(a.train, a.k, policy_from(g), g, io);
  ThresholdOptions opts{parse_threshold_fallback(a.fallback), parse_threshold_grouping(a.grouping)};
  const auto artifact = calibrate(parsed.set, opts,
                                  a.created.empty() ? std::nullopt : std::optional(a.created));
  std::ostringstream buf;
  save_calibration(artifact, buf);
  commit(a.out, buf.str(), io);
  if (g.quiet) return kOk;

  std::ostream& summary = a.out == "-" ? io.err : io.out;
  summary << "class  support  threshold          source\n";
  for (ClassId c = 0; c < artifact.k(); ++c) {
    const auto& e = artifact.thresholds[c];
    std::string value = e.finite() ? fmt(e.threshold) : "inf";
    if (e.source != ThresholdSource::MinIncorrect) value += " (fallback)";
    summary << c << "  " << artifact.centroids.support(c) << "  " << value << "  "
            << to_string(e.source) << '\n';
  }
  const auto undefined = artifact.centroids.undefined_classes();
  for (ClassId c : undefined) summary << "warning: class " << c << " has no centroid\n";
  if (artifact.centroids.defined_classes().size() >= 2) {
    const auto s = pairwise_centroid_stats(artifact.centroids);
    summary << "pairwise: d_min=" << fmt(s.d_min) << " d_max=" << fmt(s.d_max)
            << " mean=" << fmt(s.mean) << " std=" << fmt(s.std) << " pairs=" << s.pair_count
            << '\n';
  } else {
    summary << "pairwise: n/a (fewer than two centroids)\n";
  }
  return kOk;
}

struct GateArgs {
  std::string input;
  std::string artifact;
  std::string mode = "per-class";
  double threshold = -1.0;
  bool unknown_on_undefined = false;
  std::string out = "-";
};

int cmd_gate(const GateArgs& a, const GlobalFlags& g, Streams io) {
  const auto artifact = read_artifact(a.artifact);
  ValidationPolicy policy = policy_from(g);
  policy.true_label_limit = std::numeric_limits<std::size_t>::max();
  const auto parsed = read_predictions(a.input, artifact.k(), policy, g, io);
  GateMode mode = GateMode::per_class();
  if (a.mode == "global") {
    if (a.threshold < 0.0) throw ValidationError("global mode needs --threshold");
    mode = GateMode::global(a.threshold);
  }
  GateOptions opts;
  opts.sum_tolerance = std::max(g.sum_tolerance, 1e-9);
  opts.unknown_on_undefined = a.unknown_on_undefined;
  const auto result = gate_batch(parsed.set, artifact, mode, opts, exec_from(g));
  std::ostringstream buf;
  write_decisions_jsonl(result.decisions, buf);
  commit(a.out, buf.str(), io);
  if (!g.quiet)
    io.err << "accepted " << result.summary.accepted << ", unknown " << result.summary.unknown
           << ", accept_rate " << fmt(result.summary.accept_rate) << '\n';
  return kOk;
}

struct SweepArgs {
  std::string input;
  std::string artifact;
  std::string grid;
  std::string out = "-";
};

int cmd_sweep(const SweepArgs& a, const GlobalFlags& g, Streams io) {
  const auto artifact = read_artifact(a.artifact);
  const auto parsed = read_predictions(a.input, artifact.k(), policy_from(g), g, io);
  const auto grid = a.grid.empty() ? default_threshold_grid() : parse_list(a.grid, "--grid");
  const auto rows = threshold_sweep(parsed.set, artifact.centroids, grid, exec_from(g));
  std::ostringstream buf;
  emit_report(rows, parse_report_format(g.format), buf);
  commit(a.out, buf.str(), io);
  if (!g.quiet && a.out != "-") {
    io.out << "threshold  retention%  accuracy%  ratio\n";
    for (const auto& r : rows)
      io.out << fmt(r.threshold) << "  " << format_fixed(r.retention_pct, 1) << "  "
             << format_fixed(r.accuracy_pct, 2) << "  " << format_double(r.ratio) << '\n';
  }
  return kOk;
}

struct ExclusionArgs {
  std::vector<std::string> inputs;
  std::string artifact;
  std::string grid;
  std::string out = "-";
};

int cmd_exclusion(const ExclusionArgs& a, const GlobalFlags& g, Streams io) {
  const auto artifact = read_artifact(a.artifact);
  std::vector<NamedSet> sets;
  for (const auto& spec : a.inputs) {
    const auto eq = spec.find('=');
    const std::string name = eq == std::string::npos ? fs::path(spec).stem().string()
                                                     : spec.substr(0, eq);
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    ValidationPolicy policy = policy_from(g);
    policy.true_label_limit = std::numeric_limits<std::size_t>::max();
    sets.push_back({name, read_predictions(path, artifact.k(), policy, g, io).set});
  }
  const auto grid = a.grid.empty() ? default_threshold_grid() : parse_list(a.grid, "--grid");
  const auto table = exclusion_table(sets, artifact.centroids, grid, exec_from(g));
  std::ostringstream buf;
  emit_report(table, parse_report_format(g.format), buf);
  commit(a.out, buf.str(), io);
  if (!g.quiet && a.out != "-") {
    for (const auto& col : table.columns) {
      io.out << col.dataset << " (" << col.total << ")\n";
      for (const auto& r : col.rows)
        io.out << "  " << fmt(r.threshold) << "  below " << format_fixed(r.below_pct, 1)
               << "  at/above " << format_fixed(r.at_above_pct, 1) << '\n';
    }
  }
  return kOk;
}

struct DensityArgs {
  std::string input;
  std::string artifact;
  std::string boundaries;
  double inner_radius = kDefaultInnerRadius;
  std::string out = "-";
};

int cmd_density(const DensityArgs& a, const GlobalFlags& g, Streams io) {
  const auto artifact = read_artifact(a.artifact);
  ValidationPolicy policy = policy_from(g);
  policy.true_label_limit = std::numeric_limits<std::size_t>::max();
  const auto parsed = read_predictions(a.input, artifact.k(), policy, g, io);
  const auto bounds = a.boundaries.empty() ? default_shell_boundaries()
                                           : parse_list(a.boundaries, "--boundaries");
  const auto report =
      shell_density(parsed.set, artifact.centroids, bounds, a.inner_radius, exec_from(g));
  std::ostringstream buf;
  emit_report(report, parse_report_format(g.format), buf);
  commit(a.out, buf.str(), io);
  if (!g.quiet && a.out != "-") {
    io.out << "shell  radii  volume  N  rho\n";
    for (std::size_t i = 0; i < report.shells.size(); ++i) {
      const auto& s = report.shells[i];
      io.out << (i + 1) << "  " << fmt(s.r_inner) << "-" << fmt(s.r_outer) << "  "
             << fmt(s.volume) << "  " << s.count << "  " << fmt(s.density) << '\n';
    }
    io.out << "inner  <=" << fmt(report.inner.radius) << "  " << fmt(report.inner.volume)
           << "  " << report.inner.count << "  " << fmt(report.inner.density) << '\n';
    io.out << "beyond " << report.beyond_count << '\n';
  }
  return kOk;
}

struct ClusterArgs {
  std::string input;
  std::size_t k = 10;
  std::string artifact;
  std::size_t max_iter = 100;
  double tol = 1e-6;
  std::string out = "-";
};

int cmd_cluster(const ClusterArgs& a, const GlobalFlags& g, Streams io) {
  std::optional<CalibrationArtifact> artifact;
  if (!a.artifact.empty()) artifact = read_artifact(a.artifact);
  const std::size_t k = artifact ? artifact->k() : a.k;
  const auto parsed = read_predictions(a.input, k, policy_from(g), g, io);
  const CentroidSet init =
      artifact ? artifact->centroids : compute_centroids(split_by_correctness(parsed.set).first);

  KMeansOptions opts;
  opts.max_iter = a.max_iter;
  opts.tol = a.tol;
  opts.exec = exec_from(g);
  const auto result = kmeans(parsed.set, init, opts);

  ClusteringReport report;
  report.iterations = result.iterations;
  report.converged = result.converged;
  report.inertia = result.inertia;
  report.initial = fidelity(assign_all(parsed.set, init, opts.exec), parsed.set);
  report.final = fidelity(result, parsed.set);
  report.assignments = result.assignments;

  std::ostringstream buf;
  emit_report(report, parse_report_format(g.format), buf);
  commit(a.out, buf.str(), io);
  if (!g.quiet) {
    std::ostream& summary = a.out == "-" ? io.err : io.out;
    const auto show = [](const FidelityReport& f) {
      return f.fidelity ? fmt(*f.fidelity) : std::string("undefined");
    };
    summary << "iterations " << result.iterations << (result.converged ? " (converged)" : "")
            << ", inertia " << fmt(result.inertia) << '\n'
            << "fidelity initial " << show(report.initial) << " (" << report.initial.matching
            << "/" << report.initial.total_correct << ")\n"
            << "fidelity " << show(report.final) << " (" << report.final.matching << "/"
            << report.final.total_correct << ")\n";
  }
  return kOk;
}

struct ExemplarArgs {
  std::string input;
  std::string artifact;
  std::size_t source_classes = 0;
  std::string out = "-";
};

int cmd_exemplars(const ExemplarArgs& a, const GlobalFlags& g, Streams io) {
  const auto artifact = read_artifact(a.artifact);
  ValidationPolicy policy = policy_from(g);
  policy.true_label_limit = a.source_classes > 0 ? a.source_classes
                                                 : std::numeric_limits<std::size_t>::max();
  const auto parsed = read_predictions(a.input, artifact.k(), policy, g, io);
  const auto report = nearest_exemplars(parsed.set, artifact.centroids, exec_from(g));
  std::ostringstream buf;
  emit_report(report, parse_report_format(g.format), buf);
  commit(a.out, buf.str(), io);
  if (!g.quiet && a.out != "-") {
    for (const auto& e : report.entries)
      io.out << "class " << e.target_class << ": nearest row " << e.nearest_row_index
             << " (source " << e.nearest_source_label << ") at " << fmt(e.nearest_distance)
             << '\n';
  }
  return kOk;
}

struct ServeArgs {
  std::string artifact;
  std::string host = "127.0.0.1";
  int port = 8080;
};

int cmd_serve(const ServeArgs& a, const GlobalFlags& g, Streams io) {
  const GateService service(read_artifact(a.artifact));

  // Block termination signals here so the waiter thread below is the only
  // one that receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  GateServer server(service, ServerOptions{a.host, a.port, g.quiet ? nullptr : &io.err});
  const int port = server.bind();
  io.err << "serving calibration " << service.digest() << " on " << a.host << ":" << port
         << '\n';

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.listen();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Streams io{out, err};
  GlobalFlags g;

  CLI::App app{"Softmax-space confidence gating: calibrate centroids and thresholds, gate "
               "predictions, and analyse distance geometry."};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();

  static const std::vector<std::string> kFormats = {"csv", "json"};
  static const std::vector<std::string> kSum = {"reject-row", "renormalize", "fail"};
  static const std::vector<std::string> kArgmax = {"reject-row", "trust-column", "recompute"};

  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember(kFormats));
  app.add_flag("--quiet", g.quiet, "Suppress human-readable summaries");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
  app.add_option("--seed", g.seed, "Seed for every random draw");
  app.add_option("--sum-tolerance", g.sum_tolerance, "Allowed |sum(p) - 1|")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--on-sum-violation", g.on_sum, "reject-row | renormalize | fail")
      ->check(CLI::IsMember(kSum));
  app.add_option("--on-argmax-mismatch", g.on_argmax, "reject-row | trust-column | recompute")
      ->check(CLI::IsMember(kArgmax));

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "Generate a synthetic prediction CSV");
  s_synth->add_option("--k", synth.k, "Class count")->check(CLI::Range(2, 100000));
  s_synth->add_option("--per-class", synth.per_class, "Rows per class")->check(CLI::PositiveNumber);
  s_synth->add_option("--concentration", synth.concentration, "Anchor concentration")
      ->check(CLI::PositiveNumber);
  s_synth->add_option("--noise", synth.noise, "Label-noise rate")->check(CLI::Range(0.0, 1.0));
  s_synth->add_option("--out", synth.out, "Output CSV ('-' for stdout)");

  CalibrateArgs cal;
  auto* s_cal = app.add_subcommand("calibrate", "Build centroids and thresholds from training predictions");
  s_cal->add_option("--train", cal.train, "Training prediction CSV")->required()->check(CLI::ExistingFile);
  s_cal->add_option("--k", cal.k, "Class count")->required()->check(CLI::Range(2, 100000));
  s_cal->add_option("--fallback", cal.fallback, "max-correct | infinite")
      ->check(CLI::IsMember({"max-correct", "infinite"}));
  s_cal->add_option("--grouping", cal.grouping, "Label selecting an incorrect row's class: predicted | true")
      ->check(CLI::IsMember({"predicted", "true"}));
  s_cal->add_option("--out", cal.out, "Calibration JSON")->required();
  s_cal->add_option("--created", cal.created, "Timestamp recorded in the artifact (default: now)");

  GateArgs gate;
  auto* s_gate = app.add_subcommand("gate", "Gate predictions; JSON lines out, summary on stderr");
  s_gate->add_option("--input", gate.input, "Prediction CSV")->required()->check(CLI::ExistingFile);
  s_gate->add_option("--artifact", gate.artifact, "Calibration JSON")->required()->check(CLI::ExistingFile);
  s_gate->add_option("--mode", gate.mode, "per-class | global")->check(CLI::IsMember({"per-class", "global"}));
  s_gate->add_option("--threshold", gate.threshold, "Distance used in global mode")->check(CLI::NonNegativeNumber);
  s_gate->add_flag("--unknown-on-undefined", gate.unknown_on_undefined,
                   "Answer unknown instead of failing when a class has no centroid");
  s_gate->add_option("--out", gate.out, "Output JSON lines ('-' for stdout)");

  SweepArgs sweep;
  auto* s_sweep = app.add_subcommand("sweep", "Retention, accuracy and ratio per threshold");
  s_sweep->add_option("--input", sweep.input, "Prediction CSV")->required()->check(CLI::ExistingFile);
  s_sweep->add_option("--artifact", sweep.artifact, "Calibration JSON")->required()->check(CLI::ExistingFile);
  s_sweep->add_option("--grid", sweep.grid, "Descending comma-separated thresholds");
  s_sweep->add_option("--out", sweep.out, "Report path ('-' for stdout)");

  ExclusionArgs excl;
  auto* s_excl = app.add_subcommand("exclusion", "Below / at-or-above percentages per dataset");
  s_excl->add_option("--input", excl.inputs, "Dataset as name=path (repeatable)")->required();
  s_excl->add_option("--artifact", excl.artifact, "Reference calibration JSON")->required()->check(CLI::ExistingFile);
  s_excl->add_option("--grid", excl.grid, "Descending comma-separated thresholds");
  s_excl->add_option("--out", excl.out, "Report path ('-' for stdout)");

  DensityArgs dens;
  auto* s_dens = app.add_subcommand("density", "Point density in concentric shells around centroids");
  s_dens->add_option("--input", dens.input, "Prediction CSV")->required()->check(CLI::ExistingFile);
  s_dens->add_option("--artifact", dens.artifact, "Calibration JSON")->required()->check(CLI::ExistingFile);
  s_dens->add_option("--boundaries", dens.boundaries, "Descending comma-separated shell radii");
  s_dens->add_option("--inner-radius", dens.inner_radius, "Inner sphere radius")->check(CLI::PositiveNumber);
  s_dens->add_option("--out", dens.out, "Report path ('-' for stdout)");

  ClusterArgs clus;
  auto* s_clus = app.add_subcommand("cluster", "K-means seeded with class centroids, plus fidelity");
  s_clus->add_option("--input", clus.input, "Prediction CSV")->required()->check(CLI::ExistingFile);
  s_clus->add_option("--k", clus.k, "Class count (ignored with --artifact)")->check(CLI::Range(2, 100000));
  s_clus->add_option("--artifact", clus.artifact, "Seed centroids from this calibration")->check(CLI::ExistingFile);
  s_clus->add_option("--max-iter", clus.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  s_clus->add_option("--tol", clus.tol, "Centroid movement tolerance")->check(CLI::PositiveNumber);
  s_clus->add_option("--out", clus.out, "Report path ('-' for stdout)");

  ExemplarArgs ex;
  auto* s_ex = app.add_subcommand("exemplars", "Nearest probe example to each centroid");
  s_ex->add_option("--input", ex.input, "Probe CSV; true_label holds the source label")->required()->check(CLI::ExistingFile);
  s_ex->add_option("--artifact", ex.artifact, "Reference calibration JSON")->required()->check(CLI::ExistingFile);
  s_ex->add_option("--source-classes", ex.source_classes, "Upper bound for source labels (0 = any)");
  s_ex->add_option("--out", ex.out, "Report path ('-' for stdout)");

  ServeArgs serve;
  auto* s_serve = app.add_subcommand("serve", "HTTP gate service");
  s_serve->add_option("--artifact", serve.artifact, "Calibration JSON")->required()->check(CLI::ExistingFile);
  s_serve->add_option("--host", serve.host, "Bind address");
  s_serve->add_option("--port", serve.port, "Port (0 = any free port)")->check(CLI::Range(0, 65535));

  attach_env_names(app, "SOFTGATE_");
  for (CLI::App* sub : app.get_subcommands({})) {
    std::string prefix = "SOFTGATE_";
    for (char c : sub->get_name()) prefix += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    attach_env_names(*sub, prefix + "_");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*s_synth) return cmd_synth(synth, g, io);
    if (*s_cal) return cmd_calibrate(cal, g, io);
    if (*s_gate) return cmd_gate(gate, g, io);
    if (*s_sweep) return cmd_sweep(sweep, g, io);
    if (*s_excl) return cmd_exclusion(excl, g, io);
    if (*s_dens) return cmd_density(dens, g, io);
    if (*s_clus) return cmd_cluster(clus, g, io);
    if (*s_ex) return cmd_exemplars(ex, g, io);
    if (*s_serve) return cmd_serve(serve, g, io);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const CorruptionError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace softgate::cli

#include "unlescore/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "unlescore/experiments.hpp"
#include "unlescore/ingest_io.hpp"
#include "unlescore/scoring.hpp"

namespace unlescore::cli {

using nlohmann::json;
namespace fs = std::filesystem;

json to_json(const RunConfig& c) {
  json targets = json::array();
  for (double t : c.fpr_targets) targets.push_back(io::json_real(t));
  return {{"command", c.command},
          {"input", c.input},
          {"shadow", c.shadow},
          {"output", c.output},
          {"format", std::string(io::to_string(c.format))},
          {"fpr_targets", targets},
          {"tau_u", io::json_real(c.anomaly.tau_u)},
          {"robust_k", io::json_real(c.anomaly.robust_k)},
          {"peak_ratio_min", io::json_real(c.anomaly.peak_ratio_min)},
          {"preset", c.preset},
          {"algorithm", c.algorithm ? json(*c.algorithm) : json()},
          {"seed", c.seed},
          {"timing", c.timing},
          {"workers", c.workers},
          {"config", c.config_path},
          {"bench", c.bench_overrides}};
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void emit(const RunConfig& config, const io::EvalReport& report, std::ostream& out) {
  const auto text = io::render_report(report, config.format);
  if (config.output.empty()) {
    out << text;
  } else {
    io::write_text_file(config.output, text);
  }
}

void print_violations(const ValidationResult& v, std::ostream& err) {
  err << "validation failed with " << v.violations.size() << " violation(s):\n";
  for (const auto& x : v.violations) {
    err << "  " << (x.sample_id.empty() ? std::string("<record set>") : x.sample_id) << ": "
        << x.reason << '\n';
  }
}

bool is_json_path(const std::string& path) {
  return fs::path(path).extension() == ".json";
}

// Loads a scored sample set from either a confidence CSV (scored here) or a
// JSON report. Returns the exit code on failure.
struct LoadedInput {
  std::vector<ScoredSample> samples;
  std::optional<scoring::ReferenceFits> refs;
  io::Timing timing;
};

int load_scored(const RunConfig& config, LoadedInput& loaded, std::ostream& err) {
  if (config.input.empty()) {
    err << "error: --input is required\n";
    return kValidation;
  }
  if (is_json_path(config.input)) {
    if (!config.shadow.empty()) {
      err << "error: --shadow needs a confidence CSV input, not a scored report\n";
      return kValidation;
    }
    loaded.samples = io::read_report_json(config.input).samples;
    return kOk;
  }
  const auto records = io::read_confidence_file(config.input);
  const auto validation = validate_record_set(records);
  if (!validation.ok()) {
    print_violations(validation, err);
    return kValidation;
  }
  auto t0 = Clock::now();
  auto refs = scoring::fit_references(records);
  loaded.timing.fit_seconds = seconds_since(t0);
  for (const auto& w : refs.warnings) err << "warning: " << w << '\n';

  t0 = Clock::now();
  auto scores = scoring::score_all(records, refs, config.workers);
  loaded.timing.score_seconds = seconds_since(t0);

  if (!config.shadow.empty()) {
    const auto shadows = io::read_shadow_file(config.shadow);
    const auto filled = scoring::attach_baselines(scores, records, shadows);
    if (filled < records.size()) {
      err << "warning: shadow confidences cover " << filled << " of " << records.size()
          << " samples; baseline metrics are summarized only when every evaluated sample has them\n";
    }
  }
  loaded.samples = io::make_scored_samples(records, scores);
  loaded.refs = std::move(refs);
  return kOk;
}

void warn_granularity(const io::EvalSummary& summary, io::EvalReport& report, std::ostream& err) {
  json warnings = report.metadata.value("warnings", json::array());
  for (const auto& t : summary.metrics.front().tpr_at_fpr) {
    if (!t.granularity_limited) continue;
    std::ostringstream msg;
    msg << "target FPR " << io::format_real(t.target_fpr) << " is below the granularity "
        << io::format_real(t.fpr_granularity) << " of " << summary.negatives
        << " retained negatives; reported at achieved_fpr " << io::format_real(t.achieved_fpr);
    err << "warning: " << msg.str() << '\n';
    warnings.push_back(msg.str());
  }
  report.metadata["warnings"] = warnings;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const DegenerateSample& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const InvalidArgument& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace

int cmd_score(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    LoadedInput loaded;
    if (is_json_path(config.input)) {
      err << "error: score expects a confidence CSV input\n";
      return static_cast<int>(kValidation);
    }
    if (const int rc = load_scored(config, loaded, err); rc != kOk) return rc;

    io::EvalReport report;
    report.samples = std::move(loaded.samples);
    const auto t0 = Clock::now();
    if (io::has_both_classes(report.samples)) {
      report.summary = io::evaluate(report.samples, config.fpr_targets);
      report.roc = io::unle_score_roc(report.samples);
    } else if (config.format == io::ReportFormat::roc_tsv) {
      err << "error: roc_tsv needs both retained_member and unlearned_member records\n";
      return static_cast<int>(kValidation);
    }
    loaded.timing.eval_seconds = seconds_since(t0);
    io::annotate_metadata(report, to_json(config), loaded.refs ? &*loaded.refs : nullptr);
    if (report.summary) warn_granularity(*report.summary, report, err);
    if (config.timing) report.timing = loaded.timing;
    io::normalize(report);
    emit(config, report, out);
    return static_cast<int>(kOk);
  });
}

int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    LoadedInput loaded;
    if (const int rc = load_scored(config, loaded, err); rc != kOk) return rc;
    if (!io::has_both_classes(loaded.samples)) {
      err << "error: evaluate needs both retained_member and unlearned_member samples\n";
      return static_cast<int>(kValidation);
    }
    io::EvalReport report;
    report.samples = std::move(loaded.samples);
    const auto t0 = Clock::now();
    report.summary = io::evaluate(report.samples, config.fpr_targets);
    report.roc = io::unle_score_roc(report.samples);
    loaded.timing.eval_seconds = seconds_since(t0);
    io::annotate_metadata(report, to_json(config), loaded.refs ? &*loaded.refs : nullptr);
    warn_granularity(*report.summary, report, err);
    if (config.timing) report.timing = loaded.timing;
    io::normalize(report);

    for (const auto& m : report.summary->metrics) {
      err << m.metric << ": auc=" << io::format_real(m.auc);
      for (const auto& t : m.tpr_at_fpr) {
        err << " tpr@" << io::format_real(t.target_fpr) << "=" << io::format_real(t.tpr);
      }
      err << '\n';
    }
    emit(config, report, out);
    return static_cast<int>(kOk);
  });
}

int cmd_detect(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    LoadedInput loaded;
    if (const int rc = load_scored(config, loaded, err); rc != kOk) return rc;
    io::EvalReport report;
    report.samples = std::move(loaded.samples);
    report.anomaly = anomaly::assess(report.samples, config.anomaly);
    io::annotate_metadata(report, to_json(config), loaded.refs ? &*loaded.refs : nullptr);
    io::normalize(report);

    const auto& a = *report.anomaly;
    err << "verdict: " << anomaly::to_string(a.verdict) << " (under-unlearned "
        << a.under_unlearned.size() << "/" << a.requested_count << ", over-unlearned flags "
        << a.over_unlearned.size() << "/" << a.retained_count << ", peak ratio "
        << io::format_real(a.retained_peak_ratio) << ")\n";
    if (a.retained_count < config.anomaly.min_retained) {
      err << "warning: fewer than " << config.anomaly.min_retained
          << " retained samples; over-unlearning test skipped\n";
    }
    emit(config, report, out);
    return static_cast<int>(a.verdict == anomaly::Verdict::clean ? kOk : kAnomaly);
  });
}

namespace {

simbench::BenchConfig bench_config_for(const RunConfig& config) {
  auto bench = simbench::with_seed(simbench::preset_config(config.preset), config.seed);
  bench = simbench::config_from_json(config.bench_overrides, bench);
  if (config.algorithm) {
    const auto a = simbench::parse_algorithm(*config.algorithm);
    if (!a) throw InvalidArgument("unknown algorithm '" + *config.algorithm + "'");
    bench.algorithm = *a;
  }
  bench.fpr_targets = config.fpr_targets;
  bench.anomaly = config.anomaly;
  return bench;
}

void write_tree_file(const fs::path& dir, const std::string& name, const std::string& text) {
  io::write_text_file(dir / name, text);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto names = simbench::preset_names();
    if (std::find(names.begin(), names.end(), config.preset) == names.end()) {
      err << "error: unknown preset '" << config.preset << "'; expected one of:";
      for (const auto& n : names) err << ' ' << n;
      err << '\n';
      return static_cast<int>(kValidation);
    }
    const auto bench = bench_config_for(config);

    json doc = {{"schema_version", io::kSchemaVersion},
                {"tool_version", std::string(io::kToolVersion)},
                {"run_config", to_json(config)},
                {"bench_config", simbench::to_json(bench)}};
    std::vector<std::pair<std::string, std::string>> files;

    if (config.preset == "utility") {
      const auto r = simbench::run_utility(bench);
      doc["result"] = simbench::to_json(r);
      std::ostringstream conf;
      io::write_confidence_csv(conf, r.records);
      files.emplace_back("confidences.csv", conf.str());
      files.emplace_back("scores.csv", io::render_report(r.report, io::ReportFormat::csv_scores));
      if (r.report.roc) {
        files.emplace_back("roc.tsv", io::render_report(r.report, io::ReportFormat::roc_tsv));
      }
      const auto& m = r.report.summary->metrics.front();
      err << "utility (" << simbench::to_string(bench.algorithm) << ", "
          << simbench::to_string(bench.task) << "): auc=" << io::format_real(m.auc)
          << " tpr@" << io::format_real(m.tpr_at_fpr.front().target_fpr) << "="
          << io::format_real(m.tpr_at_fpr.front().tpr) << '\n';
    } else if (config.preset == "under_unlearned") {
      const auto r = simbench::run_under_unlearned_experiment(bench);
      doc["result"] = simbench::to_json(r);
      std::ostringstream conf;
      io::write_confidence_csv(conf, r.records);
      files.emplace_back("confidences.csv", conf.str());
      files.emplace_back("scores.csv", io::render_report(r.report, io::ReportFormat::csv_scores));
      err << "under_unlearned: pearson_r=" << io::format_real(r.pearson_r) << '\n';
    } else if (config.preset == "camouflage") {
      json cases = json::object();
      for (auto which : {simbench::CamouflageCase::template_labels,
                         simbench::CamouflageCase::random_labels}) {
        const auto r = simbench::run_camouflage_experiment(bench, which);
        const std::string name(simbench::to_string(which));
        cases[name] = simbench::to_json(r);
        std::ostringstream conf;
        io::write_confidence_csv(conf, r.records);
        files.emplace_back("camouflage_" + name + "_confidences.csv", conf.str());
        err << "camouflage " << name << ": verdict " << anomaly::to_string(r.anomaly.verdict)
            << '\n';
      }
      auto control_cfg = bench;
      control_cfg.algorithm = simbench::Algorithm::exact_retrain;
      control_cfg.task = simbench::TaskKind::total_class;
      const auto control = simbench::run_utility(control_cfg);
      cases["exact_retrain_control"] = simbench::to_json(control);
      std::ostringstream conf;
      io::write_confidence_csv(conf, control.records);
      files.emplace_back("control_confidences.csv", conf.str());
      err << "exact_retrain control: verdict "
          << anomaly::to_string(control.report.anomaly->verdict) << '\n';
      doc["result"] = cases;
    } else if (config.preset == "resilience") {
      const auto algorithm = config.algorithm ? bench.algorithm : simbench::Algorithm::exact_retrain;
      const auto r = simbench::run_resilience(bench, algorithm, bench.n_groups);
      doc["result"] = simbench::to_json(r);
      err << "resilience (" << simbench::to_string(algorithm)
          << "): tpr range " << io::format_real(r.tpr_range()) << " over " << r.steps.size()
          << " steps\n";
    } else {
      const auto r = simbench::run_equity(bench, bench.algorithm);
      doc["result"] = simbench::to_json(r);
      err << "equity (" << simbench::to_string(bench.algorithm) << "): " << r.rows.size()
          << " classes\n";
    }

    if (config.output.empty()) {
      out << dump(doc);
    } else {
      const fs::path dir(config.output);
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
      write_tree_file(dir, "report.json", dump(doc));
      for (const auto& [name, text] : files) write_tree_file(dir, name, text);
    }
    return static_cast<int>(kOk);
  });
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

namespace {

void apply_config_file(RunConfig& c, const std::string& path) {
  json j;
  try {
    j = json::parse(io::read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(1, std::string("config file: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(1, "config file must hold a JSON object");
  try {
    if (j.contains("input")) c.input = j["input"].get<std::string>();
    if (j.contains("shadow")) c.shadow = j["shadow"].get<std::string>();
    if (j.contains("output")) c.output = j["output"].get<std::string>();
    if (j.contains("format")) {
      const auto f = io::parse_report_format(j["format"].get<std::string>());
      if (!f) throw InvalidArgument("config file: unknown format");
      c.format = *f;
    }
    if (j.contains("fpr_targets")) c.fpr_targets = j["fpr_targets"].get<std::vector<double>>();
    if (j.contains("tau_u")) c.anomaly.tau_u = j["tau_u"].get<double>();
    if (j.contains("robust_k")) c.anomaly.robust_k = j["robust_k"].get<double>();
    if (j.contains("peak_ratio_min")) c.anomaly.peak_ratio_min = j["peak_ratio_min"].get<double>();
    if (j.contains("preset")) c.preset = j["preset"].get<std::string>();
    if (j.contains("algorithm") && !j["algorithm"].is_null()) {
      c.algorithm = j["algorithm"].get<std::string>();
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("timing")) c.timing = j["timing"].get<bool>();
    if (j.contains("workers")) c.workers = j["workers"].get<unsigned>();
    if (j.contains("bench")) c.bench_overrides = j["bench"];
  } catch (const json::exception& e) {
    throw ParseError(1, std::string("config file: ") + e.what());
  }
}

void validate_config(const RunConfig& c) {
  for (double t : c.fpr_targets) {
    if (!(t > 0.0 && t < 1.0)) throw InvalidArgument("--fpr values must lie in (0, 1)");
  }
  if (c.fpr_targets.empty()) throw InvalidArgument("at least one --fpr target is required");
  if (!(c.anomaly.tau_u >= 0.0 && c.anomaly.tau_u <= 1.0)) {
    throw InvalidArgument("--tau-u must lie in [0, 1]");
  }
  if (!(c.anomaly.robust_k > 0.0)) throw InvalidArgument("--robust-k must be positive");
  if (!(c.anomaly.peak_ratio_min > 0.0 && c.anomaly.peak_ratio_min < 1.0)) {
    throw InvalidArgument("--peak-ratio-min must lie in (0, 1)");
  }
  if (c.workers == 0) throw InvalidArgument("--workers must be positive");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sample-level unlearning completeness scoring and anomaly detection"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string format_name = "json";
  std::vector<double> fpr;
  std::string algorithm;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input", flags.input, "Confidence CSV (or scored JSON report)");
    sub->add_option("--output", flags.output, "Output file (bench: output directory)");
    sub->add_option("--config", flags.config_path, "JSON config file; flags take precedence");
    sub->add_option("--fpr", fpr, "Target FPR (repeatable)");
  };
  auto add_anomaly = [&](CLI::App* sub) {
    sub->add_option("--tau-u", flags.anomaly.tau_u, "Under-unlearning score threshold");
    sub->add_option("--robust-k", flags.anomaly.robust_k, "Robust z-score cutoff");
    sub->add_option("--peak-ratio-min", flags.anomaly.peak_ratio_min,
                    "Minimum retained peak-bin mass");
  };

  auto* score = app.add_subcommand("score", "Score a confidence file");
  auto* evaluate = app.add_subcommand("evaluate", "TPR at target FPR and AUC");
  auto* detect = app.add_subcommand("detect", "Under-/over-unlearning anomaly detection");
  auto* bench = app.add_subcommand("bench", "Run a simulation bench preset");
  for (auto* sub : {score, evaluate, detect, bench}) add_common(sub);
  for (auto* sub : {score, evaluate, detect}) {
    sub->add_option("--shadow", flags.shadow, "Shadow confidences (JSON lines)");
    sub->add_option("--format", format_name, "json | csv_scores | roc_tsv");
    sub->add_flag("--timing", flags.timing, "Include wall-clock timing in the report");
    sub->add_option("--workers", flags.workers, "Scoring threads");
  }
  for (auto* sub : {detect, bench}) add_anomaly(sub);
  bench->add_option("--preset", flags.preset,
                    "utility | under_unlearned | camouflage | resilience | equity");
  bench->add_option("--algorithm", algorithm, "exact_retrain | fine_tune | gradient_ascent");
  bench->add_option("--seed", flags.seed, "Run seed");

  std::vector<const char*> argv{"unlescore"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    std::ostringstream help;
    const int rc = app.exit(e, help, help);
    if (rc == 0) {
      out << help.str();
      return kOk;
    }
    err << help.str();
    return kValidation;
  }

  CLI::App* active = nullptr;
  for (auto* sub : {score, evaluate, detect, bench}) {
    if (sub->parsed()) active = sub;
  }

  RunConfig config;
  config.command = active->get_name();
  const int rc = guarded(err, [&] {
    if (!flags.config_path.empty()) apply_config_file(config, flags.config_path);
    config.config_path = flags.config_path;
    auto given = [&](const char* name) { return active->count(name) > 0; };
    if (given("--input")) config.input = flags.input;
    if (given("--output")) config.output = flags.output;
    if (given("--fpr")) config.fpr_targets = fpr;
    if (active != bench) {
      if (given("--shadow")) config.shadow = flags.shadow;
      if (given("--format")) {
        const auto f = io::parse_report_format(format_name);
        if (!f) throw InvalidArgument("unknown --format '" + format_name + "'");
        config.format = *f;
      }
      if (given("--timing")) config.timing = flags.timing;
      if (given("--workers")) config.workers = flags.workers;
    }
    if (active == detect || active == bench) {
      if (given("--tau-u")) config.anomaly.tau_u = flags.anomaly.tau_u;
      if (given("--robust-k")) config.anomaly.robust_k = flags.anomaly.robust_k;
      if (given("--peak-ratio-min")) config.anomaly.peak_ratio_min = flags.anomaly.peak_ratio_min;
    }
    if (active == bench) {
      if (given("--preset")) config.preset = flags.preset;
      if (given("--algorithm")) config.algorithm = algorithm;
      if (given("--seed")) config.seed = flags.seed;
    }
    validate_config(config);
    return static_cast<int>(kOk);
  });
  if (rc != kOk) return rc;

  if (active == score) return cmd_score(config, out, err);
  if (active == evaluate) return cmd_evaluate(config, out, err);
  if (active == detect) return cmd_detect(config, out, err);
  return cmd_bench(config, out, err);
}

}  // namespace unlescore::cli

#include "unlescore/report.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "unlescore/ingest_io.hpp"

namespace unlescore::io {

using nlohmann::json;

namespace {

constexpr std::string_view kScoresHeader =
    "sample_id,label,split,group_id,h_ori,h_unl,l_diff,d_a_lik,d_b_lik,d_liks,unle_score,"
    "lira_nmi,update_diff,update_ratio";
constexpr std::string_view kRocHeader = "threshold\tfpr\ttpr";

double r9(double x) { return round_to_written_precision(x); }

void round_optional(std::optional<double>& x) {
  if (x) *x = r9(*x);
}

void round_scores(ScoreVector& s) {
  s.h_ori = r9(s.h_ori);
  s.h_unl = r9(s.h_unl);
  s.l_diff = r9(s.l_diff);
  s.d_a_lik = r9(s.d_a_lik);
  s.d_b_lik = r9(s.d_b_lik);
  s.d_liks = r9(s.d_liks);
  s.unle_score = r9(s.unle_score);
  round_optional(s.lira_nmi);
  round_optional(s.update_diff);
  round_optional(s.update_ratio);
}

double real_from_json(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

json fit_to_json(const numstats::GaussianFit& f) {
  return {{"mu", json_real(f.mu)},
          {"sigma", json_real(f.sigma)},
          {"n", f.n},
          {"method", std::string(numstats::to_string(f.method))}};
}

}  // namespace

json json_real(double x) {
  if (!std::isfinite(x)) return nullptr;
  return r9(x);
}

std::string_view to_string(ReportFormat f) noexcept {
  switch (f) {
    case ReportFormat::json:
      return "json";
    case ReportFormat::csv_scores:
      return "csv_scores";
    case ReportFormat::roc_tsv:
      return "roc_tsv";
  }
  return "json";
}

std::optional<ReportFormat> parse_report_format(std::string_view text) noexcept {
  if (text == "json") return ReportFormat::json;
  if (text == "csv_scores") return ReportFormat::csv_scores;
  if (text == "roc_tsv") return ReportFormat::roc_tsv;
  return std::nullopt;
}

std::optional<double> metric_value(const ScoreVector& s, std::string_view metric) {
  if (metric == "unle_score") return s.unle_score;
  if (metric == "l_diff") return s.l_diff;
  if (metric == "d_liks") return s.d_liks;
  if (metric == "d_a_lik") return s.d_a_lik;
  if (metric == "d_b_lik") return s.d_b_lik;
  if (metric == "lira_nmi") return s.lira_nmi;
  if (metric == "update_diff") return s.update_diff;
  if (metric == "update_ratio") return s.update_ratio;
  return std::nullopt;
}

std::vector<ScoredSample> make_scored_samples(std::span<const ConfidenceRecord> records,
                                              std::span<const ScoreVector> scores) {
  if (records.size() != scores.size()) {
    throw InvalidArgument("make_scored_samples: records and scores differ in length");
  }
  std::vector<ScoredSample> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    ScoredSample s{scores[i], records[i].label, records[i].split, records[i].group_id};
    round_scores(s.scores);
    out.push_back(std::move(s));
  }
  return out;
}

bool has_both_classes(std::span<const ScoredSample> samples) {
  bool pos = false;
  bool neg = false;
  for (const auto& s : samples) {
    pos = pos || s.split == SplitLabel::unlearned_member;
    neg = neg || s.split == SplitLabel::retained_member;
  }
  return pos && neg;
}

namespace {

std::optional<std::vector<numstats::LabeledScore>> labeled(std::span<const ScoredSample> samples,
                                                           std::string_view metric) {
  std::vector<numstats::LabeledScore> out;
  for (const auto& s : samples) {
    if (s.split == SplitLabel::nonmember) continue;
    const auto v = metric_value(s.scores, metric);
    if (!v) return std::nullopt;
    out.push_back({*v, s.split == SplitLabel::unlearned_member});
  }
  return out;
}

}  // namespace

numstats::RocCurve unle_score_roc(std::span<const ScoredSample> samples) {
  return numstats::roc_curve(*labeled(samples, "unle_score"));
}

EvalSummary evaluate(std::span<const ScoredSample> samples, std::span<const double> fpr_targets) {
  EvalSummary summary;
  for (const auto& s : samples) {
    if (s.split == SplitLabel::unlearned_member) ++summary.positives;
    if (s.split == SplitLabel::retained_member) ++summary.negatives;
  }
  if (summary.positives == 0 || summary.negatives == 0) {
    throw InvalidArgument("evaluate: need both retained_member and unlearned_member samples");
  }
  for (const char* metric : {"unle_score", "l_diff", "d_liks", "lira_nmi", "update_diff",
                             "update_ratio"}) {
    const auto scores = labeled(samples, metric);
    if (!scores) continue;
    MetricSummary m;
    m.metric = metric;
    m.auc = numstats::auc(*scores);
    const auto curve = numstats::roc_curve(*scores);
    for (double t : fpr_targets) m.tpr_at_fpr.push_back(numstats::tpr_at_fpr(curve, t));
    summary.metrics.push_back(std::move(m));
  }
  return summary;
}

void annotate_metadata(EvalReport& report, const json& config_echo,
                       const scoring::ReferenceFits* refs) {
  auto& md = report.metadata;
  md["tool_version"] = std::string(kToolVersion);
  md["config"] = config_echo;

  std::size_t negatives = 0;
  for (const auto& s : report.samples) negatives += s.split == SplitLabel::retained_member ? 1 : 0;
  json gran = {{"negatives", negatives},
               {"note",
                "achieved FPR takes values in multiples of 1/negatives; a target below "
                "1/negatives is realized as achieved_fpr = 0 with the threshold above the "
                "highest retained score"}};
  gran["min_nonzero_fpr"] = negatives > 0 ? json_real(1.0 / static_cast<double>(negatives)) : json();
  md["fpr_granularity"] = gran;

  if (refs != nullptr) {
    md["references"] = {{"g_ori", fit_to_json(refs->g_ori)},
                        {"g_unl", fit_to_json(refs->g_unl)},
                        {"g_fix_a", fit_to_json(refs->g_fix_a)},
                        {"g_fix_b", fit_to_json(refs->g_fix_b)}};
    md["warnings"] = refs->warnings;
  }
}

void normalize(EvalReport& report) {
  for (auto& s : report.samples) round_scores(s.scores);
  if (report.summary) {
    for (auto& m : report.summary->metrics) {
      m.auc = r9(m.auc);
      for (auto& t : m.tpr_at_fpr) {
        t.target_fpr = r9(t.target_fpr);
        t.tpr = r9(t.tpr);
        t.threshold = r9(t.threshold);
        t.achieved_fpr = r9(t.achieved_fpr);
        t.fpr_granularity = r9(t.fpr_granularity);
      }
    }
  }
  if (report.roc) {
    for (auto& p : report.roc->points) {
      p.threshold = r9(p.threshold);
      p.fpr = r9(p.fpr);
      p.tpr = r9(p.tpr);
    }
  }
  if (report.anomaly) {
    auto& a = *report.anomaly;
    for (auto& f : a.under_unlearned) f.unle_score = r9(f.unle_score);
    for (auto& f : a.over_unlearned) f.robust_z = r9(f.robust_z);
    a.retained_peak_ratio = r9(a.retained_peak_ratio);
  }
  if (report.timing) {
    report.timing->fit_seconds = r9(report.timing->fit_seconds);
    report.timing->score_seconds = r9(report.timing->score_seconds);
    report.timing->eval_seconds = r9(report.timing->eval_seconds);
  }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

json anomaly_to_json(const anomaly::AnomalyReport& a) {
  json under = json::array();
  for (const auto& f : a.under_unlearned) {
    under.push_back({{"sample_id", f.sample_id}, {"unle_score", json_real(f.unle_score)}});
  }
  json over = json::array();
  for (const auto& f : a.over_unlearned) {
    over.push_back({{"sample_id", f.sample_id}, {"robust_z", json_real(f.robust_z)}});
  }
  return {{"under_unlearned", under},
          {"over_unlearned", over},
          {"retained_peak_ratio", json_real(a.retained_peak_ratio)},
          {"peak_test_failed", a.peak_test_failed},
          {"verdict", std::string(anomaly::to_string(a.verdict))},
          {"requested_count", a.requested_count},
          {"retained_count", a.retained_count},
          {"under_flag_rate", json_real(a.under_flag_rate())},
          {"config",
           {{"tau_u", json_real(a.config.tau_u)},
            {"robust_k", json_real(a.config.robust_k)},
            {"peak_ratio_min", json_real(a.config.peak_ratio_min)},
            {"histogram_bins", a.config.histogram_bins},
            {"min_retained", a.config.min_retained}}},
          {"peak_criterion",
           "operational definition: retained UnleScores histogrammed into histogram_bins equal "
           "bins over [0,1]; the test fails when the fullest bin holds less than "
           "peak_ratio_min of them"}};
}

anomaly::AnomalyReport anomaly_from_json(const json& j) {
  anomaly::AnomalyReport a;
  for (const auto& f : j.at("under_unlearned")) {
    a.under_unlearned.push_back({f.at("sample_id").get<std::string>(),
                                 f.at("unle_score").get<double>()});
  }
  for (const auto& f : j.at("over_unlearned")) {
    a.over_unlearned.push_back({f.at("sample_id").get<std::string>(),
                                f.at("robust_z").get<double>()});
  }
  a.retained_peak_ratio = j.at("retained_peak_ratio").get<double>();
  a.peak_test_failed = j.at("peak_test_failed").get<bool>();
  const auto verdict = j.at("verdict").get<std::string>();
  for (auto v : {anomaly::Verdict::clean, anomaly::Verdict::under_unlearning,
                 anomaly::Verdict::over_unlearning, anomaly::Verdict::both}) {
    if (anomaly::to_string(v) == verdict) a.verdict = v;
  }
  a.requested_count = j.at("requested_count").get<std::size_t>();
  a.retained_count = j.at("retained_count").get<std::size_t>();
  const auto& c = j.at("config");
  a.config.tau_u = c.at("tau_u").get<double>();
  a.config.robust_k = c.at("robust_k").get<double>();
  a.config.peak_ratio_min = c.at("peak_ratio_min").get<double>();
  a.config.histogram_bins = c.at("histogram_bins").get<std::size_t>();
  a.config.min_retained = c.at("min_retained").get<std::size_t>();
  return a;
}

namespace {

json sample_to_json(const ScoredSample& s) {
  const auto& v = s.scores;
  json j = {{"sample_id", v.sample_id},
            {"label", s.label},
            {"split", std::string(to_string(s.split))},
            {"group_id", s.group_id ? json(*s.group_id) : json()},
            {"h_ori", json_real(v.h_ori)},
            {"h_unl", json_real(v.h_unl)},
            {"l_diff", json_real(v.l_diff)},
            {"d_a_lik", json_real(v.d_a_lik)},
            {"d_b_lik", json_real(v.d_b_lik)},
            {"d_liks", json_real(v.d_liks)},
            {"unle_score", json_real(v.unle_score)}};
  if (v.lira_nmi) j["lira_nmi"] = json_real(*v.lira_nmi);
  if (v.update_diff) j["update_diff"] = json_real(*v.update_diff);
  if (v.update_ratio) j["update_ratio"] = json_real(*v.update_ratio);
  return j;
}

ScoredSample sample_from_json(const json& j) {
  ScoredSample s;
  auto& v = s.scores;
  v.sample_id = j.at("sample_id").get<std::string>();
  s.label = j.at("label").get<int>();
  const auto split = parse_split(j.at("split").get<std::string>());
  if (!split) throw InvalidArgument("report: unknown split");
  s.split = *split;
  if (!j.at("group_id").is_null()) s.group_id = j.at("group_id").get<int>();
  v.h_ori = j.at("h_ori").get<double>();
  v.h_unl = j.at("h_unl").get<double>();
  v.l_diff = j.at("l_diff").get<double>();
  v.d_a_lik = j.at("d_a_lik").get<double>();
  v.d_b_lik = j.at("d_b_lik").get<double>();
  v.d_liks = j.at("d_liks").get<double>();
  v.unle_score = j.at("unle_score").get<double>();
  if (j.contains("lira_nmi")) v.lira_nmi = j["lira_nmi"].get<double>();
  if (j.contains("update_diff")) v.update_diff = j["update_diff"].get<double>();
  if (j.contains("update_ratio")) v.update_ratio = j["update_ratio"].get<double>();
  return s;
}

}  // namespace

json to_json(const EvalReport& report) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["metadata"] = report.metadata;

  json samples = json::array();
  for (const auto& s : report.samples) samples.push_back(sample_to_json(s));
  j["samples"] = std::move(samples);

  if (report.summary) {
    json metrics = json::array();
    for (const auto& m : report.summary->metrics) {
      json tprs = json::array();
      for (const auto& t : m.tpr_at_fpr) {
        tprs.push_back({{"target_fpr", json_real(t.target_fpr)},
                        {"tpr", json_real(t.tpr)},
                        {"threshold", json_real(t.threshold)},
                        {"achieved_fpr", json_real(t.achieved_fpr)},
                        {"fpr_granularity", json_real(t.fpr_granularity)},
                        {"granularity_limited", t.granularity_limited}});
      }
      metrics.push_back({{"metric", m.metric}, {"auc", json_real(m.auc)}, {"tpr_at_fpr", tprs}});
    }
    j["summary"] = {{"positives", report.summary->positives},
                    {"negatives", report.summary->negatives},
                    {"metrics", metrics}};
  }
  if (report.roc) {
    json points = json::array();
    for (const auto& p : report.roc->points) {
      points.push_back({json_real(p.threshold), json_real(p.fpr), json_real(p.tpr),
                        p.false_positives, p.true_positives});
    }
    j["roc"] = {{"positive_count", report.roc->positive_count},
                {"negative_count", report.roc->negative_count},
                {"points", points}};
  }
  if (report.anomaly) j["anomaly"] = anomaly_to_json(*report.anomaly);
  if (report.timing) {
    j["timing"] = {{"fit_seconds", json_real(report.timing->fit_seconds)},
                   {"score_seconds", json_real(report.timing->score_seconds)},
                   {"eval_seconds", json_real(report.timing->eval_seconds)},
                   {"shadow_models_trained", 0}};
  }
  return j;
}

EvalReport report_from_json(const json& j) {
  if (j.at("schema_version").get<int>() != kSchemaVersion) {
    throw InvalidArgument("report: unsupported schema_version");
  }
  EvalReport r;
  r.metadata = j.at("metadata");
  for (const auto& s : j.at("samples")) r.samples.push_back(sample_from_json(s));
  if (j.contains("summary")) {
    const auto& js = j["summary"];
    EvalSummary s;
    s.positives = js.at("positives").get<std::size_t>();
    s.negatives = js.at("negatives").get<std::size_t>();
    for (const auto& jm : js.at("metrics")) {
      MetricSummary m;
      m.metric = jm.at("metric").get<std::string>();
      m.auc = jm.at("auc").get<double>();
      for (const auto& jt : jm.at("tpr_at_fpr")) {
        numstats::TprAtFpr t;
        t.target_fpr = jt.at("target_fpr").get<double>();
        t.tpr = jt.at("tpr").get<double>();
        t.threshold = real_from_json(jt.at("threshold"));
        t.achieved_fpr = jt.at("achieved_fpr").get<double>();
        t.fpr_granularity = jt.at("fpr_granularity").get<double>();
        t.granularity_limited = jt.at("granularity_limited").get<bool>();
        m.tpr_at_fpr.push_back(t);
      }
      s.metrics.push_back(std::move(m));
    }
    r.summary = std::move(s);
  }
  if (j.contains("roc")) {
    const auto& jr = j["roc"];
    numstats::RocCurve c;
    c.positive_count = jr.at("positive_count").get<std::size_t>();
    c.negative_count = jr.at("negative_count").get<std::size_t>();
    for (const auto& p : jr.at("points")) {
      c.points.push_back({real_from_json(p.at(0)), p.at(1).get<double>(), p.at(2).get<double>(),
                          p.at(3).get<std::size_t>(), p.at(4).get<std::size_t>()});
    }
    r.roc = std::move(c);
  }
  if (j.contains("anomaly")) r.anomaly = anomaly_from_json(j["anomaly"]);
  if (j.contains("timing")) {
    const auto& jt = j["timing"];
    r.timing = Timing{jt.at("fit_seconds").get<double>(), jt.at("score_seconds").get<double>(),
                      jt.at("eval_seconds").get<double>()};
  }
  return r;
}

// ---------------------------------------------------------------------------
// Text formats
// ---------------------------------------------------------------------------

namespace {

std::string optional_real(const std::optional<double>& x) {
  return x ? format_real(*x) : std::string();
}

std::string render_scores_csv(const EvalReport& report) {
  std::ostringstream out;
  out << kScoresHeader << '\n';
  for (const auto& s : report.samples) {
    const auto& v = s.scores;
    out << v.sample_id << ',' << s.label << ',' << to_string(s.split) << ',';
    if (s.group_id) out << *s.group_id;
    out << ',' << format_real(v.h_ori) << ',' << format_real(v.h_unl) << ','
        << format_real(v.l_diff) << ',' << format_real(v.d_a_lik) << ','
        << format_real(v.d_b_lik) << ',' << format_real(v.d_liks) << ','
        << format_real(v.unle_score) << ',' << optional_real(v.lira_nmi) << ','
        << optional_real(v.update_diff) << ',' << optional_real(v.update_ratio) << '\n';
  }
  return out.str();
}

std::string render_roc_tsv(const EvalReport& report) {
  if (!report.roc) throw InvalidArgument("roc_tsv: report has no ROC curve");
  std::ostringstream out;
  out << kRocHeader << '\n';
  for (const auto& p : report.roc->points) {
    out << format_real(p.threshold) << '\t' << format_real(p.fpr) << '\t' << format_real(p.tpr)
        << '\n';
  }
  return out.str();
}

std::vector<std::string_view> split_on(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto line : split_on(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
  }
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

double require_real(std::string_view field, std::size_t lineno) {
  if (field == "inf") return std::numeric_limits<double>::infinity();
  const auto v = parse_real(field);
  if (!v) throw ParseError(lineno, "not a number: '" + std::string(field) + "'");
  return *v;
}

std::optional<double> optional_field(std::string_view field, std::size_t lineno) {
  if (field.empty()) return std::nullopt;
  return require_real(field, lineno);
}

}  // namespace

std::string render_report(const EvalReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::json:
      return to_json(report).dump(2) + "\n";
    case ReportFormat::csv_scores:
      return render_scores_csv(report);
    case ReportFormat::roc_tsv:
      return render_roc_tsv(report);
  }
  throw InvalidArgument("unknown report format");
}

void write_report(const EvalReport& report, const std::filesystem::path& path,
                  ReportFormat format) {
  write_text_file(path, render_report(report, format));
}

EvalReport read_report_json(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(1, std::string("invalid JSON report: ") + e.what());
  }
  try {
    return report_from_json(j);
  } catch (const json::exception& e) {
    throw ParseError(1, std::string("malformed report: ") + e.what());
  }
}

std::vector<ScoredSample> parse_scores_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != kScoresHeader) {
    throw ParseError(1, "missing or unexpected scores header");
  }
  std::vector<ScoredSample> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const auto f = split_on(lines[i], ',');
    if (f.size() != 14) throw ParseError(lineno, "expected 14 fields");
    ScoredSample s;
    auto& v = s.scores;
    v.sample_id = std::string(f[0]);
    const auto label = parse_int(f[1]);
    if (!label) throw ParseError(lineno, "bad label");
    s.label = *label;
    const auto split = parse_split(f[2]);
    if (!split) throw ParseError(lineno, "bad split");
    s.split = *split;
    if (!f[3].empty()) {
      const auto g = parse_int(f[3]);
      if (!g) throw ParseError(lineno, "bad group_id");
      s.group_id = *g;
    }
    v.h_ori = require_real(f[4], lineno);
    v.h_unl = require_real(f[5], lineno);
    v.l_diff = require_real(f[6], lineno);
    v.d_a_lik = require_real(f[7], lineno);
    v.d_b_lik = require_real(f[8], lineno);
    v.d_liks = require_real(f[9], lineno);
    v.unle_score = require_real(f[10], lineno);
    v.lira_nmi = optional_field(f[11], lineno);
    v.update_diff = optional_field(f[12], lineno);
    v.update_ratio = optional_field(f[13], lineno);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<numstats::RocPoint> parse_roc_tsv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != kRocHeader) {
    throw ParseError(1, "missing or unexpected ROC header");
  }
  std::vector<numstats::RocPoint> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_on(lines[i], '\t');
    if (f.size() != 3) throw ParseError(i + 1, "expected 3 fields");
    numstats::RocPoint p;
    p.threshold = require_real(f[0], i + 1);
    p.fpr = require_real(f[1], i + 1);
    p.tpr = require_real(f[2], i + 1);
    out.push_back(p);
  }
  return out;
}

}  // namespace unlescore::io

#pragma once

// EvalReport: per-sample scores, ROC summary, anomaly findings, and run
// metadata, plus its three output formats (json, csv_scores, roc_tsv).
//
// Every real in a report is held at the written precision, so the summary
// can be recomputed exactly from the per-sample section and each format
// reads back to the in-memory value.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "unlescore/anomaly.hpp"
#include "unlescore/core_types.hpp"
#include "unlescore/numstats.hpp"
#include "unlescore/scoring.hpp"

namespace unlescore::io {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "1.0.0";

struct MetricSummary {
  std::string metric;
  double auc = 0.5;
  std::vector<numstats::TprAtFpr> tpr_at_fpr;

  bool operator==(const MetricSummary&) const = default;
};

struct EvalSummary {
  std::size_t positives = 0;  // unlearned members
  std::size_t negatives = 0;  // retained members
  std::vector<MetricSummary> metrics;  // unle_score first

  bool operator==(const EvalSummary&) const = default;
};

struct Timing {
  double fit_seconds = 0.0;
  double score_seconds = 0.0;
  double eval_seconds = 0.0;

  bool operator==(const Timing&) const = default;
};

struct EvalReport {
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<ScoredSample> samples;
  std::optional<EvalSummary> summary;
  std::optional<numstats::RocCurve> roc;  // UnleScore curve
  std::optional<anomaly::AnomalyReport> anomaly;
  std::optional<Timing> timing;
};

enum class ReportFormat { json, csv_scores, roc_tsv };

std::string_view to_string(ReportFormat f) noexcept;
std::optional<ReportFormat> parse_report_format(std::string_view text) noexcept;

// Names accepted by metric_value: unle_score, l_diff, d_liks, d_a_lik, d_b_lik,
// lira_nmi, update_diff, update_ratio.
std::optional<double> metric_value(const ScoreVector& s, std::string_view metric);

// Pairs records with their score vectors, rounded to the written precision.
std::vector<ScoredSample> make_scored_samples(std::span<const ConfidenceRecord> records,
                                              std::span<const ScoreVector> scores);

// Retained members are negatives and unlearned members positives; nonmembers
// are ignored. Baseline metrics are included only when every evaluated sample
// carries them. Throws InvalidArgument when either class is empty.
EvalSummary evaluate(std::span<const ScoredSample> samples, std::span<const double> fpr_targets);
numstats::RocCurve unle_score_roc(std::span<const ScoredSample> samples);

bool has_both_classes(std::span<const ScoredSample> samples);

// Fills metadata fields common to every report: schema/tool version, the
// config echo, reference fits, and the achieved-FPR granularity note.
void annotate_metadata(EvalReport& report, const nlohmann::json& config_echo,
                       const scoring::ReferenceFits* refs);

// Rounds every real in the report to the written precision.
void normalize(EvalReport& report);

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

std::string render_report(const EvalReport& report, ReportFormat format);
void write_report(const EvalReport& report, const std::filesystem::path& path,
                  ReportFormat format);

EvalReport read_report_json(const std::filesystem::path& path);
// csv_scores reads back into the samples section only.
std::vector<ScoredSample> parse_scores_csv(std::string_view text);
// roc_tsv reads back into a curve without per-point counts.
std::vector<numstats::RocPoint> parse_roc_tsv(std::string_view text);

nlohmann::json anomaly_to_json(const anomaly::AnomalyReport& a);
anomaly::AnomalyReport anomaly_from_json(const nlohmann::json& j);

// A real at the written precision, as a JSON number (or null when non-finite).
nlohmann::json json_real(double x);

}  // namespace unlescore::io

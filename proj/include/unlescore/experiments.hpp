#pragma once

// Bench protocols built on simbench: unlearning utility, under-unlearned
// correlation, camouflage over-unlearning, continual-unlearning resilience,
// and per-class equity. Each run is seed-deterministic and serializes to a
// byte-stable JSON document.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "unlescore/anomaly.hpp"
#include "unlescore/report.hpp"
#include "unlescore/simbench.hpp"

namespace unlescore::simbench {

struct BenchConfig {
  std::string preset = "utility";
  std::uint64_t seed = 7;
  BlobConfig data;
  TrainConfig train;
  UnlearnParams unlearn;
  Algorithm algorithm = Algorithm::exact_retrain;
  TaskKind task = TaskKind::total_class;
  int forget_class = 0;
  double partial_fraction = 0.5;
  std::size_t random_k = 100;
  std::vector<double> fpr_targets{1e-3};
  anomaly::AnomalyConfig anomaly;

  // under_unlearned: classes [0, ladder size) are relearned for the listed
  // epochs, class ladder size is exactly unlearned, the rest are retained.
  std::vector<int> epoch_ladder{2, 4, 6, 8};
  double ladder_lr = 0.01;

  // camouflage
  int template_class = 1;
  int camouflage_epochs = 5;
  double camouflage_lr = 0.1;

  // resilience
  int n_groups = 5;
};

std::vector<std::string> preset_names();
// Throws InvalidArgument on an unknown name.
BenchConfig preset_config(std::string_view name);
// Sets the run seed and every seed derived from it.
BenchConfig with_seed(BenchConfig config, std::uint64_t seed);

nlohmann::json to_json(const BenchConfig& config);
// Overrides fields of base with those present in j.
BenchConfig config_from_json(const nlohmann::json& j, BenchConfig base);

// ---------------------------------------------------------------------------

struct ModelStats {
  double forget_conf = 0.0;
  double retained_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct UtilityResult {
  std::vector<ConfidenceRecord> records;
  io::EvalReport report;
  ModelStats original;
  ModelStats unlearned;
};

// One unlearning request under config.task and config.algorithm, scored and
// evaluated end to end.
UtilityResult run_utility(const BenchConfig& config);

struct UnderUnlearnedResult {
  std::vector<std::string> group_names;
  std::vector<int> group_levels;
  std::vector<std::size_t> group_sizes;
  std::vector<double> group_mean_scores;
  double pearson_r = 0.0;         // group means against levels
  double sample_pearson_r = 0.0;  // every member score against its group level
  std::vector<ConfidenceRecord> records;
  io::EvalReport report;
};

UnderUnlearnedResult run_under_unlearned_experiment(const BenchConfig& config);

enum class CamouflageCase { template_labels, random_labels };

std::string_view to_string(CamouflageCase c) noexcept;

struct CamouflageResult {
  CamouflageCase which = CamouflageCase::template_labels;
  anomaly::AnomalyReport anomaly;
  double camouflage_class_mean_score = 0.0;
  double template_class_mean_score = 0.0;
  double other_retained_mean_score = 0.0;
  std::vector<ConfidenceRecord> records;
  io::EvalReport report;
};

// Relabels the forget class per case, fine-tunes the original model on the
// camouflaged training set, scores, and runs anomaly detection.
CamouflageResult run_camouflage_experiment(const BenchConfig& config, CamouflageCase which);

struct ResilienceStep {
  int step = 0;
  std::size_t negatives = 0;  // current retained set
  std::vector<numstats::TprAtFpr> tpr_at_fpr;
  double auc = 0.5;
  double group1_mean_score = 0.0;
};

struct ResilienceResult {
  Algorithm algorithm = Algorithm::exact_retrain;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<ResilienceStep> steps;

  // Largest minus smallest TPR at the first target across steps.
  double tpr_range() const;
};

ResilienceResult run_resilience(const BenchConfig& config, Algorithm algorithm, int n_groups = 5);

struct EquityRow {
  int class_id = 0;
  double tpr = 0.0;
  double auc = 0.5;
  double relative_tpr = 0.0;
  double relative_auc = 0.0;
};

struct EquityResult {
  Algorithm algorithm = Algorithm::exact_retrain;
  std::vector<EquityRow> rows;
};

EquityResult run_equity(const BenchConfig& config, Algorithm algorithm);

nlohmann::json to_json(const UtilityResult& r);
nlohmann::json to_json(const UnderUnlearnedResult& r);
nlohmann::json to_json(const CamouflageResult& r);
nlohmann::json to_json(const ResilienceResult& r);
nlohmann::json to_json(const EquityResult& r);

}  // namespace unlescore::simbench

#include "unlescore/experiments.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "unlescore/ingest_io.hpp"
#include "unlescore/numstats.hpp"
#include "unlescore/scoring.hpp"

namespace unlescore::simbench {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

std::vector<std::string> preset_names() {
  return {"utility", "under_unlearned", "camouflage", "resilience", "equity"};
}

BenchConfig with_seed(BenchConfig config, std::uint64_t seed) {
  config.seed = seed;
  config.data.seed = seed;
  config.train.seed = seed;
  return config;
}

BenchConfig preset_config(std::string_view name) {
  BenchConfig c;
  c.preset = std::string(name);
  if (name == "utility") {
    c.data.classes = 3;
    c.data.dims = 8;
    c.data.n_per_class = 600;
    c.data.nonmember_per_class = 300;
    c.data.test_per_class = 150;
  } else if (name == "under_unlearned") {
    c.data.classes = 10;
    c.data.dims = 10;
    c.data.n_per_class = 200;
    c.data.nonmember_per_class = 100;
    c.data.test_per_class = 50;
  } else if (name == "camouflage") {
    // Wide, sample-poor blobs: the model memorizes its training set, so
    // retained scores form a single narrow peak under exact retraining.
    c.data.classes = 10;
    c.data.dims = 512;
    c.data.separation = 2.0;
    c.data.n_per_class = 30;
    c.data.nonmember_per_class = 30;
    c.data.test_per_class = 15;
    c.train.epochs = 50;
  } else if (name == "resilience") {
    c.data.classes = 8;
    c.data.dims = 8;
    c.data.n_per_class = 200;
    c.data.nonmember_per_class = 100;
    c.data.test_per_class = 50;
  } else if (name == "equity") {
    c.data.classes = 5;
    c.data.dims = 8;
    c.data.n_per_class = 300;
    c.data.nonmember_per_class = 150;
    c.data.test_per_class = 75;
  } else {
    throw InvalidArgument("unknown bench preset '" + std::string(name) + "'");
  }
  return with_seed(c, c.seed);
}

json to_json(const BenchConfig& c) {
  json data = {{"classes", c.data.classes},
               {"dims", c.data.dims},
               {"n_per_class", c.data.n_per_class},
               {"nonmember_per_class", c.data.nonmember_per_class},
               {"test_per_class", c.data.test_per_class},
               {"separation", io::json_real(c.data.separation)},
               {"seed", c.data.seed},
               {"overlap_a", c.data.overlap_a ? json(*c.data.overlap_a) : json()},
               {"overlap_b", c.data.overlap_b ? json(*c.data.overlap_b) : json()},
               {"overlap_factor", io::json_real(c.data.overlap_factor)}};
  json targets = json::array();
  for (double t : c.fpr_targets) targets.push_back(io::json_real(t));
  return {{"preset", c.preset},
          {"seed", c.seed},
          {"data", data},
          {"train",
           {{"epochs", c.train.epochs},
            {"batch_size", c.train.batch_size},
            {"learning_rate", io::json_real(c.train.learning_rate)},
            {"seed", c.train.seed}}},
          {"unlearn",
           {{"fine_tune_epochs", c.unlearn.fine_tune_epochs},
            {"fine_tune_lr", io::json_real(c.unlearn.fine_tune_lr)},
            {"ascent_epochs", c.unlearn.ascent_epochs},
            {"ascent_lr", io::json_real(c.unlearn.ascent_lr)}}},
          {"algorithm", std::string(to_string(c.algorithm))},
          {"task", std::string(to_string(c.task))},
          {"forget_class", c.forget_class},
          {"partial_fraction", io::json_real(c.partial_fraction)},
          {"random_k", c.random_k},
          {"fpr_targets", targets},
          {"anomaly",
           {{"tau_u", io::json_real(c.anomaly.tau_u)},
            {"robust_k", io::json_real(c.anomaly.robust_k)},
            {"peak_ratio_min", io::json_real(c.anomaly.peak_ratio_min)},
            {"histogram_bins", c.anomaly.histogram_bins},
            {"min_retained", c.anomaly.min_retained}}},
          {"epoch_ladder", c.epoch_ladder},
          {"ladder_lr", io::json_real(c.ladder_lr)},
          {"template_class", c.template_class},
          {"camouflage_epochs", c.camouflage_epochs},
          {"camouflage_lr", io::json_real(c.camouflage_lr)},
          {"n_groups", c.n_groups}};
}

namespace {

template <typename T>
void override_field(const json& j, const char* key, T& field) {
  if (j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<T>();
}

}  // namespace

BenchConfig config_from_json(const json& j, BenchConfig c) {
  override_field(j, "preset", c.preset);
  override_field(j, "seed", c.seed);
  if (j.contains("data")) {
    const auto& d = j["data"];
    override_field(d, "classes", c.data.classes);
    override_field(d, "dims", c.data.dims);
    override_field(d, "n_per_class", c.data.n_per_class);
    override_field(d, "nonmember_per_class", c.data.nonmember_per_class);
    override_field(d, "test_per_class", c.data.test_per_class);
    override_field(d, "separation", c.data.separation);
    override_field(d, "seed", c.data.seed);
    if (d.contains("overlap_a") && !d["overlap_a"].is_null()) c.data.overlap_a = d["overlap_a"].get<int>();
    if (d.contains("overlap_b") && !d["overlap_b"].is_null()) c.data.overlap_b = d["overlap_b"].get<int>();
    override_field(d, "overlap_factor", c.data.overlap_factor);
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    override_field(t, "epochs", c.train.epochs);
    override_field(t, "batch_size", c.train.batch_size);
    override_field(t, "learning_rate", c.train.learning_rate);
    override_field(t, "seed", c.train.seed);
  }
  if (j.contains("unlearn")) {
    const auto& u = j["unlearn"];
    override_field(u, "fine_tune_epochs", c.unlearn.fine_tune_epochs);
    override_field(u, "fine_tune_lr", c.unlearn.fine_tune_lr);
    override_field(u, "ascent_epochs", c.unlearn.ascent_epochs);
    override_field(u, "ascent_lr", c.unlearn.ascent_lr);
  }
  if (j.contains("algorithm")) {
    const auto a = parse_algorithm(j["algorithm"].get<std::string>());
    if (!a) throw InvalidArgument("config: unknown algorithm");
    c.algorithm = *a;
  }
  if (j.contains("task")) {
    const auto t = parse_task_kind(j["task"].get<std::string>());
    if (!t) throw InvalidArgument("config: unknown task kind");
    c.task = *t;
  }
  override_field(j, "forget_class", c.forget_class);
  override_field(j, "partial_fraction", c.partial_fraction);
  override_field(j, "random_k", c.random_k);
  override_field(j, "fpr_targets", c.fpr_targets);
  if (j.contains("anomaly")) {
    const auto& a = j["anomaly"];
    override_field(a, "tau_u", c.anomaly.tau_u);
    override_field(a, "robust_k", c.anomaly.robust_k);
    override_field(a, "peak_ratio_min", c.anomaly.peak_ratio_min);
    override_field(a, "histogram_bins", c.anomaly.histogram_bins);
    override_field(a, "min_retained", c.anomaly.min_retained);
  }
  override_field(j, "epoch_ladder", c.epoch_ladder);
  override_field(j, "ladder_lr", c.ladder_lr);
  override_field(j, "template_class", c.template_class);
  override_field(j, "camouflage_epochs", c.camouflage_epochs);
  override_field(j, "camouflage_lr", c.camouflage_lr);
  override_field(j, "n_groups", c.n_groups);
  return c;
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

namespace {

io::EvalReport score_and_report(std::span<const ConfidenceRecord> records,
                                const BenchConfig& config, const json& extra_metadata = {}) {
  const auto refs = scoring::fit_references(records);
  const auto scores = scoring::score_all(records, refs);

  io::EvalReport report;
  report.samples = io::make_scored_samples(records, scores);
  if (io::has_both_classes(report.samples)) {
    report.summary = io::evaluate(report.samples, config.fpr_targets);
    report.roc = io::unle_score_roc(report.samples);
  }
  report.anomaly = anomaly::assess(report.samples, config.anomaly);
  io::annotate_metadata(report, to_json(config), &refs);
  if (!extra_metadata.is_null()) report.metadata["experiment"] = extra_metadata;
  io::normalize(report);
  return report;
}

UnlearningTask make_task(const SynthDataset& ds, const BenchConfig& config) {
  switch (config.task) {
    case TaskKind::random_sample:
      return make_random_sample_task(ds, config.random_k, config.seed);
    case TaskKind::partial_class:
      return make_partial_class_task(ds, config.forget_class, config.partial_fraction,
                                     config.seed);
    case TaskKind::total_class:
      return make_total_class_task(ds, config.forget_class);
    case TaskKind::custom:
      break;
  }
  throw InvalidArgument("bench: custom tasks cannot be built from a config");
}

ModelStats model_stats(const SimModel& m, const SynthDataset& ds, const UnlearningTask& task) {
  return {mean_confidence(m, ds, task.forget_ids), accuracy(m, ds, task.retain_ids),
          accuracy(m, ds, ds.test)};
}

double mean_of(const std::vector<double>& xs) {
  return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

json stats_to_json(const ModelStats& s) {
  return {{"forget_mean_confidence", io::json_real(s.forget_conf)},
          {"retained_accuracy", io::json_real(s.retained_accuracy)},
          {"test_accuracy", io::json_real(s.test_accuracy)}};
}

json tpr_to_json(const numstats::TprAtFpr& t) {
  return {{"target_fpr", io::json_real(t.target_fpr)},
          {"tpr", io::json_real(t.tpr)},
          {"threshold", io::json_real(t.threshold)},
          {"achieved_fpr", io::json_real(t.achieved_fpr)},
          {"fpr_granularity", io::json_real(t.fpr_granularity)},
          {"granularity_limited", t.granularity_limited}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Utility
// ---------------------------------------------------------------------------

UtilityResult run_utility(const BenchConfig& config) {
  const auto ds = generate_blobs(config.data);
  const auto task = make_task(ds, config);
  const auto original = train(ds, config.train);
  const auto algorithm = make_algorithm(config.algorithm, config.train, config.unlearn);
  const auto unlearned = algorithm(original, ds, task);

  UtilityResult r;
  r.records = export_confidences(original, unlearned, ds, task);
  r.report = score_and_report(r.records, config);
  r.original = model_stats(original, ds, task);
  r.unlearned = model_stats(unlearned, ds, task);
  return r;
}

// ---------------------------------------------------------------------------
// Under-unlearned correlation
// ---------------------------------------------------------------------------

UnderUnlearnedResult run_under_unlearned_experiment(const BenchConfig& config) {
  const int ladder = static_cast<int>(config.epoch_ladder.size());
  if (config.data.classes < ladder + 2) {
    throw InvalidArgument("under_unlearned: need ladder size + 2 classes");
  }
  const auto ds = generate_blobs(config.data);
  const auto original = train(ds, config.train);

  // Classes [0, ladder] are requested; ladder is the exactly unlearned class.
  std::vector<std::size_t> requested;
  for (std::size_t idx : ds.train) {
    if (ds.labels[idx] <= ladder) requested.push_back(idx);
  }
  const auto task = make_custom_task(ds, requested);
  auto unlearned = exact_retrain(ds, task, config.train);
  for (int g = 0; g < ladder; ++g) {
    std::vector<std::size_t> group;
    for (std::size_t idx : task.forget_ids) {
      if (ds.labels[idx] == g) group.push_back(idx);
    }
    continue_sgd(unlearned, ds, group, config.epoch_ladder[static_cast<std::size_t>(g)],
                 config.ladder_lr, derive_seed(config.seed, 0x1ADD + static_cast<std::uint64_t>(g)));
  }

  UnderUnlearnedResult r;
  r.records = export_confidences(original, unlearned, ds, task);
  r.report = score_and_report(r.records, config);

  // Level 0 retained, 1..ladder relearned from most to least epochs, ladder+1 exact.
  auto level_of_class = [&](int label) {
    if (label > ladder) return 0;
    if (label == ladder) return ladder + 1;
    return ladder - label;
  };
  const int n_levels = ladder + 2;
  std::vector<std::vector<double>> by_level(static_cast<std::size_t>(n_levels));
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& s : r.report.samples) {
    if (s.split == SplitLabel::nonmember) continue;
    const int level = level_of_class(s.label);
    by_level[static_cast<std::size_t>(level)].push_back(s.scores.unle_score);
    xs.push_back(level);
    ys.push_back(s.scores.unle_score);
  }
  for (int level = 0; level < n_levels; ++level) {
    std::string name = level == 0               ? "retained"
                       : level == n_levels - 1 ? "exact_unlearned"
                                               : "under_unlearned_" + std::to_string(ladder + 1 - level);
    r.group_names.push_back(name);
    r.group_levels.push_back(level);
    r.group_sizes.push_back(by_level[static_cast<std::size_t>(level)].size());
    r.group_mean_scores.push_back(
        io::round_to_written_precision(mean_of(by_level[static_cast<std::size_t>(level)])));
  }
  std::vector<double> levels(r.group_levels.begin(), r.group_levels.end());
  r.pearson_r = io::round_to_written_precision(numstats::pearson(levels, r.group_mean_scores));
  r.sample_pearson_r = io::round_to_written_precision(numstats::pearson(xs, ys));
  return r;
}

// ---------------------------------------------------------------------------
// Camouflage
// ---------------------------------------------------------------------------

std::string_view to_string(CamouflageCase c) noexcept {
  return c == CamouflageCase::template_labels ? "template" : "random";
}

CamouflageResult run_camouflage_experiment(const BenchConfig& config, CamouflageCase which) {
  const auto ds = generate_blobs(config.data);
  const auto task = make_total_class_task(ds, config.forget_class);
  const auto original = train(ds, config.train);
  if (config.template_class == config.forget_class || config.template_class < 0 ||
      static_cast<std::size_t>(config.template_class) >= ds.classes) {
    throw InvalidArgument("camouflage: template class must be a different valid class");
  }

  std::vector<int> labels = ds.labels;
  Rng rng(derive_seed(config.seed, 0xCA40));
  for (std::size_t idx : task.forget_ids) {
    if (which == CamouflageCase::template_labels) {
      labels[idx] = config.template_class;
    } else {
      // Uniform over the classes other than the forgotten one.
      auto pick = static_cast<int>(rng.below(ds.classes - 1));
      labels[idx] = pick >= config.forget_class ? pick + 1 : pick;
    }
  }
  SimModel camouflaged = original;
  continue_sgd(camouflaged, ds, ds.train, config.camouflage_epochs, config.camouflage_lr,
               derive_seed(config.seed, 0xCA41), labels);

  CamouflageResult r;
  r.which = which;
  r.records = export_confidences(original, camouflaged, ds, task);
  r.report = score_and_report(r.records, config, {{"camouflage_case", std::string(to_string(which))}});
  r.anomaly = *r.report.anomaly;

  std::vector<double> forget_scores;
  std::vector<double> template_scores;
  std::vector<double> other_scores;
  for (const auto& s : r.report.samples) {
    if (s.split == SplitLabel::unlearned_member) {
      forget_scores.push_back(s.scores.unle_score);
    } else if (s.split == SplitLabel::retained_member) {
      (s.label == config.template_class ? template_scores : other_scores)
          .push_back(s.scores.unle_score);
    }
  }
  r.camouflage_class_mean_score = io::round_to_written_precision(mean_of(forget_scores));
  r.template_class_mean_score = io::round_to_written_precision(mean_of(template_scores));
  r.other_retained_mean_score = io::round_to_written_precision(mean_of(other_scores));
  return r;
}

// ---------------------------------------------------------------------------
// Resilience
// ---------------------------------------------------------------------------

double ResilienceResult::tpr_range() const {
  if (steps.empty() || steps.front().tpr_at_fpr.empty()) return 0.0;
  double lo = steps.front().tpr_at_fpr.front().tpr;
  double hi = lo;
  for (const auto& s : steps) {
    lo = std::min(lo, s.tpr_at_fpr.front().tpr);
    hi = std::max(hi, s.tpr_at_fpr.front().tpr);
  }
  return hi - lo;
}

namespace {

std::vector<std::vector<std::size_t>> draw_groups(const SynthDataset& ds, const BenchConfig& config,
                                                  int n_groups) {
  std::vector<std::vector<std::size_t>> groups;
  Rng rng(derive_seed(config.seed, 0x6E50));
  if (config.task == TaskKind::random_sample) {
    if (static_cast<std::size_t>(n_groups) * config.random_k >= ds.train.size()) {
      throw InvalidArgument("resilience: groups would exhaust the training set");
    }
    std::vector<std::size_t> pool = ds.train;
    rng.shuffle(pool);
    for (int g = 0; g < n_groups; ++g) {
      const auto begin = pool.begin() + static_cast<std::ptrdiff_t>(g * config.random_k);
      std::vector<std::size_t> group(begin, begin + static_cast<std::ptrdiff_t>(config.random_k));
      std::sort(group.begin(), group.end());
      groups.push_back(std::move(group));
    }
    return groups;
  }
  if (static_cast<std::size_t>(n_groups) >= ds.classes) {
    throw InvalidArgument("resilience: need more classes than groups");
  }
  std::vector<int> classes(ds.classes);
  std::iota(classes.begin(), classes.end(), 0);
  rng.shuffle(classes);
  for (int g = 0; g < n_groups; ++g) {
    const auto cls = classes[static_cast<std::size_t>(g)];
    const auto task = config.task == TaskKind::partial_class
                          ? make_partial_class_task(ds, cls, config.partial_fraction,
                                                    derive_seed(config.seed, static_cast<std::uint64_t>(g)))
                          : make_total_class_task(ds, cls);
    groups.push_back(task.forget_ids);
  }
  return groups;
}

}  // namespace

ResilienceResult run_resilience(const BenchConfig& config, Algorithm algorithm, int n_groups) {
  if (n_groups < 1) throw InvalidArgument("resilience: need at least one group");
  const auto ds = generate_blobs(config.data);
  const auto original = train(ds, config.train);
  const auto unlearn = make_algorithm(algorithm, config.train, config.unlearn);

  ResilienceResult r;
  r.algorithm = algorithm;
  r.groups = draw_groups(ds, config, n_groups);

  std::unordered_set<std::string> first_ids;
  for (std::size_t idx : r.groups.front()) first_ids.insert(ds.sample_id(idx));

  SimModel current = original;
  std::vector<std::size_t> cumulative;
  for (int step = 1; step <= n_groups; ++step) {
    const auto& group = r.groups[static_cast<std::size_t>(step - 1)];
    cumulative.insert(cumulative.end(), group.begin(), group.end());

    // Retain set shrinks with every request; the forget set is the newest group.
    auto step_task = make_custom_task(ds, cumulative);
    step_task.forget_ids = group;
    current = unlearn(current, ds, step_task);

    const auto all_forgotten = make_custom_task(ds, cumulative);
    auto records = export_confidences(original, current, ds, all_forgotten);
    const auto refs = scoring::fit_references(records);
    const auto scores = scoring::score_all(records, refs);
    auto samples = io::make_scored_samples(records, scores);

    // Evaluate group 1 against the current retained set only.
    std::vector<ScoredSample> eval;
    std::vector<double> group1;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].split == SplitLabel::retained_member) {
        eval.push_back(samples[i]);
      } else if (records[i].split == SplitLabel::unlearned_member) {
        if (first_ids.contains(records[i].sample_id)) {
          eval.push_back(samples[i]);
          group1.push_back(samples[i].scores.unle_score);
        }
      }
    }
    const auto summary = io::evaluate(eval, config.fpr_targets);
    const auto& m = summary.metrics.front();
    ResilienceStep s;
    s.step = step;
    s.negatives = summary.negatives;
    s.auc = io::round_to_written_precision(m.auc);
    for (auto t : m.tpr_at_fpr) {
      t.tpr = io::round_to_written_precision(t.tpr);
      t.threshold = io::round_to_written_precision(t.threshold);
      t.achieved_fpr = io::round_to_written_precision(t.achieved_fpr);
      t.fpr_granularity = io::round_to_written_precision(t.fpr_granularity);
      s.tpr_at_fpr.push_back(t);
    }
    s.group1_mean_score = io::round_to_written_precision(mean_of(group1));
    r.steps.push_back(std::move(s));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Equity
// ---------------------------------------------------------------------------

EquityResult run_equity(const BenchConfig& config, Algorithm algorithm) {
  if (config.data.classes < 3) throw InvalidArgument("equity: need at least 3 classes");
  const auto ds = generate_blobs(config.data);
  const auto original = train(ds, config.train);
  const auto unlearn = make_algorithm(algorithm, config.train, config.unlearn);

  EquityResult r;
  r.algorithm = algorithm;
  for (std::size_t c = 0; c < ds.classes; ++c) {
    const auto task = make_total_class_task(ds, static_cast<int>(c));
    const auto unlearned = unlearn(original, ds, task);
    const auto records = export_confidences(original, unlearned, ds, task);
    const auto refs = scoring::fit_references(records);
    const auto samples = io::make_scored_samples(records, scoring::score_all(records, refs));
    const auto summary = io::evaluate(samples, config.fpr_targets);
    const auto& m = summary.metrics.front();
    r.rows.push_back({static_cast<int>(c), io::round_to_written_precision(m.tpr_at_fpr.front().tpr),
                      io::round_to_written_precision(m.auc), 0.0, 0.0});
  }
  double best_tpr = 0.0;
  double best_auc = 0.0;
  for (const auto& row : r.rows) {
    best_tpr = std::max(best_tpr, row.tpr);
    best_auc = std::max(best_auc, row.auc);
  }
  for (auto& row : r.rows) {
    row.relative_tpr = best_tpr > 0.0 ? io::round_to_written_precision(row.tpr / best_tpr) : 0.0;
    row.relative_auc = best_auc > 0.0 ? io::round_to_written_precision(row.auc / best_auc) : 0.0;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

json to_json(const UtilityResult& r) {
  json j = io::to_json(r.report);
  j["model_stats"] = {{"original", stats_to_json(r.original)},
                      {"unlearned", stats_to_json(r.unlearned)}};
  return j;
}

json to_json(const UnderUnlearnedResult& r) {
  json groups = json::array();
  for (std::size_t i = 0; i < r.group_levels.size(); ++i) {
    groups.push_back({{"name", r.group_names[i]},
                      {"level", r.group_levels[i]},
                      {"size", r.group_sizes[i]},
                      {"mean_unle_score", io::json_real(r.group_mean_scores[i])}});
  }
  json j = io::to_json(r.report);
  j["experiment"] = {{"groups", groups},
                     {"pearson_r", io::json_real(r.pearson_r)},
                     {"sample_pearson_r", io::json_real(r.sample_pearson_r)},
                     {"pearson_basis", "pearson_r: group means vs levels; sample_pearson_r: "
                                       "every member score vs its group level"}};
  return j;
}

json to_json(const CamouflageResult& r) {
  json j = io::to_json(r.report);
  j["experiment"] = {{"case", std::string(to_string(r.which))},
                     {"camouflage_class_mean_score", io::json_real(r.camouflage_class_mean_score)},
                     {"template_class_mean_score", io::json_real(r.template_class_mean_score)},
                     {"other_retained_mean_score", io::json_real(r.other_retained_mean_score)},
                     {"verdict", std::string(anomaly::to_string(r.anomaly.verdict))}};
  return j;
}

json to_json(const ResilienceResult& r) {
  json steps = json::array();
  for (const auto& s : r.steps) {
    json tprs = json::array();
    for (const auto& t : s.tpr_at_fpr) tprs.push_back(tpr_to_json(t));
    steps.push_back({{"step", s.step},
                     {"negatives", s.negatives},
                     {"auc", io::json_real(s.auc)},
                     {"tpr_at_fpr", tprs},
                     {"group1_mean_unle_score", io::json_real(s.group1_mean_score)}});
  }
  json sizes = json::array();
  for (const auto& g : r.groups) sizes.push_back(g.size());
  return {{"algorithm", std::string(to_string(r.algorithm))},
          {"group_sizes", sizes},
          {"steps", steps},
          {"tpr_range", io::json_real(r.tpr_range())},
          {"negatives_policy",
           "TPR and AUC for group 1 are computed against the retained set current at each step"}};
}

json to_json(const EquityResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"class_id", row.class_id},
                    {"tpr", io::json_real(row.tpr)},
                    {"auc", io::json_real(row.auc)},
                    {"relative_tpr", io::json_real(row.relative_tpr)},
                    {"relative_auc", io::json_real(row.relative_auc)}});
  }
  return {{"algorithm", std::string(to_string(r.algorithm))}, {"classes", rows}};
}

}  // namespace unlescore::simbench

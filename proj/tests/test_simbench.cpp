#include <algorithm>
#include <vector>

#include "doctest.h"
#include "unlescore/experiments.hpp"
#include "unlescore/ingest_io.hpp"
#include "unlescore/simbench.hpp"

using namespace unlescore;
using namespace unlescore::simbench;

namespace {

BlobConfig small_blobs(double separation = 4.0) {
  BlobConfig b;
  b.classes = 3;
  b.dims = 8;
  b.n_per_class = 200;
  b.nonmember_per_class = 100;
  b.test_per_class = 100;
  b.separation = separation;
  b.seed = 5;
  return b;
}

TrainConfig quick_train() {
  TrainConfig t;
  t.epochs = 10;
  t.seed = 5;
  return t;
}

double mean_conf_of_class(const SimModel& m, const SynthDataset& ds,
                          const std::vector<std::size_t>& ids) {
  return mean_confidence(m, ds, ids);
}

}  // namespace

TEST_CASE("rng is seed deterministic") {
  Rng a(99);
  Rng b(99);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.uniform() == b.uniform());
    CHECK(a.normal() == b.normal());
    CHECK(a.below(17) == b.below(17));
  }
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("blob generation") {
  const auto a = generate_blobs(small_blobs());
  const auto b = generate_blobs(small_blobs());
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.train.size() == 600);
  CHECK(a.nonmember.size() == 300);
  CHECK(a.test.size() == 300);
  CHECK(a.sample_id(7) == "s000007");

  BlobConfig bad = small_blobs();
  bad.classes = 1;
  CHECK_THROWS_AS(generate_blobs(bad), InvalidArgument);
}

TEST_CASE("training reaches high accuracy on separated blobs") {
  const auto ds = generate_blobs(small_blobs());
  const auto m = train(ds, quick_train());
  CHECK(accuracy(m, ds, ds.test) >= 0.95);
  REQUIRE(m.training_log.size() == 11);
  CHECK(m.training_log.back().loss < m.training_log.front().loss);
  const auto again = train(ds, quick_train());
  CHECK(again.weights == m.weights);
}

TEST_CASE("indistinguishable classes give chance accuracy") {
  auto cfg = small_blobs(0.0);
  cfg.test_per_class = 1000;
  const auto ds = generate_blobs(cfg);
  const auto m = train(ds, quick_train());
  CHECK(accuracy(m, ds, ds.test) == doctest::Approx(1.0 / 3.0).epsilon(0.15));
}

TEST_CASE("zero epochs returns the initial weights") {
  const auto ds = generate_blobs(small_blobs());
  auto t = quick_train();
  t.epochs = 0;
  const auto m = train(ds, t);
  CHECK(m.weights == SimModel::zeros(ds.classes, ds.dims, t).weights);

  const auto trained = train(ds, quick_train());
  const auto task = make_total_class_task(ds, 0);
  CHECK(fine_tune_unlearn(trained, ds, task, 0, 0.5).weights == trained.weights);
  CHECK(gradient_ascent_unlearn(trained, ds, task, 0, 0.5).weights == trained.weights);
}

TEST_CASE("probabilities are a distribution") {
  const auto ds = generate_blobs(small_blobs());
  const auto m = train(ds, quick_train());
  for (std::size_t i = 0; i < ds.size(); i += 50) {
    const auto p = m.predict_proba(ds.row(i));
    double sum = 0.0;
    for (double x : p) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("unlearning tasks partition the training set") {
  const auto ds = generate_blobs(small_blobs());
  for (const auto& task :
       {make_total_class_task(ds, 1), make_partial_class_task(ds, 2, 0.5, 3),
        make_random_sample_task(ds, 50, 3), make_custom_task(ds, {ds.train[0], ds.train[5]})}) {
    CHECK(std::is_sorted(task.forget_ids.begin(), task.forget_ids.end()));
    CHECK(task.forget_ids.size() + task.retain_ids.size() == ds.train.size());
    std::vector<std::size_t> both;
    std::set_intersection(task.forget_ids.begin(), task.forget_ids.end(), task.retain_ids.begin(),
                          task.retain_ids.end(), std::back_inserter(both));
    CHECK(both.empty());
  }
  CHECK(make_total_class_task(ds, 1).forget_ids.size() == 200);
  CHECK(make_partial_class_task(ds, 2, 0.5, 3).forget_ids.size() == 100);
  CHECK(make_random_sample_task(ds, 50, 3).forget_ids.size() == 50);
  CHECK_THROWS_AS(make_total_class_task(ds, 7), InvalidArgument);
}

TEST_CASE("exact retrain") {
  const auto ds = generate_blobs(small_blobs());
  const auto t = quick_train();
  const auto original = train(ds, t);
  CHECK(exact_retrain(ds, make_custom_task(ds, {}), t).weights == original.weights);

  const auto task = make_total_class_task(ds, 0);
  const auto retrained = exact_retrain(ds, task, t);
  CHECK(exact_retrain(ds, task, t).weights == retrained.weights);
  std::vector<std::size_t> held;
  for (std::size_t i : ds.nonmember) {
    if (ds.labels[i] == 0) held.push_back(i);
  }
  CHECK(mean_conf_of_class(retrained, ds, task.forget_ids) <=
        mean_conf_of_class(retrained, ds, held) + 0.02);
}

TEST_CASE("fine tuning lowers forget-class confidence") {
  const auto ds = generate_blobs(small_blobs());
  const auto original = train(ds, quick_train());
  const auto task = make_total_class_task(ds, 0);
  const auto ft = fine_tune_unlearn(original, ds, task, 5, 0.5);
  CHECK(mean_confidence(ft, ds, task.forget_ids) < mean_confidence(original, ds, task.forget_ids));
  CHECK(fine_tune_unlearn(original, ds, task, 5, 0.5).weights == ft.weights);
}

TEST_CASE("gradient ascent raises forget-set loss at every step") {
  const auto ds = generate_blobs(small_blobs());
  const auto original = train(ds, quick_train());
  const auto task = make_random_sample_task(ds, 60, 2);
  double prev = mean_loss(original, ds, task.forget_ids);
  for (int e = 1; e <= 5; ++e) {
    const auto m = gradient_ascent_unlearn(original, ds, task, e, 0.5);
    const double loss = mean_loss(m, ds, task.forget_ids);
    CHECK(loss > prev);
    prev = loss;
  }
}

TEST_CASE("exported confidences follow the task") {
  const auto ds = generate_blobs(small_blobs());
  const auto original = train(ds, quick_train());
  const auto task = make_partial_class_task(ds, 1, 0.25, 4);
  const auto records = export_confidences(original, original, ds, task);
  CHECK(records.size() == ds.train.size() + ds.nonmember.size());
  std::size_t unlearned = 0;
  for (const auto& r : records) {
    CHECK(r.conf_ori == r.conf_unl);
    CHECK(r.conf_ori == io::round_to_written_precision(r.conf_ori));
    unlearned += r.split == SplitLabel::unlearned_member;
  }
  CHECK(unlearned == task.forget_ids.size());
  for (std::size_t id : task.forget_ids) {
    const auto it = std::find_if(records.begin(), records.end(),
                                 [&](const auto& r) { return r.sample_id == ds.sample_id(id); });
    REQUIRE(it != records.end());
    CHECK(it->split == SplitLabel::unlearned_member);
    CHECK(it->label == ds.labels[id]);
  }
  CHECK(validate_record_set(records).ok());
}

TEST_CASE("exact retrain separates forget and retained medians") {
  auto cfg = preset_config("utility");
  const auto r = run_utility(cfg);
  std::vector<double> forget;
  std::vector<double> retained;
  for (const auto& s : r.report.samples) {
    if (s.split == SplitLabel::unlearned_member) forget.push_back(s.scores.unle_score);
    if (s.split == SplitLabel::retained_member) retained.push_back(s.scores.unle_score);
  }
  CHECK(numstats::median(forget) - numstats::median(retained) >= 0.4);
}

TEST_CASE("bench runs are byte deterministic") {
  auto cfg = preset_config("utility");
  cfg.data.n_per_class = 200;
  CHECK(to_json(run_utility(cfg)).dump() == to_json(run_utility(cfg)).dump());
  auto other = with_seed(cfg, 8);
  CHECK(to_json(run_utility(other)).dump() != to_json(run_utility(cfg)).dump());
}

TEST_CASE("bench config survives a JSON round trip") {
  for (const auto& name : preset_names()) {
    const auto c = preset_config(name);
    CHECK(to_json(config_from_json(to_json(c), BenchConfig{})).dump() == to_json(c).dump());
  }
  CHECK_THROWS_AS(preset_config("nope"), InvalidArgument);
}

TEST_CASE("single-group resilience equals a plain utility run") {
  auto cfg = preset_config("resilience");
  const auto r = run_resilience(cfg, Algorithm::exact_retrain, 1);
  REQUIRE(r.steps.size() == 1);
  const auto ds = generate_blobs(cfg.data);
  cfg.forget_class = ds.labels[r.groups[0].front()];
  const auto u = run_utility(cfg);
  const auto& m = u.report.summary->metrics.front();
  CHECK(r.steps[0].auc == m.auc);
  CHECK(r.steps[0].tpr_at_fpr.front().tpr == m.tpr_at_fpr.front().tpr);
  CHECK(r.tpr_range() == 0.0);
}

TEST_CASE("equity under exact retraining on symmetric blobs") {
  const auto r = run_equity(preset_config("equity"), Algorithm::exact_retrain);
  REQUIRE(r.rows.size() == 5);
  double best = 0.0;
  for (const auto& row : r.rows) {
    CHECK(row.relative_tpr >= 0.9);
    best = std::max(best, row.relative_tpr);
  }
  CHECK(best == 1.0);
}

TEST_CASE("fine tuning opens an equity gap around an overlapping pair") {
  auto cfg = preset_config("equity");
  cfg.data.overlap_a = 0;
  cfg.data.overlap_b = 1;
  cfg.data.overlap_factor = 0.5;
  const auto ft = run_equity(cfg, Algorithm::fine_tune);
  const auto ex = run_equity(cfg, Algorithm::exact_retrain);
  auto spread = [](const EquityResult& r) {
    double lo = 1.0;
    for (const auto& row : r.rows) lo = std::min(lo, row.relative_tpr);
    return 1.0 - lo;
  };
  CHECK(spread(ft) >= 0.2);
  CHECK(spread(ex) <= 0.05);
  // The overlapped classes are the easiest to forget for a linear model.
  CHECK(ft.rows[0].relative_tpr == 1.0);
  CHECK(ft.rows[1].relative_tpr == 1.0);
}

TEST_CASE("under-unlearned groups are ordered") {
  const auto r = run_under_unlearned_experiment(preset_config("under_unlearned"));
  REQUIRE(r.group_mean_scores.size() == r.group_levels.size());
  for (std::size_t i = 1; i < r.group_levels.size(); ++i) {
    CHECK(r.group_levels[i] > r.group_levels[i - 1]);
  }
  for (std::size_t i = 1; i < r.group_mean_scores.size(); ++i) {
    CHECK(r.group_mean_scores[i] > r.group_mean_scores[i - 1]);
  }
  CHECK(r.group_names.front() == "retained");
  CHECK(r.group_names.back() == "exact_unlearned");
}

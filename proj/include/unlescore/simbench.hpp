#pragma once

// Desk-scale bench: Gaussian-blob data, a softmax linear classifier trained
// with mini-batch SGD, unlearning-task generators, and three unlearning
// algorithms (exact retraining, fine tuning, gradient ascent).
//
// Every random draw goes through simbench::Rng so runs are bit-reproducible
// across standard-library implementations.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unlescore/core_types.hpp"

namespace unlescore::simbench {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, n).
  std::size_t below(std::size_t n);
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

// Derives an independent stream seed from a base seed and a tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

// ---------------------------------------------------------------------------
// Data
// ---------------------------------------------------------------------------

struct BlobConfig {
  int classes = 3;
  int dims = 8;
  int n_per_class = 600;           // training members per class
  int nonmember_per_class = 300;   // reference nonmembers per class
  int test_per_class = 150;
  double separation = 4.0;
  std::uint64_t seed = 1;
  // Optionally pull class overlap_b's mean towards class overlap_a's:
  // mean_b <- mean_a + overlap_factor * (mean_b - mean_a).
  std::optional<int> overlap_a;
  std::optional<int> overlap_b;
  double overlap_factor = 1.0;
};

struct SynthDataset {
  std::size_t classes = 0;
  std::size_t dims = 0;
  std::vector<double> features;  // row-major, size() x dims
  std::vector<int> labels;
  std::uint64_t seed = 0;
  double separation = 0.0;
  double noise_sd = 1.0;  // isotropic class covariance noise_sd^2 * I
  std::vector<std::vector<double>> class_means;
  std::vector<std::size_t> train;
  std::vector<std::size_t> nonmember;
  std::vector<std::size_t> test;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * dims, dims};
  }
  std::string sample_id(std::size_t i) const;
};

SynthDataset generate_blobs(const BlobConfig& config);
SynthDataset generate_blobs(int classes, int dims, int n_per_class, double separation,
                            std::uint64_t seed);

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

struct TrainConfig {
  int epochs = 20;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  std::uint64_t seed = 1;

  bool operator==(const TrainConfig&) const = default;
};

struct EpochLog {
  int epoch = 0;  // 0 is the loss before any update
  double loss = 0.0;

  bool operator==(const EpochLog&) const = default;
};

// Softmax linear classifier; weights are classes x (dims + 1), bias last.
struct SimModel {
  std::size_t classes = 0;
  std::size_t dims = 0;
  std::vector<double> weights;
  TrainConfig config;
  std::vector<EpochLog> training_log;

  static SimModel zeros(std::size_t classes, std::size_t dims, const TrainConfig& config);

  std::vector<double> predict_proba(std::span<const double> x) const;
  double confidence(std::span<const double> x, int label) const;
  int predict(std::span<const double> x) const;
};

// Mean cross-entropy over ids; labels default to the dataset's own.
double mean_loss(const SimModel& model, const SynthDataset& ds, std::span<const std::size_t> ids,
                 std::span<const int> labels = {});
double accuracy(const SimModel& model, const SynthDataset& ds, std::span<const std::size_t> ids);
double mean_confidence(const SimModel& model, const SynthDataset& ds,
                       std::span<const std::size_t> ids);

// Trains from zero weights on ds.train.
SimModel train(const SynthDataset& ds, const TrainConfig& config);
// Trains from zero weights on the given ids.
SimModel train_on(const SynthDataset& ds, std::span<const std::size_t> ids,
                  const TrainConfig& config);

// Continues mini-batch SGD from the model's current weights. labels, when
// non-empty, overrides the dataset labels (indexed by sample index).
void continue_sgd(SimModel& model, const SynthDataset& ds, std::span<const std::size_t> ids,
                  int epochs, double learning_rate, std::uint64_t seed,
                  std::span<const int> labels = {});

// ---------------------------------------------------------------------------
// Unlearning tasks and algorithms
// ---------------------------------------------------------------------------

enum class TaskKind { random_sample, partial_class, total_class, custom };

std::string_view to_string(TaskKind kind) noexcept;
std::optional<TaskKind> parse_task_kind(std::string_view text) noexcept;

struct UnlearningTask {
  TaskKind kind = TaskKind::custom;
  std::size_t k = 0;
  int class_id = -1;
  double fraction = 0.0;
  std::vector<std::size_t> forget_ids;  // ascending
  std::vector<std::size_t> retain_ids;  // ascending, ds.train minus forget_ids
};

UnlearningTask make_random_sample_task(const SynthDataset& ds, std::size_t k, std::uint64_t seed);
UnlearningTask make_partial_class_task(const SynthDataset& ds, int class_id, double fraction,
                                       std::uint64_t seed);
UnlearningTask make_total_class_task(const SynthDataset& ds, int class_id);
// Forget set given explicitly (must be a subset of ds.train).
UnlearningTask make_custom_task(const SynthDataset& ds, std::vector<std::size_t> forget_ids);

SimModel exact_retrain(const SynthDataset& ds, const UnlearningTask& task,
                       const TrainConfig& config);
SimModel fine_tune_unlearn(const SimModel& model, const SynthDataset& ds,
                           const UnlearningTask& task, int epochs, double learning_rate);
// Full-batch gradient ascent of the forget-set cross-entropy, one step per epoch.
SimModel gradient_ascent_unlearn(const SimModel& model, const SynthDataset& ds,
                                 const UnlearningTask& task, int epochs, double learning_rate);

enum class Algorithm { exact_retrain, fine_tune, gradient_ascent };

std::string_view to_string(Algorithm algorithm) noexcept;
std::optional<Algorithm> parse_algorithm(std::string_view text) noexcept;

struct UnlearnParams {
  int fine_tune_epochs = 5;
  double fine_tune_lr = 0.5;
  int ascent_epochs = 5;
  double ascent_lr = 0.5;

  bool operator==(const UnlearnParams&) const = default;
};

// Unlearns task from current, which was trained (or last unlearned) under
// train_config. Exact retraining ignores current and trains from scratch.
using UnlearningAlgorithm = std::function<SimModel(
    const SimModel& current, const SynthDataset& ds, const UnlearningTask& task)>;

UnlearningAlgorithm make_algorithm(Algorithm algorithm, const TrainConfig& train_config,
                                   const UnlearnParams& params);

// ---------------------------------------------------------------------------
// Black-box export
// ---------------------------------------------------------------------------

// One record per training sample (retained or unlearned per task) and per
// nonmember sample. Confidences are rounded to the written precision so that
// the records survive the CSV format unchanged. group_id is the class label.
std::vector<ConfidenceRecord> export_confidences(const SimModel& model_ori,
                                                 const SimModel& model_unl,
                                                 const SynthDataset& ds,
                                                 const UnlearningTask& task);

}  // namespace unlescore::simbench

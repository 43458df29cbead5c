#include "unlescore/simbench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "unlescore/ingest_io.hpp"

namespace unlescore::simbench {

// ---------------------------------------------------------------------------
// Rng
// ---------------------------------------------------------------------------

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw InvalidArgument("Rng::below: empty range");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t bound = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

double Rng::normal() {
  if (spare_normal_) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  return r * std::cos(theta);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Data
// ---------------------------------------------------------------------------

std::string SynthDataset::sample_id(std::size_t i) const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%06zu", i);
  return buf;
}

SynthDataset generate_blobs(const BlobConfig& config) {
  if (config.classes < 2 || config.dims < 2 || config.n_per_class < 20) {
    throw InvalidArgument("generate_blobs: need classes >= 2, dims >= 2, n_per_class >= 20");
  }
  if (config.nonmember_per_class < 1 || config.test_per_class < 0) {
    throw InvalidArgument("generate_blobs: need at least one nonmember per class");
  }
  if (!(config.separation >= 0.0) || !std::isfinite(config.separation)) {
    throw InvalidArgument("generate_blobs: separation must be finite and non-negative");
  }

  const auto C = static_cast<std::size_t>(config.classes);
  const auto d = static_cast<std::size_t>(config.dims);
  Rng rng(derive_seed(config.seed, 0xB10B));

  SynthDataset ds;
  ds.classes = C;
  ds.dims = d;
  ds.seed = config.seed;
  ds.separation = config.separation;
  ds.class_means.assign(C, std::vector<double>(d, 0.0));
  for (std::size_t c = 0; c < C; ++c) {
    auto& m = ds.class_means[c];
    if (c < d) {
      m[c] = config.separation;
    } else {
      double norm = 0.0;
      for (auto& v : m) {
        v = rng.normal();
        norm += v * v;
      }
      norm = std::sqrt(norm);
      for (auto& v : m) v *= config.separation / norm;
    }
  }
  if (config.overlap_a && config.overlap_b) {
    const auto a = static_cast<std::size_t>(*config.overlap_a);
    const auto b = static_cast<std::size_t>(*config.overlap_b);
    if (a >= C || b >= C || a == b) throw InvalidArgument("generate_blobs: bad overlap pair");
    for (std::size_t j = 0; j < d; ++j) {
      ds.class_means[b][j] = ds.class_means[a][j] +
                             config.overlap_factor * (ds.class_means[b][j] - ds.class_means[a][j]);
    }
  }

  const auto per_class = static_cast<std::size_t>(config.n_per_class + config.nonmember_per_class +
                                                  config.test_per_class);
  ds.features.reserve(C * per_class * d);
  ds.labels.reserve(C * per_class);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t idx = ds.labels.size();
      for (std::size_t j = 0; j < d; ++j) {
        ds.features.push_back(ds.class_means[c][j] + ds.noise_sd * rng.normal());
      }
      ds.labels.push_back(static_cast<int>(c));
      if (i < static_cast<std::size_t>(config.n_per_class)) {
        ds.train.push_back(idx);
      } else if (i < static_cast<std::size_t>(config.n_per_class + config.nonmember_per_class)) {
        ds.nonmember.push_back(idx);
      } else {
        ds.test.push_back(idx);
      }
    }
  }
  return ds;
}

SynthDataset generate_blobs(int classes, int dims, int n_per_class, double separation,
                            std::uint64_t seed) {
  BlobConfig config;
  config.classes = classes;
  config.dims = dims;
  config.n_per_class = n_per_class;
  config.nonmember_per_class = std::max(1, n_per_class / 2);
  config.test_per_class = std::max(1, n_per_class / 4);
  config.separation = separation;
  config.seed = seed;
  return generate_blobs(config);
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

SimModel SimModel::zeros(std::size_t classes, std::size_t dims, const TrainConfig& config) {
  SimModel m;
  m.classes = classes;
  m.dims = dims;
  m.weights.assign(classes * (dims + 1), 0.0);
  m.config = config;
  return m;
}

namespace {

void logits_into(const SimModel& m, std::span<const double> x, std::vector<double>& out) {
  out.resize(m.classes);
  const std::size_t stride = m.dims + 1;
  for (std::size_t c = 0; c < m.classes; ++c) {
    const double* w = m.weights.data() + c * stride;
    double z = w[m.dims];
    for (std::size_t j = 0; j < m.dims; ++j) z += w[j] * x[j];
    out[c] = z;
  }
}

void softmax_inplace(std::vector<double>& z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (auto& v : z) {
    v = std::exp(v - zmax);
    total += v;
  }
  for (auto& v : z) v /= total;
}

// -log softmax(z)[label], computed stably.
double cross_entropy(const std::vector<double>& z, int label) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double v : z) total += std::exp(v - zmax);
  return zmax + std::log(total) - z[static_cast<std::size_t>(label)];
}

int label_of(const SynthDataset& ds, std::span<const int> labels, std::size_t idx) {
  return labels.empty() ? ds.labels[idx] : labels[idx];
}

// Accumulates the summed cross-entropy gradient over ids into grad.
void accumulate_gradient(const SimModel& model, const SynthDataset& ds,
                         std::span<const std::size_t> ids, std::span<const int> labels,
                         std::vector<double>& grad) {
  grad.assign(model.weights.size(), 0.0);
  const std::size_t stride = model.dims + 1;
  std::vector<double> p;
  for (std::size_t idx : ids) {
    const auto x = ds.row(idx);
    logits_into(model, x, p);
    softmax_inplace(p);
    p[static_cast<std::size_t>(label_of(ds, labels, idx))] -= 1.0;
    for (std::size_t c = 0; c < model.classes; ++c) {
      double* g = grad.data() + c * stride;
      for (std::size_t j = 0; j < model.dims; ++j) g[j] += p[c] * x[j];
      g[model.dims] += p[c];
    }
  }
}

}  // namespace

std::vector<double> SimModel::predict_proba(std::span<const double> x) const {
  std::vector<double> z;
  logits_into(*this, x, z);
  softmax_inplace(z);
  return z;
}

double SimModel::confidence(std::span<const double> x, int label) const {
  return predict_proba(x)[static_cast<std::size_t>(label)];
}

int SimModel::predict(std::span<const double> x) const {
  const auto p = predict_proba(x);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

double mean_loss(const SimModel& model, const SynthDataset& ds, std::span<const std::size_t> ids,
                 std::span<const int> labels) {
  if (ids.empty()) return 0.0;
  std::vector<double> z;
  double total = 0.0;
  for (std::size_t idx : ids) {
    logits_into(model, ds.row(idx), z);
    total += cross_entropy(z, label_of(ds, labels, idx));
  }
  return total / static_cast<double>(ids.size());
}

double accuracy(const SimModel& model, const SynthDataset& ds, std::span<const std::size_t> ids) {
  if (ids.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t idx : ids) hits += model.predict(ds.row(idx)) == ds.labels[idx] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(ids.size());
}

double mean_confidence(const SimModel& model, const SynthDataset& ds,
                       std::span<const std::size_t> ids) {
  if (ids.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t idx : ids) total += model.confidence(ds.row(idx), ds.labels[idx]);
  return total / static_cast<double>(ids.size());
}

void continue_sgd(SimModel& model, const SynthDataset& ds, std::span<const std::size_t> ids,
                  int epochs, double learning_rate, std::uint64_t seed,
                  std::span<const int> labels) {
  if (epochs <= 0 || ids.empty()) return;
  if (!(learning_rate > 0.0)) throw InvalidArgument("continue_sgd: learning rate must be > 0");
  const std::size_t batch = std::max<std::size_t>(model.config.batch_size, 1);

  Rng rng(seed);
  std::vector<std::size_t> order(ids.begin(), ids.end());
  std::vector<double> grad;
  const int first_epoch = model.training_log.empty() ? 1 : model.training_log.back().epoch + 1;
  if (model.training_log.empty()) {
    model.training_log.push_back({0, mean_loss(model, ds, ids, labels)});
  }
  for (int e = 0; e < epochs; ++e) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const std::span<const std::size_t> mb(order.data() + start, end - start);
      accumulate_gradient(model, ds, mb, labels, grad);
      const double step = learning_rate / static_cast<double>(mb.size());
      for (std::size_t k = 0; k < grad.size(); ++k) model.weights[k] -= step * grad[k];
    }
    model.training_log.push_back({first_epoch + e, mean_loss(model, ds, ids, labels)});
  }
}

SimModel train_on(const SynthDataset& ds, std::span<const std::size_t> ids,
                  const TrainConfig& config) {
  auto model = SimModel::zeros(ds.classes, ds.dims, config);
  model.training_log.push_back({0, mean_loss(model, ds, ids)});
  continue_sgd(model, ds, ids, config.epochs, config.learning_rate,
               derive_seed(config.seed, 0x5EED));
  return model;
}

SimModel train(const SynthDataset& ds, const TrainConfig& config) {
  return train_on(ds, ds.train, config);
}

// ---------------------------------------------------------------------------
// Tasks
// ---------------------------------------------------------------------------

std::string_view to_string(TaskKind kind) noexcept {
  switch (kind) {
    case TaskKind::random_sample:
      return "random_sample";
    case TaskKind::partial_class:
      return "partial_class";
    case TaskKind::total_class:
      return "total_class";
    case TaskKind::custom:
      return "custom";
  }
  return "custom";
}

std::optional<TaskKind> parse_task_kind(std::string_view text) noexcept {
  if (text == "random_sample") return TaskKind::random_sample;
  if (text == "partial_class") return TaskKind::partial_class;
  if (text == "total_class") return TaskKind::total_class;
  if (text == "custom") return TaskKind::custom;
  return std::nullopt;
}

namespace {

UnlearningTask finish_task(const SynthDataset& ds, UnlearningTask task) {
  std::sort(task.forget_ids.begin(), task.forget_ids.end());
  task.forget_ids.erase(std::unique(task.forget_ids.begin(), task.forget_ids.end()),
                        task.forget_ids.end());
  std::vector<std::size_t> train_sorted = ds.train;
  std::sort(train_sorted.begin(), train_sorted.end());
  if (!std::includes(train_sorted.begin(), train_sorted.end(), task.forget_ids.begin(),
                     task.forget_ids.end())) {
    throw InvalidArgument("unlearning task: forget ids must be training members");
  }
  task.retain_ids.clear();
  std::set_difference(train_sorted.begin(), train_sorted.end(), task.forget_ids.begin(),
                      task.forget_ids.end(), std::back_inserter(task.retain_ids));
  return task;
}

std::vector<std::size_t> train_ids_of_class(const SynthDataset& ds, int class_id) {
  if (class_id < 0 || static_cast<std::size_t>(class_id) >= ds.classes) {
    throw InvalidArgument("unlearning task: class id out of range");
  }
  std::vector<std::size_t> out;
  for (std::size_t idx : ds.train) {
    if (ds.labels[idx] == class_id) out.push_back(idx);
  }
  return out;
}

}  // namespace

UnlearningTask make_random_sample_task(const SynthDataset& ds, std::size_t k,
                                       std::uint64_t seed) {
  if (k > ds.train.size()) throw InvalidArgument("random_sample task: k exceeds training size");
  std::vector<std::size_t> pool = ds.train;
  Rng rng(derive_seed(seed, 0x7A5C));
  rng.shuffle(pool);
  UnlearningTask task;
  task.kind = TaskKind::random_sample;
  task.k = k;
  task.forget_ids.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  return finish_task(ds, std::move(task));
}

UnlearningTask make_partial_class_task(const SynthDataset& ds, int class_id, double fraction,
                                       std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidArgument("partial_class task: fraction must lie in (0, 1]");
  }
  auto pool = train_ids_of_class(ds, class_id);
  Rng rng(derive_seed(seed, 0x9A57));
  rng.shuffle(pool);
  const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool.size())));
  UnlearningTask task;
  task.kind = TaskKind::partial_class;
  task.class_id = class_id;
  task.fraction = fraction;
  task.forget_ids.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
  task.k = take;
  return finish_task(ds, std::move(task));
}

UnlearningTask make_total_class_task(const SynthDataset& ds, int class_id) {
  UnlearningTask task;
  task.kind = TaskKind::total_class;
  task.class_id = class_id;
  task.fraction = 1.0;
  task.forget_ids = train_ids_of_class(ds, class_id);
  task.k = task.forget_ids.size();
  return finish_task(ds, std::move(task));
}

UnlearningTask make_custom_task(const SynthDataset& ds, std::vector<std::size_t> forget_ids) {
  UnlearningTask task;
  task.kind = TaskKind::custom;
  task.forget_ids = std::move(forget_ids);
  task = finish_task(ds, std::move(task));
  task.k = task.forget_ids.size();
  return task;
}

// ---------------------------------------------------------------------------
// Algorithms
// ---------------------------------------------------------------------------

SimModel exact_retrain(const SynthDataset& ds, const UnlearningTask& task,
                       const TrainConfig& config) {
  return train_on(ds, task.retain_ids, config);
}

SimModel fine_tune_unlearn(const SimModel& model, const SynthDataset& ds,
                           const UnlearningTask& task, int epochs, double learning_rate) {
  if (!(learning_rate > 0.0)) throw InvalidArgument("fine_tune_unlearn: lr must be > 0");
  SimModel out = model;
  continue_sgd(out, ds, task.retain_ids, epochs, learning_rate,
               derive_seed(model.config.seed, 0xF1E7));
  return out;
}

SimModel gradient_ascent_unlearn(const SimModel& model, const SynthDataset& ds,
                                 const UnlearningTask& task, int epochs, double learning_rate) {
  if (!(learning_rate > 0.0)) throw InvalidArgument("gradient_ascent_unlearn: lr must be > 0");
  SimModel out = model;
  if (epochs <= 0 || task.forget_ids.empty()) return out;
  std::vector<double> grad;
  const double step = learning_rate / static_cast<double>(task.forget_ids.size());
  for (int e = 0; e < epochs; ++e) {
    accumulate_gradient(out, ds, task.forget_ids, {}, grad);
    for (std::size_t k = 0; k < grad.size(); ++k) out.weights[k] += step * grad[k];
  }
  return out;
}

std::string_view to_string(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::exact_retrain:
      return "exact_retrain";
    case Algorithm::fine_tune:
      return "fine_tune";
    case Algorithm::gradient_ascent:
      return "gradient_ascent";
  }
  return "exact_retrain";
}

std::optional<Algorithm> parse_algorithm(std::string_view text) noexcept {
  if (text == "exact_retrain") return Algorithm::exact_retrain;
  if (text == "fine_tune") return Algorithm::fine_tune;
  if (text == "gradient_ascent") return Algorithm::gradient_ascent;
  return std::nullopt;
}

UnlearningAlgorithm make_algorithm(Algorithm algorithm, const TrainConfig& train_config,
                                   const UnlearnParams& params) {
  switch (algorithm) {
    case Algorithm::exact_retrain:
      return [train_config](const SimModel&, const SynthDataset& ds, const UnlearningTask& task) {
        return exact_retrain(ds, task, train_config);
      };
    case Algorithm::fine_tune:
      return [params](const SimModel& m, const SynthDataset& ds, const UnlearningTask& task) {
        return fine_tune_unlearn(m, ds, task, params.fine_tune_epochs, params.fine_tune_lr);
      };
    case Algorithm::gradient_ascent:
      return [params](const SimModel& m, const SynthDataset& ds, const UnlearningTask& task) {
        return gradient_ascent_unlearn(m, ds, task, params.ascent_epochs, params.ascent_lr);
      };
  }
  throw InvalidArgument("make_algorithm: unknown algorithm");
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

std::vector<ConfidenceRecord> export_confidences(const SimModel& model_ori,
                                                 const SimModel& model_unl,
                                                 const SynthDataset& ds,
                                                 const UnlearningTask& task) {
  if (model_ori.dims != ds.dims || model_unl.dims != ds.dims ||
      model_ori.classes != ds.classes || model_unl.classes != ds.classes) {
    throw InvalidArgument("export_confidences: model shape does not match dataset");
  }
  std::vector<ConfidenceRecord> out;
  out.reserve(ds.train.size() + ds.nonmember.size());
  auto emit = [&](std::size_t idx, SplitLabel split) {
    const auto x = ds.row(idx);
    const int y = ds.labels[idx];
    out.push_back({ds.sample_id(idx), y, io::round_to_written_precision(model_ori.confidence(x, y)),
                   io::round_to_written_precision(model_unl.confidence(x, y)), split, y});
  };
  for (std::size_t idx : ds.train) {
    const bool forgotten =
        std::binary_search(task.forget_ids.begin(), task.forget_ids.end(), idx);
    emit(idx, forgotten ? SplitLabel::unlearned_member : SplitLabel::retained_member);
  }
  for (std::size_t idx : ds.nonmember) emit(idx, SplitLabel::nonmember);
  return out;
}

}  // namespace unlescore::simbench

#pragma once

// Lifecycle anomaly detection over UnleScores.
//
// Under-unlearning: a requested sample whose score sits in the retained band.
// Over-unlearning: retained scores that either deviate from the retained
// majority (robust z-score) or fail to form a distinct peak (histogram).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unlescore/core_types.hpp"

namespace unlescore::anomaly {

struct AnomalyConfig {
  double tau_u = 0.5;
  double robust_k = 3.5;
  double peak_ratio_min = 0.5;
  std::size_t histogram_bins = 20;
  std::size_t min_retained = 10;
};

enum class Verdict : std::uint8_t { clean, under_unlearning, over_unlearning, both };

std::string_view to_string(Verdict v) noexcept;

struct UnderFlag {
  std::string sample_id;
  double unle_score = 0.0;

  bool operator==(const UnderFlag&) const = default;
};

struct OverFlag {
  std::string sample_id;
  double robust_z = 0.0;

  bool operator==(const OverFlag&) const = default;
};

struct OverUnlearningResult {
  std::vector<OverFlag> flags;  // sorted by sample_id
  double peak_ratio = 1.0;
  double center = 0.0;  // median of retained scores
  double scale = 0.0;   // c * MAD, floored
};

struct AnomalyReport {
  std::vector<UnderFlag> under_unlearned;
  std::vector<OverFlag> over_unlearned;
  double retained_peak_ratio = 1.0;
  bool peak_test_failed = false;
  Verdict verdict = Verdict::clean;
  AnomalyConfig config;
  std::size_t requested_count = 0;
  std::size_t retained_count = 0;

  double under_flag_rate() const noexcept {
    return requested_count == 0 ? 0.0
                                : static_cast<double>(under_unlearned.size()) /
                                      static_cast<double>(requested_count);
  }
};

// Requested samples with unle_score <= tau_u, ascending by score (ties by id).
std::vector<UnderFlag> detect_under_unlearning(std::span<const ScoreVector> requested,
                                               double tau_u);

// Deviation test plus peak test over retained scores. Throws InvalidArgument
// with fewer than config.min_retained scores or out-of-range parameters.
OverUnlearningResult detect_over_unlearning(std::span<const ScoreVector> retained,
                                            double robust_k, double peak_ratio_min,
                                            std::size_t bins = 20);

// Max-bin mass of scores histogrammed into equal bins over [0, 1].
double peak_ratio(std::span<const double> scores, std::size_t bins);

// Runs both detectors over a scored record set and derives the verdict. The
// over-unlearning detector is skipped (and recorded as such) when there are
// fewer than config.min_retained retained samples.
AnomalyReport assess(std::span<const ScoredSample> samples, const AnomalyConfig& config);

}  // namespace unlescore::anomaly

#include "unlescore/anomaly.hpp"

#include <algorithm>
#include <cmath>

#include "unlescore/numstats.hpp"

namespace unlescore::anomaly {

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::clean:
      return "clean";
    case Verdict::under_unlearning:
      return "under_unlearning";
    case Verdict::over_unlearning:
      return "over_unlearning";
    case Verdict::both:
      return "both";
  }
  return "clean";
}

std::vector<UnderFlag> detect_under_unlearning(std::span<const ScoreVector> requested,
                                               double tau_u) {
  std::vector<UnderFlag> flags;
  for (const auto& s : requested) {
    if (s.unle_score <= tau_u) flags.push_back({s.sample_id, s.unle_score});
  }
  std::sort(flags.begin(), flags.end(), [](const UnderFlag& a, const UnderFlag& b) {
    return a.unle_score != b.unle_score ? a.unle_score < b.unle_score : a.sample_id < b.sample_id;
  });
  return flags;
}

double peak_ratio(std::span<const double> scores, std::size_t bins) {
  if (scores.empty() || bins == 0) return 0.0;
  std::vector<std::size_t> counts(bins, 0);
  for (double s : scores) {
    const double clamped = std::clamp(s, 0.0, 1.0);
    auto idx = static_cast<std::size_t>(clamped * static_cast<double>(bins));
    counts[std::min(idx, bins - 1)] += 1;
  }
  const auto peak = *std::max_element(counts.begin(), counts.end());
  return static_cast<double>(peak) / static_cast<double>(scores.size());
}

OverUnlearningResult detect_over_unlearning(std::span<const ScoreVector> retained,
                                            double robust_k, double peak_ratio_min,
                                            std::size_t bins) {
  if (retained.size() < 10) {
    throw InvalidArgument("detect_over_unlearning: need at least 10 retained scores");
  }
  if (!(robust_k > 0.0)) throw InvalidArgument("detect_over_unlearning: k must be positive");
  if (!(peak_ratio_min > 0.0 && peak_ratio_min < 1.0)) {
    throw InvalidArgument("detect_over_unlearning: peak_ratio_min must lie in (0, 1)");
  }
  if (bins == 0) throw InvalidArgument("detect_over_unlearning: bins must be positive");

  std::vector<double> xs(retained.size());
  std::transform(retained.begin(), retained.end(), xs.begin(),
                 [](const ScoreVector& s) { return s.unle_score; });

  OverUnlearningResult out;
  out.center = numstats::median(xs);
  out.scale = std::max(numstats::kMadConsistency * numstats::mad(xs), numstats::kSigmaFloor);
  for (const auto& s : retained) {
    const double z = (s.unle_score - out.center) / out.scale;
    if (std::abs(z) > robust_k) out.flags.push_back({s.sample_id, z});
  }
  std::sort(out.flags.begin(), out.flags.end(),
            [](const OverFlag& a, const OverFlag& b) { return a.sample_id < b.sample_id; });
  out.peak_ratio = peak_ratio(xs, bins);
  return out;
}

AnomalyReport assess(std::span<const ScoredSample> samples, const AnomalyConfig& config) {
  std::vector<ScoreVector> requested;
  std::vector<ScoreVector> retained;
  for (const auto& s : samples) {
    if (s.split == SplitLabel::unlearned_member) requested.push_back(s.scores);
    if (s.split == SplitLabel::retained_member) retained.push_back(s.scores);
  }

  AnomalyReport report;
  report.config = config;
  report.requested_count = requested.size();
  report.retained_count = retained.size();
  report.under_unlearned = detect_under_unlearning(requested, config.tau_u);

  if (retained.size() >= config.min_retained) {
    auto over = detect_over_unlearning(retained, config.robust_k, config.peak_ratio_min,
                                       config.histogram_bins);
    report.over_unlearned = std::move(over.flags);
    report.retained_peak_ratio = over.peak_ratio;
    report.peak_test_failed = over.peak_ratio < config.peak_ratio_min;
  }

  const bool under = !report.under_unlearned.empty();
  const bool over = !report.over_unlearned.empty() || report.peak_test_failed;
  report.verdict = under && over ? Verdict::both
                   : under       ? Verdict::under_unlearning
                   : over        ? Verdict::over_unlearning
                                 : Verdict::clean;
  return report;
}

}  // namespace unlescore::anomaly

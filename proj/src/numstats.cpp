#include "unlescore/numstats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "unlescore/core_types.hpp"

namespace unlescore::numstats {

double logit(double p) noexcept {
  const double q = std::clamp(p, kLogitEps, 1.0 - kLogitEps);
  return std::log(q) - std::log1p(-q);
}

std::string_view to_string(FitMethod method) noexcept {
  return method == FitMethod::robust_mad ? "robust_mad" : "moment";
}

double GaussianFit::upper_tail(double x) const {
  return 1.0 - std_normal_cdf((x - mu) / sigma);
}

namespace {

// Summing in sorted order makes the result depend only on the multiset.
std::vector<double> sorted_copy(std::span<const double> xs) {
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  return v;
}

// Offsets from the smallest value, so a constant sample returns that value exactly.
double sorted_mean(const std::vector<double>& v) {
  const double base = v.front();
  double sum = 0.0;
  for (double x : v) sum += x - base;
  return base + sum / static_cast<double>(v.size());
}

}  // namespace

double mean(std::span<const double> xs) {
  if (xs.empty()) throw DegenerateSample("mean of empty sample");
  return sorted_mean(sorted_copy(xs));
}

double median(std::span<const double> xs) {
  if (xs.empty()) throw DegenerateSample("median of empty sample");
  std::vector<double> v(xs.begin(), xs.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lower + upper) / 2.0;
}

double mad(std::span<const double> xs) {
  if (xs.empty()) throw DegenerateSample("MAD of empty sample");
  const double m = median(xs);
  std::vector<double> dev(xs.size());
  std::transform(xs.begin(), xs.end(), dev.begin(), [m](double x) { return std::abs(x - m); });
  return median(dev);
}

namespace {

void require_fit_size(std::span<const double> xs) {
  if (xs.size() < 2) {
    throw DegenerateSample("Gaussian fit needs at least 2 points, got " +
                           std::to_string(xs.size()));
  }
}

}  // namespace

GaussianFit fit_gaussian_moment(std::span<const double> xs) {
  require_fit_size(xs);
  const auto v = sorted_copy(xs);
  const double mu = sorted_mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  const double sd = std::sqrt(ss / static_cast<double>(v.size()));
  return {mu, std::max(sd, kSigmaFloor), xs.size(), FitMethod::moment};
}

GaussianFit fit_gaussian_mad(std::span<const double> xs) {
  require_fit_size(xs);
  const double mu = mean(xs);
  return {mu, std::max(kMadConsistency * mad(xs), kSigmaFloor), xs.size(),
          FitMethod::robust_mad};
}

double std_normal_cdf(double x) {
  if (!std::isfinite(x)) throw InvalidArgument("std_normal_cdf: non-finite argument");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// ---------------------------------------------------------------------------
// ROC
// ---------------------------------------------------------------------------

namespace {

std::pair<std::size_t, std::size_t> count_classes(std::span<const LabeledScore> scores) {
  std::size_t pos = 0;
  for (const auto& s : scores) pos += s.is_positive ? 1 : 0;
  return {pos, scores.size() - pos};
}

void require_two_classes(std::size_t pos, std::size_t neg, const char* what) {
  if (pos == 0 || neg == 0) {
    throw InvalidArgument(std::string(what) + ": need at least one positive and one negative");
  }
}

std::vector<LabeledScore> sorted_descending(std::span<const LabeledScore> scores) {
  std::vector<LabeledScore> v(scores.begin(), scores.end());
  std::sort(v.begin(), v.end(),
            [](const LabeledScore& a, const LabeledScore& b) { return a.score > b.score; });
  return v;
}

}  // namespace

RocCurve roc_curve(std::span<const LabeledScore> scores) {
  for (const auto& s : scores) {
    if (std::isnan(s.score)) throw InvalidArgument("roc_curve: NaN score");
  }
  const auto [pos, neg] = count_classes(scores);
  require_two_classes(pos, neg, "roc_curve");

  RocCurve curve;
  curve.positive_count = pos;
  curve.negative_count = neg;

  const auto v = sorted_descending(scores);
  std::vector<RocPoint> descending;
  descending.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0, 0, 0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  while (i < v.size()) {
    const double t = v[i].score;
    while (i < v.size() && v[i].score == t) {
      (v[i].is_positive ? tp : fp) += 1;
      ++i;
    }
    descending.push_back({t, static_cast<double>(fp) / static_cast<double>(neg),
                          static_cast<double>(tp) / static_cast<double>(pos), fp, tp});
  }
  curve.points.assign(descending.rbegin(), descending.rend());
  return curve;
}

TprAtFpr tpr_at_fpr(const RocCurve& curve, double target_fpr) {
  if (!(target_fpr > 0.0 && target_fpr < 1.0)) {
    throw InvalidArgument("tpr_at_fpr: target must lie in (0, 1)");
  }
  if (curve.points.empty() || curve.negative_count == 0) {
    throw InvalidArgument("tpr_at_fpr: empty curve");
  }
  TprAtFpr out;
  out.target_fpr = target_fpr;
  out.fpr_granularity = 1.0 / static_cast<double>(curve.negative_count);
  out.granularity_limited = target_fpr < out.fpr_granularity;
  // Points ascend by threshold and fpr is non-increasing along them, so the
  // first point within budget has the smallest admissible threshold.
  for (const auto& p : curve.points) {
    if (p.fpr <= target_fpr) {
      out.tpr = p.tpr;
      out.threshold = p.threshold;
      out.achieved_fpr = p.fpr;
      return out;
    }
  }
  const auto& last = curve.points.back();
  out.tpr = last.tpr;
  out.threshold = last.threshold;
  out.achieved_fpr = last.fpr;
  return out;
}

double auc(std::span<const LabeledScore> scores) {
  for (const auto& s : scores) {
    if (std::isnan(s.score)) throw InvalidArgument("auc: NaN score");
  }
  const auto [pos, neg] = count_classes(scores);
  require_two_classes(pos, neg, "auc");

  // Walk ascending score groups; every positive beats all negatives in
  // strictly lower groups and ties with negatives in its own group. The
  // numerator is kept doubled so it stays an exact integer.
  auto v = sorted_descending(scores);
  std::reverse(v.begin(), v.end());
  std::uint64_t doubled_wins = 0;
  std::uint64_t neg_below = 0;
  std::size_t i = 0;
  while (i < v.size()) {
    const double t = v[i].score;
    std::uint64_t gp = 0;
    std::uint64_t gn = 0;
    while (i < v.size() && v[i].score == t) {
      (v[i].is_positive ? gp : gn) += 1;
      ++i;
    }
    doubled_wins += gp * (2 * neg_below + gn);
    neg_below += gn;
  }
  return static_cast<double>(doubled_wins) /
         (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InvalidArgument("pearson: length mismatch");
  if (xs.size() < 2) throw DegenerateSample("pearson: need at least 2 pairs");
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) throw DegenerateSample("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace unlescore::numstats

#pragma once

// Numerical primitives: logit transform, Gaussian fits (moment and MAD),
// the standard-normal CDF, ROC / AUC / TPR-at-FPR, and Pearson correlation.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace unlescore::numstats {

// Probabilities are clamped to [kLogitEps, 1 - kLogitEps] before the logit.
inline constexpr double kLogitEps = 1e-7;
// Lower bound on every fitted scale.
inline constexpr double kSigmaFloor = 1e-6;
// Makes MAD a consistent estimator of the normal standard deviation: 1 / Phi^-1(3/4).
inline constexpr double kMadConsistency = 1.4826022185;

double logit(double p) noexcept;

enum class FitMethod : std::uint8_t { moment, robust_mad };

std::string_view to_string(FitMethod method) noexcept;

struct GaussianFit {
  double mu = 0.0;
  double sigma = 1.0;
  std::size_t n = 0;
  FitMethod method = FitMethod::moment;

  // Upper-tail mass Pr[G > x] for G ~ N(mu, sigma^2).
  double upper_tail(double x) const;

  bool operator==(const GaussianFit&) const = default;
};

double mean(std::span<const double> xs);

// Even-length inputs average the two middle order statistics.
double median(std::span<const double> xs);

// Median absolute deviation from the median. Throws DegenerateSample on empty input.
double mad(std::span<const double> xs);

// Sample mean and population (n-divisor) standard deviation.
GaussianFit fit_gaussian_moment(std::span<const double> xs);

// Sample mean and kMadConsistency * MAD as the scale.
GaussianFit fit_gaussian_mad(std::span<const double> xs);

// Phi(x). Throws InvalidArgument on non-finite input.
double std_normal_cdf(double x);

// ---------------------------------------------------------------------------
// ROC analysis. Positives are unlearned samples; the decision rule is
// "score >= threshold => positive".
// ---------------------------------------------------------------------------

struct LabeledScore {
  double score = 0.0;
  bool is_positive = false;
};

struct RocPoint {
  double threshold = 0.0;  // +inf for the all-negative endpoint
  double fpr = 0.0;
  double tpr = 0.0;
  std::size_t false_positives = 0;
  std::size_t true_positives = 0;

  bool operator==(const RocPoint&) const = default;
};

struct RocCurve {
  // Ascending by threshold. The first point is the lowest distinct score
  // (fpr = tpr = 1); the last is threshold = +inf (fpr = tpr = 0).
  std::vector<RocPoint> points;
  std::size_t positive_count = 0;
  std::size_t negative_count = 0;

  bool operator==(const RocCurve&) const = default;
};

RocCurve roc_curve(std::span<const LabeledScore> scores);

struct TprAtFpr {
  double target_fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
  double achieved_fpr = 0.0;
  // Smallest non-zero FPR the negative count can realize (1 / negatives).
  double fpr_granularity = 0.0;
  // True when target_fpr < fpr_granularity: only achieved_fpr = 0 fits the budget.
  bool granularity_limited = false;

  bool operator==(const TprAtFpr&) const = default;
};

// Smallest threshold whose empirical FPR is within the budget.
TprAtFpr tpr_at_fpr(const RocCurve& curve, double target_fpr);

// Mann-Whitney AUC; ties count one half.
double auc(std::span<const LabeledScore> scores);

double pearson(std::span<const double> xs, std::span<const double> ys);

}  // namespace unlescore::numstats

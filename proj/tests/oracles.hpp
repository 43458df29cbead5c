#pragma once

// Independent reference implementations used only by tests. None of these
// share code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "unlescore/numstats.hpp"

namespace oracle {

using Big = boost::multiprecision::cpp_bin_float_50;

// Phi(x) = erfc(-x / sqrt(2)) / 2 evaluated in 50 decimal digits.
inline double normal_cdf(double x) {
  const Big bx(x);
  const Big r = boost::math::erfc(-bx / boost::multiprecision::sqrt(Big(2))) / 2;
  return static_cast<double>(r);
}

inline double logit(double p) {
  const Big bp(p);
  return static_cast<double>(boost::multiprecision::log(bp / (1 - bp)));
}

struct Point {
  double threshold;
  std::size_t fp;
  std::size_t tp;
};

// One point per distinct score plus the +inf endpoint, counted from scratch.
inline std::vector<Point> roc(const std::vector<unlescore::numstats::LabeledScore>& s) {
  std::set<double> thresholds;
  for (const auto& x : s) thresholds.insert(x.score);
  thresholds.insert(std::numeric_limits<double>::infinity());
  std::vector<Point> out;
  for (double t : thresholds) {
    Point p{t, 0, 0};
    for (const auto& x : s) {
      if (x.score >= t) (x.is_positive ? p.tp : p.fp) += 1;
    }
    out.push_back(p);
  }
  return out;
}

inline std::size_t count(const std::vector<unlescore::numstats::LabeledScore>& s, bool positive) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [&](const auto& x) { return x.is_positive == positive; }));
}

struct TprResult {
  double tpr;
  double threshold;
  double achieved_fpr;
};

// Smallest threshold whose empirical FPR stays within the target.
inline TprResult tpr_at_fpr(const std::vector<unlescore::numstats::LabeledScore>& s,
                            double target) {
  const double n_pos = static_cast<double>(count(s, true));
  const double n_neg = static_cast<double>(count(s, false));
  for (const auto& p : roc(s)) {  // ascending thresholds
    const double fpr = static_cast<double>(p.fp) / n_neg;
    if (fpr <= target) return {static_cast<double>(p.tp) / n_pos, p.threshold, fpr};
  }
  return {0.0, std::numeric_limits<double>::infinity(), 0.0};
}

// O(P*N) pair count.
inline double auc(const std::vector<unlescore::numstats::LabeledScore>& s) {
  std::uint64_t doubled = 0;
  std::uint64_t p = 0;
  std::uint64_t n = 0;
  for (const auto& a : s) {
    if (!a.is_positive) {
      ++n;
      continue;
    }
    ++p;
    for (const auto& b : s) {
      if (b.is_positive) continue;
      if (a.score > b.score) doubled += 2;
      else if (a.score == b.score) doubled += 1;
    }
  }
  return static_cast<double>(doubled) / (2.0 * static_cast<double>(p) * static_cast<double>(n));
}

inline double sorted_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace oracle

#pragma once

// Shadow-free unlearning-completeness scoring.
//
// Reference distributions are fit once on the nonmember population, which
// stands in for the fixed-membership group (retained members cannot be told
// apart from unlearned ones in advance). Every sample is then scored by a
// pure function of its two confidences and the fitted references:
//
//   h_model   = Pr[g < G_model]               per-model nonmember likelihood
//   l_diff    = (1 + h_unl - h_ori) / 2
//   d_a_lik   = 1 - Pr[phi_A > G_fix_A]       phi_A = logit change
//   d_b_lik   = 1 - Pr[phi_B > G_fix_B]       phi_B = raw change, MAD scale
//   d_liks    = (d_a_lik + d_b_lik) / 2
//   unle_score = (l_diff + d_liks) / 2
//
// Higher scores mean more complete unlearning.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "unlescore/core_types.hpp"
#include "unlescore/numstats.hpp"

namespace unlescore::scoring {

// Below this many nonmembers the fits are flagged as low quality.
inline constexpr std::size_t kReferenceQualityMin = 30;

struct ReferenceFits {
  numstats::GaussianFit g_ori;    // logit conf of nonmembers, original model
  numstats::GaussianFit g_unl;    // logit conf of nonmembers, unlearned model
  numstats::GaussianFit g_fix_a;  // logit-confidence change of nonmembers
  numstats::GaussianFit g_fix_b;  // raw-confidence change of nonmembers (MAD scale)
  std::vector<std::string> warnings;

  bool operator==(const ReferenceFits&) const = default;
};

// Fits all four references on the nonmember records. Throws DegenerateSample
// with fewer than 2 nonmembers.
ReferenceFits fit_references(std::span<const ConfidenceRecord> records);

ScoreVector score_sample(const ConfidenceRecord& rec, const ReferenceFits& refs);

// Element-wise score_sample, in input order. workers > 1 splits the input
// into contiguous partitions scored on separate threads.
std::vector<ScoreVector> score_all(std::span<const ConfidenceRecord> records,
                                   const ReferenceFits& refs, unsigned workers = 1);

// ---------------------------------------------------------------------------
// Shadow-based baselines, all in non-membership orientation.
// ---------------------------------------------------------------------------

enum class TargetModel { ori, unl };

// Offline LiRA against out-model shadow confidences: the upper-tail mass of
// the shadow logit distribution above the observed logit confidence.
double lira_nmi(const ConfidenceRecord& rec, const ShadowRecord& shadow, TargetModel which);

struct UpdateScores {
  double update_diff = 0.0;
  double update_ratio = 0.0;
};

// Combines per-model LiRA scores; the ratio denominator is floored at kLogitEps.
UpdateScores update_scores(double lira_ori, double lira_unl);

// Fills lira_nmi / update_diff / update_ratio on each vector whose sample_id
// has a shadow record. Returns the number of vectors populated.
std::size_t attach_baselines(std::span<ScoreVector> scores,
                             std::span<const ConfidenceRecord> records,
                             std::span<const ShadowRecord> shadows);

}  // namespace unlescore::scoring

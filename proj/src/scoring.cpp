#include "unlescore/scoring.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace unlescore::scoring {

using numstats::logit;

ReferenceFits fit_references(std::span<const ConfidenceRecord> records) {
  std::vector<double> g_ori;
  std::vector<double> g_unl;
  std::vector<double> phi_a;
  std::vector<double> phi_b;
  for (const auto& rec : records) {
    if (rec.split != SplitLabel::nonmember) continue;
    const double lo = logit(rec.conf_ori);
    const double lu = logit(rec.conf_unl);
    g_ori.push_back(lo);
    g_unl.push_back(lu);
    phi_a.push_back(lu - lo);
    phi_b.push_back(rec.conf_unl - rec.conf_ori);
  }
  if (g_ori.size() < 2) {
    throw DegenerateSample("fit_references: need at least 2 nonmember records, got " +
                           std::to_string(g_ori.size()));
  }

  ReferenceFits refs{numstats::fit_gaussian_moment(g_ori), numstats::fit_gaussian_moment(g_unl),
                     numstats::fit_gaussian_moment(phi_a), numstats::fit_gaussian_mad(phi_b),
                     {}};
  if (g_ori.size() < kReferenceQualityMin) {
    refs.warnings.push_back("only " + std::to_string(g_ori.size()) +
                            " nonmember records; reference fits are low quality below " +
                            std::to_string(kReferenceQualityMin));
  }
  return refs;
}

ScoreVector score_sample(const ConfidenceRecord& rec, const ReferenceFits& refs) {
  ScoreVector out;
  out.sample_id = rec.sample_id;

  const double lo = logit(rec.conf_ori);
  const double lu = logit(rec.conf_unl);
  out.h_ori = refs.g_ori.upper_tail(lo);
  out.h_unl = refs.g_unl.upper_tail(lu);
  out.l_diff = (1.0 + out.h_unl - out.h_ori) / 2.0;

  out.d_a_lik = refs.g_fix_a.upper_tail(lu - lo);
  out.d_b_lik = refs.g_fix_b.upper_tail(rec.conf_unl - rec.conf_ori);
  out.d_liks = (out.d_a_lik + out.d_b_lik) / 2.0;

  out.unle_score = (out.l_diff + out.d_liks) / 2.0;
  return out;
}

std::vector<ScoreVector> score_all(std::span<const ConfidenceRecord> records,
                                   const ReferenceFits& refs, unsigned workers) {
  std::vector<ScoreVector> out(records.size());
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = score_sample(records[i], refs);
  };
  const std::size_t n = records.size();
  const std::size_t parts = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (parts == 1) {
    run(0, n);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(parts);
    for (std::size_t p = 0; p < parts; ++p) {
      pool.emplace_back(run, n * p / parts, n * (p + 1) / parts);
    }
  }
  return out;
}

double lira_nmi(const ConfidenceRecord& rec, const ShadowRecord& shadow, TargetModel which) {
  if (shadow.shadow_confs.size() < 2) {
    throw DegenerateSample("lira_nmi: sample '" + shadow.sample_id +
                           "' has fewer than 2 shadow confidences");
  }
  std::vector<double> g(shadow.shadow_confs.size());
  std::transform(shadow.shadow_confs.begin(), shadow.shadow_confs.end(), g.begin(),
                 [](double c) { return logit(c); });
  const auto fit = numstats::fit_gaussian_moment(g);
  const double conf = which == TargetModel::ori ? rec.conf_ori : rec.conf_unl;
  return fit.upper_tail(logit(conf));
}

UpdateScores update_scores(double lira_ori, double lira_unl) {
  return {lira_unl - lira_ori, lira_unl / std::max(lira_ori, numstats::kLogitEps)};
}

std::size_t attach_baselines(std::span<ScoreVector> scores,
                             std::span<const ConfidenceRecord> records,
                             std::span<const ShadowRecord> shadows) {
  if (scores.size() != records.size()) {
    throw InvalidArgument("attach_baselines: scores and records differ in length");
  }
  std::unordered_map<std::string_view, const ShadowRecord*> by_id;
  for (const auto& s : shadows) by_id.emplace(s.sample_id, &s);

  std::size_t filled = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto it = by_id.find(records[i].sample_id);
    if (it == by_id.end()) continue;
    const double ori = lira_nmi(records[i], *it->second, TargetModel::ori);
    const double unl = lira_nmi(records[i], *it->second, TargetModel::unl);
    const auto upd = update_scores(ori, unl);
    scores[i].lira_nmi = unl;
    scores[i].update_diff = upd.update_diff;
    scores[i].update_ratio = upd.update_ratio;
    ++filled;
  }
  return filled;
}

}  // namespace unlescore::scoring

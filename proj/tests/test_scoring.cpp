#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "unlescore/scoring.hpp"

using namespace unlescore;
using namespace unlescore::scoring;

namespace {

ConfidenceRecord rec(std::string id, double ori, double unl, SplitLabel split) {
  return {std::move(id), 0, ori, unl, split, std::nullopt};
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<ConfidenceRecord> random_records(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  std::uniform_int_distribution<int> split(0, 2);
  std::vector<ConfidenceRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(rec("r" + std::to_string(i), u(gen), u(gen), static_cast<SplitLabel>(split(gen))));
  }
  return out;
}

}  // namespace

TEST_CASE("reference fit hand example") {
  const std::vector<ConfidenceRecord> r{rec("a", 0.8, 0.8, SplitLabel::nonmember),
                                        rec("b", 0.9, 0.9, SplitLabel::nonmember),
                                        rec("m", 0.99, 0.2, SplitLabel::unlearned_member)};
  const auto f = fit_references(r);
  CHECK(f.g_ori.mu == doctest::Approx((std::log(4.0) + std::log(9.0)) / 2).epsilon(1e-14));
  CHECK(f.g_ori.mu == doctest::Approx(1.7918).epsilon(1e-4));
  CHECK(f.g_fix_a.mu == 0.0);
  CHECK(f.g_fix_a.sigma == numstats::kSigmaFloor);
  CHECK(f.g_fix_b.method == numstats::FitMethod::robust_mad);
  CHECK(f.g_ori.method == numstats::FitMethod::moment);
  CHECK(f.g_ori.n == 2);
  CHECK_FALSE(f.warnings.empty());
}

TEST_CASE("reference fits need two nonmembers") {
  const std::vector<ConfidenceRecord> r{rec("a", 0.8, 0.8, SplitLabel::nonmember),
                                        rec("m", 0.9, 0.1, SplitLabel::unlearned_member)};
  CHECK_THROWS_AS(fit_references(r), DegenerateSample);
}

TEST_CASE("reference fits ignore member records and input order") {
  auto r = random_records(400, 5);
  const auto f = fit_references(r);
  std::mt19937_64 gen(1);
  std::shuffle(r.begin(), r.end(), gen);
  CHECK(fit_references(r) == f);
  for (auto& x : r) {
    if (x.split != SplitLabel::nonmember) x.conf_unl = 0.5;
  }
  CHECK(fit_references(r) == f);
}

TEST_CASE("no-change fixed point") {
  ReferenceFits refs;
  refs.g_ori = {numstats::logit(0.7), 1.0, 10, numstats::FitMethod::moment};
  refs.g_unl = refs.g_ori;
  refs.g_fix_a = {0.0, 1.0, 10, numstats::FitMethod::moment};
  refs.g_fix_b = {0.0, 0.2, 10, numstats::FitMethod::robust_mad};
  const auto s = score_sample(rec("x", 0.7, 0.7, SplitLabel::retained_member), refs);
  CHECK(s.h_ori == 0.5);
  CHECK(s.h_unl == 0.5);
  CHECK(s.l_diff == 0.5);
  CHECK(s.d_a_lik == 0.5);
  CHECK(s.d_b_lik == 0.5);
  CHECK(s.unle_score == 0.5);
}

TEST_CASE("large confidence drop saturates the logit-change likelihood") {
  ReferenceFits refs;
  refs.g_fix_a = {0.0, 1.0, 10, numstats::FitMethod::moment};
  const auto s = score_sample(rec("x", 0.99, 0.01, SplitLabel::unlearned_member), refs);
  CHECK(numstats::logit(0.01) - numstats::logit(0.99) == doctest::Approx(-9.190).epsilon(1e-4));
  CHECK(s.d_a_lik == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("identical models with floored references give exactly one half") {
  std::vector<ConfidenceRecord> r;
  for (int i = 0; i < 40; ++i) r.push_back(rec("n" + std::to_string(i), 0.8, 0.8, SplitLabel::nonmember));
  r.push_back(rec("m", 0.8, 0.8, SplitLabel::retained_member));
  const auto f = fit_references(r);
  CHECK(f.g_ori.sigma == numstats::kSigmaFloor);
  const auto s = score_sample(r.back(), f);
  CHECK(s.h_ori == 0.5);
  CHECK(s.d_a_lik == 0.5);
  CHECK(s.d_b_lik == 0.5);
  CHECK(s.unle_score == 0.5);
}

TEST_CASE("score identities hold exactly") {
  const auto r = random_records(2000, 17);
  const auto refs = fit_references(r);
  for (const auto& s : score_all(r, refs)) {
    CHECK(s.l_diff == (1.0 + s.h_unl - s.h_ori) / 2.0);
    CHECK(s.d_liks == (s.d_a_lik + s.d_b_lik) / 2.0);
    CHECK(s.unle_score == (s.l_diff + s.d_liks) / 2.0);
    CHECK(s.unle_score >= 0.0);
    CHECK(s.unle_score <= 1.0);
  }
}

TEST_CASE("score components agree with a high-precision recomputation") {
  const auto r = random_records(300, 23);
  const auto refs = fit_references(r);
  for (const auto& x : r) {
    const auto s = score_sample(x, refs);
    const double lo = oracle::logit(x.conf_ori);
    const double lu = oracle::logit(x.conf_unl);
    const double h_ori = 1.0 - oracle::normal_cdf((lo - refs.g_ori.mu) / refs.g_ori.sigma);
    const double d_b =
        1.0 - oracle::normal_cdf((x.conf_unl - x.conf_ori - refs.g_fix_b.mu) / refs.g_fix_b.sigma);
    const double d_a = 1.0 - oracle::normal_cdf((lu - lo - refs.g_fix_a.mu) / refs.g_fix_a.sigma);
    CHECK(s.h_ori == doctest::Approx(h_ori).epsilon(1e-9));
    CHECK(s.d_a_lik == doctest::Approx(d_a).epsilon(1e-9));
    CHECK(s.d_b_lik == doctest::Approx(d_b).epsilon(1e-9));
  }
}

TEST_CASE("unle_score is monotone in each confidence") {
  const auto r = random_records(500, 29);
  const auto refs = fit_references(r);
  for (double base : {0.1, 0.4, 0.75, 0.95}) {
    double prev = 2.0;
    for (int i = 1; i < 100; ++i) {
      const double s = score_sample(rec("x", base, i / 100.0, SplitLabel::retained_member), refs).unle_score;
      CHECK(s <= prev);
      prev = s;
    }
    prev = -1.0;
    for (int i = 1; i < 100; ++i) {
      const double s = score_sample(rec("x", i / 100.0, base, SplitLabel::retained_member), refs).unle_score;
      CHECK(s >= prev);
      prev = s;
    }
  }
}

TEST_CASE("shifting the unlearned model's logits leaves co-shifted scores unchanged") {
  auto r = random_records(300, 31);
  const auto refs = fit_references(r);
  const ConfidenceRecord target = rec("t", 0.6, 0.3, SplitLabel::unlearned_member);
  const auto before = score_sample(target, refs);

  const double k = 0.75;
  for (auto& x : r) x.conf_unl = sigmoid(numstats::logit(x.conf_unl) + k);
  auto shifted = target;
  shifted.conf_unl = sigmoid(numstats::logit(target.conf_unl) + k);
  const auto refs2 = fit_references(r);
  CHECK(refs2.g_unl.mu == doctest::Approx(refs.g_unl.mu + k).epsilon(1e-9));
  CHECK(refs2.g_fix_a.mu == doctest::Approx(refs.g_fix_a.mu + k).epsilon(1e-9));
  const auto after = score_sample(shifted, refs2);
  CHECK(after.l_diff == doctest::Approx(before.l_diff).epsilon(1e-9));
  CHECK(after.d_a_lik == doctest::Approx(before.d_a_lik).epsilon(1e-9));
}

TEST_CASE("score_all partitions match sequential scoring bit for bit") {
  const auto r = random_records(5003, 37);
  const auto refs = fit_references(r);
  const auto seq = score_all(r, refs, 1);
  REQUIRE(seq.size() == r.size());
  for (std::size_t i = 0; i < r.size(); i += 97) CHECK(seq[i] == score_sample(r[i], refs));
  for (unsigned w : {2u, 3u, 8u, 64u}) CHECK(score_all(r, refs, w) == seq);
  CHECK(score_all(std::span<const ConfidenceRecord>{}, refs, 4).empty());
}

TEST_CASE("offline LiRA non-membership score") {
  const ShadowRecord sh{"x", {0.6, 0.7, 0.8, 0.9}};
  std::vector<double> g;
  for (double c : sh.shadow_confs) g.push_back(numstats::logit(c));
  const auto fit = numstats::fit_gaussian_moment(g);

  auto at = [&](double logit_value) {
    return rec("x", sigmoid(logit_value), sigmoid(logit_value), SplitLabel::retained_member);
  };
  CHECK(lira_nmi(at(fit.mu), sh, TargetModel::ori) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(lira_nmi(at(fit.mu + 2 * fit.sigma), sh, TargetModel::unl) ==
        doctest::Approx(0.02275013195).epsilon(1e-8));

  const ShadowRecord flat{"x", {0.5, 0.5, 0.5}};
  CHECK(lira_nmi(rec("x", 0.9, 0.1, SplitLabel::retained_member), flat, TargetModel::ori) < 1e-12);
  CHECK(lira_nmi(rec("x", 0.9, 0.1, SplitLabel::retained_member), flat, TargetModel::unl) >
        1.0 - 1e-12);
  CHECK_THROWS_AS(lira_nmi(at(0.0), ShadowRecord{"x", {0.5}}, TargetModel::ori), DegenerateSample);
}

TEST_CASE("update scores") {
  auto u = update_scores(0.2, 0.9);
  CHECK(u.update_diff == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(u.update_ratio == doctest::Approx(4.5).epsilon(1e-15));
  u = update_scores(0.5, 0.5);
  CHECK(u.update_diff == 0.0);
  CHECK(u.update_ratio == 1.0);
  u = update_scores(0.0, 0.3);
  CHECK(u.update_ratio == doctest::Approx(0.3 / numstats::kLogitEps));
}

TEST_CASE("attach_baselines fills only samples with shadows") {
  const std::vector<ConfidenceRecord> r{rec("a", 0.9, 0.3, SplitLabel::unlearned_member),
                                        rec("b", 0.8, 0.8, SplitLabel::retained_member),
                                        rec("n1", 0.6, 0.6, SplitLabel::nonmember),
                                        rec("n2", 0.7, 0.6, SplitLabel::nonmember)};
  auto scores = score_all(r, fit_references(r));
  const std::vector<ShadowRecord> sh{{"a", {0.4, 0.5, 0.6}}};
  CHECK(attach_baselines(scores, r, sh) == 1);
  REQUIRE(scores[0].lira_nmi.has_value());
  const double lo = lira_nmi(r[0], sh[0], TargetModel::ori);
  const double lu = lira_nmi(r[0], sh[0], TargetModel::unl);
  CHECK(*scores[0].lira_nmi == lu);
  CHECK(*scores[0].update_diff == lu - lo);
  CHECK(*scores[0].update_ratio == update_scores(lo, lu).update_ratio);
  CHECK_FALSE(scores[1].lira_nmi.has_value());
}

#include <filesystem>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "unlescore/ingest_io.hpp"
#include "unlescore/report.hpp"
#include "unlescore/scoring.hpp"

using namespace unlescore;

namespace {

std::vector<ConfidenceRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return io::parse_confidence_csv(in);
}

std::size_t parse_error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::vector<ConfidenceRecord> random_records(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ConfidenceRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    ConfidenceRecord r;
    r.sample_id = "s" + std::to_string(i);
    r.label = static_cast<int>(i % 4);
    r.split = static_cast<SplitLabel>(i % 3);
    r.conf_ori = io::round_to_written_precision(u(gen));
    r.conf_unl = io::round_to_written_precision(u(gen));
    if (i % 5) r.group_id = static_cast<int>(i % 7);
    out.push_back(r);
  }
  return out;
}

io::EvalReport build_report(std::size_t n, std::uint64_t seed) {
  const auto records = random_records(n, seed);
  const auto refs = scoring::fit_references(records);
  auto scores = scoring::score_all(records, refs);
  std::vector<ShadowRecord> shadows;
  for (std::size_t i = 0; i < records.size(); i += 2) {
    shadows.push_back({records[i].sample_id, {0.2, 0.4, 0.6}});
  }
  scoring::attach_baselines(scores, records, shadows);
  io::EvalReport r;
  r.samples = io::make_scored_samples(records, scores);
  const std::vector<double> targets{1e-3, 0.1};
  r.summary = io::evaluate(r.samples, targets);
  r.roc = io::unle_score_roc(r.samples);
  r.anomaly = anomaly::assess(r.samples, anomaly::AnomalyConfig{});
  io::annotate_metadata(r, nlohmann::json{{"command", "test"}}, &refs);
  io::normalize(r);
  return r;
}

constexpr const char* kHeader = "sample_id,label,split,conf_ori,conf_unl,group_id\n";

}  // namespace

TEST_CASE("canonical confidence file") {
  const auto r = parse(std::string(kHeader) +
                       "a,0,retained_member,0.9,0.85,\n"
                       "b,1,unlearned_member,0.95,0.1,3\n"
                       "c,2,nonmember,0.4,0.35,\n");
  REQUIRE(r.size() == 3);
  CHECK(r[0].split == SplitLabel::retained_member);
  CHECK(r[1].group_id == 3);
  CHECK_FALSE(r[0].group_id.has_value());
  CHECK(r[2].conf_unl == 0.35);
  CHECK(validate_record_set(r).ok());
}

TEST_CASE("nine-digit confidences are stored exactly") {
  const auto r = parse(std::string(kHeader) + "a,0,nonmember,0.999999999,0.123456789,\n");
  CHECK(r[0].conf_ori == 0.999999999);
  CHECK(io::format_real(r[0].conf_ori) == "0.999999999");
  CHECK(io::format_real(r[0].conf_unl) == "0.123456789");
}

TEST_CASE("confidence parse errors carry line numbers") {
  CHECK(parse_error_line("a,0,nonmember,0.5,0.5,\n") == 1);
  CHECK(parse_error_line("sample_id,label,split,conf_ori,conf_unl,group_id,extra\n") == 1);
  CHECK(parse_error_line(std::string(kHeader) + "a,0,nonmember,0.5,0.5,\nb,0,member,0.5,0.5,\n") == 3);
  CHECK(parse_error_line(std::string(kHeader) + "a,0,nonmember,0.5,0.5\n") == 2);
  CHECK(parse_error_line(std::string(kHeader) + "a,0,nonmember,0.5,0.5,,\n") == 2);
  CHECK(parse_error_line(std::string(kHeader) + "a,x,nonmember,0.5,0.5,\n") == 2);
  CHECK(parse_error_line(std::string(kHeader) + "a,0,nonmember,abc,0.5,\n") == 2);
  CHECK(parse_error_line(std::string(kHeader) + "a,0,nonmember,0,5,0.5,\n") == 2);
  CHECK(parse_error_line(std::string(kHeader) + "a\xff,0,nonmember,0.5,0.5,\n") > 0);
}

TEST_CASE("CRLF line endings and blank lines are tolerated") {
  const auto r = parse("sample_id,label,split,conf_ori,conf_unl,group_id\r\n\r\na,0,nonmember,0.5,0.5,\r\n");
  REQUIRE(r.size() == 1);
  CHECK(r[0].sample_id == "a");
}

TEST_CASE("validation reports every violation") {
  std::vector<ConfidenceRecord> r{
      {"a", 0, 1.2, 0.5, SplitLabel::retained_member, std::nullopt},
      {"a", -1, 0.5, 0.5, SplitLabel::unlearned_member, std::nullopt},
      {"", 0, 0.5, 0.5, SplitLabel::retained_member, std::nullopt},
  };
  const auto v = validate_record_set(r);
  auto has = [&](std::string_view reason) {
    return std::any_of(v.violations.begin(), v.violations.end(),
                       [&](const Violation& x) { return x.reason == reason; });
  };
  CHECK(has(kViolationConfidenceRange));
  CHECK(has(kViolationEmptyReference));
  CHECK(has(kViolationDuplicateId));
  CHECK(has(kViolationNegativeLabel));
  CHECK(has(kViolationEmptyId));
}

TEST_CASE("confidence CSV round trip") {
  const auto records = random_records(500, 3);
  std::ostringstream out;
  io::write_confidence_csv(out, records);
  CHECK(parse(out.str()) == records);
  std::ostringstream again;
  io::write_confidence_csv(again, parse(out.str()));
  CHECK(again.str() == out.str());
}

TEST_CASE("split partition") {
  const auto records = random_records(300, 4);
  std::size_t total = 0;
  for (auto s : {SplitLabel::retained_member, SplitLabel::unlearned_member, SplitLabel::nonmember}) {
    const auto part = filter_split(records, s);
    for (const auto& r : part) CHECK(r.split == s);
    total += part.size();
  }
  CHECK(total == records.size());
}

TEST_CASE("shadow JSON lines") {
  std::string big = "{\"sample_id\": \"b\", \"shadow_confs\": [";
  for (int i = 0; i < 128; ++i) big += (i ? "," : "") + std::to_string(0.3 + i / 1000.0);
  big += "]}\n";
  std::istringstream in("{\"sample_id\": \"a\", \"shadow_confs\": [0.1, 0.2]}\n\n" + big);
  const auto s = io::parse_shadow_jsonl(in);
  REQUIRE(s.size() == 2);
  CHECK(s[0].shadow_confs.size() == 2);
  CHECK(s[1].shadow_confs.size() == 128);

  std::ostringstream out;
  io::write_shadow_jsonl(out, s);
  std::istringstream back(out.str());
  CHECK(io::parse_shadow_jsonl(back) == s);

  for (const char* bad : {"{\"sample_id\": \"a\", \"shadow_confs\": [0.1, \"x\"]}\n",
                          "{\"sample_id\": \"a\"}\n", "not json\n",
                          "{\"sample_id\": \"a\", \"shadow_confs\": [0.1], \"extra\": 1}\n"}) {
    std::istringstream b(bad);
    CHECK_THROWS_AS(io::parse_shadow_jsonl(b), ParseError);
  }
}

TEST_CASE("JSON report round trip") {
  const auto r = build_report(600, 9);
  const auto text = io::render_report(r, io::ReportFormat::json);
  const auto back = io::report_from_json(nlohmann::json::parse(text));
  CHECK(back.samples == r.samples);
  CHECK(*back.roc == *r.roc);
  CHECK(*back.summary == *r.summary);
  CHECK(io::render_report(back, io::ReportFormat::json) == text);
  CHECK(text == io::render_report(build_report(600, 9), io::ReportFormat::json));

  const auto j = nlohmann::json::parse(text);
  CHECK(j.at("schema_version") == io::kSchemaVersion);
  CHECK(j.at("metadata").contains("fpr_granularity"));
  CHECK(j.at("metadata").contains("tool_version"));
}

TEST_CASE("summary is recomputable from the per-sample section") {
  const auto r = build_report(600, 10);
  const std::vector<double> targets{1e-3, 0.1};
  CHECK(io::evaluate(r.samples, targets) == *r.summary);
  CHECK(io::unle_score_roc(r.samples) == *r.roc);
}

TEST_CASE("scores CSV round trip") {
  const auto r = build_report(300, 11);
  const auto text = io::render_report(r, io::ReportFormat::csv_scores);
  const auto back = io::parse_scores_csv(text);
  CHECK(back == r.samples);
  CHECK_THROWS_AS(io::parse_scores_csv("wrong header\n"), ParseError);
}

TEST_CASE("ROC TSV has one row per point") {
  const auto r = build_report(300, 12);
  const auto text = io::render_report(r, io::ReportFormat::roc_tsv);
  const auto pts = io::parse_roc_tsv(text);
  REQUIRE(pts.size() == r.roc->points.size());
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(pts.size() + 1));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].threshold == r.roc->points[i].threshold);
    CHECK(pts[i].fpr == r.roc->points[i].fpr);
    CHECK(pts[i].tpr == r.roc->points[i].tpr);
  }
  CHECK(std::isinf(pts.back().threshold));
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "unlescore_io_test";
  std::filesystem::create_directories(dir);
  const auto records = random_records(20, 13);
  io::write_confidence_file(dir / "c.csv", records);
  CHECK(io::read_confidence_file(dir / "c.csv") == records);
  CHECK_THROWS_AS(io::read_confidence_file(dir / "missing.csv"), IoError);
  std::filesystem::remove_all(dir);
}

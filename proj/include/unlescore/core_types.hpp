#pragma once

// Domain records shared by every module: the three membership splits, the
// per-sample confidence record, shadow confidences for baselines, and the
// per-sample score vector.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace unlescore {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class DegenerateSample : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& reason);
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

// Membership status relative to the original and unlearned models.
//   retained_member:  member of both
//   unlearned_member: member of the original only (an unlearning request)
//   nonmember:        member of neither; the reference population
enum class SplitLabel : std::uint8_t { retained_member, unlearned_member, nonmember };

std::string_view to_string(SplitLabel split) noexcept;
std::optional<SplitLabel> parse_split(std::string_view text) noexcept;

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

// True-label confidences of one sample under the original and unlearned
// models. Both models must share the same output calibration.
struct ConfidenceRecord {
  std::string sample_id;
  int label = 0;
  double conf_ori = 0.0;
  double conf_unl = 0.0;
  SplitLabel split = SplitLabel::nonmember;
  std::optional<int> group_id;

  bool operator==(const ConfidenceRecord&) const = default;
};

// Confidences of one sample under shadow models trained without it.
struct ShadowRecord {
  std::string sample_id;
  std::vector<double> shadow_confs;

  bool operator==(const ShadowRecord&) const = default;
};

struct ScoreVector {
  std::string sample_id;
  double h_ori = 0.5;
  double h_unl = 0.5;
  double l_diff = 0.5;
  double d_a_lik = 0.5;
  double d_b_lik = 0.5;
  double d_liks = 0.5;
  double unle_score = 0.5;
  std::optional<double> lira_nmi;
  std::optional<double> update_diff;
  std::optional<double> update_ratio;

  bool operator==(const ScoreVector&) const = default;
};

// A score vector together with the record metadata needed to evaluate it.
struct ScoredSample {
  ScoreVector scores;
  int label = 0;
  SplitLabel split = SplitLabel::nonmember;
  std::optional<int> group_id;

  bool operator==(const ScoredSample&) const = default;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
  std::string sample_id;  // empty for set-level violations
  std::string reason;

  bool operator==(const Violation&) const = default;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

inline constexpr std::string_view kViolationConfidenceRange = "confidence out of range";
inline constexpr std::string_view kViolationEmptyReference = "empty reference population";
inline constexpr std::string_view kViolationDuplicateId = "duplicate sample_id";
inline constexpr std::string_view kViolationNegativeLabel = "negative label";
inline constexpr std::string_view kViolationEmptyId = "empty sample_id";

ValidationResult validate_record_set(std::span<const ConfidenceRecord> records);

// Records with the given split, in input order.
std::vector<ConfidenceRecord> filter_split(std::span<const ConfidenceRecord> records,
                                           SplitLabel split);

}  // namespace unlescore

#include "unlescore/core_types.hpp"

#include <cmath>
#include <unordered_set>

namespace unlescore {

ParseError::ParseError(std::size_t line, const std::string& reason)
    : std::runtime_error("line " + std::to_string(line) + ": " + reason),
      line_(line),
      reason_(reason) {}

std::string_view to_string(SplitLabel split) noexcept {
  switch (split) {
    case SplitLabel::retained_member:
      return "retained_member";
    case SplitLabel::unlearned_member:
      return "unlearned_member";
    case SplitLabel::nonmember:
      return "nonmember";
  }
  return "nonmember";
}

std::optional<SplitLabel> parse_split(std::string_view text) noexcept {
  if (text == "retained_member") return SplitLabel::retained_member;
  if (text == "unlearned_member") return SplitLabel::unlearned_member;
  if (text == "nonmember") return SplitLabel::nonmember;
  return std::nullopt;
}

namespace {

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

}  // namespace

ValidationResult validate_record_set(std::span<const ConfidenceRecord> records) {
  ValidationResult result;
  std::unordered_set<std::string_view> seen;
  seen.reserve(records.size());
  bool has_nonmember = false;

  for (const auto& rec : records) {
    if (rec.sample_id.empty()) {
      result.violations.push_back({rec.sample_id, std::string(kViolationEmptyId)});
    } else if (!seen.insert(rec.sample_id).second) {
      result.violations.push_back({rec.sample_id, std::string(kViolationDuplicateId)});
    }
    if (!is_probability(rec.conf_ori) || !is_probability(rec.conf_unl)) {
      result.violations.push_back({rec.sample_id, std::string(kViolationConfidenceRange)});
    }
    if (rec.label < 0) {
      result.violations.push_back({rec.sample_id, std::string(kViolationNegativeLabel)});
    }
    has_nonmember = has_nonmember || rec.split == SplitLabel::nonmember;
  }
  if (!has_nonmember) {
    result.violations.push_back({"", std::string(kViolationEmptyReference)});
  }
  return result;
}

std::vector<ConfidenceRecord> filter_split(std::span<const ConfidenceRecord> records,
                                           SplitLabel split) {
  std::vector<ConfidenceRecord> out;
  for (const auto& rec : records) {
    if (rec.split == split) out.push_back(rec);
  }
  return out;
}

}  // namespace unlescore

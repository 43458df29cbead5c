#pragma once

// File formats consumed and produced by the engine.
//
// Confidence CSV (UTF-8, comma separated, '.' decimal, header required):
//
//   sample_id,label,split,conf_ori,conf_unl,group_id
//   s000001,2,retained_member,0.981234567,0.979876543,2
//   s000002,0,nonmember,0.412345678,0.398765432,
//
// Shadow JSON lines, one object per sample:
//
//   {"sample_id": "s000001", "shadow_confs": [0.41, 0.38, ...]}
//
// Reals are written with 9 significant digits.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unlescore/core_types.hpp"

namespace unlescore::io {

inline constexpr int kWrittenDigits = 9;
inline constexpr std::string_view kConfidenceHeader =
    "sample_id,label,split,conf_ori,conf_unl,group_id";

// "%.9g" rendering; "inf" / "-inf" / "nan" for non-finite values.
std::string format_real(double x);
// The double that format_real(x) parses back to.
double round_to_written_precision(double x);

// Parses a complete field as a double / int, or returns nullopt.
std::optional<double> parse_real(std::string_view text);
std::optional<int> parse_int(std::string_view text);

std::vector<ConfidenceRecord> parse_confidence_csv(std::istream& in);
std::vector<ConfidenceRecord> read_confidence_file(const std::filesystem::path& path);
void write_confidence_csv(std::ostream& out, std::span<const ConfidenceRecord> records);
void write_confidence_file(const std::filesystem::path& path,
                           std::span<const ConfidenceRecord> records);

std::vector<ShadowRecord> parse_shadow_jsonl(std::istream& in);
std::vector<ShadowRecord> read_shadow_file(const std::filesystem::path& path);
void write_shadow_jsonl(std::ostream& out, std::span<const ShadowRecord> records);

// Whole-file helpers shared by the readers and writers.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);
bool is_valid_utf8(std::string_view text) noexcept;

}  // namespace unlescore::io

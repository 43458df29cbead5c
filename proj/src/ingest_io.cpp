#include "unlescore/ingest_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace unlescore::io {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", kWrittenDigits, x);
  return buf;
}

double round_to_written_precision(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(format_real(x).c_str(), nullptr);
}

std::optional<double> parse_real(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

std::optional<int> parse_int(std::string_view text) {
  if (text.empty()) return std::nullopt;
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

bool is_valid_utf8(std::string_view text) noexcept {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= text.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Reject overlong encodings, surrogates and out-of-range code points.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

// ---------------------------------------------------------------------------
// Confidence CSV
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

ConfidenceRecord parse_confidence_row(std::string_view line, std::size_t lineno) {
  const auto f = split_fields(line, ',');
  if (f.size() != 6) {
    throw ParseError(lineno, "expected 6 fields, got " + std::to_string(f.size()));
  }
  ConfidenceRecord rec;
  if (f[0].empty()) throw ParseError(lineno, "empty sample_id");
  rec.sample_id = std::string(f[0]);

  const auto label = parse_int(f[1]);
  if (!label) throw ParseError(lineno, "label is not an integer: '" + std::string(f[1]) + "'");
  rec.label = *label;

  const auto split = parse_split(f[2]);
  if (!split) throw ParseError(lineno, "unknown split '" + std::string(f[2]) + "'");
  rec.split = *split;

  const auto ori = parse_real(f[3]);
  if (!ori) throw ParseError(lineno, "conf_ori is not a number: '" + std::string(f[3]) + "'");
  const auto unl = parse_real(f[4]);
  if (!unl) throw ParseError(lineno, "conf_unl is not a number: '" + std::string(f[4]) + "'");
  rec.conf_ori = *ori;
  rec.conf_unl = *unl;

  if (!f[5].empty()) {
    const auto group = parse_int(f[5]);
    if (!group) throw ParseError(lineno, "group_id is not an integer: '" + std::string(f[5]) + "'");
    rec.group_id = *group;
  }
  return rec;
}

}  // namespace

std::vector<ConfidenceRecord> parse_confidence_csv(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (!is_valid_utf8(text)) throw ParseError(1, "input is not valid UTF-8");

  std::vector<ConfidenceRecord> records;
  std::istringstream lines(text);
  std::string raw;
  std::size_t lineno = 0;
  bool saw_header = false;
  while (std::getline(lines, raw)) {
    ++lineno;
    const auto line = strip_cr(raw);
    if (!saw_header) {
      if (line != kConfidenceHeader) {
        throw ParseError(lineno, "missing or unexpected header; expected '" +
                                     std::string(kConfidenceHeader) + "'");
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    records.push_back(parse_confidence_row(line, lineno));
  }
  if (!saw_header) throw ParseError(1, "missing header");
  return records;
}

std::vector<ConfidenceRecord> read_confidence_file(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  return parse_confidence_csv(in);
}

void write_confidence_csv(std::ostream& out, std::span<const ConfidenceRecord> records) {
  out << kConfidenceHeader << '\n';
  for (const auto& r : records) {
    out << r.sample_id << ',' << r.label << ',' << to_string(r.split) << ','
        << format_real(r.conf_ori) << ',' << format_real(r.conf_unl) << ',';
    if (r.group_id) out << *r.group_id;
    out << '\n';
  }
}

void write_confidence_file(const std::filesystem::path& path,
                           std::span<const ConfidenceRecord> records) {
  std::ostringstream ss;
  write_confidence_csv(ss, records);
  write_text_file(path, ss.str());
}

// ---------------------------------------------------------------------------
// Shadow JSON lines
// ---------------------------------------------------------------------------

std::vector<ShadowRecord> parse_shadow_jsonl(std::istream& in) {
  std::vector<ShadowRecord> out;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = strip_cr(raw);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(lineno, "expected a JSON object");
    for (const auto& item : obj.items()) {
      if (item.key() != "sample_id" && item.key() != "shadow_confs") {
        throw ParseError(lineno, "unknown key '" + item.key() + "'");
      }
    }
    if (!obj.contains("sample_id") || !obj["sample_id"].is_string()) {
      throw ParseError(lineno, "sample_id must be a string");
    }
    if (!obj.contains("shadow_confs") || !obj["shadow_confs"].is_array()) {
      throw ParseError(lineno, "shadow_confs must be an array");
    }
    ShadowRecord rec;
    rec.sample_id = obj["sample_id"].get<std::string>();
    for (const auto& v : obj["shadow_confs"]) {
      if (!v.is_number()) throw ParseError(lineno, "shadow_confs entries must be numbers");
      rec.shadow_confs.push_back(v.get<double>());
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<ShadowRecord> read_shadow_file(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  return parse_shadow_jsonl(in);
}

void write_shadow_jsonl(std::ostream& out, std::span<const ShadowRecord> records) {
  for (const auto& r : records) {
    out << "{\"sample_id\": " << nlohmann::json(r.sample_id).dump() << ", \"shadow_confs\": [";
    for (std::size_t i = 0; i < r.shadow_confs.size(); ++i) {
      if (i) out << ", ";
      out << format_real(r.shadow_confs[i]);
    }
    out << "]}\n";
  }
}

}  // namespace unlescore::io

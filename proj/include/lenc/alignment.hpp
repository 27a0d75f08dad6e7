#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lenc/errors.hpp"
#include "lenc/phone_map.hpp"

namespace lenc {

struct PhoneInterval {
  std::string utterance_id;
  std::string phone_label;  // NFC
  double start = 0.0;       // seconds
  double duration = 0.0;    // seconds, > 0
  std::optional<std::string> speaker_id;
};

struct IntervalTier {
  std::string name;
  std::vector<PhoneInterval> intervals;
};

struct TextGridParse {
  std::vector<IntervalTier> tiers;
  std::vector<std::string> warnings;
};

struct VowelToken {
  Vowel vowel = Vowel::a;
  Length length = Length::short_;
  double duration_ms = 0.0;
  std::string utterance_id;
  std::optional<std::string> speaker_id;
  std::string corpus_id;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\f\v");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

inline std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::string_view strip_bom(std::string_view text, std::size_t line_for_error) {
  if (text.size() >= 2 && ((static_cast<unsigned char>(text[0]) == 0xFF &&
                            static_cast<unsigned char>(text[1]) == 0xFE) ||
                           (static_cast<unsigned char>(text[0]) == 0xFE &&
                            static_cast<unsigned char>(text[1]) == 0xFF)))
    throw ParseError("UTF-16 input is not supported; convert the file to UTF-8", line_for_error);
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  return text;
}

// Line cursor over the long ooTextFile form: `key = value` lines and
// `item [n]:` style headers.
class TextGridReader {
 public:
  explicit TextGridReader(std::string_view text) : lines_(split_lines(text)) {}

  bool at_end() {
    skip_blank();
    return pos_ >= lines_.size();
  }

  std::size_t line_no() const { return pos_ + 1; }

  std::string_view peek() {
    skip_blank();
    if (pos_ >= lines_.size()) throw ParseError("unexpected end of TextGrid", lines_.size());
    return trim(lines_[pos_]);
  }

  // Consumes a line that must equal `expected` exactly (after trimming).
  void expect_line(std::string_view expected, std::string_view what) {
    std::string_view l = peek();
    if (l != expected) fail("expected " + std::string(what) + ", found '" + std::string(l) + "'");
    ++pos_;
  }

  // Consumes a header like `item [3]:` or `intervals [12]:`.
  void expect_indexed(std::string_view name, std::size_t index) {
    std::string_view l = peek();
    std::string want = std::string(name) + " [" + std::to_string(index) + "]:";
    if (l != want) fail("expected '" + want + "', found '" + std::string(l) + "'");
    ++pos_;
  }

  // Consumes `key = value` and returns the raw value text. String values may
  // continue over several lines.
  std::pair<std::string, std::size_t> expect_value(std::string_view key) {
    std::string_view l = peek();
    const std::size_t at = line_no();
    const auto eq = l.find('=');
    if (eq == std::string_view::npos || trim(l.substr(0, eq)) != key)
      fail("expected '" + std::string(key) + " = ...', found '" + std::string(l) + "'");
    std::string_view value = trim(l.substr(eq + 1));
    ++pos_;
    if (value.empty() || value.front() != '"') return {std::string(value), at};
    std::string joined(value);
    while (!string_closed(joined)) {
      if (pos_ >= lines_.size()) throw ParseError("unterminated string", at);
      joined += '\n';
      joined += lines_[pos_++];
    }
    return {std::string(trim(joined)), at};
  }

  double expect_number(std::string_view key) {
    auto [raw, at] = expect_value(key);
    auto v = to_double(raw);
    if (!v) throw ParseError("non-numeric value '" + raw + "' for " + std::string(key), at);
    return *v;
  }

  std::size_t expect_count(std::string_view key) {
    auto [raw, at] = expect_value(key);
    auto v = to_double(raw);
    if (!v || *v < 0 || std::floor(*v) != *v)
      throw ParseError("invalid count '" + raw + "' for " + std::string(key), at);
    return static_cast<std::size_t>(*v);
  }

  std::string expect_string(std::string_view key) {
    auto [raw, at] = expect_value(key);
    if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"' || !string_closed(raw))
      throw ParseError("expected quoted string for " + std::string(key), at);
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
      out += raw[i];
      if (raw[i] == '"') ++i;  // "" is an escaped quote
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, line_no()); }

 private:
  static bool string_closed(std::string_view s) {
    // s starts with a quote; closed when an odd quote run ends it.
    std::size_t i = 1;
    while (i < s.size()) {
      if (s[i] == '"') {
        if (i + 1 < s.size() && s[i + 1] == '"') {
          i += 2;
          continue;
        }
        return i == s.size() - 1 || trim(s.substr(i + 1)).empty();
      }
      ++i;
    }
    return false;
  }

  void skip_blank() {
    while (pos_ < lines_.size() && trim(lines_[pos_]).empty()) ++pos_;
  }

  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Parses a Praat TextGrid in the long text format. Interval tiers are
// returned in file order; empty labels are dropped; point tiers are skipped
// with a warning. `utterance_id` is stamped on every interval.
inline TextGridParse parse_textgrid(std::string_view text, std::string_view utterance_id = {}) {
  text = detail::strip_bom(text, 1);
  detail::TextGridReader r(text);
  TextGridParse out;

  if (r.at_end()) throw ParseError("empty TextGrid", 1);
  r.expect_line("File type = \"ooTextFile\"", "header 'File type = \"ooTextFile\"'");
  r.expect_line("Object class = \"TextGrid\"", "'Object class = \"TextGrid\"'");
  {
    std::string_view l = r.peek();
    if (l.rfind("xmin", 0) != 0) {
      if (detail::to_double(l))
        r.fail("short TextGrid format is not supported; save as a long text file");
      r.fail("malformed header, expected 'xmin = ...'");
    }
  }
  const double grid_min = r.expect_number("xmin");
  const double grid_max = r.expect_number("xmax");
  if (grid_min > grid_max) throw ParseError("xmin > xmax", r.line_no() - 1);

  std::string_view exists = r.peek();
  if (exists == "tiers? <absent>") return out;
  r.expect_line("tiers? <exists>", "'tiers? <exists>'");
  const std::size_t n_tiers = r.expect_count("size");
  r.expect_line("item []:", "'item []:'");

  for (std::size_t t = 1; t <= n_tiers; ++t) {
    r.expect_indexed("item", t);
    const std::string cls = r.expect_string("class");
    const std::string name = r.expect_string("name");
    r.expect_number("xmin");
    r.expect_number("xmax");

    if (cls == "IntervalTier") {
      IntervalTier tier{name, {}};
      const std::size_t n = r.expect_count("intervals: size");
      double prev_end = -INFINITY;
      for (std::size_t j = 1; j <= n; ++j) {
        r.expect_indexed("intervals", j);
        const double lo = r.expect_number("xmin");
        const std::size_t hi_line = r.line_no();
        const double hi = r.expect_number("xmax");
        if (lo > hi) throw ParseError("interval xmin > xmax", hi_line);
        if (lo < prev_end - 1e-9) throw ParseError("interval overlaps its predecessor", hi_line);
        prev_end = hi;
        const std::size_t text_line = r.line_no();
        const std::string label = nfc(detail::trim(r.expect_string("text")));
        if (label.empty()) continue;
        if (hi == lo) throw ParseError("non-positive duration for '" + label + "'", text_line);
        tier.intervals.push_back(
            PhoneInterval{std::string(utterance_id), label, lo, hi - lo, std::nullopt});
      }
      out.tiers.push_back(std::move(tier));
    } else if (cls == "TextTier") {
      out.warnings.push_back("skipping point tier '" + name + "'");
      const std::size_t n = r.expect_count("points: size");
      for (std::size_t j = 1; j <= n; ++j) {
        r.expect_indexed("points", j);
        if (r.peek().rfind("number", 0) == 0)
          r.expect_number("number");
        else
          r.expect_number("time");
        r.expect_string("mark");
      }
    } else {
      r.fail("unknown tier class '" + cls + "'");
    }
  }
  return out;
}

// Parses `utt channel start dur label` lines ('#' comments allowed).
// Intervals come back grouped by utterance (first-appearance order) and
// sorted by start within each utterance.
inline std::vector<PhoneInterval> parse_ctm(std::string_view text) {
  text = detail::strip_bom(text, 1);
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<std::size_t, PhoneInterval>>> by_utt;

  const auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    std::string_view l = detail::trim(lines[i]);
    if (l.empty() || l.front() == '#') continue;

    std::vector<std::string_view> f;
    std::size_t p = 0;
    while (p < l.size()) {
      const auto b = l.find_first_not_of(" \t", p);
      if (b == std::string_view::npos) break;
      auto e = l.find_first_of(" \t", b);
      if (e == std::string_view::npos) e = l.size();
      f.push_back(l.substr(b, e - b));
      p = e;
    }
    if (f.size() != 5)
      throw ParseError("expected 5 fields (utt channel start dur label), found " +
                           std::to_string(f.size()),
                       line_no);
    auto start = detail::to_double(f[2]);
    if (!start) throw ParseError("non-numeric start '" + std::string(f[2]) + "'", line_no);
    auto dur = detail::to_double(f[3]);
    if (!dur) throw ParseError("non-numeric duration '" + std::string(f[3]) + "'", line_no);
    if (*start < 0) throw ParseError("negative start time", line_no);
    if (*dur <= 0) throw ParseError("non-positive duration", line_no);

    std::string utt(f[0]);
    auto [it, fresh] = by_utt.try_emplace(utt);
    if (fresh) order.push_back(utt);
    it->second.emplace_back(line_no,
                            PhoneInterval{utt, nfc(f[4]), *start, *dur, std::nullopt});
  }

  std::vector<PhoneInterval> out;
  for (const auto& utt : order) {
    auto& rows = by_utt[utt];
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return a.second.start < b.second.start;
    });
    for (std::size_t k = 1; k < rows.size(); ++k) {
      const auto& prev = rows[k - 1].second;
      if (rows[k].second.start < prev.start + prev.duration - 1e-9)
        throw ParseError("interval overlaps another interval of '" + utt + "'", rows[k].first);
    }
    for (auto& [line, iv] : rows) out.push_back(std::move(iv));
  }
  return out;
}

// How speaker ids are derived from utterance ids.
class SpeakerRule {
 public:
  SpeakerRule() = default;

  static SpeakerRule fixed(std::string name) {
    SpeakerRule r;
    r.kind_ = Kind::fixed;
    r.arg_ = std::move(name);
    return r;
  }
  static SpeakerRule prefix(std::string delimiter) {
    if (delimiter.empty()) throw ConfigError("speaker prefix delimiter must not be empty");
    SpeakerRule r;
    r.kind_ = Kind::prefix;
    r.arg_ = std::move(delimiter);
    return r;
  }
  // "none", "fixed:<name>" or "prefix:<delimiter>".
  static SpeakerRule parse(std::string_view spec) {
    if (spec.empty() || spec == "none") return {};
    if (spec.rfind("fixed:", 0) == 0) return fixed(std::string(spec.substr(6)));
    if (spec.rfind("prefix:", 0) == 0) return prefix(std::string(spec.substr(7)));
    throw ConfigError("speaker rule must be 'none', 'fixed:<name>' or 'prefix:<delimiter>', got '" +
                      std::string(spec) + "'");
  }

  std::optional<std::string> apply(std::string_view utterance_id) const {
    switch (kind_) {
      case Kind::none: return std::nullopt;
      case Kind::fixed: return arg_;
      case Kind::prefix: {
        auto p = utterance_id.find(arg_);
        return std::string(p == std::string_view::npos ? utterance_id : utterance_id.substr(0, p));
      }
    }
    return std::nullopt;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::none: return "none";
      case Kind::fixed: return "fixed:" + arg_;
      case Kind::prefix: return "prefix:" + arg_;
    }
    return "none";
  }

 private:
  enum class Kind { none, fixed, prefix };
  Kind kind_ = Kind::none;
  std::string arg_;
};

inline void assign_speakers(std::vector<PhoneInterval>& intervals, const SpeakerRule& rule) {
  for (auto& iv : intervals) iv.speaker_id = rule.apply(iv.utterance_id);
}

// One token per interval whose label is in `map`; other labels are skipped.
inline std::vector<VowelToken> extract_vowel_tokens(const std::vector<PhoneInterval>& intervals,
                                                    const PhoneMap& map,
                                                    std::string_view corpus_id) {
  std::vector<VowelToken> tokens;
  for (const auto& iv : intervals) {
    auto cell = map.lookup(iv.phone_label);
    if (!cell) continue;
    // Quantized to 1e-6 ms so that end - start from TextGrid times and CTM
    // durations agree on the same boundaries.
    const double ms = std::round(iv.duration * 1e9) / 1e6;
    tokens.push_back(VowelToken{cell->vowel, cell->length, ms, iv.utterance_id,
                                iv.speaker_id, std::string(corpus_id)});
  }
  return tokens;
}

}  // namespace lenc

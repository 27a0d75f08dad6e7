#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "json.hpp"
#include "lenc/errors.hpp"

namespace lenc {

// Vowel qualities, in row order of the feature tables (height, then backness).
// Schwa is last: it has no long counterpart and never gets a contrast row.
enum class Vowel { i, e, open_e, a, open_o, o, u, schwa };
enum class Length { short_, long_ };

inline constexpr std::array<Vowel, 7> kContrastVowels = {
    Vowel::i, Vowel::e, Vowel::open_e, Vowel::a, Vowel::open_o, Vowel::o, Vowel::u};
inline constexpr std::array<Vowel, 8> kAllVowels = {
    Vowel::i,      Vowel::e, Vowel::open_e, Vowel::a,
    Vowel::open_o, Vowel::o, Vowel::u,      Vowel::schwa};

// IPA symbol.
inline std::string_view vowel_symbol(Vowel v) {
  switch (v) {
    case Vowel::i: return "i";
    case Vowel::e: return "e";
    case Vowel::open_e: return "ɛ";
    case Vowel::a: return "a";
    case Vowel::open_o: return "ɔ";
    case Vowel::o: return "o";
    case Vowel::u: return "u";
    case Vowel::schwa: return "ə";
  }
  return "?";
}

// ASCII name, safe for file names on case-insensitive filesystems.
inline std::string_view vowel_slug(Vowel v) {
  switch (v) {
    case Vowel::i: return "i";
    case Vowel::e: return "e";
    case Vowel::open_e: return "open_e";
    case Vowel::a: return "a";
    case Vowel::open_o: return "open_o";
    case Vowel::o: return "o";
    case Vowel::u: return "u";
    case Vowel::schwa: return "schwa";
  }
  return "unknown";
}

inline std::string_view length_name(Length l) { return l == Length::short_ ? "short" : "long"; }

// Unicode NFC of a UTF-8 string. Throws ConfigError on invalid UTF-8.
inline std::string nfc(std::string_view utf8) {
  bool ascii = true;
  for (unsigned char c : utf8) {
    if (c >= 0x80) {
      ascii = false;
      break;
    }
  }
  if (ascii) return std::string(utf8);
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw ConfigError("ICU NFC normalizer unavailable");
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  icu::UnicodeString out = norm->normalize(src, status);
  if (U_FAILURE(status)) throw ConfigError("cannot normalize label '" + std::string(utf8) + "'");
  std::string result;
  out.toUTF8String(result);
  return result;
}

inline std::optional<Vowel> parse_vowel(std::string_view name) {
  const std::string n = nfc(name);
  for (Vowel v : kAllVowels)
    if (n == vowel_symbol(v)) return v;
  return std::nullopt;
}

inline std::optional<Length> parse_length(std::string_view name) {
  if (name == "short") return Length::short_;
  if (name == "long") return Length::long_;
  return std::nullopt;
}

struct Cell {
  Vowel vowel;
  Length length;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Phone label -> (vowel, length). Labels absent from the map are non-vowels.
class PhoneMap {
 public:
  // Throws ConfigError on a duplicate label or a long schwa.
  void add(std::string_view label, Cell cell) {
    std::string key = nfc(label);
    if (key.empty()) throw ConfigError("empty phone label in phone map");
    if (cell.vowel == Vowel::schwa && cell.length == Length::long_)
      throw ConfigError("phone '" + key + "': schwa has no long counterpart");
    auto [it, inserted] = entries_.emplace(std::move(key), cell);
    if (!inserted) throw ConfigError("duplicate phone label '" + it->first + "' in phone map");
  }

  // `label` must already be NFC; parsers normalize on read.
  std::optional<Cell> lookup(std::string_view label) const {
    auto it = entries_.find(std::string(label));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  const std::map<std::string, Cell>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<std::string, Cell> entries_;
};

// Parses `{ "phones": { "<label>": {"vowel": "<ipa>", "length": "short"|"long"} } }`.
// Duplicate keys are rejected, including keys that collide only after NFC.
inline PhoneMap load_phone_map(std::string_view text) {
  using nlohmann::json;
  std::vector<std::string> phone_keys;
  bool in_phones = false;
  auto cb = [&](int depth, json::parse_event_t ev, json& parsed) {
    if (ev == json::parse_event_t::key) {
      if (depth == 1)
        in_phones = parsed.get<std::string>() == "phones";
      else if (depth == 2 && in_phones)
        phone_keys.push_back(parsed.get<std::string>());
    }
    return true;
  };
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), cb);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("phone map is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("phones") || !doc["phones"].is_object())
    throw ConfigError("phone map must be an object with a \"phones\" object");

  PhoneMap map;
  for (const auto& raw_key : phone_keys) {
    const json& entry = doc["phones"][raw_key];
    if (!entry.is_object() || !entry.contains("vowel") || !entry.contains("length") ||
        !entry["vowel"].is_string() || !entry["length"].is_string())
      throw ConfigError("phone '" + raw_key + "': expected {\"vowel\": ..., \"length\": ...}");
    auto vowel = parse_vowel(entry["vowel"].get<std::string>());
    if (!vowel)
      throw ConfigError("phone '" + raw_key + "': unknown vowel class '" +
                        entry["vowel"].get<std::string>() + "'");
    auto length = parse_length(entry["length"].get<std::string>());
    if (!length)
      throw ConfigError("phone '" + raw_key + "': length must be \"short\" or \"long\"");
    map.add(raw_key, Cell{*vowel, *length});
  }
  return map;
}

// Label written for a cell by the synthetic corpus generator: the IPA symbol,
// doubled for long vowels.
inline std::string canonical_label(Cell cell) {
  std::string s(vowel_symbol(cell.vowel));
  return cell.length == Length::long_ ? s + s : s;
}

// Doubled grapheme marks the long vowel, as in Wolof orthography; ':' and
// the IPA length mark are accepted aliases, and E/O cover ASCII phone sets.
inline PhoneMap default_phone_map() {
  PhoneMap map;
  auto add_pair = [&](Vowel v, std::string_view base) {
    const std::string b(base);
    map.add(b, {v, Length::short_});
    map.add(b + b, {v, Length::long_});
    map.add(b + ":", {v, Length::long_});
    map.add(b + "ː", {v, Length::long_});
  };
  for (Vowel v : kContrastVowels) add_pair(v, vowel_symbol(v));
  add_pair(Vowel::open_e, "E");
  add_pair(Vowel::open_o, "O");
  map.add("ə", {Vowel::schwa, Length::short_});
  map.add("@", {Vowel::schwa, Length::short_});
  return map;
}

inline std::string default_phone_map_json() {
  nlohmann::ordered_json phones = nlohmann::ordered_json::object();
  const PhoneMap map = default_phone_map();
  for (const auto& [label, cell] : map.entries())
    phones[label] = {{"vowel", std::string(vowel_symbol(cell.vowel))},
                     {"length", std::string(length_name(cell.length))}};
  return nlohmann::ordered_json{{"phones", phones}}.dump(2);
}

}  // namespace lenc

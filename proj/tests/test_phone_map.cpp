#include <gtest/gtest.h>

#include <set>

#include "lenc/phone_map.hpp"

using namespace lenc;

TEST(PhoneMap, DefaultMapCoversSevenContrastsAndShortSchwa) {
  const PhoneMap map = default_phone_map();
  std::set<Cell> cells;
  for (const auto& [label, cell] : map.entries()) cells.insert(cell);
  for (Vowel v : kContrastVowels) {
    EXPECT_TRUE(cells.count({v, Length::short_})) << vowel_symbol(v);
    EXPECT_TRUE(cells.count({v, Length::long_})) << vowel_symbol(v);
  }
  EXPECT_TRUE(cells.count({Vowel::schwa, Length::short_}));
  EXPECT_FALSE(cells.count({Vowel::schwa, Length::long_}));
  EXPECT_EQ(cells.size(), 15u);
}

TEST(PhoneMap, DefaultLabels) {
  const PhoneMap map = default_phone_map();
  EXPECT_EQ(map.lookup("a"), (Cell{Vowel::a, Length::short_}));
  EXPECT_EQ(map.lookup("aa"), (Cell{Vowel::a, Length::long_}));
  EXPECT_EQ(map.lookup("ɔː"), (Cell{Vowel::open_o, Length::long_}));
  EXPECT_EQ(map.lookup("E"), (Cell{Vowel::open_e, Length::short_}));
  EXPECT_EQ(map.lookup("ə"), (Cell{Vowel::schwa, Length::short_}));
  EXPECT_FALSE(map.lookup("sil"));
  EXPECT_FALSE(map.lookup("b"));
}

TEST(PhoneMap, AliasesResolveToSameCell) {
  const PhoneMap map = load_phone_map(R"({"phones": {
      "a":  {"vowel": "a", "length": "short"},
      "aa": {"vowel": "a", "length": "long"},
      "a:": {"vowel": "a", "length": "long"}}})");
  EXPECT_EQ(map.size(), 3u);
  EXPECT_EQ(map.lookup("aa"), (Cell{Vowel::a, Length::long_}));
  EXPECT_EQ(map.lookup("a:"), (Cell{Vowel::a, Length::long_}));
}

TEST(PhoneMap, DuplicateLabelIsConfigError) {
  EXPECT_THROW(load_phone_map(R"({"phones": {
      "a": {"vowel": "a", "length": "short"},
      "a": {"vowel": "a", "length": "long"}}})"),
               ConfigError);
}

TEST(PhoneMap, LabelsCollidingAfterNfcAreDuplicates) {
  // "e" + combining grave vs precomposed "è"
  EXPECT_THROW(load_phone_map("{\"phones\": {"
                              "\"e\xCC\x80\": {\"vowel\": \"e\", \"length\": \"short\"},"
                              "\"\xC3\xA8\": {\"vowel\": \"e\", \"length\": \"long\"}}}"),
               ConfigError);
}

TEST(PhoneMap, NestedKeysOutsidePhonesAreIgnored) {
  const PhoneMap map = load_phone_map(R"({"meta": {"a": 1, "b": 2},
      "phones": {"a": {"vowel": "a", "length": "short"}},
      "other": {"a": {"x": 1}}})");
  EXPECT_EQ(map.size(), 1u);
}

TEST(PhoneMap, LongSchwaIsConfigError) {
  EXPECT_THROW(load_phone_map(R"({"phones": {"əə": {"vowel": "ə", "length": "long"}}})"), ConfigError);
}

TEST(PhoneMap, UnknownVowelOrLengthIsConfigError) {
  EXPECT_THROW(load_phone_map(R"({"phones": {"y": {"vowel": "y", "length": "short"}}})"), ConfigError);
  EXPECT_THROW(load_phone_map(R"({"phones": {"a": {"vowel": "a", "length": "half"}}})"), ConfigError);
  EXPECT_THROW(load_phone_map(R"({"phones": []})"), ConfigError);
  EXPECT_THROW(load_phone_map("not json"), ConfigError);
}

TEST(PhoneMap, NfcNormalizesLookupKeys) {
  EXPECT_EQ(nfc("e\xCC\x80"), "\xC3\xA8");
  EXPECT_EQ(nfc("abc"), "abc");
  PhoneMap map;
  map.add("e\xCC\x80", {Vowel::e, Length::short_});
  EXPECT_TRUE(map.lookup("\xC3\xA8"));
}

TEST(PhoneMap, DefaultJsonRoundTrips) {
  const PhoneMap a = default_phone_map();
  const PhoneMap b = load_phone_map(default_phone_map_json());
  EXPECT_EQ(a.entries(), b.entries());
}

TEST(PhoneMap, CanonicalLabel) {
  EXPECT_EQ(canonical_label({Vowel::a, Length::short_}), "a");
  EXPECT_EQ(canonical_label({Vowel::open_e, Length::long_}), "ɛɛ");
  for (Vowel v : kContrastVowels)
    for (Length l : {Length::short_, Length::long_})
      EXPECT_EQ(default_phone_map().lookup(canonical_label({v, l})), (Cell{v, l}));
}

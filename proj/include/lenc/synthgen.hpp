#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iterator>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lenc/errors.hpp"
#include "lenc/phone_map.hpp"

namespace lenc {

// Deterministic stream: mt19937_64 output is fixed by the standard; the
// transforms to uniform and normal variates are ours, so sequences do not
// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal, Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    // Rejection keeps it unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % bound;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 1));
}

// One Gamma(shape, 1) draw by Marsaglia-Tsang; shape < 1 uses the
// Gamma(shape + 1) * U^(1/shape) boost.
inline double draw_standard_gamma(Rng& rng, double shape) {
  if (shape < 1.0) {
    const double g = draw_standard_gamma(rng, shape + 1.0);
    return g * std::pow(rng.uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline std::vector<double> sample_gamma(double shape, double scale, std::size_t n,
                                        std::uint64_t seed) {
  if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale))
    throw DomainError("sample_gamma: shape and scale must be positive");
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(scale * draw_standard_gamma(rng, shape));
  return out;
}

enum class EmitFormat { textgrid, ctm };

struct CellSpec {
  Cell cell;
  double shape = 1.0;
  double scale = 1.0;  // ms
  std::size_t count = 0;
};

struct CorpusSpec {
  std::string corpus_id = "synthetic";
  std::uint64_t seed = 0;
  std::vector<CellSpec> cells;
  std::size_t utterance_size = 20;
  std::size_t speakers = 1;
  std::set<EmitFormat> emit_formats = {EmitFormat::textgrid, EmitFormat::ctm};
};

inline EmitFormat parse_emit_format(std::string_view s) {
  if (s == "textgrid") return EmitFormat::textgrid;
  if (s == "ctm") return EmitFormat::ctm;
  throw ConfigError("unknown emit format '" + std::string(s) + "' (expected textgrid or ctm)");
}

inline void validate(const CorpusSpec& spec) {
  if (spec.corpus_id.empty()) throw ConfigError("corpus_id must not be empty");
  if (spec.utterance_size == 0) throw ConfigError("utterance_size must be positive");
  if (spec.speakers == 0) throw ConfigError("speakers must be positive");
  for (const auto& c : spec.cells) {
    if (!(c.shape > 0.0) || !(c.scale > 0.0))
      throw ConfigError("cell /" + canonical_label(c.cell) + "/: shape and scale must be positive");
    if (c.cell.vowel == Vowel::schwa && c.cell.length == Length::long_)
      throw ConfigError("schwa has no long counterpart");
  }
}

// {"corpus_id", "seed", "utterance_size", "speakers", "emit_formats",
//  "cells": [{"vowel", "length", "shape", "scale", "count"}]}
inline CorpusSpec corpus_spec_from_json(const nlohmann::json& j) {
  CorpusSpec spec;
  try {
    if (!j.is_object()) throw ConfigError("corpus spec must be a JSON object");
    spec.corpus_id = j.value("corpus_id", spec.corpus_id);
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.utterance_size = j.value("utterance_size", spec.utterance_size);
    spec.speakers = j.value("speakers", spec.speakers);
    if (j.contains("emit_formats")) {
      spec.emit_formats.clear();
      for (const auto& f : j.at("emit_formats")) spec.emit_formats.insert(parse_emit_format(f.get<std::string>()));
    }
    for (const auto& c : j.at("cells")) {
      CellSpec cs;
      auto v = parse_vowel(c.at("vowel").get<std::string>());
      if (!v) throw ConfigError("unknown vowel class '" + c.at("vowel").get<std::string>() + "'");
      auto l = parse_length(c.at("length").get<std::string>());
      if (!l) throw ConfigError("length must be \"short\" or \"long\"");
      cs.cell = {*v, *l};
      cs.shape = c.at("shape").get<double>();
      cs.scale = c.at("scale").get<double>();
      const auto count = c.at("count").get<std::int64_t>();
      if (count < 0) throw ConfigError("cell count must be non-negative");
      cs.count = static_cast<std::size_t>(count);
      spec.cells.push_back(cs);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid corpus spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

inline CorpusSpec load_corpus_spec(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("corpus spec is not valid JSON: ") + e.what());
  }
  return corpus_spec_from_json(j);
}

struct GroundTruthToken {
  Cell cell;
  double drawn_ms = 0.0;    // raw sampler output
  double emitted_ms = 0.0;  // as written, 0.1 ms resolution
  std::string utterance_id;
  std::string speaker_id;
};

struct GeneratedCorpus {
  std::vector<GroundTruthToken> truth;
  std::string ctm;                                            // empty unless requested
  std::vector<std::pair<std::string, std::string>> textgrids;  // (utterance id, file text)
};

namespace detail {

// Time is tracked in integer units of 0.1 ms, so boundaries are exact decimals.
inline std::string format_units(std::int64_t units) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%lld.%04lld", static_cast<long long>(units / 10000),
                static_cast<long long>(units % 10000));
  return buf;
}

struct EmittedPhone {
  std::string label;  // "" is silence
  std::int64_t start = 0;
  std::int64_t dur = 0;
};

inline std::string render_textgrid(const std::vector<EmittedPhone>& phones, std::int64_t total) {
  std::string s;
  s += "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n";
  s += "xmin = 0 \nxmax = " + format_units(total) + " \ntiers? <exists> \nsize = 1 \nitem []: \n";
  s += "    item [1]:\n        class = \"IntervalTier\" \n        name = \"phones\" \n";
  s += "        xmin = 0 \n        xmax = " + format_units(total) + " \n";
  s += "        intervals: size = " + std::to_string(phones.size()) + " \n";
  for (std::size_t i = 0; i < phones.size(); ++i) {
    const auto& p = phones[i];
    s += "        intervals [" + std::to_string(i + 1) + "]:\n";
    s += "            xmin = " + format_units(p.start) + " \n";
    s += "            xmax = " + format_units(p.start + p.dur) + " \n";
    s += "            text = \"" + p.label + "\" \n";
  }
  return s;
}

inline constexpr std::string_view kFillerPhones[] = {"b", "d", "k", "l", "m", "n", "s", "t", "w", "y"};

}  // namespace detail

// Draws every cell, shuffles the tokens, and packs them into utterances with
// a consonant filler before each vowel and silence at both ends.
inline GeneratedCorpus generate_corpus(const CorpusSpec& spec) {
  validate(spec);
  GeneratedCorpus out;

  std::vector<GroundTruthToken> tokens;
  for (std::size_t c = 0; c < spec.cells.size(); ++c) {
    const auto& cs = spec.cells[c];
    for (double d : sample_gamma(cs.shape, cs.scale, cs.count, derive_seed(spec.seed, c))) {
      GroundTruthToken t;
      t.cell = cs.cell;
      t.drawn_ms = d;
      tokens.push_back(std::move(t));
    }
  }
  Rng shuffle_rng(derive_seed(spec.seed, 0xA11CE));
  for (std::size_t i = tokens.size(); i > 1; --i)
    std::swap(tokens[i - 1], tokens[shuffle_rng.below(i)]);

  Rng filler_rng(derive_seed(spec.seed, 0xF111E));
  const bool want_tg = spec.emit_formats.count(EmitFormat::textgrid) != 0;
  const bool want_ctm = spec.emit_formats.count(EmitFormat::ctm) != 0;
  constexpr std::int64_t kSilence = 1000;  // 0.1 s

  const std::size_t n_utts =
      tokens.empty() ? 1 : (tokens.size() + spec.utterance_size - 1) / spec.utterance_size;
  for (std::size_t u = 0; u < n_utts; ++u) {
    char idbuf[64];
    const std::size_t speaker = u % spec.speakers + 1;
    std::snprintf(idbuf, sizeof idbuf, "s%02zu_u%05zu", speaker, u + 1);
    const std::string utt = idbuf;
    const std::string spk = utt.substr(0, utt.find('_'));

    std::vector<detail::EmittedPhone> phones;
    std::int64_t t = 0;
    phones.push_back({"", t, kSilence});
    t += kSilence;
    auto add_filler = [&] {
      const auto label = detail::kFillerPhones[filler_rng.below(std::size(detail::kFillerPhones))];
      const auto dur = static_cast<std::int64_t>(400 + filler_rng.below(501));
      phones.push_back({std::string(label), t, dur});
      t += dur;
    };

    const std::size_t first = u * spec.utterance_size;
    const std::size_t last = std::min(tokens.size(), first + spec.utterance_size);
    if (tokens.empty())
      for (int k = 0; k < 5; ++k) add_filler();
    for (std::size_t i = first; i < last; ++i) {
      add_filler();
      auto& tok = tokens[i];
      const std::int64_t units = std::max<std::int64_t>(1, std::llround(tok.drawn_ms * 10.0));
      tok.emitted_ms = static_cast<double>(units) / 10.0;
      tok.utterance_id = utt;
      tok.speaker_id = spk;
      phones.push_back({canonical_label(tok.cell), t, units});
      t += units;
    }
    phones.push_back({"", t, kSilence});
    t += kSilence;

    if (want_tg) out.textgrids.emplace_back(utt, detail::render_textgrid(phones, t));
    if (want_ctm) {
      for (const auto& p : phones) {
        out.ctm += utt + " 1 " + detail::format_units(p.start) + " " + detail::format_units(p.dur) +
                   " " + (p.label.empty() ? std::string("sil") : p.label) + "\n";
      }
    }
  }
  out.truth = std::move(tokens);
  return out;
}

}  // namespace lenc

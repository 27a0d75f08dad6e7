#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lenc/alignment.hpp"
#include "lenc/duration_stats.hpp"
#include "lenc/hypothesis_tests.hpp"
#include "lenc/numerics.hpp"

namespace lenc {

// Contrast is called significant above this area.
inline constexpr double kSignificantArea = 0.40;
// Below this density (1/ms) a ratio denominator counts as "no data".
inline constexpr double kRatioDensityFloor = 1e-12;

// d_S(a) / d_L(a) at a = mode of d_S. Empty when d_L(a) is below the floor.
inline std::optional<double> compute_r1(const GammaFit& fit_short, const GammaFit& fit_long) {
  const double a = gamma_mode(fit_short);
  gamma_mode(fit_long);  // both fits need an interior mode
  const double den = gamma_pdf(fit_long, a);
  if (den < kRatioDensityFloor) return std::nullopt;
  return gamma_pdf(fit_short, a) / den;
}

// d_L(b) / d_S(b) at b = mode of d_L. Empty when d_S(b) is below the floor.
inline std::optional<double> compute_r2(const GammaFit& fit_short, const GammaFit& fit_long) {
  gamma_mode(fit_short);
  const double b = gamma_mode(fit_long);
  const double den = gamma_pdf(fit_short, b);
  if (den < kRatioDensityFloor) return std::nullopt;
  return gamma_pdf(fit_long, b) / den;
}

// Integral of max(0, d_L - d_S) over [0, U], U the larger support extent of
// the two fits. This is the area where the long density dominates; when the
// curves cross once it is the integral of d_L - d_S from the crossing on.
inline double compute_area(const GammaFit& fit_short, const GammaFit& fit_long,
                           double tol = 1e-7) {
  const double upper = std::max(gamma_upper_extent(fit_short), gamma_upper_extent(fit_long));
  const double k_min = std::min(fit_short.shape, fit_long.shape);
  double area;
  if (k_min >= 1.0) {
    auto excess = [&](double x) {
      return std::max(0.0, gamma_pdf(fit_long, x) - gamma_pdf(fit_short, x));
    };
    area = adaptive_simpson(excess, 0.0, upper, tol);
  } else {
    // x = U t^p makes x^(k-1) dx bounded near 0 when p k >= 1.
    const double p = std::ceil(1.0 / k_min);
    auto excess = [&](double t) {
      if (t <= 0.0) return 0.0;
      const double x = upper * std::pow(t, p);
      if (x <= 0.0) return 0.0;
      const double jac = upper * p * std::pow(t, p - 1.0);
      const double diff = gamma_pdf(fit_long, x) - gamma_pdf(fit_short, x);
      return std::max(0.0, diff) * jac;
    };
    area = adaptive_simpson(excess, 0.0, 1.0, tol);
  }
  return std::clamp(area, 0.0, std::nextafter(1.0, 0.0));
}

// mode(d_L) - mode(d_S) in ms; may be negative.
inline double compute_delta(const GammaFit& fit_short, const GammaFit& fit_long) {
  return gamma_mode(fit_long) - gamma_mode(fit_short);
}

enum class ReportFlag { low_n_short, low_n_long, r1_undefined, r2_undefined, no_interior_mode, negative_delta };

inline constexpr std::array<ReportFlag, 6> kAllReportFlags = {
    ReportFlag::low_n_short,  ReportFlag::low_n_long,       ReportFlag::r1_undefined,
    ReportFlag::r2_undefined, ReportFlag::no_interior_mode, ReportFlag::negative_delta};

inline std::string_view flag_name(ReportFlag f) {
  switch (f) {
    case ReportFlag::low_n_short: return "low_n_short";
    case ReportFlag::low_n_long: return "low_n_long";
    case ReportFlag::r1_undefined: return "r1_undefined";
    case ReportFlag::r2_undefined: return "r2_undefined";
    case ReportFlag::no_interior_mode: return "no_interior_mode";
    case ReportFlag::negative_delta: return "negative_delta";
  }
  return "unknown";
}

inline std::optional<ReportFlag> parse_flag(std::string_view name) {
  for (ReportFlag f : kAllReportFlags)
    if (flag_name(f) == name) return f;
  return std::nullopt;
}

// One vowel's row of a feature table.
struct ContrastReport {
  Vowel vowel = Vowel::a;
  std::string corpus_id;
  std::size_t n_short = 0;
  std::size_t n_long = 0;
  std::optional<double> mean_short_ms;
  std::optional<double> mean_long_ms;
  std::optional<GammaFit> fit_short;
  std::optional<GammaFit> fit_long;
  std::optional<double> r1;
  std::optional<double> r2;
  std::optional<double> area;
  std::optional<double> delta_ms;
  bool significant = false;
  std::set<ReportFlag> flags;
  std::optional<double> dip;  // pooled short + long durations, diagnostic only
  std::optional<std::string> error;

  bool has(ReportFlag f) const { return flags.count(f) != 0; }
};

struct ContrastOptions {
  bool outlier_filtering = true;
  bool with_dip = true;
};

// Filters both cells, fits both, and derives r1, r2, area, delta and flags.
// A degenerate cell yields a report carrying `error` instead of features.
inline ContrastReport contrast_report(const DurationSampleSet& set_short,
                                      const DurationSampleSet& set_long,
                                      const ContrastOptions& opts = {}) {
  if (set_short.vowel() != set_long.vowel() || set_short.corpus_id() != set_long.corpus_id())
    throw DomainError("contrast_report: sets differ in vowel or corpus");

  const DurationSampleSet s = opts.outlier_filtering ? filter_outliers(set_short) : set_short;
  const DurationSampleSet l = opts.outlier_filtering ? filter_outliers(set_long) : set_long;

  ContrastReport rep;
  rep.vowel = s.vowel();
  rep.corpus_id = s.corpus_id();
  rep.n_short = s.n();
  rep.n_long = l.n();
  rep.mean_short_ms = s.mean_ms();
  rep.mean_long_ms = l.mean_ms();

  if (opts.with_dip && s.n() + l.n() >= 4) {
    std::vector<double> pooled(s.samples());
    pooled.insert(pooled.end(), l.samples().begin(), l.samples().end());
    rep.dip = dip_statistic(pooled);
  }

  try {
    rep.fit_short = fit_gamma(s);
  } catch (const DegenerateDataError& e) {
    rep.error = std::string("short: ") + e.what();
  }
  try {
    rep.fit_long = fit_gamma(l);
  } catch (const DegenerateDataError& e) {
    rep.error = rep.error ? *rep.error + "; long: " + e.what() : std::string("long: ") + e.what();
  }
  if (rep.fit_short && rep.fit_short->low_n) rep.flags.insert(ReportFlag::low_n_short);
  if (rep.fit_long && rep.fit_long->low_n) rep.flags.insert(ReportFlag::low_n_long);
  if (rep.error) return rep;

  const GammaFit& fs = *rep.fit_short;
  const GammaFit& fl = *rep.fit_long;
  if (fs.shape < 1.0 || fl.shape < 1.0) {
    rep.flags.insert(ReportFlag::no_interior_mode);
  } else {
    rep.r1 = compute_r1(fs, fl);
    rep.r2 = compute_r2(fs, fl);
    if (!rep.r1) rep.flags.insert(ReportFlag::r1_undefined);
    if (!rep.r2) rep.flags.insert(ReportFlag::r2_undefined);
    rep.delta_ms = compute_delta(fs, fl);
    if (*rep.delta_ms < 0.0) rep.flags.insert(ReportFlag::negative_delta);
  }
  rep.area = compute_area(fs, fl);
  rep.significant = *rep.area > kSignificantArea;
  return rep;
}

using CellSets = std::map<Cell, DurationSampleSet>;

// Partitions tokens of one corpus into (vowel, length) cells.
inline CellSets partition_tokens(std::span<const VowelToken> tokens, std::string_view corpus_id) {
  std::map<Cell, std::vector<double>> raw;
  for (const auto& t : tokens)
    if (t.corpus_id == corpus_id) raw[Cell{t.vowel, t.length}].push_back(t.duration_ms);
  CellSets out;
  for (auto& [cell, xs] : raw)
    out.emplace(cell, DurationSampleSet(cell.vowel, cell.length, std::string(corpus_id), std::move(xs)));
  return out;
}

struct CorpusComparison {
  Vowel vowel = Vowel::a;
  std::optional<Length> length;  // empty: short and long pooled
  std::string corpus_a;
  std::string corpus_b;
  TestResult result;
};

// KS comparison of one vowel cell across two corpora. With filtering on, the
// outlier rule runs per (vowel, length, corpus) cell before pooling.
inline CorpusComparison compare_corpora(Vowel vowel, std::span<const VowelToken> tokens_a,
                                        std::string_view corpus_a,
                                        std::span<const VowelToken> tokens_b,
                                        std::string_view corpus_b, std::optional<Length> length,
                                        bool outlier_filtering = true) {
  auto durations = [&](std::span<const VowelToken> toks, std::string_view corpus) {
    std::vector<double> out;
    for (Length l : {Length::short_, Length::long_}) {
      if (length && *length != l) continue;
      std::vector<double> xs;
      for (const auto& t : toks)
        if (t.corpus_id == corpus && t.vowel == vowel && t.length == l) xs.push_back(t.duration_ms);
      DurationSampleSet set(vowel, l, std::string(corpus), std::move(xs));
      if (outlier_filtering) set = filter_outliers(set);
      out.insert(out.end(), set.samples().begin(), set.samples().end());
    }
    if (out.empty())
      throw DomainError("no tokens for /" + std::string(vowel_symbol(vowel)) + "/ " +
                        (length ? std::string(length_name(*length)) : std::string("pooled")) +
                        " in corpus '" + std::string(corpus) + "'");
    return out;
  };
  const auto xa = durations(tokens_a, corpus_a);
  const auto xb = durations(tokens_b, corpus_b);
  return CorpusComparison{vowel, length, std::string(corpus_a), std::string(corpus_b),
                          ks_two_sample(xa, xb)};
}

}  // namespace lenc

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lenc/errors.hpp"
#include "lenc/numerics.hpp"
#include "lenc/phone_map.hpp"

namespace lenc {

struct Summary {
  std::size_t n = 0;
  std::optional<double> mean_ms;  // empty when n == 0
  std::optional<double> sd_ms;    // n - 1 denominator; empty when n < 2
};

inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(s.n);
  s.mean_ms = mean;
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  s.sd_ms = std::sqrt(ss / static_cast<double>(s.n - 1));
  return s;
}

// Durations of one (vowel, length, corpus) cell. Summary statistics are kept
// in step with the samples: the only way to change samples is through the
// constructor or set_samples().
class DurationSampleSet {
 public:
  DurationSampleSet() = default;
  DurationSampleSet(Vowel vowel, Length length, std::string corpus_id, std::vector<double> samples)
      : vowel_(vowel), length_(length), corpus_id_(std::move(corpus_id)) {
    set_samples(std::move(samples));
  }

  void set_samples(std::vector<double> samples) {
    for (double x : samples)
      if (!(x > 0.0) || !std::isfinite(x))
        throw DomainError("duration samples must be positive and finite");
    samples_ = std::move(samples);
    summary_ = summarize(samples_);
  }

  Vowel vowel() const noexcept { return vowel_; }
  Length length() const noexcept { return length_; }
  const std::string& corpus_id() const noexcept { return corpus_id_; }
  const std::vector<double>& samples() const noexcept { return samples_; }
  std::size_t n() const noexcept { return samples_.size(); }
  const Summary& summary() const noexcept { return summary_; }
  std::optional<double> mean_ms() const noexcept { return summary_.mean_ms; }
  std::optional<double> sd_ms() const noexcept { return summary_.sd_ms; }

  DurationSampleSet with_samples(std::vector<double> samples) const {
    return DurationSampleSet(vowel_, length_, corpus_id_, std::move(samples));
  }

 private:
  Vowel vowel_ = Vowel::a;
  Length length_ = Length::short_;
  std::string corpus_id_;
  std::vector<double> samples_;
  Summary summary_;
};

inline Summary summary(const DurationSampleSet& set) { return set.summary(); }

// Keeps samples strictly inside (mean - 3 sd, mean + 3 sd) of the input.
// One pass only. Sets with n < 2 or sd == 0 come back unchanged.
inline DurationSampleSet filter_outliers(const DurationSampleSet& set) {
  const auto& s = set.summary();
  if (s.n < 2 || !s.sd_ms || *s.sd_ms == 0.0) return set;
  const double lo = *s.mean_ms - 3.0 * *s.sd_ms;
  const double hi = *s.mean_ms + 3.0 * *s.sd_ms;
  std::vector<double> kept;
  kept.reserve(set.n());
  for (double x : set.samples())
    if (lo < x && x < hi) kept.push_back(x);
  return set.with_samples(std::move(kept));
}

inline constexpr std::size_t kLowSampleCount = 20;

struct GammaFit {
  double shape = 1.0;  // k
  double scale = 1.0;  // theta, ms
  std::size_t n_used = 0;
  double log_likelihood = 0.0;
  bool converged = true;
  bool low_n = false;
  int iterations = 0;
  // Method-of-moments starting point and its likelihood.
  double moment_shape = 1.0;
  double moment_scale = 1.0;
  double moment_log_likelihood = 0.0;

  static GammaFit from_parameters(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
      throw DomainError("gamma shape and scale must be positive");
    GammaFit f;
    f.shape = f.moment_shape = shape;
    f.scale = f.moment_scale = scale;
    return f;
  }

  double mean() const { return shape * scale; }
  double sd() const { return std::sqrt(shape) * scale; }
};

// log L(k, theta) = (k-1) sum ln x - sum x / theta - n lnGamma(k) - n k ln theta
inline double gamma_log_likelihood(double shape, double scale, double n, double sum_x,
                                   double sum_log_x) {
  return (shape - 1.0) * sum_log_x - sum_x / scale - n * std::lgamma(shape) -
         n * shape * std::log(scale);
}

inline double gamma_log_likelihood(double shape, double scale, std::span<const double> xs) {
  double sx = 0.0, slx = 0.0;
  for (double x : xs) {
    sx += x;
    slx += std::log(x);
  }
  return gamma_log_likelihood(shape, scale, static_cast<double>(xs.size()), sx, slx);
}

// Moment estimates k0 = (mean/sd)^2, theta0 = sd^2/mean, sd with n - 1.
inline std::pair<double, double> gamma_moment_estimates(std::span<const double> xs) {
  const Summary s = summarize(xs);
  if (s.n < 2 || !s.sd_ms || *s.sd_ms == 0.0)
    throw DegenerateDataError("gamma fit needs at least two distinct samples");
  const double m = *s.mean_ms, sd = *s.sd_ms;
  return {(m / sd) * (m / sd), sd * sd / m};
}

// Maximum-likelihood gamma fit. Newton on ln k for the profile equation
// ln k - psi(k) = ln(mean) - mean(ln x), with theta = mean / k.
inline GammaFit fit_gamma(std::span<const double> xs) {
  for (double x : xs)
    if (!(x > 0.0)) throw DomainError("gamma fit requires positive samples");
  const auto [k0, theta0] = gamma_moment_estimates(xs);

  const double n = static_cast<double>(xs.size());
  double sx = 0.0, slx = 0.0;
  for (double x : xs) {
    sx += x;
    slx += std::log(x);
  }
  const double mean = sx / n;
  const double target = std::log(mean) - slx / n;  // > 0 unless all samples equal

  GammaFit fit;
  fit.n_used = xs.size();
  fit.low_n = xs.size() < kLowSampleCount;
  fit.moment_shape = k0;
  fit.moment_scale = theta0;
  fit.moment_log_likelihood = gamma_log_likelihood(k0, theta0, n, sx, slx);

  double log_k = std::log(k0);
  fit.converged = false;
  if (target > 0.0) {
    for (int it = 1; it <= 100; ++it) {
      const double k = std::exp(log_k);
      const double g = std::log(k) - digamma(k) - target;
      const double dg = 1.0 - k * trigamma(k);  // d g / d ln k, always < 0
      double step = -g / dg;
      step = std::clamp(step, -2.0, 2.0);
      log_k += step;
      fit.iterations = it;
      if (std::abs(step) < 1e-10) {
        fit.converged = true;
        break;
      }
    }
  }
  fit.shape = std::exp(log_k);
  fit.scale = mean / fit.shape;
  fit.log_likelihood = gamma_log_likelihood(fit.shape, fit.scale, n, sx, slx);
  return fit;
}

inline GammaFit fit_gamma(const DurationSampleSet& set) {
  if (set.n() < 2) throw DegenerateDataError("gamma fit needs at least two samples");
  return fit_gamma(std::span<const double>(set.samples()));
}

// Density in 1/ms at x ms.
inline double gamma_pdf(const GammaFit& fit, double x) {
  if (x < 0.0 || std::isnan(x)) throw DomainError("gamma_pdf: x must be non-negative");
  const double k = fit.shape, theta = fit.scale;
  if (x == 0.0) {
    if (k < 1.0) return INFINITY;
    return k == 1.0 ? 1.0 / theta : 0.0;
  }
  if (std::isinf(x)) return 0.0;
  return std::exp((k - 1.0) * std::log(x) - x / theta - std::lgamma(k) - k * std::log(theta));
}

// (k - 1) theta; throws NoInteriorModeError for k < 1.
inline double gamma_mode(const GammaFit& fit) {
  if (fit.shape < 1.0)
    throw NoInteriorModeError("gamma shape < 1 has no interior mode (density unbounded at 0)");
  return (fit.shape - 1.0) * fit.scale;
}

// Right end of the support region used for quadrature and plotting.
inline double gamma_upper_extent(const GammaFit& fit) {
  return std::max(0.0, (fit.shape - 1.0) * fit.scale) + 40.0 * std::sqrt(fit.shape) * fit.scale;
}

struct Histogram {
  double bin_width_ms = 10.0;
  std::vector<double> bin_edges;  // size bins + 1, starting at 0
  std::vector<std::size_t> counts;
  std::vector<double> densities;  // 1/ms

  std::size_t bins() const noexcept { return counts.size(); }
  // Density of the bin containing x; 0 outside the covered range.
  double density_at(double x) const {
    if (counts.empty() || x < 0.0) return 0.0;
    const auto b = static_cast<std::size_t>(std::floor(x / bin_width_ms));
    return b < densities.size() ? densities[b] : 0.0;
  }
};

// Bins [0, w), [w, 2w), ... up to the one holding max(samples).
inline Histogram build_histogram(std::span<const double> xs, double bin_width_ms) {
  if (!(bin_width_ms > 0.0)) throw DomainError("histogram bin width must be positive");
  Histogram h;
  h.bin_width_ms = bin_width_ms;
  if (xs.empty()) return h;
  const double hi = *std::max_element(xs.begin(), xs.end());
  const auto nbins = static_cast<std::size_t>(std::floor(hi / bin_width_ms)) + 1;
  h.counts.assign(nbins, 0);
  for (double x : xs) {
    if (x < 0.0) throw DomainError("histogram samples must be non-negative");
    const auto b = std::min(static_cast<std::size_t>(std::floor(x / bin_width_ms)), nbins - 1);
    ++h.counts[b];
  }
  h.bin_edges.resize(nbins + 1);
  for (std::size_t i = 0; i <= nbins; ++i) h.bin_edges[i] = static_cast<double>(i) * bin_width_ms;
  const double norm = static_cast<double>(xs.size()) * bin_width_ms;
  h.densities.resize(nbins);
  for (std::size_t i = 0; i < nbins; ++i) h.densities[i] = static_cast<double>(h.counts[i]) / norm;
  return h;
}

inline Histogram build_histogram(const DurationSampleSet& set, double bin_width_ms) {
  return build_histogram(std::span<const double>(set.samples()), bin_width_ms);
}

}  // namespace lenc

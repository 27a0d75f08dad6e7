#pragma once
// Reference computations used only by tests. Each one is a direct, slow
// evaluation of a definition, written without reusing library code paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

// Normalized gamma density from the closed form, via tgamma.
inline double gamma_pdf(double k, double theta, double x) {
  if (x <= 0.0) return 0.0;
  return std::pow(x, k - 1.0) * std::exp(-x / theta) / (std::tgamma(k) * std::pow(theta, k));
}

// Composite trapezoid rule with fixed step h on [a, b].
inline double trapezoid(const std::function<double(double)>& f, double a, double b, double h) {
  const auto n = static_cast<std::size_t>(std::ceil((b - a) / h));
  const double step = (b - a) / static_cast<double>(n);
  double s = 0.5 * (f(a) + f(b));
  for (std::size_t i = 1; i < n; ++i) s += f(a + step * static_cast<double>(i));
  return s * step;
}

// Composite Simpson with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n) {
  if (n % 2) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) s += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Area where the long density exceeds the short one, by trapezoid at 0.01 ms.
inline double area_trapezoid(double ks, double ts, double kl, double tl, double upper) {
  auto f = [&](double x) { return std::max(0.0, gamma_pdf(kl, tl, x) - gamma_pdf(ks, ts, x)); };
  return trapezoid(f, 0.0, upper, 0.01);
}

// Two-sample KS statistic by evaluating both ECDFs at every pooled point.
inline double ks_brute(const std::vector<double>& x, const std::vector<double>& y) {
  auto ecdf = [](const std::vector<double>& s, double t) {
    std::size_t c = 0;
    for (double v : s) c += v <= t;
    return static_cast<double>(c) / static_cast<double>(s.size());
  };
  double d = 0.0;
  for (const auto* s : {&x, &y})
    for (double t : *s) d = std::max(d, std::abs(ecdf(x, t) - ecdf(y, t)));
  return d;
}

// Kolmogorov survival function through the dual theta series:
// P(K <= l) = sqrt(2 pi)/l * sum_{j>=1} exp(-(2j-1)^2 pi^2 / (8 l^2)).
inline double kolmogorov_q_dual(double lambda) {
  if (lambda <= 0.0) return 1.0;
  const double pi = std::numbers::pi;
  double s = 0.0;
  for (int j = 1; j < 200; ++j) {
    const double m = 2.0 * j - 1.0;
    const double term = std::exp(-m * m * pi * pi / (8.0 * lambda * lambda));
    s += term;
    if (term < 1e-300) break;
  }
  return 1.0 - std::sqrt(2.0 * pi) / lambda * s;
}

// Regularized lower incomplete gamma P(a, x) (series / continued fraction).
inline double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double lead = std::exp(a * std::log(x) - x - std::lgamma(a));
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < 100000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * lead;
  }
  // Lentz continued fraction for Q(a, x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return 1.0 - lead * h;
}

// ---------------------------------------------------------------------------
// Dip of a sample of distinct values, straight from the definition: the
// smallest delta such that some unimodal CDF G (convex up to a mode, concave
// after it, continuous) stays within delta of the empirical CDF. In count
// units G(x_i) must lie in [i - delta, i - 1 + delta]. The mode may be taken
// at a sample point because the kink there is unconstrained.
//
// For a fixed mode index m the feasible values of G(x_m) from the left
// (convex, nondecreasing) form [vlo, b_m] and from the right (concave,
// nondecreasing) form [a_m, vhi]; both ends are found by bisection, and each
// test builds the greatest convex minorant (or least concave majorant) of the
// upper (lower) bounds and checks it against the other side.

namespace detail {

struct Pt {
  double x, y;
};

// Greatest convex minorant of points sorted by x, evaluated at those x.
inline std::vector<double> gcm(const std::vector<Pt>& p) {
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (hull.size() >= 2) {
      const Pt& a = p[hull[hull.size() - 2]];
      const Pt& b = p[hull.back()];
      // drop b if it lies on or above the chord a -> p[i]
      if ((b.y - a.y) * (p[i].x - a.x) >= (p[i].y - a.y) * (b.x - a.x))
        hull.pop_back();
      else
        break;
    }
    hull.push_back(i);
  }
  std::vector<double> out(p.size());
  std::size_t h = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (h + 1 < hull.size() && hull[h + 1] <= i) ++h;
    if (hull[h] == i) {
      out[i] = p[i].y;
    } else {
      const Pt& a = p[hull[h]];
      const Pt& b = p[hull[h + 1]];
      out[i] = a.y + (b.y - a.y) * (p[i].x - a.x) / (b.x - a.x);
    }
  }
  return out;
}

constexpr double kEps = 1e-12;

// Convex nondecreasing G on x[0..m] with lo <= G <= hi and G(x[m]) = v?
inline bool convex_ok(const std::vector<double>& x, const std::vector<double>& lo,
                      const std::vector<double>& hi, std::size_t m, double v) {
  std::vector<Pt> p(m + 1);
  double run_min = v;
  p[m] = {x[m], v};
  for (std::size_t i = m; i-- > 0;) {
    run_min = std::min(run_min, hi[i]);  // nondecreasing: G(x_i) <= every later bound
    p[i] = {x[i], run_min};
  }
  const auto g = gcm(p);
  for (std::size_t i = 0; i <= m; ++i)
    if (g[i] < lo[i] - kEps) return false;
  return true;
}

// Concave nondecreasing G on x[m..n-1] with lo <= G <= hi and G(x[m]) = v?
// Mirrored into a convex problem by x -> -x, y -> -y.
inline bool concave_ok(const std::vector<double>& x, const std::vector<double>& lo,
                       const std::vector<double>& hi, std::size_t m, double v) {
  const std::size_t n = x.size();
  std::vector<double> mx, mlo, mhi;
  for (std::size_t i = n; i-- > m;) {
    mx.push_back(-x[i]);
    mlo.push_back(-hi[i]);
    mhi.push_back(-lo[i]);
  }
  return convex_ok(mx, mlo, mhi, mx.size() - 1, -v);
}

inline bool feasible(const std::vector<double>& x, double delta) {
  const std::size_t n = x.size();
  std::vector<double> lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = std::max(0.0, static_cast<double>(i + 1) - delta);
    hi[i] = std::min(static_cast<double>(n), static_cast<double>(i) + delta);
    if (lo[i] > hi[i] + kEps) return false;
  }
  for (std::size_t m = 0; m < n; ++m) {
    const double a = lo[m], b = hi[m];
    if (!convex_ok(x, lo, hi, m, b) || !concave_ok(x, lo, hi, m, a)) continue;
    // smallest left-feasible value
    double l = a, r = b;
    if (!convex_ok(x, lo, hi, m, a)) {
      for (int it = 0; it < 200 && r - l > 1e-14; ++it) {
        const double mid = 0.5 * (l + r);
        (convex_ok(x, lo, hi, m, mid) ? r : l) = mid;
      }
    } else {
      r = a;
    }
    const double vlo = r;
    // largest right-feasible value
    l = a;
    r = b;
    if (!concave_ok(x, lo, hi, m, b)) {
      for (int it = 0; it < 200 && r - l > 1e-14; ++it) {
        const double mid = 0.5 * (l + r);
        (concave_ok(x, lo, hi, m, mid) ? l : r) = mid;
      }
    } else {
      l = b;
    }
    const double vhi = l;
    if (vlo <= vhi + 1e-11) return true;
  }
  return false;
}

}  // namespace detail

// Dip in probability units for distinct values.
inline double dip_definition(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double lo = 0.5, hi = n;
  if (detail::feasible(x, lo)) return lo / n;
  for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (detail::feasible(x, mid) ? hi : lo) = mid;
  }
  return hi / n;
}

}  // namespace oracle

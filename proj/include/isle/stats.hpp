#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isle/error.hpp"

namespace isle::stats {

inline double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
inline double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// ---------------------------------------------------------------------------
// AUROC

/// Mann-Whitney AUROC: P(score_pos > score_neg) + 0.5 P(tie), via midranks.
inline double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) fail(ErrorKind::validation, "auroc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        positive_rank_sum += midrank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    fail(ErrorKind::degenerate, "auroc undefined: labels contain a single class");
  }
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

struct AurocResult {
  std::vector<double> per_label;
  double mean = 0.0;
  double std = 0.0;
};

inline AurocResult summarize_auroc(std::vector<double> per_label) {
  AurocResult r;
  r.mean = stats::mean(per_label);
  r.std = sample_sd(per_label);
  r.per_label = std::move(per_label);
  return r;
}

// ---------------------------------------------------------------------------
// Student t distribution

/// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) return h;
  }
  return h;
}

/// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

inline double student_t_cdf(double t, double dof) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * regularized_incomplete_beta(dof / 2.0, 0.5, x);
  return t < 0 ? tail : 1.0 - tail;
}

struct TTestResult {
  double t_statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Paired t-test with the one-sided alternative mean(candidate) < mean(reference).
/// Small p means the candidate is significantly worse.
inline TTestResult paired_t_test_one_tailed(std::span<const double> candidate, std::span<const double> reference) {
  if (candidate.size() != reference.size()) fail(ErrorKind::validation, "paired t-test: samples differ in length");
  if (candidate.size() < 2) fail(ErrorKind::validation, "paired t-test: needs at least two pairs");
  std::vector<double> diff(candidate.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = candidate[i] - reference[i];
  const auto [lo, hi] = std::minmax_element(diff.begin(), diff.end());
  if (*lo == *hi) fail(ErrorKind::degenerate, "paired t-test: differences have zero variance");
  const double n = static_cast<double>(diff.size());
  TTestResult r;
  r.dof = static_cast<int>(diff.size()) - 1;
  r.t_statistic = mean(diff) / (sample_sd(diff) / std::sqrt(n));
  r.p_value = std::clamp(student_t_cdf(r.t_statistic, r.dof), 0.0, 1.0);
  return r;
}

// ---------------------------------------------------------------------------
// Normal distribution helpers

inline double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

/// Inverse standard normal CDF (Wichura's PPND16, relative accuracy ~1e-16).
inline double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0) fail(ErrorKind::validation, "normal_quantile: p outside (0, 1)");
  static constexpr double a[8] = {3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
                                  1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
                                  3.3430575583588128105e4, 2.5090809287301226727e3};
  static constexpr double b[8] = {1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
                                  2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
                                  5.2264952788528545610e3};
  static constexpr double c[8] = {1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
                                  3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
                                  2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[8] = {1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
                                  1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                  1.05075007164441684324e-9};
  static constexpr double e[8] = {6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
                                  2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                  2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[8] = {1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
                                  7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                  2.04426310338993978564e-15};
  auto horner = [](const double* coef, double x) {
    double acc = 0.0;
    for (int i = 7; i >= 0; --i) acc = acc * x + coef[i];
    return acc;
  };
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * horner(a, r) / horner(b, r);
  }
  double r = std::sqrt(-std::log(q < 0 ? p : 1.0 - p));
  double z;
  if (r <= 5.0) {
    r -= 1.6;
    z = horner(c, r) / horner(d, r);
  } else {
    r -= 5.0;
    z = horner(e, r) / horner(f, r);
  }
  return q < 0 ? -z : z;
}

// ---------------------------------------------------------------------------
// Shapiro-Wilk W test, Royston's AS R94 for complete samples, 3 <= n <= 5000.

struct ShapiroWilkResult {
  double w = 1.0;
  double p_value = 1.0;
};

namespace detail {

/// c[0] + c[1] x + ... + c[k-1] x^(k-1)
template <std::size_t K>
double poly(const double (&c)[K], double x) {
  double acc = 0.0;
  for (std::size_t i = K; i-- > 0;) acc = acc * x + c[i];
  return acc;
}

}  // namespace detail

/// AS R94 coefficients a_1..a_{n/2} (the lower half is their negation).
inline std::vector<double> shapiro_wilk_coefficients(std::size_t n) {
  static constexpr double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
  static constexpr double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  const std::size_t half = n / 2;
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
    return a;
  }
  const double an = static_cast<double>(n);
  std::vector<double> m(half);
  double summ2 = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
    summ2 += m[i] * m[i];
  }
  summ2 *= 2.0;
  const double ssumm2 = std::sqrt(summ2);
  const double rsn = 1.0 / std::sqrt(an);
  const double a1 = detail::poly(c1, rsn) - m[0] / ssumm2;
  std::size_t first_scaled;
  double fac;
  if (n > 5) {
    const double a2 = -m[1] / ssumm2 + detail::poly(c2, rsn);
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
    a[0] = a1;
    a[1] = a2;
    first_scaled = 2;
  } else {
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    a[0] = a1;
    first_scaled = 1;
  }
  for (std::size_t i = first_scaled; i < half; ++i) a[i] = -m[i] / fac;
  return a;
}

inline ShapiroWilkResult shapiro_wilk(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 3 || n > 5000) fail(ErrorKind::validation, "shapiro_wilk: sample size must be in [3, 5000]");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  if (!(range > 1e-19 * std::max(1.0, std::fabs(x.front())))) {
    fail(ErrorKind::degenerate, "shapiro_wilk: sample has zero range");
  }

  const auto a = shapiro_wilk_coefficients(n);
  std::vector<double> coef(n, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    coef[i] = -a[i];
    coef[n - 1 - i] = a[i];
  }

  // W as the squared correlation of coefficients and range-scaled data;
  // 1 - W is formed directly to keep precision when W is close to 1.
  double sx = 0.0;
  for (auto& v : x) {
    v /= range;
    sx += v;
  }
  sx /= static_cast<double>(n);
  const double sa = mean(coef);
  double ssa = 0.0, ssx = 0.0, sax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double asa = coef[i] - sa;
    const double xsx = x[i] - sx;
    ssa += asa * asa;
    ssx += xsx * xsx;
    sax += asa * xsx;
  }
  const double ssassx = std::sqrt(ssa * ssx);
  const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);

  ShapiroWilkResult r;
  r.w = 1.0 - w1;
  if (n == 3) {
    constexpr double pi6 = 6.0 / std::numbers::pi;
    constexpr double stqr = std::numbers::pi / 3.0;
    r.p_value = std::clamp(pi6 * (std::asin(std::sqrt(r.w)) - stqr), 0.0, 1.0);
    return r;
  }

  static constexpr double c3[4] = {0.5440, -0.39978, 0.025054, -6.714e-4};
  static constexpr double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
  static constexpr double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static constexpr double c6[3] = {-0.4803, -0.082676, 0.0030302};
  static constexpr double g[2] = {-2.273, 0.459};
  const double an = static_cast<double>(n);
  double y = std::log(w1);
  double m, s;
  if (n <= 11) {
    const double gamma = detail::poly(g, an);
    if (y >= gamma) {
      r.p_value = 1e-99;
      return r;
    }
    y = -std::log(gamma - y);
    m = detail::poly(c3, an);
    s = std::exp(detail::poly(c4, an));
  } else {
    const double log_n = std::log(an);
    m = detail::poly(c5, log_n);
    s = std::exp(detail::poly(c6, log_n));
  }
  r.p_value = normal_upper_tail((y - m) / s);
  return r;
}

}  // namespace isle::stats

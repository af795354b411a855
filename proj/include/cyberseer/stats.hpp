// Statistical tests: independent two-sample t-test, Pearson correlation,
// chi-square independence, and the special functions backing their p-values.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cyberseer/common.hpp"

namespace cyberseer::stats {

struct TestResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

// ---------------------------------------------------------------------------
// Special functions.

namespace detail {

// Continued fraction for the incomplete beta (modified Lentz).
inline double betacf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-15;
  constexpr int kMaxIter = 500;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  fail(ErrorKind::numerical_failure, "incomplete beta continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) fail(ErrorKind::invalid_input, "ibeta: a, b must be > 0");
  if (x < 0.0 || x > 1.0) fail(ErrorKind::invalid_input, "ibeta: x must be in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                    b * std::log1p(-x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::betacf(a, b, x) / a;
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

// Regularized upper incomplete gamma Q(s, x) = Γ(s, x) / Γ(s).
inline double regularized_upper_gamma(double s, double x) {
  if (s <= 0.0) fail(ErrorKind::invalid_input, "qgamma: s must be > 0");
  if (x < 0.0) fail(ErrorKind::invalid_input, "qgamma: x must be >= 0");
  if (x == 0.0) return 1.0;
  if (x < s + 1.0) {
    // Series for the lower function P, then Q = 1 - P.
    double ap = s;
    double sum = 1.0 / s;
    double del = sum;
    for (int i = 0; i < 1000; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-16)
        return 1.0 - sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
    }
    fail(ErrorKind::numerical_failure, "qgamma series did not converge");
  }
  // Continued fraction for Q directly (modified Lentz).
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
}

// Two-tailed p-value of a t statistic at df degrees of freedom. Kept out of
// line so every caller shares one compiled instance; the p of t and -t is
// then bitwise identical whatever contraction the optimizer picks.
[[gnu::noinline]] inline double t_two_tailed_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

// ---------------------------------------------------------------------------
// Tests.

namespace detail {

inline void check_sample(const std::vector<double>& v, size_t min_n, const char* name) {
  if (v.size() < min_n)
    fail(ErrorKind::invalid_input,
         std::string(name) + ": need at least " + std::to_string(min_n) + " values");
  if (!all_finite(v)) fail(ErrorKind::invalid_input, std::string(name) + ": non-finite values");
}

inline double sample_variance(const std::vector<double>& v) {
  double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace detail

namespace detail {

inline bool sample_less(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) return x.size() < y.size();
  for (size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i]) return x[i] < y[i];
  return false;
}

// Single out-of-line instance; see t_test_independent.
[[gnu::noinline]] inline TestResult t_test_core(const std::vector<double>& a,
                                                const std::vector<double>& b) {
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double va = sample_variance(a), vb = sample_variance(b);
  double df = na + nb - 2.0;
  double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
  if (pooled == 0.0) fail(ErrorKind::zero_variance, "t_test: both samples are constant");
  double t = (mean_of(a) - mean_of(b)) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  return TestResult{t, df, t_two_tailed_p(t, df)};
}

}  // namespace detail

// Pooled-variance Student t-test, df = n_a + n_b - 2, two-tailed p. The
// arguments are put into a canonical order before computing and the sign is
// flipped afterwards, so t(a,b) == -t(b,a) holds bitwise.
inline TestResult t_test_independent(const std::vector<double>& a, const std::vector<double>& b) {
  detail::check_sample(a, 2, "t_test sample a");
  detail::check_sample(b, 2, "t_test sample b");
  if (detail::sample_less(b, a)) {
    TestResult r = detail::t_test_core(b, a);
    r.statistic = -r.statistic;
    return r;
  }
  return detail::t_test_core(a, b);
}

// Pearson r with two-tailed p from the t transform at df = n - 2.
inline TestResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
  detail::check_sample(x, 3, "pearson x");
  detail::check_sample(y, 3, "pearson y");
  if (x.size() != y.size()) fail(ErrorKind::invalid_input, "pearson: length mismatch");
  double n = static_cast<double>(x.size());
  double mx = mean_of(x), my = mean_of(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorKind::zero_variance, "pearson: constant input");
  double r = sxy / std::sqrt(sxx * syy);
  r = std::clamp(r, -1.0, 1.0);
  double df = n - 2.0;
  if (std::fabs(r) == 1.0) return TestResult{r, df, 0.0};
  double t = r * std::sqrt(df / (1.0 - r * r));
  return TestResult{r, df, t_two_tailed_p(t, df)};
}

// Chi-square independence on a 2-D table of counts.
inline TestResult chi_square_independence(const std::vector<std::vector<double>>& table) {
  if (table.empty() || table[0].empty()) fail(ErrorKind::invalid_table, "empty table");
  size_t n_rows = table.size(), n_cols = table[0].size();
  if (n_rows < 2 || n_cols < 2) fail(ErrorKind::invalid_table, "need at least a 2x2 table");
  std::vector<double> row_sum(n_rows, 0.0), col_sum(n_cols, 0.0);
  double total = 0.0;
  for (size_t i = 0; i < n_rows; ++i) {
    if (table[i].size() != n_cols) fail(ErrorKind::invalid_table, "ragged table");
    for (size_t j = 0; j < n_cols; ++j) {
      double o = table[i][j];
      if (o < 0.0 || !std::isfinite(o)) fail(ErrorKind::invalid_table, "counts must be >= 0");
      row_sum[i] += o;
      col_sum[j] += o;
      total += o;
    }
  }
  for (double rs : row_sum)
    if (rs == 0.0) fail(ErrorKind::invalid_table, "zero row marginal");
  for (double cs : col_sum)
    if (cs == 0.0) fail(ErrorKind::invalid_table, "zero column marginal");
  double chi2 = 0.0;
  for (size_t i = 0; i < n_rows; ++i) {
    for (size_t j = 0; j < n_cols; ++j) {
      double expected = row_sum[i] * col_sum[j] / total;
      double diff = table[i][j] - expected;
      chi2 += diff * diff / expected;
    }
  }
  double df = static_cast<double>((n_rows - 1) * (n_cols - 1));
  return TestResult{chi2, df, regularized_upper_gamma(df / 2.0, chi2 / 2.0)};
}

}  // namespace cyberseer::stats

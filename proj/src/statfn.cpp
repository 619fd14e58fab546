#include "semcert/statfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "semcert/errors.hpp"

namespace semcert {

void ConfidenceParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (n_samples == 0 || n0_samples == 0) throw ArgumentError("sample counts must be positive");
  if (n0_samples > n_samples) throw ArgumentError("n0_samples must not exceed n_samples");
}

double std_normal_cdf(double z) {
  if (std::isnan(z)) throw DomainError("std_normal_cdf: NaN argument");
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

namespace {

// Rational approximation of the normal quantile (relative error ~1e-9), later
// polished with one Halley step against std_normal_cdf.
double quantile_initial_guess(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double std_normal_quantile(double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) {
    throw DomainError("std_normal_quantile: probability outside [0, 1]");
  }
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  if (p == 0.5) return 0.0;

  double x = quantile_initial_guess(p);
  // Halley refinement. The residual is evaluated on the smaller tail to avoid
  // cancellation near p = 1.
  for (int iter = 0; iter < 2; ++iter) {
    double e;
    if (x > 0.0) {
      e = (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
    } else {
      e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    }
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double binomial_log_pmf(std::uint64_t k, std::uint64_t n, double p) {
  if (k > n) return -std::numeric_limits<double>::infinity();
  const auto dn = static_cast<double>(n);
  const auto dk = static_cast<double>(k);
  const double log_choose = std::lgamma(dn + 1.0) - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0);
  double log_terms = 0.0;
  if (k > 0) log_terms += dk * std::log(p);
  if (k < n) log_terms += (dn - dk) * std::log1p(-p);
  return log_choose + log_terms;
}

namespace {

// log P[X >= k] for X ~ Binomial(n, p), 0 < p < 1, k <= n. Sums the pmf outward from
// max(k, mode) with the ratio recurrence, so every term is positive and only one
// lgamma evaluation is needed.
double binomial_log_survival(std::uint64_t k, std::uint64_t n, double p) {
  const auto mode = static_cast<std::uint64_t>(std::floor((static_cast<double>(n) + 1.0) * p));
  const std::uint64_t start = std::min(n, std::max(k, mode));
  const double log_start = binomial_log_pmf(start, n, p);
  const double odds = p / (1.0 - p);
  constexpr double negligible = 1e-18;

  double sum = 1.0;
  double term = 1.0;
  for (std::uint64_t j = start; j < n; ++j) {
    term *= static_cast<double>(n - j) / static_cast<double>(j + 1) * odds;
    sum += term;
    if (term < negligible * sum) break;
  }
  term = 1.0;
  for (std::uint64_t j = start; j > k; --j) {
    term *= static_cast<double>(j) / static_cast<double>(n - j + 1) / odds;
    sum += term;
    if (term < negligible * sum) break;
  }
  return log_start + std::log(sum);
}

void check_counts(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) throw ArgumentError("trials must be positive");
  if (successes > trials) throw ArgumentError("successes exceed trials");
}

}  // namespace

double binomial_survival(std::uint64_t k, std::uint64_t n, double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) throw DomainError("binomial_survival: p outside [0, 1]");
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  return std::min(1.0, std::exp(binomial_log_survival(k, n, p)));
}

double clopper_pearson_lower(std::uint64_t successes, std::uint64_t trials, double alpha) {
  check_counts(successes, trials);
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (successes == 0) return 0.0;

  // P[X >= s | p] increases in p; find its alpha crossing. Keep `lo` on the side
  // where the tail is <= alpha so the returned bound never overshoots.
  const double log_alpha = std::log(alpha);
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (binomial_log_survival(successes, trials, mid) > log_alpha) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

double binom_two_sided_p(std::uint64_t successes, std::uint64_t trials) {
  check_counts(successes, trials);
  // Symmetric null: P[|X - n/2| >= |s - n/2|] = 2 P[X >= max(s, n - s)].
  const std::uint64_t far = std::max(successes, trials - successes);
  if (2 * far == trials) return 1.0;
  return std::min(1.0, 2.0 * binomial_survival(far, trials, 0.5));
}

}  // namespace semcert

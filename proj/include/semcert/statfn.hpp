#ifndef SEMCERT_STATFN_HPP
#define SEMCERT_STATFN_HPP

#include <cstdint>

namespace semcert {

// Error budget and sample sizes of a Monte-Carlo certificate.
struct ConfidenceParams {
  double alpha = 0.001;              // in (0, 1)
  std::uint64_t n_samples = 100000;  // estimation samples
  std::uint64_t n0_samples = 100;    // selection samples, <= n_samples

  // Throws ArgumentError when an invariant is violated.
  void validate() const;
};

// Standard normal CDF. Accurate to ~1e-15 absolute; +-inf map to 1 and 0.
// Throws DomainError on NaN.
double std_normal_cdf(double z);

// Inverse of std_normal_cdf. Returns -inf at 0 and +inf at 1.
// Throws DomainError for p outside [0, 1] or NaN.
double std_normal_quantile(double p);

// log P[X = k] for X ~ Binomial(n, p), 0 < p < 1.
double binomial_log_pmf(std::uint64_t k, std::uint64_t n, double p);

// P[X >= k] for X ~ Binomial(n, p), summed exactly from the pmf.
double binomial_survival(std::uint64_t k, std::uint64_t n, double p);

// One-sided exact (Clopper-Pearson) lower confidence bound on a binomial success
// probability: the p for which P[X >= successes | p] = alpha. Zero successes give 0.
// Found by bisection on the exact survival function, tolerance 1e-10 in p.
double clopper_pearson_lower(std::uint64_t successes, std::uint64_t trials, double alpha);

// Two-sided exact binomial test p-value against success probability 1/2, clamped to 1.
double binom_two_sided_p(std::uint64_t successes, std::uint64_t trials);

}  // namespace semcert

#endif  // SEMCERT_STATFN_HPP

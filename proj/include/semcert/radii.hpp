#ifndef SEMCERT_RADII_HPP
#define SEMCERT_RADII_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semcert {

enum class NoiseFamily { gaussian, exponential, uniform, laplace, folded_gaussian };

std::string_view to_string(NoiseFamily family);
NoiseFamily noise_family_from_string(std::string_view name);

// Smoothing noise over the transform parameter space.
//   gaussian         params = per-dimension standard deviations (size dim)
//   exponential      params = {rate}, iid per dimension, support [0, inf)
//   uniform          params = {a, b}, iid U([a, b]) per dimension
//   laplace          params = {scale}, dim 1
//   folded_gaussian  params = {sigma}, |N(0, sigma^2)|, dim 1
struct DistributionSpec {
  NoiseFamily family = NoiseFamily::gaussian;
  std::vector<double> params;
  std::size_t dim = 1;

  static DistributionSpec gaussian(std::vector<double> sigmas);
  static DistributionSpec isotropic_gaussian(double sigma, std::size_t dim);
  static DistributionSpec exponential(double rate, std::size_t dim = 1);
  static DistributionSpec uniform(double lower, double upper, std::size_t dim = 1);
  static DistributionSpec laplace(double scale);
  static DistributionSpec folded_gaussian(double sigma);

  // Throws ArgumentError on non-positive scales, a >= b, or a dimension mismatch.
  void validate() const;

  // True when every sample lies in [0, inf).
  bool nonnegative_support() const noexcept;
  // True for a gaussian whose standard deviations are all equal.
  bool isotropic() const noexcept;
};

// Bounds on the smoothed class probabilities: top class >= p_a, every other <= p_b.
struct ConfidencePair {
  double p_a = 0.5;
  double p_b = 0.5;

  // Two-class reduction used by the certification protocol: p_b = 1 - p_a.
  static ConfidencePair two_class(double p_a) { return {p_a, 1.0 - p_a}; }
  void validate() const;
};

enum class RadiusKind { l2_weighted, l1, per_dim_product, scalar };
std::string_view to_string(RadiusKind kind);

// Certified perturbation bound for one noise family.
//   l2_weighted      sqrt(sum (alpha_i / sigma_i)^2) < value   (value is dimensionless)
//   l1               ||alpha||_1 < value, alpha >= 0
//   per_dim_product  product_threshold < prod (1 - |alpha_i| / (b - a))_+;
//                    `value` holds the m = 1 scalar bound (b - a)(p_a - p_b) / 2
//   scalar           |alpha| < value (alpha >= 0 for the folded gaussian)
struct RadiusResult {
  RadiusKind kind = RadiusKind::scalar;
  double value = 0.0;  // >= 0, may be +inf
  double product_threshold = 1.0;
  std::string condition;
  DistributionSpec noise;

  // Evaluates the certified condition for a concrete perturbation. Strict inequality.
  bool admits(std::span<const double> perturbation) const;

  // value * sigma for an isotropic gaussian: the radius in parameter units.
  // Throws ArgumentError for any other family.
  double isotropic_l2() const;
};

RadiusResult closed_form_radius(const DistributionSpec& dist, const ConfidencePair& conf);

// Lower bound on the class probability under the contrast-rescaled brightness noise
// N(0, diag(sigma^2, e^{-2k} tau^2)) given probability >= p under N(0, diag(sigma^2, tau^2)).
// Equals p at k = 0 and shrinks as |k| grows. Throws DomainError for p outside [0, 1].
double bc_confidence_shift(double p, double log_contrast);

// Certified-region test for a brightness/contrast parameter (k, b):
//   sqrt((k / sigma)^2 + (b / (e^{-k} tau))^2) < (Phi^-1(p_a') - Phi^-1(p_b')) / 2
// where (p_a', p_b') are the shifted confidences. Throws ArgumentError for
// non-positive scales.
bool bc_condition(double log_contrast, double brightness, double sigma, double tau,
                  const ConfidencePair& conf_shifted);

// Left-hand side of bc_condition, exposed for audit output.
double bc_condition_lhs(double log_contrast, double brightness, double sigma, double tau);

}  // namespace semcert

#endif  // SEMCERT_RADII_HPP

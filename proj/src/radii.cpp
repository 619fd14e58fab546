#include "semcert/radii.hpp"

#include <algorithm>
#include <cmath>

#include "semcert/errors.hpp"
#include "semcert/statfn.hpp"

namespace semcert {

std::string_view to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::exponential: return "exponential";
    case NoiseFamily::uniform: return "uniform";
    case NoiseFamily::laplace: return "laplace";
    case NoiseFamily::folded_gaussian: return "folded_gaussian";
  }
  return "unknown";
}

NoiseFamily noise_family_from_string(std::string_view name) {
  std::string normalized(name);
  std::replace(normalized.begin(), normalized.end(), '-', '_');
  for (auto f : {NoiseFamily::gaussian, NoiseFamily::exponential, NoiseFamily::uniform,
                 NoiseFamily::laplace, NoiseFamily::folded_gaussian}) {
    if (to_string(f) == normalized) return f;
  }
  throw ArgumentError("unknown noise family '" + std::string(name) + "'");
}

std::string_view to_string(RadiusKind kind) {
  switch (kind) {
    case RadiusKind::l2_weighted: return "l2_weighted";
    case RadiusKind::l1: return "l1";
    case RadiusKind::per_dim_product: return "per_dim_product";
    case RadiusKind::scalar: return "scalar";
  }
  return "unknown";
}

DistributionSpec DistributionSpec::gaussian(std::vector<double> sigmas) {
  const std::size_t m = sigmas.size();
  return {NoiseFamily::gaussian, std::move(sigmas), m};
}

DistributionSpec DistributionSpec::isotropic_gaussian(double sigma, std::size_t dim) {
  return {NoiseFamily::gaussian, std::vector<double>(dim, sigma), dim};
}

DistributionSpec DistributionSpec::exponential(double rate, std::size_t dim) {
  return {NoiseFamily::exponential, {rate}, dim};
}

DistributionSpec DistributionSpec::uniform(double lower, double upper, std::size_t dim) {
  return {NoiseFamily::uniform, {lower, upper}, dim};
}

DistributionSpec DistributionSpec::laplace(double scale) { return {NoiseFamily::laplace, {scale}, 1}; }

DistributionSpec DistributionSpec::folded_gaussian(double sigma) {
  return {NoiseFamily::folded_gaussian, {sigma}, 1};
}

void DistributionSpec::validate() const {
  if (dim == 0) throw ArgumentError("noise dimension must be positive");
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  switch (family) {
    case NoiseFamily::gaussian:
      if (params.size() != dim) throw ArgumentError("gaussian noise needs one sigma per dimension");
      if (!std::all_of(params.begin(), params.end(), positive)) {
        throw ArgumentError("gaussian sigmas must be positive");
      }
      break;
    case NoiseFamily::exponential:
      if (params.size() != 1 || !positive(params[0])) throw ArgumentError("exponential rate must be positive");
      break;
    case NoiseFamily::uniform:
      if (params.size() != 2 || !std::isfinite(params[0]) || !std::isfinite(params[1]) ||
          !(params[0] < params[1])) {
        throw ArgumentError("uniform noise needs a < b");
      }
      break;
    case NoiseFamily::laplace:
    case NoiseFamily::folded_gaussian:
      if (dim != 1) throw ArgumentError(std::string(to_string(family)) + " noise is one-dimensional");
      if (params.size() != 1 || !positive(params[0])) throw ArgumentError("noise scale must be positive");
      break;
  }
}

bool DistributionSpec::nonnegative_support() const noexcept {
  return family == NoiseFamily::exponential || family == NoiseFamily::folded_gaussian ||
         (family == NoiseFamily::uniform && params.size() == 2 && params[0] >= 0.0);
}

bool DistributionSpec::isotropic() const noexcept {
  return family == NoiseFamily::gaussian && !params.empty() &&
         std::all_of(params.begin(), params.end(), [&](double s) { return s == params[0]; });
}

void ConfidencePair::validate() const {
  if (!(p_a >= 0.0 && p_a <= 1.0 && p_b >= 0.0 && p_b <= 1.0)) {
    throw ArgumentError("confidence bounds must lie in [0, 1]");
  }
  if (p_b > p_a) throw ArgumentError("p_b must not exceed p_a");
}

bool RadiusResult::admits(std::span<const double> perturbation) const {
  if (perturbation.size() != noise.dim) throw ArgumentError("perturbation dimension mismatch");
  switch (kind) {
    case RadiusKind::l2_weighted: {
      double sum = 0.0;
      for (std::size_t n = 0; n < perturbation.size(); ++n) {
        const double r = perturbation[n] / noise.params[n];
        sum += r * r;
      }
      return std::sqrt(sum) < value;
    }
    case RadiusKind::l1: {
      double sum = 0.0;
      for (double a : perturbation) {
        if (a < 0.0) return false;
        sum += a;
      }
      return sum < value;
    }
    case RadiusKind::per_dim_product: {
      const double width = noise.params[1] - noise.params[0];
      double prod = 1.0;
      for (double a : perturbation) prod *= std::max(0.0, 1.0 - std::abs(a) / width);
      return product_threshold < prod;
    }
    case RadiusKind::scalar: {
      const double a = perturbation[0];
      if (noise.family == NoiseFamily::folded_gaussian && a < 0.0) return false;
      return std::abs(a) < value;
    }
  }
  return false;
}

double RadiusResult::isotropic_l2() const {
  if (!noise.isotropic()) throw ArgumentError("isotropic_l2 requires isotropic gaussian noise");
  return value * noise.params[0];
}

RadiusResult closed_form_radius(const DistributionSpec& dist, const ConfidencePair& conf) {
  dist.validate();
  conf.validate();
  const double pa = conf.p_a;
  const double pb = conf.p_b;

  RadiusResult out;
  out.noise = dist;
  switch (dist.family) {
    case NoiseFamily::gaussian:
      out.kind = RadiusKind::l2_weighted;
      out.condition = "sqrt(sum (alpha_i/sigma_i)^2) < (Phi^-1(p_a) - Phi^-1(p_b)) / 2";
      out.value = 0.5 * (std_normal_quantile(pa) - std_normal_quantile(pb));
      break;
    case NoiseFamily::exponential:
      out.kind = RadiusKind::l1;
      out.condition = "||alpha||_1 < -log(1 - p_a + p_b) / rate";
      out.value = -std::log1p(pb - pa) / dist.params[0];
      break;
    case NoiseFamily::uniform: {
      out.kind = RadiusKind::per_dim_product;
      out.condition = "1 - (p_a - p_b)/2 < prod (1 - |alpha_i|/(b - a))_+";
      out.product_threshold = 1.0 - 0.5 * (pa - pb);
      out.value = (dist.params[1] - dist.params[0]) * (pa - pb) / 2.0;
      break;
    }
    case NoiseFamily::laplace: {
      out.kind = RadiusKind::scalar;
      const double b = dist.params[0];
      // (p_a, p_b)-confidence implies (p_a', p_b')-confidence for every p_a' <= p_a and
      // p_b' >= p_b, so each branch may also be evaluated at the weakened pair that
      // lands on the boundary p = 1/2. Taking the best of them keeps the radius sound
      // and makes it monotone across the branch switch.
      auto interior = [&](double a, double c) { return -b * std::log1p(c - a); };
      // On the boundary the worst-case set is a half-line on which the shifted density is
      // uniformly scaled by e^{-|alpha|/b}; that halves the usable range.
      auto boundary = [&](double a, double c) { return -0.5 * b * std::log(4.0 * c * (1.0 - a)); };
      if (pa > 0.5 && pb < 0.5) {
        out.condition = "|alpha| < max(-b log(1 - p_a + p_b), -(b/2) log(2 p_b), -(b/2) log(2 (1 - p_a)))";
        out.value = std::max({interior(pa, pb), boundary(0.5, pb), boundary(pa, 0.5)});
      } else if ((pa == 0.5 && pb < 0.5) || (pa > 0.5 && pb == 0.5)) {
        out.condition = "|alpha| < -(b/2) log(4 p_b (1 - p_a))";
        out.value = boundary(pa, pb);
      } else {
        out.condition = "no admissible perturbation (needs p_a >= 1/2 >= p_b, not both equal)";
        out.value = 0.0;
      }
      break;
    }
    case NoiseFamily::folded_gaussian:
      out.kind = RadiusKind::scalar;
      out.condition = "alpha < sigma (Phi^-1((1 + min(p_a, 1 - p_b))/2) - Phi^-1(3/4))";
      out.value = dist.params[0] * (std_normal_quantile((1.0 + std::min(pa, 1.0 - pb)) / 2.0) -
                                    std_normal_quantile(0.75));
      break;
  }
  if (std::isnan(out.value) || out.value < 0.0) out.value = 0.0;
  return out;
}

double bc_confidence_shift(double p, double log_contrast) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) throw DomainError("bc_confidence_shift: p outside [0, 1]");
  if (log_contrast == 0.0) return p;
  const double scale = std::exp(log_contrast);
  double shifted;
  if (log_contrast < 0.0) {
    const double z = std_normal_quantile((1.0 + p) / 2.0);
    shifted = std::isinf(z) ? 1.0 : 2.0 * std_normal_cdf(scale * z) - 1.0;
  } else {
    const double z = std_normal_quantile(1.0 - p / 2.0);
    shifted = std::isinf(z) ? 0.0 : 2.0 * (1.0 - std_normal_cdf(scale * z));
  }
  return std::clamp(shifted, 0.0, 1.0);
}

double bc_condition_lhs(double log_contrast, double brightness, double sigma, double tau) {
  if (!(sigma > 0.0) || !(tau > 0.0)) throw ArgumentError("brightness/contrast noise scales must be positive");
  const double a = log_contrast / sigma;
  const double b = brightness / (std::exp(-log_contrast) * tau);
  return std::sqrt(a * a + b * b);
}

bool bc_condition(double log_contrast, double brightness, double sigma, double tau,
                  const ConfidencePair& conf_shifted) {
  const double lhs = bc_condition_lhs(log_contrast, brightness, sigma, tau);
  conf_shifted.validate();
  const double rhs =
      0.5 * (std_normal_quantile(conf_shifted.p_a) - std_normal_quantile(conf_shifted.p_b));
  return lhs < rhs;
}

}  // namespace semcert

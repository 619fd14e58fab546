#include "semcert/classifiers.hpp"

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "semcert/errors.hpp"
#include "semcert/statfn.hpp"

namespace semcert {

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

LinearClassifier::LinearClassifier(Shape input_shape, std::size_t num_classes,
                                   std::vector<double> weights, std::vector<double> bias)
    : input_shape_(input_shape),
      num_classes_(num_classes),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
  if (num_classes_ < 2) throw ArgumentError("a classifier needs at least two classes");
  if (input_shape_.size() == 0) throw ArgumentError("classifier input shape must be non-empty");
  if (weights_.size() != num_classes_ * input_shape_.size()) {
    throw ArgumentError("weight matrix has " + std::to_string(weights_.size()) + " entries, expected " +
                        std::to_string(num_classes_ * input_shape_.size()));
  }
  if (bias_.size() != num_classes_) throw ArgumentError("bias length must equal the number of classes");
  if (!all_finite(weights_) || !all_finite(bias_)) throw ArgumentError("classifier weights must be finite");
}

std::vector<double> LinearClassifier::scores(const ImageTensor& x) const {
  if (!(x.shape() == input_shape_)) throw ArgumentError("input shape does not match the classifier");
  const auto data = x.data();
  const std::size_t d = input_shape_.size();
  std::vector<double> out(bias_);
  for (std::size_t c = 0; c < num_classes_; ++c) {
    const double* row = weights_.data() + c * d;
    double acc = 0.0;
    for (std::size_t n = 0; n < d; ++n) acc += row[n] * data[n];
    out[c] += acc;
  }
  return out;
}

Label LinearClassifier::classify(const ImageTensor& x) const {
  const auto s = scores(x);
  // max_element returns the first maximum, which is the smallest tied index.
  return static_cast<Label>(std::max_element(s.begin(), s.end()) - s.begin());
}

SyntheticClassifier::SyntheticClassifier(Variant variant) : variant_(std::move(variant)) {
  std::visit(Overloaded{
                 [](const MeanThreshold& m) {
                   if (!(m.threshold > 0.0 && m.threshold < 1.0)) {
                     throw ArgumentError("mean threshold must lie in (0, 1)");
                   }
                 },
                 [](const L2Ball& b) {
                   if (!(b.radius > 0.0) || !std::isfinite(b.radius)) {
                     throw ArgumentError("ball radius must be positive");
                   }
                 },
                 [](const ConstantLabel& c) {
                   if (c.classes < 2 || c.label >= c.classes) {
                     throw ArgumentError("constant label out of range");
                   }
                 },
             },
             variant_);
}

Label SyntheticClassifier::classify(const ImageTensor& x) const {
  return std::visit(Overloaded{
                        [&](const MeanThreshold& m) -> Label { return x.mean() > m.threshold ? 1 : 0; },
                        [&](const L2Ball& b) -> Label {
                          return l2_distance_squared(x, b.center) <= b.radius * b.radius ? 0 : 1;
                        },
                        [](const ConstantLabel& c) -> Label { return c.label; },
                    },
                    variant_);
}

std::size_t SyntheticClassifier::num_classes() const {
  if (const auto* c = std::get_if<ConstantLabel>(&variant_)) return c->classes;
  return 2;
}

namespace {

std::vector<double> binary(double p_one) {
  p_one = std::clamp(p_one, 0.0, 1.0);
  return {1.0 - p_one, p_one};
}

std::vector<double> mean_threshold_confidence(double threshold, const TransformSpec& transform,
                                              const DistributionSpec& noise, const ImageTensor& x) {
  const double m = x.mean();
  switch (transform.kind) {
    case TransformKind::additive: {
      if (noise.family != NoiseFamily::gaussian) break;
      // mean(x + delta) is gaussian with variance sum(sigma_n^2) / d^2.
      const auto d = static_cast<double>(x.size());
      double var = 0.0;
      for (double s : noise.params) var += s * s;
      const double sd = std::sqrt(var) / d;
      return binary(std_normal_cdf((m - threshold) / sd));
    }
    case TransformKind::brightness_contrast: {
      if (noise.family != NoiseFamily::gaussian) break;
      // e^k (m + b) > t  <=>  b > t e^{-k} - m, then integrate over k ~ N(0, sigma^2).
      const double sigma = noise.params[0];
      const double tau = noise.params[1];
      auto integrand = [&](double z) {
        const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
        return density * std_normal_cdf((m - threshold * std::exp(-sigma * z)) / tau);
      };
      const double p = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          integrand, -12.0, 12.0, 20, 1e-14);
      return binary(p);
    }
    case TransformKind::translation_reflect:
      // Cyclic shifts permute pixels, so the mean and thus the label never change.
      return binary(m > threshold ? 1.0 : 0.0);
    default:
      break;
  }
  throw UnsupportedError("no closed-form confidence for mean_threshold under " +
                         std::string(to_string(transform.kind)) + " with " +
                         std::string(to_string(noise.family)) + " noise");
}

std::vector<double> ball_confidence(const L2Ball& ball, const TransformSpec& transform,
                                    const DistributionSpec& noise, const ImageTensor& x) {
  if (transform.kind == TransformKind::additive && noise.isotropic()) {
    // ||x + delta - c||^2 / sigma^2 is noncentral chi-square with d degrees of freedom.
    const double sigma = noise.params[0];
    const double lambda = l2_distance_squared(x, ball.center) / (sigma * sigma);
    const double q = ball.radius * ball.radius / (sigma * sigma);
    const auto d = static_cast<double>(x.size());
    double inside;
    if (lambda == 0.0) {
      inside = boost::math::cdf(boost::math::chi_squared_distribution<double>(d), q);
    } else {
      inside = boost::math::cdf(boost::math::non_central_chi_squared_distribution<double>(d, lambda), q);
    }
    return binary(1.0 - inside);
  }
  throw UnsupportedError("no closed-form confidence for l2_ball under " +
                         std::string(to_string(transform.kind)) + " with " +
                         std::string(to_string(noise.family)) + " noise");
}

}  // namespace

std::vector<double> analytic_smoothed_confidence(const SyntheticClassifier& classifier,
                                                 const TransformSpec& transform,
                                                 const DistributionSpec& noise,
                                                 const ImageTensor& x) {
  noise.validate();
  if (noise.dim != transform.param_dim(x.shape())) {
    throw ArgumentError("noise dimension does not match the transform's parameter dimension");
  }
  return std::visit(Overloaded{
                        [&](const MeanThreshold& m) {
                          return mean_threshold_confidence(m.threshold, transform, noise, x);
                        },
                        [&](const L2Ball& b) { return ball_confidence(b, transform, noise, x); },
                        [](const ConstantLabel& c) {
                          std::vector<double> p(c.classes, 0.0);
                          p[c.label] = 1.0;
                          return p;
                        },
                    },
                    classifier.variant());
}

}  // namespace semcert

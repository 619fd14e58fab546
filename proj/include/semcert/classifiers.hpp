#ifndef SEMCERT_CLASSIFIERS_HPP
#define SEMCERT_CLASSIFIERS_HPP

#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

#include "semcert/radii.hpp"
#include "semcert/tensor.hpp"
#include "semcert/transforms.hpp"

namespace semcert {

using Label = std::size_t;

// Deterministic base classifier h: the same input always yields the same label.
// Implementations must be safe to call concurrently.
class BaseClassifier {
 public:
  virtual ~BaseClassifier() = default;
  virtual Label classify(const ImageTensor& x) const = 0;
  virtual std::size_t num_classes() const = 0;
};

// Affine scores W x + b; the label is the argmax, ties going to the smallest index.
class LinearClassifier final : public BaseClassifier {
 public:
  // weights is C x (K*W*H) row-major. Throws ArgumentError on inconsistent sizes,
  // fewer than two classes, or non-finite entries.
  LinearClassifier(Shape input_shape, std::size_t num_classes, std::vector<double> weights,
                   std::vector<double> bias);

  Label classify(const ImageTensor& x) const override;
  std::size_t num_classes() const override { return num_classes_; }

  std::vector<double> scores(const ImageTensor& x) const;
  const Shape& input_shape() const noexcept { return input_shape_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& bias() const noexcept { return bias_; }

 private:
  Shape input_shape_;
  std::size_t num_classes_;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

// Classifiers whose smoothed confidence can be computed in closed form.
struct MeanThreshold {
  double threshold;  // label 1 iff mean(x) > threshold, else 0
};
struct L2Ball {
  ImageTensor center;
  double radius;  // label 0 iff ||x - center||_2 <= radius, else 1
};
struct ConstantLabel {
  Label label;
  std::size_t classes = 2;
};

class SyntheticClassifier final : public BaseClassifier {
 public:
  using Variant = std::variant<MeanThreshold, L2Ball, ConstantLabel>;

  // Throws ArgumentError when the threshold is outside (0, 1), the ball radius is not
  // positive, or the constant label is out of range.
  explicit SyntheticClassifier(Variant variant);

  static SyntheticClassifier mean_threshold(double threshold) { return SyntheticClassifier(MeanThreshold{threshold}); }
  static SyntheticClassifier l2_ball(ImageTensor center, double radius) {
    return SyntheticClassifier(L2Ball{std::move(center), radius});
  }
  static SyntheticClassifier constant(Label label, std::size_t classes = 2) {
    return SyntheticClassifier(ConstantLabel{label, classes});
  }

  Label classify(const ImageTensor& x) const override;
  std::size_t num_classes() const override;
  const Variant& variant() const noexcept { return variant_; }

 private:
  Variant variant_;
};

// Wraps an arbitrary deterministic function; mostly useful for tests and attacks.
class FunctionClassifier final : public BaseClassifier {
 public:
  FunctionClassifier(std::function<Label(const ImageTensor&)> fn, std::size_t num_classes)
      : fn_(std::move(fn)), num_classes_(num_classes) {}
  Label classify(const ImageTensor& x) const override { return fn_(x); }
  std::size_t num_classes() const override { return num_classes_; }

 private:
  std::function<Label(const ImageTensor&)> fn_;
  std::size_t num_classes_;
};

// Exact class probabilities E[h(phi(x, eps))] for tractable pairings:
//   constant             any transform and noise
//   mean_threshold       additive isotropic gaussian, brightness/contrast gaussian,
//                        reflect translation (mean preserved)
//   l2_ball              additive isotropic gaussian (noncentral chi-square)
// Throws UnsupportedError otherwise.
std::vector<double> analytic_smoothed_confidence(const SyntheticClassifier& classifier,
                                                 const TransformSpec& transform,
                                                 const DistributionSpec& noise,
                                                 const ImageTensor& x);

}  // namespace semcert

#endif  // SEMCERT_CLASSIFIERS_HPP

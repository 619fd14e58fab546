#ifndef SEMCERT_TRANSFORMS_HPP
#define SEMCERT_TRANSFORMS_HPP

#include <span>
#include <string>
#include <string_view>

#include "semcert/tensor.hpp"

namespace semcert {

enum class TransformKind {
  gaussian_blur,        // alpha >= 0: squared kernel radius
  brightness_contrast,  // (k, b): v -> e^k (v + b)
  translation_reflect,  // (dx, dy), rounded; pixels wrap around the frame
  translation_black,    // (dx, dy), rounded; vacated pixels are 0
  rotation,             // angle in radians, counter-clockwise, disk black padding
  scaling,              // factor s > 0 about the image center
  additive,             // delta in R^{K*W*H}: x -> x + delta
};

std::string_view to_string(TransformKind kind);
// Accepts the names produced by to_string and their dash-separated spellings.
// Throws ArgumentError for unknown names.
TransformKind transform_kind_from_string(std::string_view name);

// A semantic transform together with its parameter dimension and whether it is
// reversible (every parameter has an inverse parameter). Only reversible transforms
// let a consistency certificate on phi(x, alpha) carry over to the pre-image.
struct TransformSpec {
  TransformKind kind = TransformKind::gaussian_blur;

  static TransformSpec of(TransformKind kind) { return TransformSpec{kind}; }

  // 2 for brightness/contrast and translations, K*W*H for additive, 1 otherwise.
  std::size_t param_dim(const Shape& image_shape) const noexcept;
  bool reversible() const noexcept;
};

ImageTensor gaussian_blur(const ImageTensor& x, double alpha);
ImageTensor brightness_contrast(const ImageTensor& x, double log_contrast, double brightness);

enum class Padding { reflect, black };
ImageTensor translate(const ImageTensor& x, double dx, double dy, Padding padding);

ImageTensor rotate(const ImageTensor& x, double angle);
ImageTensor scale(const ImageTensor& x, double factor);
ImageTensor add_noise(const ImageTensor& x, std::span<const double> delta);

// Dispatches on spec.kind. `params` must have spec.param_dim(x.shape()) entries.
ImageTensor apply_transform(const TransformSpec& spec, const ImageTensor& x,
                            std::span<const double> params);

// True when pixel (i, j) survives the rotation's disk padding, i.e. its distance to
// the center is strictly below min(c_W, c_H).
bool inside_rotation_disk(const Shape& shape, std::size_t i, std::size_t j) noexcept;

// Source coordinate sampled by rotate / scale for output pixel (i, j).
struct SourcePoint {
  double i;
  double j;
};
SourcePoint rotation_source(const Shape& shape, double i, double j, double angle) noexcept;
SourcePoint scaling_source(const Shape& shape, double i, double j, double factor) noexcept;

}  // namespace semcert

#endif  // SEMCERT_TRANSFORMS_HPP

#include "semcert/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "semcert/errors.hpp"

namespace semcert {

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::gaussian_blur: return "gaussian_blur";
    case TransformKind::brightness_contrast: return "brightness_contrast";
    case TransformKind::translation_reflect: return "translation_reflect";
    case TransformKind::translation_black: return "translation_black";
    case TransformKind::rotation: return "rotation";
    case TransformKind::scaling: return "scaling";
    case TransformKind::additive: return "additive";
  }
  return "unknown";
}

TransformKind transform_kind_from_string(std::string_view name) {
  std::string normalized(name);
  std::replace(normalized.begin(), normalized.end(), '-', '_');
  for (auto kind : {TransformKind::gaussian_blur, TransformKind::brightness_contrast,
                    TransformKind::translation_reflect, TransformKind::translation_black,
                    TransformKind::rotation, TransformKind::scaling, TransformKind::additive}) {
    if (to_string(kind) == normalized) return kind;
  }
  if (normalized == "blur") return TransformKind::gaussian_blur;
  throw ArgumentError("unknown transform '" + std::string(name) + "'");
}

std::size_t TransformSpec::param_dim(const Shape& image_shape) const noexcept {
  switch (kind) {
    case TransformKind::brightness_contrast:
    case TransformKind::translation_reflect:
    case TransformKind::translation_black:
      return 2;
    case TransformKind::additive:
      return image_shape.size();
    default:
      return 1;
  }
}

bool TransformSpec::reversible() const noexcept {
  switch (kind) {
    case TransformKind::brightness_contrast:
    case TransformKind::translation_reflect:
    case TransformKind::translation_black:
    case TransformKind::additive:
      return true;
    default:
      return false;
  }
}

namespace {

// Mirror-without-repeat index folding (... c b | a b c d | c b ...), period 2(n-1).
std::size_t reflect_index(long long idx, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<long long>(2 * (n - 1));
  long long m = idx % period;
  if (m < 0) m += period;
  if (m >= static_cast<long long>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

std::vector<double> blur_kernel(double alpha) {
  const auto radius = static_cast<long long>(std::ceil(4.0 * std::sqrt(alpha)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (long long t = -radius; t <= radius; ++t) {
    const double w = std::exp(-static_cast<double>(t * t) / (2.0 * alpha));
    kernel[static_cast<std::size_t>(t + radius)] = w;
    total += w;
  }
  for (double& w : kernel) w /= total;
  return kernel;
}

bool within_unit_range(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

}  // namespace

ImageTensor gaussian_blur(const ImageTensor& x, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ArgumentError("blur parameter must be finite and non-negative");
  }
  if (alpha == 0.0) return x;

  const Shape s = x.shape();
  const auto kernel = blur_kernel(alpha);
  const auto radius = static_cast<long long>(kernel.size() / 2);
  std::vector<double> pass(s.size());
  std::vector<double> out(s.size());

  // Along i, then along j; the boundary is the mirror extension of the image.
  for (std::size_t k = 0; k < s.channels; ++k) {
    for (std::size_t i = 0; i < s.width; ++i) {
      for (std::size_t j = 0; j < s.height; ++j) {
        double acc = 0.0;
        for (long long t = -radius; t <= radius; ++t) {
          const auto src = reflect_index(static_cast<long long>(i) - t, s.width);
          acc += kernel[static_cast<std::size_t>(t + radius)] * x.at(k, src, j);
        }
        pass[s.offset(k, i, j)] = acc;
      }
    }
    for (std::size_t i = 0; i < s.width; ++i) {
      for (std::size_t j = 0; j < s.height; ++j) {
        double acc = 0.0;
        for (long long t = -radius; t <= radius; ++t) {
          const auto src = reflect_index(static_cast<long long>(j) - t, s.height);
          acc += kernel[static_cast<std::size_t>(t + radius)] * pass[s.offset(k, i, src)];
        }
        out[s.offset(k, i, j)] = acc;
      }
    }
  }
  return ImageTensor(s, std::move(out), x.unnormalized());
}

ImageTensor brightness_contrast(const ImageTensor& x, double log_contrast, double brightness) {
  const double factor = std::exp(log_contrast);
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v = factor * (v + brightness);
  const bool unnormalized = x.unnormalized() || !within_unit_range(out);
  return ImageTensor(x.shape(), std::move(out), unnormalized);
}

ImageTensor translate(const ImageTensor& x, double dx, double dy, Padding padding) {
  const Shape s = x.shape();
  const auto shift_i = static_cast<long long>(std::round(dx));
  const auto shift_j = static_cast<long long>(std::round(dy));
  const auto w = static_cast<long long>(s.width);
  const auto h = static_cast<long long>(s.height);
  std::vector<double> out(s.size(), 0.0);

  for (std::size_t k = 0; k < s.channels; ++k) {
    for (long long i = 0; i < w; ++i) {
      for (long long j = 0; j < h; ++j) {
        long long si = i - shift_i;
        long long sj = j - shift_j;
        if (padding == Padding::reflect) {
          si = ((si % w) + w) % w;
          sj = ((sj % h) + h) % h;
        } else if (si < 0 || si >= w || sj < 0 || sj >= h) {
          continue;
        }
        out[s.offset(k, static_cast<std::size_t>(i), static_cast<std::size_t>(j))] =
            x.at(k, static_cast<std::size_t>(si), static_cast<std::size_t>(sj));
      }
    }
  }
  return ImageTensor(s, std::move(out), x.unnormalized());
}

bool inside_rotation_disk(const Shape& shape, std::size_t i, std::size_t j) noexcept {
  const double cw = (static_cast<double>(shape.width) - 1.0) / 2.0;
  const double ch = (static_cast<double>(shape.height) - 1.0) / 2.0;
  const double d = std::hypot(static_cast<double>(i) - cw, static_cast<double>(j) - ch);
  return d < std::min(cw, ch);
}

SourcePoint rotation_source(const Shape& shape, double i, double j, double angle) noexcept {
  // c + d * (cos(g - angle), sin(g - angle)) with (d, g) the polar form of (i, j) - c,
  // expanded so that angle 0 reproduces (i, j) exactly.
  const double cw = (static_cast<double>(shape.width) - 1.0) / 2.0;
  const double ch = (static_cast<double>(shape.height) - 1.0) / 2.0;
  const double c = std::cos(angle);
  const double sn = std::sin(angle);
  const double u = i - cw;
  const double v = j - ch;
  return {cw + u * c + v * sn, ch + v * c - u * sn};
}

SourcePoint scaling_source(const Shape& shape, double i, double j, double factor) noexcept {
  const double cw = (static_cast<double>(shape.width) - 1.0) / 2.0;
  const double ch = (static_cast<double>(shape.height) - 1.0) / 2.0;
  return {cw + (i - cw) / factor, ch + (j - ch) / factor};
}

ImageTensor rotate(const ImageTensor& x, double angle) {
  const Shape s = x.shape();
  std::vector<double> out(s.size(), 0.0);
  for (std::size_t i = 0; i < s.width; ++i) {
    for (std::size_t j = 0; j < s.height; ++j) {
      if (!inside_rotation_disk(s, i, j)) continue;
      const auto src = rotation_source(s, static_cast<double>(i), static_cast<double>(j), angle);
      for (std::size_t k = 0; k < s.channels; ++k) {
        out[s.offset(k, i, j)] = bilinear_unchecked(x, k, src.i, src.j);
      }
    }
  }
  return ImageTensor(s, std::move(out), x.unnormalized());
}

ImageTensor scale(const ImageTensor& x, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw ArgumentError("scaling factor must be positive");
  const Shape s = x.shape();
  std::vector<double> out(s.size(), 0.0);
  for (std::size_t i = 0; i < s.width; ++i) {
    for (std::size_t j = 0; j < s.height; ++j) {
      const auto src = scaling_source(s, static_cast<double>(i), static_cast<double>(j), factor);
      for (std::size_t k = 0; k < s.channels; ++k) {
        out[s.offset(k, i, j)] = bilinear_unchecked(x, k, src.i, src.j);
      }
    }
  }
  return ImageTensor(s, std::move(out), x.unnormalized());
}

ImageTensor add_noise(const ImageTensor& x, std::span<const double> delta) {
  if (delta.size() != x.size()) throw ArgumentError("additive perturbation has wrong length");
  std::vector<double> out(x.data().begin(), x.data().end());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] += delta[n];
  const bool unnormalized = x.unnormalized() || !within_unit_range(out);
  return ImageTensor(x.shape(), std::move(out), unnormalized);
}

ImageTensor apply_transform(const TransformSpec& spec, const ImageTensor& x,
                            std::span<const double> params) {
  if (params.size() != spec.param_dim(x.shape())) {
    throw ArgumentError("transform " + std::string(to_string(spec.kind)) + " expects " +
                        std::to_string(spec.param_dim(x.shape())) + " parameters, got " +
                        std::to_string(params.size()));
  }
  switch (spec.kind) {
    case TransformKind::gaussian_blur: return gaussian_blur(x, params[0]);
    case TransformKind::brightness_contrast: return brightness_contrast(x, params[0], params[1]);
    case TransformKind::translation_reflect: return translate(x, params[0], params[1], Padding::reflect);
    case TransformKind::translation_black: return translate(x, params[0], params[1], Padding::black);
    case TransformKind::rotation: return rotate(x, params[0]);
    case TransformKind::scaling: return scale(x, params[0]);
    case TransformKind::additive: return add_noise(x, params);
  }
  throw ArgumentError("unknown transform kind");
}

}  // namespace semcert

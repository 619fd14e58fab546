#include "semcert/tensor.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "semcert/errors.hpp"

namespace semcert {

ImageTensor::ImageTensor(Shape shape, std::vector<double> data, bool unnormalized)
    : shape_(shape), data_(std::move(data)), unnormalized_(unnormalized) {
  if (shape_.channels == 0 || shape_.width == 0 || shape_.height == 0) {
    throw ArgumentError("image extents must be positive");
  }
  if (data_.size() != shape_.size()) {
    throw ArgumentError("image data length " + std::to_string(data_.size()) +
                        " does not match K*W*H = " + std::to_string(shape_.size()));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw ArgumentError("image contains a non-finite value");
  }
}

ImageTensor ImageTensor::zeros(Shape shape) { return filled(shape, 0.0); }

ImageTensor ImageTensor::filled(Shape shape, double value) {
  return ImageTensor(shape, std::vector<double>(shape.size(), value));
}

double ImageTensor::mean() const noexcept {
  if (data_.empty()) return 0.0;
  return std::accumulate(data_.begin(), data_.end(), 0.0) / static_cast<double>(data_.size());
}

double bilinear_unchecked(const ImageTensor& x, std::size_t k, double i, double j) noexcept {
  const double max_i = static_cast<double>(x.width()) - 1.0;
  const double max_j = static_cast<double>(x.height()) - 1.0;
  if (!(i >= 0.0 && i <= max_i && j >= 0.0 && j <= max_j)) return 0.0;

  const double fi = std::floor(i);
  const double fj = std::floor(j);
  const auto i0 = static_cast<std::size_t>(fi);
  const auto j0 = static_cast<std::size_t>(fj);
  const double di = (i0 + 1 < x.width()) ? i - fi : 0.0;
  const double dj = (j0 + 1 < x.height()) ? j - fj : 0.0;
  const std::size_t i1 = di > 0.0 ? i0 + 1 : i0;
  const std::size_t j1 = dj > 0.0 ? j0 + 1 : j0;

  const double v00 = x.at(k, i0, j0);
  const double v01 = x.at(k, i0, j1);
  const double v10 = x.at(k, i1, j0);
  const double v11 = x.at(k, i1, j1);
  return (1.0 - di) * ((1.0 - dj) * v00 + dj * v01) + di * ((1.0 - dj) * v10 + dj * v11);
}

double bilinear(const ImageTensor& x, std::size_t k, double i, double j) {
  if (k >= x.channels()) {
    throw ArgumentError("channel index " + std::to_string(k) + " out of range");
  }
  return bilinear_unchecked(x, k, i, j);
}

namespace {

void require_same_shape(const ImageTensor& a, const ImageTensor& b) {
  if (!(a.shape() == b.shape())) throw ArgumentError("image shapes differ");
}

}  // namespace

double l2_distance_squared(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b);
  const auto da = a.data();
  const auto db = b.data();
  double sum = 0.0;
  for (std::size_t n = 0; n < da.size(); ++n) {
    const double d = da[n] - db[n];
    sum += d * d;
  }
  return sum;
}

double l2_distance(const ImageTensor& a, const ImageTensor& b) {
  return std::sqrt(l2_distance_squared(a, b));
}

double l1_distance(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b);
  const auto da = a.data();
  const auto db = b.data();
  double sum = 0.0;
  for (std::size_t n = 0; n < da.size(); ++n) sum += std::abs(da[n] - db[n]);
  return sum;
}

}  // namespace semcert

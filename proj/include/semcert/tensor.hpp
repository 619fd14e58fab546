#ifndef SEMCERT_TENSOR_HPP
#define SEMCERT_TENSOR_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace semcert {

// Coordinate convention used everywhere in the library:
//   k  channel,  i  horizontal position in [0, W-1],  j  vertical position in [0, H-1].
// Storage is row-major over the K x W x H shape, so j is the fastest index:
//   offset(k, i, j) = (k * W + i) * H + j.
struct Shape {
  std::size_t channels = 0;
  std::size_t width = 0;
  std::size_t height = 0;

  std::size_t size() const noexcept { return channels * width * height; }
  std::size_t offset(std::size_t k, std::size_t i, std::size_t j) const noexcept {
    return (k * width + i) * height + j;
  }
  bool operator==(const Shape&) const = default;
};

// Real-valued K x W x H image. Immutable after construction; all values finite.
// Values are expected in [0, 1] unless `unnormalized()` is set (for instance after
// a brightness/contrast change, which never clamps).
class ImageTensor {
 public:
  ImageTensor() = default;

  // Throws ArgumentError on zero extents, a length mismatch, or non-finite data.
  ImageTensor(Shape shape, std::vector<double> data, bool unnormalized = false);

  static ImageTensor zeros(Shape shape);
  static ImageTensor filled(Shape shape, double value);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t channels() const noexcept { return shape_.channels; }
  std::size_t width() const noexcept { return shape_.width; }
  std::size_t height() const noexcept { return shape_.height; }
  std::size_t size() const noexcept { return data_.size(); }
  bool unnormalized() const noexcept { return unnormalized_; }

  double at(std::size_t k, std::size_t i, std::size_t j) const noexcept {
    return data_[shape_.offset(k, i, j)];
  }
  std::span<const double> data() const noexcept { return data_; }

  // Horizontal / vertical center of the pixel grid: (W-1)/2 and (H-1)/2.
  double center_x() const noexcept { return (static_cast<double>(shape_.width) - 1.0) / 2.0; }
  double center_y() const noexcept { return (static_cast<double>(shape_.height) - 1.0) / 2.0; }

  double mean() const noexcept;

  bool operator==(const ImageTensor& other) const noexcept {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  Shape shape_{};
  std::vector<double> data_;
  bool unnormalized_ = false;
};

// Bilinear interpolation Q_x(k, i, j). Returns 0 outside [0, W-1] x [0, H-1], the
// exact pixel on integer grid points, and the four-corner weighted average otherwise.
// On the far edge (floor(i) == W-1) the fractional part is taken as 0 so no
// out-of-grid neighbour is read. Throws ArgumentError for an invalid channel.
double bilinear(const ImageTensor& x, std::size_t k, double i, double j);

// Same as `bilinear` without the channel check; for inner loops.
double bilinear_unchecked(const ImageTensor& x, std::size_t k, double i, double j) noexcept;

// Euclidean distance over all K*W*H entries. Throws ArgumentError on shape mismatch.
double l2_distance(const ImageTensor& a, const ImageTensor& b);

// Squared Euclidean distance; avoids the square root in aliasing bounds.
double l2_distance_squared(const ImageTensor& a, const ImageTensor& b);

double l1_distance(const ImageTensor& a, const ImageTensor& b);

}  // namespace semcert

#endif  // SEMCERT_TENSOR_HPP

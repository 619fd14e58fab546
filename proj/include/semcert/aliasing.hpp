#ifndef SEMCERT_ALIASING_HPP
#define SEMCERT_ALIASING_HPP

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "semcert/tensor.hpp"

namespace semcert {

// Rigorous upper bounds on the interpolation error between a rotated (or scaled)
// image and its nearest pre-computed anchor, obtained from interval Lipschitz bounds.

enum class GeometricKind { rotation, scaling };

// Two-level parameter grid. Rotation anchors are uniform from a to b; scaling anchors
// are harmonic, a b / (a + (b - a) t), decreasing from b to a. Each outer interval is
// split into n_inner - 1 equal sub-intervals.
struct IntervalGrid {
  double a = 0.0;
  double b = 0.0;
  std::size_t n_outer = 2;
  std::size_t n_inner = 2;
  GeometricKind kind = GeometricKind::rotation;

  // Throws ArgumentError unless a < b, N >= 2, R >= 2, and a > 0 for scaling.
  void validate() const;
  // Anchor number i in 0..N-1, in the grid's natural order.
  double anchor(std::size_t i) const;
  std::vector<double> anchors() const;
};

struct GridCell {
  long long i;
  long long j;
  auto operator<=>(const GridCell&) const = default;
};

// Cells (floor(f1), floor(f2)) visited by the source point of output pixel (r, s) while
// the parameter sweeps [t1, t2]. The curve is sampled at most 0.25 source pixels apart
// and every cell meeting the (slightly widened) bounding box of two consecutive samples
// is kept, so the result contains every cell of the continuous curve. Cells are clipped
// to [0, W-1] x [0, H-1]. For scaling only the part of the curve inside the image
// contributes. Sorted, without duplicates.
std::vector<GridCell> grid_pixel_trajectory(const Shape& shape, GeometricKind kind, std::size_t r,
                                            std::size_t s, double t1, double t2);

// Corner statistics over a cell set for channel k. Corners outside the pixel grid
// count as 0.
struct ColorStats {
  double m_bar;    // largest corner value
  double m_min;    // smallest corner value
  double m_delta;  // largest (corner max - corner min) within one cell
};
// Throws ArgumentError for an empty cell set or invalid channel.
ColorStats max_color_stats(const ImageTensor& x, std::size_t k, std::span<const GridCell> cells);

// Lipschitz constant on [t1, t2] of g(alpha) = ||phi(x, alpha) - phi(x, anchor)||^2 for
// any anchor in the interval. Per pixel and channel it is 2 sqrt(2) |rho'| m_delta D,
// where D bounds |Q(rho(alpha)) - Q(rho(anchor))|: the smaller of the value span
// (extended to include 0) and sqrt(2) m_delta times the curve length over the interval.
double rotation_interval_lipschitz(const ImageTensor& x, double t1, double t2);
// Same for scaling, with |rho'| <= dist / t1^2. Valid on each continuity piece; pixels
// that enter the image inside the interval use the value span for D.
// Throws ArgumentError for t1 <= 0 or t1 >= t2.
double scaling_interval_lipschitz(const ImageTensor& x, double t1, double t2);

// Scale factors in [a, b] at which a row or column of the source coordinates reaches
// the image border: |r - c_W| / c_W and |s - c_H| / c_H. Sorted, duplicates removed.
std::vector<double> scaling_discontinuities(std::size_t width, std::size_t height, double a, double b);

// g(alpha) = ||phi(x, alpha) - phi(x, anchor)||^2.
double squared_sampling_error(const ImageTensor& x, GeometricKind kind, double anchor, double alpha);

struct IntervalBound {
  double lo;
  double hi;
  double lipschitz;
  double m;  // upper bound on min over the two end anchors of g, squared units
  std::optional<double> discontinuity;
};

struct AliasingBound {
  double m_value = 0.0;       // upper bound on the squared maximum sampling error
  double sqrt_m = 0.0;        // sqrt(m_value), comparable to an l2 radius
  double lipschitz_l = 0.0;   // largest interval Lipschitz constant
  std::vector<IntervalBound> per_interval;
};

// Bound over the whole grid. For scaling, a sub-interval containing a discontinuity t
// is split at t and each side is bounded from its far endpoint. Throws ConfigError when
// an outer interval contains more than one discontinuity.
AliasingBound aliasing_bound(const ImageTensor& x, const IntervalGrid& grid, unsigned threads = 1);

}  // namespace semcert

#endif  // SEMCERT_ALIASING_HPP

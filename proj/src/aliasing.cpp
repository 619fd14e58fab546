#include "semcert/aliasing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "semcert/errors.hpp"
#include "semcert/transforms.hpp"

namespace semcert {

void IntervalGrid::validate() const {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw ArgumentError("grid needs a < b");
  if (n_outer < 2 || n_inner < 2) throw ArgumentError("grid needs N >= 2 and R >= 2");
  if (kind == GeometricKind::scaling && !(a > 0.0)) throw ArgumentError("scaling grid needs a > 0");
}

double IntervalGrid::anchor(std::size_t i) const {
  if (i >= n_outer) throw ArgumentError("anchor index out of range");
  const double t = static_cast<double>(i) / static_cast<double>(n_outer - 1);
  if (kind == GeometricKind::rotation) {
    if (i == n_outer - 1) return b;
    return a + (b - a) * t;
  }
  if (i == 0) return b;
  if (i == n_outer - 1) return a;
  return a * b / (a + (b - a) * t);
}

std::vector<double> IntervalGrid::anchors() const {
  validate();
  std::vector<double> out(n_outer);
  for (std::size_t i = 0; i < n_outer; ++i) out[i] = anchor(i);
  return out;
}

namespace {

constexpr double kMaxStep = 0.25;

struct Center {
  double cw;
  double ch;
};

Center center_of(const Shape& s) {
  return {(static_cast<double>(s.width) - 1.0) / 2.0, (static_cast<double>(s.height) - 1.0) / 2.0};
}

// Smallest scale factor at which output pixel offset (u, v) samples inside the image.
double scaling_threshold(double u, double v, const Center& c) {
  const double tu = c.cw > 0.0 ? std::abs(u) / c.cw : 0.0;
  const double tv = c.ch > 0.0 ? std::abs(v) / c.ch : 0.0;
  return std::max(tu, tv);
}

// Cells met by a curve given through samples at parameters f = m / steps. The piece of
// curve between two consecutive samples stays within `bulge` of their chord, so the
// chord's bounding box widened by `bulge` covers it. An axis along which the curve is
// exactly constant gets no widening at all.
template <class PointAt>
std::vector<GridCell> rasterize(const Shape& shape, double length, double bulge, PointAt point_at) {
  const auto steps = static_cast<long long>(std::max(1.0, std::ceil(length / kMaxStep)));
  const auto wmax = static_cast<long long>(shape.width) - 1;
  const auto hmax = static_cast<long long>(shape.height) - 1;
  constexpr double rounding = 1e-9;

  std::vector<GridCell> cells;
  auto add_range = [&](double i_lo, double i_hi, double j_lo, double j_hi) {
    const auto i0 = std::max(0LL, static_cast<long long>(std::floor(i_lo)));
    const auto i1 = std::min(wmax, static_cast<long long>(std::floor(i_hi)));
    const auto j0 = std::max(0LL, static_cast<long long>(std::floor(j_lo)));
    const auto j1 = std::min(hmax, static_cast<long long>(std::floor(j_hi)));
    for (long long i = i0; i <= i1; ++i) {
      for (long long j = j0; j <= j1; ++j) cells.push_back({i, j});
    }
  };

  SourcePoint prev = point_at(0.0);
  for (long long m = 1; m <= steps; ++m) {
    const SourcePoint p = point_at(static_cast<double>(m) / static_cast<double>(steps));
    const double ei = p.i == prev.i ? 0.0 : bulge + rounding;
    const double ej = p.j == prev.j ? 0.0 : bulge + rounding;
    add_range(std::min(p.i, prev.i) - ei, std::max(p.i, prev.i) + ei, std::min(p.j, prev.j) - ej,
              std::max(p.j, prev.j) + ej);
    prev = p;
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

double corner(const ImageTensor& x, std::size_t k, long long i, long long j) {
  if (i < 0 || j < 0 || i >= static_cast<long long>(x.width()) || j >= static_cast<long long>(x.height())) {
    return 0.0;
  }
  return x.at(k, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
}

// Per-pixel term of the Lipschitz constant of (Q(rho(alpha)) - Q(rho(anchor)))^2, summed
// over channels. Along the curve |dQ/dalpha| <= m_delta (|rho_i'| + |rho_j'|)
// <= sqrt(2) m_delta speed, and the difference to the anchor value is at most the value
// span, or sqrt(2) m_delta times the path length when the pixel stays inside the image
// on the whole interval.
double pixel_lipschitz(const ImageTensor& x, const std::vector<GridCell>& cells, double speed,
                       double path_length, bool switches) {
  if (cells.empty() || speed == 0.0) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < x.channels(); ++k) {
    const auto st = max_color_stats(x, k, cells);
    double difference = std::max(st.m_bar, 0.0) - std::min(st.m_min, 0.0);
    if (!switches) difference = std::min(difference, std::numbers::sqrt2 * st.m_delta * path_length);
    total += 2.0 * std::numbers::sqrt2 * speed * st.m_delta * difference;
  }
  return total;
}

ImageTensor transform_of(const ImageTensor& x, GeometricKind kind, double alpha) {
  return kind == GeometricKind::rotation ? rotate(x, alpha) : scale(x, alpha);
}

}  // namespace

std::vector<GridCell> grid_pixel_trajectory(const Shape& shape, GeometricKind kind, std::size_t r,
                                            std::size_t s, double t1, double t2) {
  if (!(t1 < t2)) throw ArgumentError("trajectory interval needs t1 < t2");
  if (r >= shape.width || s >= shape.height) throw ArgumentError("pixel outside the image");
  const Center c = center_of(shape);
  const double u = static_cast<double>(r) - c.cw;
  const double v = static_cast<double>(s) - c.ch;
  const double d = std::hypot(u, v);

  if (kind == GeometricKind::rotation) {
    // An arc of angle theta sits at most d (1 - cos(theta / 2)) <= d theta^2 / 8 off its chord.
    const double length = d * (t2 - t1);
    const double theta = (t2 - t1) / std::max(1.0, std::ceil(length / kMaxStep));
    return rasterize(shape, length, d * theta * theta / 8.0, [&](double f) {
      return rotation_source(shape, static_cast<double>(r), static_cast<double>(s), t1 + (t2 - t1) * f);
    });
  }

  if (!(t1 > 0.0)) throw ArgumentError("scaling trajectory needs t1 > 0");
  // The source point c + (p - c) w is linear in w = 1/s; keep the part inside the image.
  const double threshold = scaling_threshold(u, v, c);
  const double wmin = 1.0 / t2;
  const double wmax = threshold > 0.0 ? std::min(1.0 / t1, 1.0 / threshold) : 1.0 / t1;
  if (wmax < wmin) return {};
  return rasterize(shape, d * (wmax - wmin), 0.0, [&](double f) {
    const double w = wmin + (wmax - wmin) * f;
    return SourcePoint{c.cw + u * w, c.ch + v * w};
  });
}

ColorStats max_color_stats(const ImageTensor& x, std::size_t k, std::span<const GridCell> cells) {
  if (cells.empty()) throw ArgumentError("max_color_stats needs at least one cell");
  if (k >= x.channels()) throw ArgumentError("channel index out of range");
  ColorStats st{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& cell : cells) {
    const double v[4] = {corner(x, k, cell.i, cell.j), corner(x, k, cell.i + 1, cell.j),
                         corner(x, k, cell.i, cell.j + 1), corner(x, k, cell.i + 1, cell.j + 1)};
    const auto [lo, hi] = std::minmax_element(std::begin(v), std::end(v));
    st.m_bar = std::max(st.m_bar, *hi);
    st.m_min = std::min(st.m_min, *lo);
    st.m_delta = std::max(st.m_delta, *hi - *lo);
  }
  return st;
}

double rotation_interval_lipschitz(const ImageTensor& x, double t1, double t2) {
  if (!(t1 < t2)) throw ArgumentError("interval needs t1 < t2");
  const Shape& shape = x.shape();
  const Center c = center_of(shape);
  double total = 0.0;
  for (std::size_t r = 0; r < shape.width; ++r) {
    for (std::size_t s = 0; s < shape.height; ++s) {
      if (!inside_rotation_disk(shape, r, s)) continue;
      const double d = std::hypot(static_cast<double>(r) - c.cw, static_cast<double>(s) - c.ch);
      const auto cells = grid_pixel_trajectory(shape, GeometricKind::rotation, r, s, t1, t2);
      total += pixel_lipschitz(x, cells, d, d * (t2 - t1), false);
    }
  }
  return total;
}

namespace {

// With `same_piece` set to a discontinuity t, the constant only has to hold for an anchor
// on the same side of t as alpha, so pixels entering the image exactly at t keep a
// continuous value between the two and need no value-span fallback.
double scaling_lipschitz(const ImageTensor& x, double t1, double t2, std::optional<double> same_piece) {
  if (!(t1 > 0.0)) throw ArgumentError("scaling interval needs t1 > 0");
  if (!(t1 < t2)) throw ArgumentError("interval needs t1 < t2");
  const Shape& shape = x.shape();
  const Center c = center_of(shape);
  double total = 0.0;
  for (std::size_t r = 0; r < shape.width; ++r) {
    for (std::size_t s = 0; s < shape.height; ++s) {
      const double u = static_cast<double>(r) - c.cw;
      const double v = static_cast<double>(s) - c.ch;
      const double dist = std::hypot(u, v);
      const double threshold = scaling_threshold(u, v, c);
      const auto cells = grid_pixel_trajectory(shape, GeometricKind::scaling, r, s, t1, t2);
      bool switches = threshold >= t1 && threshold <= t2;
      if (switches && same_piece) {
        switches = std::abs(threshold - *same_piece) > 1e-12 * std::max(1.0, *same_piece);
      }
      total += pixel_lipschitz(x, cells, dist / (t1 * t1), dist * (1.0 / t1 - 1.0 / t2), switches);
    }
  }
  return total;
}

}  // namespace

double scaling_interval_lipschitz(const ImageTensor& x, double t1, double t2) {
  return scaling_lipschitz(x, t1, t2, std::nullopt);
}

std::vector<double> scaling_discontinuities(std::size_t width, std::size_t height, double a, double b) {
  if (!(a > 0.0) || !(a < b)) throw ArgumentError("scaling range needs 0 < a < b");
  std::vector<double> out;
  auto collect = [&](std::size_t n) {
    if (n < 2) return;
    const double c = (static_cast<double>(n) - 1.0) / 2.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double t = std::abs(static_cast<double>(r) - c) / c;
      if (t >= a && t <= b) out.push_back(t);
    }
  };
  collect(width);
  collect(height);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double p, double q) { return std::abs(p - q) <= 1e-12 * std::max(1.0, std::abs(q)); }),
            out.end());
  return out;
}

double squared_sampling_error(const ImageTensor& x, GeometricKind kind, double anchor, double alpha) {
  return l2_distance_squared(transform_of(x, kind, alpha), transform_of(x, kind, anchor));
}

namespace {

IntervalBound bound_interval(const ImageTensor& x, const IntervalGrid& grid, double lo, double hi,
                             const std::vector<double>& discontinuities) {
  IntervalBound out{lo, hi, 0.0, 0.0, std::nullopt};
  const bool rotation = grid.kind == GeometricKind::rotation;
  out.lipschitz = rotation ? rotation_interval_lipschitz(x, lo, hi) : scaling_interval_lipschitz(x, lo, hi);
  const double lip = out.lipschitz;

  for (double t : discontinuities) {
    if (t < lo || t > hi) continue;
    if (out.discontinuity) {
      throw ConfigError("outer interval [" + std::to_string(lo) + ", " + std::to_string(hi) +
                        "] contains more than one discontinuity; increase the number of anchors N");
    }
    out.discontinuity = t;
  }

  const ImageTensor anchor_lo = transform_of(x, grid.kind, lo);
  const ImageTensor anchor_hi = transform_of(x, grid.kind, hi);
  const std::size_t r = grid.n_inner;
  std::vector<double> g_lo(r), g_hi(r), gamma(r);
  for (std::size_t j = 0; j < r; ++j) {
    gamma[j] = j + 1 == r ? hi : lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(r - 1);
    if (j == 0) {
      g_lo[j] = 0.0;
      g_hi[j] = l2_distance_squared(anchor_lo, anchor_hi);
    } else if (j + 1 == r) {
      g_lo[j] = l2_distance_squared(anchor_hi, anchor_lo);
      g_hi[j] = 0.0;
    } else {
      const ImageTensor img = transform_of(x, grid.kind, gamma[j]);
      g_lo[j] = l2_distance_squared(img, anchor_lo);
      g_hi[j] = l2_distance_squared(img, anchor_hi);
    }
  }

  // Constants for an anchor on the same side of the discontinuity as alpha and for an
  // anchor across it. Without a discontinuity both are the interval constant.
  const double lip_same = out.discontinuity ? scaling_lipschitz(x, lo, hi, out.discontinuity) : lip;
  const double t = out.discontinuity.value_or(hi + 1.0);

  for (std::size_t j = 0; j + 1 < r; ++j) {
    const double u = gamma[j];
    const double v = gamma[j + 1];
    double sub;
    if (t >= u && t <= v) {
      // g jumps at t. Bound [u, t) from u and [t, v] from v, each with its better anchor;
      // t itself is never sampled and, when t == v, it is covered by the next sub-interval.
      // The anchor lo lies on the [lo, t) side, hi on the [t, hi] side.
      const double left =
          t > u ? std::min(g_lo[j] + lip_same * (t - u), g_hi[j] + lip * (t - u)) : 0.0;
      const double right =
          t < v ? std::min(g_lo[j + 1] + lip * (v - t), g_hi[j + 1] + lip_same * (v - t)) : 0.0;
      sub = std::max(left, right);
    } else {
      // sup of an L-Lipschitz f on [u, v] is at most (f(u) + f(v)) / 2 + L (v - u) / 2.
      const double lip_lo = v < t ? lip_same : lip;
      const double lip_hi = u > t ? lip_same : lip;
      sub = std::min(0.5 * (g_lo[j] + g_lo[j + 1]) + 0.5 * lip_lo * (v - u),
                     0.5 * (g_hi[j] + g_hi[j + 1]) + 0.5 * lip_hi * (v - u));
    }
    out.m = std::max(out.m, sub);
  }
  return out;
}

}  // namespace

AliasingBound aliasing_bound(const ImageTensor& x, const IntervalGrid& grid, unsigned threads) {
  grid.validate();
  const auto anchors = grid.anchors();
  const std::vector<double> discontinuities =
      grid.kind == GeometricKind::scaling ? scaling_discontinuities(x.width(), x.height(), grid.a, grid.b)
                                          : std::vector<double>{};

  const std::size_t intervals = grid.n_outer - 1;
  std::vector<IntervalBound> bounds(intervals);
  auto work = [&](std::size_t i) {
    const double lo = std::min(anchors[i], anchors[i + 1]);
    const double hi = std::max(anchors[i], anchors[i + 1]);
    bounds[i] = bound_interval(x, grid, lo, hi, discontinuities);
  };

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, intervals);
  if (workers == 1) {
    for (std::size_t i = 0; i < intervals; ++i) work(i);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < intervals; i += workers) work(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  AliasingBound out;
  for (const auto& b : bounds) {
    out.m_value = std::max(out.m_value, b.m);
    out.lipschitz_l = std::max(out.lipschitz_l, b.lipschitz);
  }
  out.sqrt_m = std::sqrt(out.m_value);
  out.per_interval = std::move(bounds);
  return out;
}

}  // namespace semcert

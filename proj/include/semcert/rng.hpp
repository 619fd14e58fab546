#ifndef SEMCERT_RNG_HPP
#define SEMCERT_RNG_HPP

#include <cstdint>

namespace semcert {

// Counter-based generator: every value is a pure function of
// (seed, stream, draw, component), so parallel workers that split the draw range
// reproduce exactly what a sequential loop would produce.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : seed_(seed), stream_(stream) {}

  std::uint64_t bits(std::uint64_t draw, std::uint64_t component) const noexcept;

  // Uniform on the open interval (0, 1).
  double uniform(std::uint64_t draw, std::uint64_t component) const noexcept;

  // Standard normal via the Box-Muller pair transform of uniforms
  // (2 * component, 2 * component + 1).
  double normal(std::uint64_t draw, std::uint64_t component) const noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  CounterRng with_stream(std::uint64_t stream) const noexcept { return CounterRng(seed_, stream); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace semcert

#endif  // SEMCERT_RNG_HPP

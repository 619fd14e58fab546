#include "semcert/rng.hpp"

#include <cmath>
#include <numbers>

namespace semcert {

namespace {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t draw, std::uint64_t component) const noexcept {
  std::uint64_t h = mix64(seed_);
  h = mix64(h ^ stream_);
  h = mix64(h ^ draw);
  h = mix64(h ^ component);
  return h;
}

double CounterRng::uniform(std::uint64_t draw, std::uint64_t component) const noexcept {
  return (static_cast<double>(bits(draw, component) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t draw, std::uint64_t component) const noexcept {
  const double u1 = uniform(draw, 2 * component);
  const double u2 = uniform(draw, 2 * component + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace semcert

#include "hsto/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace hsto {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (0x9e3779b97f4a7c15ULL + b + (a << 6) + (a >> 2)));
}

double to_unit(std::uint64_t x) {
  // (0, 1]: 53 mantissa bits, shifted away from zero so log() is safe
  return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

PathStream::PathStream(std::uint64_t seed, std::uint64_t path)
    : seed_(seed), path_(path), base_(combine(mix64(seed), path)) {}

double PathStream::uniform(std::uint64_t step, std::uint64_t idx) const {
  return to_unit(combine(combine(base_, step), idx));
}

double PathStream::normal(std::uint64_t step, std::uint64_t idx) const {
  // Box-Muller on two counter draws; idx selects the pair member.
  const std::uint64_t pair = idx / 2;
  const double u1 = uniform(step, 2 * pair);
  const double u2 = uniform(step, 2 * pair + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  return (idx % 2 == 0) ? r * std::cos(kTwoPi * u2) : r * std::sin(kTwoPi * u2);
}

BrownianIncrements sample_increments(const PathStream& stream, std::uint64_t step, int n,
                                     double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample_increments: dt must be positive");
  BrownianIncrements out;
  out.dt = dt;
  out.dW.resize(n);
  const double s = std::sqrt(dt);
  for (int i = 0; i < n; ++i) out.dW[i] = s * stream.normal(step, static_cast<std::uint64_t>(i));
  return out;
}

}  // namespace hsto

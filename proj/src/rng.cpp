#include "areal/rng.hpp"

#include <cmath>

namespace areal {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

Rng Rng::substream(std::uint64_t seed, std::string_view name,
                   std::uint64_t index) {
  std::uint64_t mixed = splitmix64(seed ^ fnv1a(name));
  mixed = splitmix64(mixed ^ index);
  return Rng(mixed);
}

double Rng::uniform() {
  // 53-bit mantissa in (0, 1): offset by half an ulp so 0 is excluded.
  return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  has_spare_ = true;
  return u * m;
}

double Rng::gamma(double shape, double rate) {
  // Marsaglia-Tsang squeeze; shape < 1 boosted through the shape+1 draw.
  if (shape < 1.0) {
    const double u = uniform();
    return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return d * v / rate;
  }
}

double Rng::inverse_gamma(double shape, double rate) {
  return 1.0 / gamma(shape, rate);
}

std::uint64_t Rng::integer(std::uint64_t bound) {
  // Rejection to kill modulo bias.
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t r;
  do {
    r = gen_();
  } while (r >= limit);
  return r % bound;
}

}  // namespace areal

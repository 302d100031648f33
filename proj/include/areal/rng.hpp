#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace areal {

/// Deterministic random stream. All randomness in the library flows from a
/// single 64-bit seed through named substreams, so adding a consumer never
/// perturbs the draws seen by existing ones.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Stream derived from (seed, name, index). Same triple, same stream.
  static Rng substream(std::uint64_t seed, std::string_view name,
                       std::uint64_t index = 0);

  /// Uniform on (0, 1); never returns an exact endpoint.
  double uniform();

  /// Standard normal (polar method, cached spare).
  double normal();

  /// Gamma(shape, rate), density x^{a-1} e^{-rate x}; shape, rate > 0.
  double gamma(double shape, double rate);

  /// Inverse gamma with shape-rate convention, density x^{-a-1} e^{-b/x}.
  double inverse_gamma(double shape, double rate);

  /// Uniform integer in [0, bound).
  std::uint64_t integer(std::uint64_t bound);

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace areal

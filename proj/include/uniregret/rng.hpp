#ifndef UNIREGRET_RNG_HPP
#define UNIREGRET_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace uniregret {

/// Engine and seed-splitting rule recorded in experiment outputs.
inline constexpr const char* kRngAlgorithm = "mt19937_64+splitmix64";

/// splitmix64 finalizer applied to seed + golden-ratio * (index + 1).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/**
 * Seedable generator with portable variates. std::mt19937_64 output is fixed
 * by the standard; the std distributions are not, so every variate used
 * by the experiments is derived here from raw 64-bit draws.
 */
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform on (0, 1).
  double uniform_open();

  /// Standard normal (Marsaglia polar method).
  double normal();

  /// Gamma(shape, 1) by Marsaglia-Tsang squeeze/rejection; shape > 0.
  double gamma(double shape);

  bool bernoulli(double p) { return uniform() < p; }

  /// Index drawn from a probability vector by inversion.
  std::size_t categorical(std::span<const double> probs);

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace uniregret

#endif  // UNIREGRET_RNG_HPP

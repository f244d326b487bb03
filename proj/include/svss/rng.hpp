#ifndef SVSS_RNG_HPP
#define SVSS_RNG_HPP

#include <array>
#include <cstdint>
#include <span>
#include <utility>

namespace svss {

/// Philox4x32-10 block function: maps a 128-bit counter to 128 random bits
/// under a 64-bit key.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Seedable, splittable counter-based generator.
///
/// A generator is a (key, stream) pair plus a block counter; draws are a pure
/// function of those three values, so runs are reproducible from the seed
/// alone. `split(id)` derives a statistically independent child generator
/// without advancing the parent, which lets every stochastic operation take
/// its own handle.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  Rng split(std::uint64_t id) const;

  std::uint64_t next_u64();
  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal draw (Box-Muller).
  double normal();
  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace svss

#endif  // SVSS_RNG_HPP

#pragma once

#include <cstdint>
#include <limits>

namespace shearmix {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream.
///
/// The key is a hash of (master_seed, stream_id); draw i is a hash of
/// (key, i). Substreams derive new ids by hashing, so a Monte Carlo loop can
/// hand sample k the stream `rng.substream(k)` and get the same numbers no
/// matter which thread runs it or in what order.
///
/// Satisfies UniformRandomBitGenerator. Not thread safe; one owner per stream.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : seed_(master_seed), id_(stream_id), key_(derive_key(master_seed, stream_id)) {}

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return id_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Child stream; distinct `child` values give unrelated sequences.
  RngStream substream(std::uint64_t child) const {
    return RngStream(seed_, mix64(id_ ^ mix64(child + 0x632BE59BD9B4E019ULL)));
  }

  std::uint64_t operator()() noexcept { return bits_at(counter_++); }
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  /// Random access: the word that the i-th call to operator() returns.
  std::uint64_t bits_at(std::uint64_t i) const noexcept {
    return mix64(key_ + i * 0xD1B54A32D192ED03ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return to_unit(operator()()); }
  double uniform_at(std::uint64_t i) const noexcept { return to_unit(bits_at(i)); }

  /// Standard normal via the Box-Muller transform (pairs are cached).
  double normal() noexcept;

  void discard(std::uint64_t n) noexcept { counter_ += n; }

 private:
  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t id) noexcept {
    return mix64(mix64(seed) ^ mix64(id + 0xA0761D6478BD642FULL));
  }
  static double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed_ = 0;
  std::uint64_t id_ = 0;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace shearmix

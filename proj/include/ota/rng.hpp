#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace ota {

/// Mixes a list of 64-bit words into one stream id. Used to give every
/// (trial, round, lane) triple its own independent stream so results do not
/// depend on how trials are scheduled across threads.
std::uint64_t derive_stream_id(std::initializer_list<std::uint64_t> parts) noexcept;

/// Deterministic random stream keyed by (seed, stream_id).
///
/// xoshiro256** seeded through splitmix64. All variate transforms are written
/// out here instead of using <random> distributions, whose algorithms are
/// implementation-defined; only libm rounding can differ between platforms.
/// A stream is a mutable value: copy it to fork, never share one between threads.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Standard exponential.
  double exponential() noexcept;
  /// Standard normal (Box-Muller, one cached value).
  double normal() noexcept;

private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> s_{};
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ota

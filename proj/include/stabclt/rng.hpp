#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace stabclt {

/// Counter-based random stream keyed by (master_seed, stream_index).
///
/// Output k of a stream is a bijective 64-bit mix of key + k * gamma, so a
/// stream's sequence depends only on its key pair and never on which worker
/// consumes it or in what order other streams are drawn. Replication i of an
/// experiment always uses stream_index i.
///
/// Satisfies UniformRandomBitGenerator. A single stream must not be shared
/// between threads.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream_index() const { return index_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Poisson(mean) variate; exact law. Inversion by sequential search below
  /// mean 30, Hormann's transformed rejection (PTRS) above.
  std::uint64_t poisson(double mean);
  /// Standard normal via Box-Muller (no cached second variate, so draws stay
  /// a pure function of the counter).
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t seed_;
  std::uint64_t index_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Deterministically derives a sub-seed for a named purpose so that
/// sub-experiments (levels, schedule entries) never share streams.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view purpose, std::uint64_t salt = 0);

}  // namespace stabclt

#pragma once

#include <cstdint>
#include <limits>

namespace nbconc {

// Identifies one random stream. Replication i of an experiment seeded with s
// uses {s, i}, so results do not depend on how replications are scheduled.
struct RngHandle {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  friend bool operator==(const RngHandle&, const RngHandle&) = default;
};

// Counter-based 64-bit generator: the n-th output is a keyed bijective mix of
// n, with the key derived from (master_seed, stream_index). Satisfies
// UniformRandomBitGenerator.
class StreamEngine {
 public:
  using result_type = std::uint64_t;

  explicit StreamEngine(RngHandle handle);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace nbconc

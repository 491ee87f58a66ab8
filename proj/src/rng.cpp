#include "nbconc/rng.hpp"

namespace nbconc {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

// SplitMix64 finalizer (Stafford variant 13).
std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

StreamEngine::StreamEngine(RngHandle handle)
    : key_(mix64(mix64(handle.master_seed + kGolden) ^ (handle.stream_index * 0xd1b54a32d192ed03ULL +
                                                       0x8cb92ba72f3d8dd7ULL))) {}

StreamEngine::result_type StreamEngine::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

}  // namespace nbconc

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace peerlab {

using Rng = std::mt19937_64;

// Seed for a named, independent random stream belonging to one experiment seed.
// Streams with different names never share state, so e.g. changing how much
// exploration noise is drawn cannot shift network initialization.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view stream);

inline Rng make_stream(std::uint64_t seed, std::string_view stream) {
  return Rng(derive_stream_seed(seed, stream));
}

namespace streams {
inline constexpr std::string_view kInit = "net-init";
inline constexpr std::string_view kEnv = "env";
inline constexpr std::string_view kReplay = "replay-sampling";
inline constexpr std::string_view kExploration = "exploration";
inline constexpr std::string_view kEval = "eval";
}  // namespace streams

}  // namespace peerlab

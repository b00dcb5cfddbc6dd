#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace kuramoto {

/// Tag that separates the random streams drawn from one master seed.
enum class Purpose : std::uint32_t {
  Disorder = 1,
  InitialPhases = 2,
  NetworkDiffusion = 3,
  ImfFrequencies = 4,
  SurrogateNoise = 5,
  EffectiveDiffusion = 6,
  Replicate = 7,
  SingleOscillator = 8,
  Check = 9,
};

/// Identifies one stream: purpose tag plus a two-level counter
/// (e.g. iteration and trial). Streams with distinct ids are independent.
struct StreamId {
  Purpose purpose;
  std::uint64_t index = 0;
  std::uint64_t sub = 0;
};

/// Child seed for `id` under `seed`. Pure function of its arguments, so
/// parallel workers can derive their streams without coordination.
std::uint64_t derive_seed(std::uint64_t seed, StreamId id);

class RngStream {
 public:
  using Engine = std::mt19937_64;

  RngStream(std::uint64_t seed, StreamId id);

  double normal() { return normal_(engine_); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  Engine& engine() { return engine_; }

 private:
  Engine engine_;
  // Ziggurat sampler; stateless between calls.
  boost::random::normal_distribution<double> normal_;
};

}  // namespace kuramoto

#include "kuramoto/rng.hpp"

#include <array>

namespace kuramoto {
namespace {

std::seed_seq make_seed_seq(std::uint64_t seed, StreamId id) {
  const auto tag = static_cast<std::uint32_t>(id.purpose);
  const std::array<std::uint32_t, 7> words{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      tag,
      static_cast<std::uint32_t>(id.index), static_cast<std::uint32_t>(id.index >> 32),
      static_cast<std::uint32_t>(id.sub), static_cast<std::uint32_t>(id.sub >> 32)};
  return std::seed_seq(words.begin(), words.end());
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, StreamId id) {
  auto seq = make_seed_seq(seed, id);
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

RngStream::RngStream(std::uint64_t seed, StreamId id) {
  auto seq = make_seed_seq(seed, id);
  engine_.seed(seq);
}

}  // namespace kuramoto

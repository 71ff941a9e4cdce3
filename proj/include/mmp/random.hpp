#ifndef MMP_RANDOM_HPP
#define MMP_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace mmp {

using Rng = std::mt19937_64;

/// Independent generator for one stream of a seeded experiment. The engine
/// state is a pure function of (seed, stream...), so trials can be generated
/// in any order or on any thread and still agree with a serial run.
inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * stream.size());
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (std::uint64_t s : stream) push(s);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace mmp

#endif  // MMP_RANDOM_HPP

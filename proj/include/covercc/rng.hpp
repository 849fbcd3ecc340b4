#pragma once

#include <cstdint>
#include <random>

namespace covercc {

// splitmix64 finalizer, used to turn (master seed, stream index) pairs into
// decorrelated engine seeds. Experiments give every repetition its own
// stream so reordering or parallelising reps cannot change any result.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(master, a), b);
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t stream = 0) {
  return std::mt19937_64(mix_seed(master, stream));
}

}  // namespace covercc

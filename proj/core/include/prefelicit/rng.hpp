#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace prefelicit {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to turn structured stream ids into seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent child seed from a parent seed and a path of stream
/// ids, e.g. deriveSeed(master, {trial, 2}). The same path always yields the
/// same seed.
inline std::uint64_t deriveSeed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(parent);
  for (std::uint64_t id : path) s = splitmix64(s ^ splitmix64(id + 0x632be59bd9b4e019ULL));
  return s;
}

}  // namespace prefelicit

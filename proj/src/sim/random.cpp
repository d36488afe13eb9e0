#include "ztmaf/sim/random.hpp"

#include <cmath>

namespace ztmaf::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s)
  {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose, std::uint64_t index)
{
  return splitmix64(splitmix64(splitmix64(master) ^ fnv1a(purpose)) ^ index);
}

double Rng::uniform01()
{
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n)
{
  // Rejection sampling keeps the draw unbiased.
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do
  {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::exponential(double rate)
{
  return -std::log1p(-uniform01()) / rate;
}

}  // namespace ztmaf::sim

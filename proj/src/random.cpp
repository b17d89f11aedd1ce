#include "auxabc/random.hpp"

namespace auxabc {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(seed + kGolden);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p + kGolden));
  return h;
}

RandomStream::result_type RandomStream::operator()() {
  ++counter_;
  return mix64(mix64(key_ + counter_ * kGolden) ^ key_);
}

double RandomStream::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() { return normal_(*this); }

RandomStream RandomStream::substream(std::initializer_list<std::uint64_t> path) const {
  return RandomStream(derive_key(key_, path));
}

}  // namespace auxabc

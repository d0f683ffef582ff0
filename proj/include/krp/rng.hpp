#ifndef KRP_RNG_HPP
#define KRP_RNG_HPP

#include <cstdint>

namespace krp {

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Counter-based SplitMix64 stream with cheap child-stream derivation.
// Child streams are statistically independent of the parent sequence, so a
// consumer that derives one child per logical unit of work (sample index,
// run index, drawn unit) stays reproducible no matter how the surrounding
// loop is restructured or parallelized.
class SplitRng {
 public:
  SplitRng() : SplitRng(0) {}
  explicit SplitRng(std::uint64_t seed) : key_(mix64(seed + 0x9e3779b97f4a7c15ULL)) {}

  // Derived stream for sub-task `index`; independent of this stream's cursor.
  SplitRng child(std::uint64_t index) const {
    SplitRng c;
    c.key_ = mix64((key_ ^ 0xd1b54a32d192ed03ULL) + 0x9e3779b97f4a7c15ULL * index);
    c.counter_ = 0;
    return c;
  }

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + 0x9e3779b97f4a7c15ULL * counter_);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1] (safe for log()).
  double next_double_pos() { return 1.0 - next_double(); }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace krp

#endif

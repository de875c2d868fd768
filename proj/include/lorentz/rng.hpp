#pragma once

#include <array>
#include <cstdint>

namespace lorentz {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// A block is a pure function of (counter, key): no hidden state.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Counter single_round(const Counter &c, const Key &k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Operation tags keep streams of different estimators disjoint even when
/// they share a seed and a trial index.
enum class StreamTag : std::uint32_t {
  SampleMu = 1,
  Clt = 2,
  Llt = 3,
  Wip = 4,
  Correlation = 5,
  Invariance = 6,
  InvarianceFresh = 7,
  CellMeasure = 8,
  CellStratified = 9,
  TailProb = 10,
  LpNorm = 11,
  LpBootstrap = 12,
  CharIncrement = 13,
  VolumeForm = 14,
  FlightTime = 15,
  Test = 99,
};

/// One independent uniform stream, addressed by (seed, tag, index).
/// Counter layout: word0 = block number, word1 = tag, words 2..3 = index.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamTag tag, std::uint64_t index)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        tag_(static_cast<std::uint32_t>(tag)),
        index_(index) {}

  std::uint64_t next_u64() {
    if (pos_ == 2) refill();
    return buf_[pos_++];
  }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  void refill() {
    const Philox4x32::Counter ctr{block_++, tag_, static_cast<std::uint32_t>(index_),
                                  static_cast<std::uint32_t>(index_ >> 32)};
    const auto out = Philox4x32::block(ctr, key_);
    buf_[0] = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    buf_[1] = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
    pos_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t tag_;
  std::uint64_t index_;
  std::uint32_t block_{0};
  std::array<std::uint64_t, 2> buf_{};
  int pos_{2};
};

/// Factory handed to estimators: streams are derived, never shared.
class StreamFactory {
 public:
  explicit StreamFactory(std::uint64_t seed) : seed_(seed) {}
  RandomStream stream(StreamTag tag, std::uint64_t index) const {
    return RandomStream(seed_, tag, index);
  }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace lorentz

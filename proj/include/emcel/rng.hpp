#pragma once

#include <array>
#include <cstdint>

namespace emcel {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) {
        constexpr std::uint32_t kMul0 = 0xD2511F53u;
        constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
        constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
        constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

/// Fair +-1 signs addressed by (seed, path, step). Each 128-bit Philox block
/// yields the signs of 128 consecutive steps, so a path walking forward calls
/// the generator once per 128 steps.
class SignStream {
public:
    SignStream(std::uint64_t seed, std::uint64_t path)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          path_lo_(static_cast<std::uint32_t>(path)), path_hi_(static_cast<std::uint32_t>(path >> 32)) {}

    /// +1 or -1 for step index k.
    int operator()(std::uint64_t k) {
        const std::uint64_t blk = k >> 7;
        if (blk != cached_block_) {
            bits_ = Philox4x32::block(
                {path_lo_, path_hi_, static_cast<std::uint32_t>(blk), static_cast<std::uint32_t>(blk >> 32)}, key_);
            cached_block_ = blk;
        }
        const unsigned bit = static_cast<unsigned>(k & 127u);
        return ((bits_[bit >> 5] >> (bit & 31u)) & 1u) ? 1 : -1;
    }

private:
    Philox4x32::Key key_;
    std::uint32_t path_lo_;
    std::uint32_t path_hi_;
    std::uint64_t cached_block_ = ~std::uint64_t{0};
    Philox4x32::Counter bits_{};
};

}  // namespace emcel

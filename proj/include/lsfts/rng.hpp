#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace lsfts {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by (seed, stream id): the 64-bit seed is the key
/// and the stream id fills the upper half of the 128-bit counter, the lower
/// half counts blocks within the stream. Any (seed, stream) pair can be
/// drawn independently of every other, so results do not depend on which
/// thread consumes which stream.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block generate(Block ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = Block{hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Stream-id namespaces, so different consumers of one seed never share a stream.
enum class StreamTag : std::uint64_t {
    BootstrapMultipliers = 1,
    GaussianInnovations = 2,
    StudentInnovations = 3,
    RunSeeds = 4,
    Test = 15,
};

inline std::uint64_t stream_id(StreamTag tag, std::uint64_t index) {
    return (static_cast<std::uint64_t>(tag) << 56) ^ index;
}

/// Sequential draws from one Philox stream.
///
/// Uniforms use the top 53 bits of a 64-bit word, shifted to the open
/// interval (0,1). Normals use Box-Muller (both outputs are consumed).
/// Student-t with integer degrees of freedom nu is Z / sqrt(chi2_nu / nu),
/// the chi-square built from nu squared normals.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

    std::uint64_t next_u64() {
        if (word_ == 2) refill();
        const std::uint64_t lo = block_[2 * word_];
        const std::uint64_t hi = block_[2 * word_ + 1];
        ++word_;
        return (hi << 32) | lo;
    }

    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

    double next_student_t(int nu) {
        const double z = next_normal();
        double chi2 = 0.0;
        for (int i = 0; i < nu; ++i) {
            const double g = next_normal();
            chi2 += g * g;
        }
        return z / std::sqrt(chi2 / static_cast<double>(nu));
    }

private:
    void refill() {
        const Philox4x32::Block ctr{static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                                    static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        block_ = Philox4x32::generate(ctr, key_);
        ++counter_;
        word_ = 0;
    }

    Philox4x32::Key key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    Philox4x32::Block block_{};
    int word_ = 2;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Seed for sub-experiment `index` derived from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return RandomStream(master, stream_id(StreamTag::RunSeeds, index)).next_u64();
}

inline constexpr const char* kRngName = "philox4x32-10";

}  // namespace lsfts

#pragma once

#include <array>
#include <cstdint>

namespace garchpd {

// Philox4x32-10 (Salmon et al., SC'11). Counter-based: output depends only
// on (counter, key), so any path can be generated independently.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit Philox4x32(std::uint64_t seed)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    Counter operator()(Counter c) const {
        Key k = key_;
        for (int round = 0; round < 10; ++round) {
            if (round) {
                k[0] += 0x9E3779B9u;
                k[1] += 0xBB67AE85u;
            }
            std::uint64_t p0 = std::uint64_t(0xD2511F53u) * c[0];
            std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
        }
        return c;
    }

private:
    Key key_;
};

// Uniform on (0,1) from the top 52 bits; never 0 or 1 (with 53 bits the
// largest midpoint would round up to 1).
inline double philox_uniform(std::uint64_t bits) {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

}  // namespace garchpd

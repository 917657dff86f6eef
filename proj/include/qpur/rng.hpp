#pragma once

#include <array>
#include <cstdint>

namespace qpur {

using Philox4x32Ctr = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

// Philox4x32 with the standard 10 rounds (Salmon et al., SC'11).
Philox4x32Ctr philox4x32_10(Philox4x32Ctr ctr, Philox4x32Key key);

// Independent stream for (master seed, stream index, substream).
// Counter layout: {block, substream, stream lo, stream hi}; key = seed.
class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream = 0);

    std::uint32_t next_u32();
    // Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    // Standard normal via Box-Muller; pairs are cached.
    double normal();
    // Uniform integer in [0, n).
    std::uint32_t below(std::uint32_t n);

private:
    void refill();

    Philox4x32Key key_{};
    Philox4x32Ctr ctr_{};
    Philox4x32Ctr buf_{};
    int pos_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace qpur

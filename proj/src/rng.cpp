#include "qpur/rng.hpp"

#include <cmath>

#include "qpur/types.hpp"

namespace qpur {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

} // namespace

Philox4x32Ctr philox4x32_10(Philox4x32Ctr c, Philox4x32Key k) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kW0;
            k[1] += kW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

PhiloxStream::PhiloxStream(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream) {
    key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    ctr_ = {0u, substream, static_cast<std::uint32_t>(stream),
            static_cast<std::uint32_t>(stream >> 32)};
}

void PhiloxStream::refill() {
    buf_ = philox4x32_10(ctr_, key_);
    ++ctr_[0];
    pos_ = 0;
}

std::uint32_t PhiloxStream::next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
}

double PhiloxStream::uniform() {
    const std::uint64_t a = next_u32() >> 5;
    const std::uint64_t b = next_u32() >> 6;
    const std::uint64_t k = (a << 26) | b;
    return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double PhiloxStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * kPi * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
}

std::uint32_t PhiloxStream::below(std::uint32_t n) {
    // Lemire's multiply-shift with rejection for exact uniformity.
    std::uint64_t m = static_cast<std::uint64_t>(next_u32()) * n;
    std::uint32_t l = static_cast<std::uint32_t>(m);
    if (l < n) {
        const std::uint32_t t = static_cast<std::uint32_t>(-n) % n;
        while (l < t) {
            m = static_cast<std::uint64_t>(next_u32()) * n;
            l = static_cast<std::uint32_t>(m);
        }
    }
    return static_cast<std::uint32_t>(m >> 32);
}

} // namespace qpur

#include "apnn/rng.hpp"

namespace apnn {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::uint32_t mulhi(std::uint32_t a, std::uint32_t b, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    return static_cast<std::uint32_t>(p >> 32);
}

}  // namespace

Philox::Philox(std::uint64_t seed) {
    key_[0] = static_cast<std::uint32_t>(seed);
    key_[1] = static_cast<std::uint32_t>(seed >> 32);
}

std::array<std::uint32_t, 4> Philox::block(const std::array<std::uint32_t, 2>& key,
                                           const std::array<std::uint32_t, 4>& ctr) {
    std::array<std::uint32_t, 4> x = ctr;
    std::uint32_t k0 = key[0];
    std::uint32_t k1 = key[1];
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, lo1;
        const std::uint32_t hi0 = mulhi(kPhiloxM0, x[0], lo0);
        const std::uint32_t hi1 = mulhi(kPhiloxM1, x[2], lo1);
        const std::array<std::uint32_t, 4> y = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
        x = y;
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return x;
}

Philox Philox::split(std::uint64_t id) const {
    const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(id),
                                              static_cast<std::uint32_t>(id >> 32), 0xA5A5A5A5u,
                                              0x5C5C5C5Cu};
    const auto out = block(key_, ctr);
    Philox child;
    child.key_ = {out[0], out[1]};
    return child;
}

std::uint32_t Philox::next_u32() {
    if (buffered_ == 0) {
        const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(counter_),
                                                  static_cast<std::uint32_t>(counter_ >> 32), 0u,
                                                  0u};
        buffer_ = block(key_, ctr);
        ++counter_;
        buffered_ = 4;
    }
    return buffer_[4 - buffered_--];
}

std::uint64_t Philox::next_u64() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
}

double Philox::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Philox::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

}  // namespace apnn

#pragma once

#include <array>
#include <cstdint>

namespace apnn {

// Philox4x32-10 counter-based generator. Counter-based streams give
// reproducible draws for a fixed (seed, stream, position) triple on any
// platform, and splitting is cheap: a child stream is keyed by one block of
// the parent, so substreams never overlap in practice.
class Philox {
public:
    explicit Philox(std::uint64_t seed);

    // Independent child stream derived from (this stream, id).
    Philox split(std::uint64_t id) const;

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Uniform on [lo, hi).
    double uniform(double lo, double hi);

private:
    Philox() = default;
    static std::array<std::uint32_t, 4> block(const std::array<std::uint32_t, 2>& key,
                                              const std::array<std::uint32_t, 4>& ctr);

    std::array<std::uint32_t, 2> key_{};
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffered_ = 0;  // unread words left in buffer_
};

}  // namespace apnn

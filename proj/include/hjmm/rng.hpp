#pragma once

#include <cmath>
#include <cstdint>

namespace hjmm {

// Philox4x32-10 counter-based generator. Chosen over the std engines because
// ensembles need per-path streams that are independent of sampling order:
// stream (a, b) plus a 64-bit block counter addresses 2^128 distinct blocks
// under one seed, so path p / driver d can draw from stream (p, d) without
// any coordination.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream_a = 0, std::uint64_t stream_b = 0)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          ctr2_(static_cast<std::uint32_t>(stream_a ^ (stream_a >> 32))),
          ctr3_(static_cast<std::uint32_t>(stream_b ^ (stream_b >> 32))) {
        // fold the high stream words into the key so full 64-bit stream ids
        // cannot collide after the 32-bit truncation above
        key0_ ^= static_cast<std::uint32_t>(stream_a >> 32) * 0x9E3779B9u;
        key1_ ^= static_cast<std::uint32_t>(stream_b >> 32) * 0xBB67AE85u;
    }

    std::uint32_t next_u32() {
        if (buf_pos_ == 4) {
            generate_block();
            buf_pos_ = 0;
        }
        return buf_[buf_pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return lo | (hi << 32);
    }

    // uniform on the open interval (0,1); never returns an endpoint
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; the second deviate of each pair is cached
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    // exponential with the given rate (inter-arrival clock)
    double exponential(double rate) {
        return -std::log(uniform()) / rate;
    }

private:
    static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
        const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(p >> 32);
        lo = static_cast<std::uint32_t>(p);
    }

    void generate_block() {
        std::uint32_t x0 = static_cast<std::uint32_t>(block_);
        std::uint32_t x1 = static_cast<std::uint32_t>(block_ >> 32);
        std::uint32_t x2 = ctr2_;
        std::uint32_t x3 = ctr3_;
        std::uint32_t k0 = key0_;
        std::uint32_t k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                k0 += 0x9E3779B9u;
                k1 += 0xBB67AE85u;
            }
            std::uint32_t hi0, lo0, hi1, lo1;
            mulhilo(0xD2511F53u, x0, hi0, lo0);
            mulhilo(0xCD9E8D57u, x2, hi1, lo1);
            const std::uint32_t y0 = hi1 ^ x1 ^ k0;
            const std::uint32_t y1 = lo1;
            const std::uint32_t y2 = hi0 ^ x3 ^ k1;
            const std::uint32_t y3 = lo0;
            x0 = y0;
            x1 = y1;
            x2 = y2;
            x3 = y3;
        }
        buf_[0] = x0;
        buf_[1] = x1;
        buf_[2] = x2;
        buf_[3] = x3;
        ++block_;
    }

    std::uint32_t key0_, key1_;
    std::uint32_t ctr2_, ctr3_;
    std::uint64_t block_ = 0;
    std::uint32_t buf_[4] = {};
    int buf_pos_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace hjmm

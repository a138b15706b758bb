#include "crmlab/random.hpp"

#include <cmath>

#include "crmlab/errors.hpp"

namespace crm {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

}  // namespace

Philox4x32::Philox4x32(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

Philox4x32::Block Philox4x32::encrypt(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t lo0 = 0;
        std::uint32_t hi0 = 0;
        std::uint32_t lo1 = 0;
        std::uint32_t hi1 = 0;
        mulhilo(kMul0, ctr[0], lo0, hi0);
        mulhilo(kMul1, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

void Philox4x32::refill() {
    const Block ctr{static_cast<std::uint32_t>(block_index_), static_cast<std::uint32_t>(block_index_ >> 32),
                    static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    buffer_ = encrypt(ctr, key_);
    ++block_index_;
    used_ = 0;
}

Philox4x32::result_type Philox4x32::operator()() {
    if (used_ >= 4) {
        refill();
    }
    const std::uint64_t value = (static_cast<std::uint64_t>(buffer_[used_]) << 32) | buffer_[used_ + 1];
    used_ += 2;
    return value;
}

double Philox4x32::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double Philox4x32::uniform_open() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

std::uint64_t sample_poisson(Philox4x32& rng, double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw DomainError("Poisson mean must be finite and nonnegative");
    }
    if (mean == 0.0) {
        return 0;
    }
    if (mean < 30.0) {
        // Sequential search on the CDF.
        const double u = rng.uniform();
        double p = std::exp(-mean);
        double cdf = p;
        std::uint64_t k = 0;
        while (u >= cdf) {
            ++k;
            p *= mean / static_cast<double>(k);
            const double next = cdf + p;
            if (next == cdf) {
                break;  // remaining tail below rounding
            }
            cdf = next;
        }
        return k;
    }
    // PTRS: Hormann, "The transformed rejection method for generating Poisson random variables".
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) {
            return static_cast<std::uint64_t>(k);
        }
        if (k < 0.0 || (us < 0.013 && v > us)) {
            continue;
        }
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + k * loglam - std::lgamma(k + 1.0)) {
            return static_cast<std::uint64_t>(k);
        }
    }
}

}  // namespace crm

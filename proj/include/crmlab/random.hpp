#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace crm {

/// Philox4x32-10 counter-based generator.
///
/// The 64-bit seed is the key; the 64-bit stream id fills the upper half of the
/// counter, so (seed, stream) pairs index independent sequences and replicate i
/// of a Monte Carlo run can be regenerated without touching replicates 0..i-1.
class Philox4x32 {
  public:
    using result_type = std::uint64_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream);

    /// The raw bijection: ten rounds applied to `counter` under `key`.
    static Block encrypt(Block counter, Key key);

    result_type operator()();
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1).
    double uniform_open();

  private:
    void refill();

    Key key_;
    std::uint64_t stream_;
    std::uint64_t block_index_ = 0;
    Block buffer_{};
    unsigned used_ = 4;
};

/// Poisson variate: inversion for mean < 30, Hormann's PTRS rejection otherwise.
std::uint64_t sample_poisson(Philox4x32& rng, double mean);

}  // namespace crm

#pragma once

#include <cstdint>
#include <random>

#include "pmt/field.hpp"

namespace pmt {

// Seeded generator. mt19937_64 output is fixed by the standard; the
// bounded draws below avoid std distributions, whose output is not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Uniform in [0, bound) by rejection; bound > 0.
    std::uint64_t below(std::uint64_t bound);

    // Uniform nbits-bit value, nbits <= 128.
    elem_t bits(unsigned nbits);

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 eng_;
};

// Trial seed = mix(mix(master ^ index * 0x9e3779b97f4a7c15) + index), where mix
// is the splitmix64 finalizer. Independent of thread count.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace pmt

#include "pmt/rng.hpp"

#include "pmt/errors.hpp"

namespace pmt {

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw UsageError("Rng::below: zero bound");
    if ((bound & (bound - 1)) == 0) return next() & (bound - 1);
    const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % bound);
    for (;;) {
        const std::uint64_t x = next();
        if (x < limit) return x % bound;
    }
}

elem_t Rng::bits(unsigned nbits) {
    if (nbits > 128) throw UsageError("Rng::bits: more than 128 bits");
    if (nbits == 0) return 0;
    elem_t v = next();
    if (nbits > 64) v |= elem_t(next()) << 64;
    if (nbits < 128) v &= (elem_t(1) << nbits) - 1;
    return v;
}

namespace {
std::uint64_t splitmix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix(splitmix(master ^ (index * 0x9e3779b97f4a7c15ULL)) + index);
}

}  // namespace pmt

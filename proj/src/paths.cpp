#include "pmt/paths.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "pmt/errors.hpp"

namespace pmt {

PathSubset::PathSubset(std::vector<int> idx, int n_paths) : indices(std::move(idx)), n(n_paths) {
    std::sort(indices.begin(), indices.end());
    if (std::adjacent_find(indices.begin(), indices.end()) != indices.end())
        throw UsageError("path subset has repeated index");
    if (!indices.empty() && (indices.front() < 0 || indices.back() >= n))
        throw UsageError("path index out of range");
}

bool PathSubset::contains(int p) const { return std::binary_search(indices.begin(), indices.end(), p); }

PathSubset intersect(const PathSubset& a, const PathSubset& b) {
    PathSubset out;
    out.n = a.n;
    std::set_intersection(a.indices.begin(), a.indices.end(), b.indices.begin(), b.indices.end(),
                          std::back_inserter(out.indices));
    return out;
}

BigInt binomial_exact(std::int64_t n, std::int64_t k) {
    if (n < 0 || n > 10000 || k < 0 || k > n) throw UsageError("binomial_exact needs 0 <= k <= n <= 10^4");
    k = std::min(k, n - k);
    BigInt c = 1;
    // each prefix product c * (n-k+i) / i is itself a binomial, so division is exact
    for (std::int64_t i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

int ceil_log2(const BigInt& v) {
    if (v < 1) throw UsageError("ceil_log2 of non-positive value");
    if (v == 1) return 0;
    const BigInt u = v - 1;
    return static_cast<int>(boost::multiprecision::msb(u)) + 1;
}

SubsetCodec::SubsetCodec(int n, int t) : n_(n), t_(t), w_(1) {
    if (t <= 0 || t > n) throw UsageError("SubsetCodec needs 0 < t <= n");
    count_ = binomial_exact(n, t);
    w_ = std::max(1, ceil_log2(count_));
    // every Pascal entry up to column t must fit, not only C(n,t)
    small_ = binomial_exact(n, std::min(t, n / 2)) < (BigInt(1) << 63);
    if (small_) {
        pascal_.assign(static_cast<std::size_t>(n + 1) * (t + 1), 0);
        for (int a = 0; a <= n; ++a)
            for (int b = 0; b <= std::min(a, t); ++b) {
                std::uint64_t v = 1;
                if (b > 0 && b < a) v = pascal_[(a - 1) * (t + 1) + b - 1] + pascal_[(a - 1) * (t + 1) + b];
                pascal_[static_cast<std::size_t>(a) * (t + 1) + b] = v;
            }
    }
}

std::uint64_t SubsetCodec::binom_small(int a, int b) const {
    if (b < 0 || b > a) return 0;
    return pascal_[static_cast<std::size_t>(a) * (t_ + 1) + b];
}

PathSubset SubsetCodec::rank_to_subset(std::uint64_t rank) const {
    if (!small_) return rank_to_subset(BigInt(rank));
    if (rank >= static_cast<std::uint64_t>(count_)) throw UsageError("rank out of range");
    PathSubset out;
    out.n = n_;
    out.indices.reserve(static_cast<std::size_t>(t_));
    int c = 0;
    for (int i = 0; i < t_; ++i) {
        // subsets whose i-th element is c: choose the remaining t-i-1 from above c
        for (;; ++c) {
            const std::uint64_t block = binom_small(n_ - c - 1, t_ - i - 1);
            if (rank < block) break;
            rank -= block;
        }
        out.indices.push_back(c++);
    }
    return out;
}

PathSubset SubsetCodec::rank_to_subset(const BigInt& rank_in) const {
    if (rank_in < 0 || rank_in >= count_) throw UsageError("rank out of range");
    if (small_) return rank_to_subset(static_cast<std::uint64_t>(rank_in));
    BigInt rank = rank_in;
    PathSubset out;
    out.n = n_;
    int c = 0;
    for (int i = 0; i < t_; ++i) {
        for (;; ++c) {
            const BigInt block = binomial_exact(n_ - c - 1, t_ - i - 1);
            if (rank < block) break;
            rank -= block;
        }
        out.indices.push_back(c++);
    }
    return out;
}

BigInt SubsetCodec::subset_to_rank(const PathSubset& s) const {
    if (static_cast<int>(s.size()) != t_ || s.n != n_) throw UsageError("subset does not match codec");
    BigInt rank = 0;
    int prev = -1;
    for (int i = 0; i < t_; ++i) {
        for (int c = prev + 1; c < s.indices[i]; ++c)
            rank += small_ ? BigInt(binom_small(n_ - c - 1, t_ - i - 1)) : binomial_exact(n_ - c - 1, t_ - i - 1);
        prev = s.indices[i];
    }
    return rank;
}

PathSubset SubsetCodec::key_bits_to_subset(const BigInt& bits) const {
    if (bits < 0 || bits >= (BigInt(1) << w_)) throw UsageError("key bits wider than w");
    return rank_to_subset(BigInt(bits % count_));
}

PathSubset SubsetCodec::key_bits_to_subset(std::uint64_t bits) const {
    if (w_ < 64 && bits >= (std::uint64_t(1) << w_)) throw UsageError("key bits wider than w");
    if (small_) return rank_to_subset(bits % static_cast<std::uint64_t>(count_));
    return key_bits_to_subset(BigInt(bits));
}

PathSubset random_subset(int n, int t, Rng& rng) {
    if (n < 0 || t < 0 || t > n) throw UsageError("random_subset needs 0 <= t <= n");
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < t; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(t));
    return PathSubset(std::move(pool), n);
}

}  // namespace pmt

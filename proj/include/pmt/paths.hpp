#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "pmt/rng.hpp"

namespace pmt {

using BigInt = boost::multiprecision::cpp_int;

// Sorted, distinct path indices in [0, n).
struct PathSubset {
    std::vector<int> indices;
    int n = 0;

    PathSubset() = default;
    PathSubset(std::vector<int> idx, int n_paths);  // sorts, validates

    std::size_t size() const { return indices.size(); }
    bool contains(int p) const;
    bool operator==(const PathSubset&) const = default;
};

PathSubset intersect(const PathSubset& a, const PathSubset& b);

// Exact C(n, k) for 0 <= k <= n <= 10^4.
BigInt binomial_exact(std::int64_t n, std::int64_t k);

// ceil(log2(v)) for v >= 1.
int ceil_log2(const BigInt& v);

// Lexicographic ranking of t-subsets of [0, n); w = ceil(log2 C(n,t)), at least 1.
class SubsetCodec {
public:
    SubsetCodec(int n, int t);

    int n() const { return n_; }
    int t() const { return t_; }
    int w() const { return w_; }
    const BigInt& count() const { return count_; }
    // True when C(n,t) < 2^63 and the machine-word fast path is active.
    bool small() const { return small_; }

    PathSubset rank_to_subset(const BigInt& rank) const;
    PathSubset rank_to_subset(std::uint64_t rank) const;
    BigInt subset_to_rank(const PathSubset& s) const;
    // bits mod C(n,t), then unrank; bits must be below 2^w.
    PathSubset key_bits_to_subset(const BigInt& bits) const;
    PathSubset key_bits_to_subset(std::uint64_t bits) const;

private:
    std::uint64_t binom_small(int a, int b) const;

    int n_, t_, w_;
    BigInt count_;
    bool small_ = false;
    std::vector<std::uint64_t> pascal_;  // (n+1) x (t+1), valid when small_
};

// Uniform t-subset via partial Fisher-Yates over [0, n).
PathSubset random_subset(int n, int t, Rng& rng);

}  // namespace pmt

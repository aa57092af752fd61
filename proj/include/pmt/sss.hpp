#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "pmt/field.hpp"
#include "pmt/rng.hpp"

namespace pmt {

// (k, r, g, m) quasi-ramp access structure; g = 0 is an ordinary ramp scheme.
struct QuasiRampParams {
    std::int64_t k = 0;  // base threshold (polynomial degree + 1)
    std::int64_t r = 0;  // secret length in field elements
    std::int64_t g = 0;  // emulated genus gap
    std::int64_t m = 0;  // number of shares

    void validate() const;  // UsageError unless 0 < r <= k, g >= 0, k + 2g <= m
    std::int64_t qualified() const { return k + 2 * g; }
    bool operator==(const QuasiRampParams&) const = default;
};

using Secret = std::vector<elem_t>;
// Absent entries model the null share.
using ShareVector = std::vector<std::optional<elem_t>>;

std::int64_t present_count(const ShareVector& shares);

// Where the secret and shares live on the polynomial.
//  evaluation:  f(0..r-1) = secret, share i = f(r + i). Needs m + r <= 2^lambda.
//  coefficient: secret = low r coefficients, share i = f(1 + i). Needs m < 2^lambda;
//               used only where the evaluation layout does not fit the field.
enum class Layout { evaluation, coefficient };

// Values of the interpolating polynomial through (nodes, values) at targets.
// Precomputes the barycentric matrix once; apply() is then a matrix-vector
// product. Log-domain storage when the field has tables.
class LagrangeMap {
public:
    LagrangeMap(FieldPtr field, std::vector<elem_t> nodes, std::vector<elem_t> targets);
    std::vector<elem_t> apply(const std::vector<elem_t>& values) const;

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t target_count() const { return targets_.size(); }

private:
    FieldPtr f_;
    std::vector<elem_t> nodes_;
    std::vector<elem_t> targets_;
    std::vector<std::int64_t> copy_from_;  // target equal to node j, else -1
    bool log_mode_ = false;
    std::vector<std::uint16_t> log_matrix_;  // targets x nodes, log of coefficient
    std::vector<elem_t> weights_;            // generic mode: barycentric weights
    std::vector<elem_t> target_scale_;       // generic mode: prod_j (t - x_j)
};

class QuasiRampScheme {
public:
    QuasiRampScheme(FieldPtr field, QuasiRampParams params, Layout layout = Layout::evaluation);

    const QuasiRampParams& params() const { return p_; }
    const FieldSpec& field() const { return *f_; }
    Layout layout() const { return layout_; }

    ShareVector share(const Secret& secret, Rng& rng) const;
    // Deterministic core: randomness has k - r entries (values at share points
    // 0..k-r-1 for the evaluation layout, coefficients r..k-1 otherwise).
    ShareVector share_with(const Secret& secret, const std::vector<elem_t>& randomness) const;

    // Interpolates the first k present shares; nullopt below k + 2g present.
    std::optional<Secret> reconstruct(const ShareVector& shares) const;

private:
    std::shared_ptr<const LagrangeMap> share_map() const;
    std::shared_ptr<const LagrangeMap> recon_map(const std::vector<std::int64_t>& idx) const;
    Secret reconstruct_coefficients(const std::vector<std::int64_t>& idx, const ShareVector& shares) const;

    FieldPtr f_;
    QuasiRampParams p_;
    Layout layout_;
    mutable std::mutex mu_;
    mutable std::shared_ptr<const LagrangeMap> share_map_;
    mutable std::vector<std::int64_t> recon_idx_;
    mutable std::shared_ptr<const LagrangeMap> recon_map_;
};

// Process-wide cache so repeated trials reuse precomputed matrices.
std::shared_ptr<const QuasiRampScheme> cached_scheme(const FieldPtr& field, const QuasiRampParams& params,
                                                     Layout layout = Layout::evaluation);

// Largest layout-compatible share count check; ParameterError when the field is too small.
void check_field_capacity(const FieldSpec& f, const QuasiRampParams& p, Layout layout);

ShareVector share(const FieldPtr& field, const Secret& secret, const QuasiRampParams& params, Rng& rng,
                  Layout layout = Layout::evaluation);
std::optional<Secret> reconstruct(const FieldPtr& field, const ShareVector& shares, const QuasiRampParams& params,
                                  Layout layout = Layout::evaluation);

enum class Leakage { perfect_secrecy, partial, fully_determined };
const char* to_string(Leakage l);

Leakage leakage_profile(const QuasiRampParams& params, std::int64_t observed_count);

// Max over secret pairs of the statistical distance between the share
// distributions seen at observer_indices. Enumerates all q^k polynomials;
// CapacityError when lambda * k > 24.
double secrecy_distance_exhaustive(const FieldPtr& field, const QuasiRampParams& params,
                                   const std::vector<std::int64_t>& observer_indices,
                                   Layout layout = Layout::evaluation);

}  // namespace pmt

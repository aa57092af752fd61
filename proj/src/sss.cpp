#include "pmt/sss.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <tuple>

#include "pmt/errors.hpp"

namespace pmt {

void QuasiRampParams::validate() const {
    if (r <= 0 || r > k) throw UsageError("quasi-ramp params need 0 < r <= k");
    if (g < 0) throw UsageError("quasi-ramp params need g >= 0");
    if (k + 2 * g > m) throw UsageError("quasi-ramp params need k + 2g <= m");
}

std::int64_t present_count(const ShareVector& shares) {
    return std::count_if(shares.begin(), shares.end(), [](const auto& s) { return s.has_value(); });
}

namespace {

// Matrices above this many entries fall back to on-the-fly evaluation.
constexpr std::size_t max_log_matrix = std::size_t(1) << 26;

}  // namespace

LagrangeMap::LagrangeMap(FieldPtr field, std::vector<elem_t> nodes, std::vector<elem_t> targets)
    : f_(std::move(field)), nodes_(std::move(nodes)), targets_(std::move(targets)) {
    const FieldSpec& f = *f_;
    const std::size_t k = nodes_.size();
    if (k == 0) throw UsageError("LagrangeMap: no nodes");
    std::map<elem_t, std::int64_t> where;
    for (std::size_t j = 0; j < k; ++j) {
        if (!f.contains(nodes_[j])) throw UsageError("LagrangeMap: node outside field");
        if (!where.emplace(nodes_[j], static_cast<std::int64_t>(j)).second)
            throw UsageError("LagrangeMap: repeated node");
    }
    copy_from_.assign(targets_.size(), -1);
    for (std::size_t t = 0; t < targets_.size(); ++t) {
        if (!f.contains(targets_[t])) throw UsageError("LagrangeMap: target outside field");
        auto it = where.find(targets_[t]);
        if (it != where.end()) copy_from_[t] = it->second;
    }

    if (f.has_tables() && targets_.size() * k <= max_log_matrix) {
        log_mode_ = true;
        const std::uint64_t ord = f.group_order();
        const auto& lg = f.log_table();
        auto lgx = [&](elem_t v) { return static_cast<std::uint64_t>(lg[static_cast<std::size_t>(v)]); };
        std::vector<std::uint64_t> lw(k);
        for (std::size_t j = 0; j < k; ++j) {
            std::uint64_t s = 0;
            for (std::size_t i = 0; i < k; ++i)
                if (i != j) s += lgx(nodes_[j] ^ nodes_[i]);
            lw[j] = (ord - s % ord) % ord;
        }
        log_matrix_.assign(targets_.size() * k, 0);
        for (std::size_t t = 0; t < targets_.size(); ++t) {
            if (copy_from_[t] >= 0) continue;
            std::uint64_t lt = 0;
            for (std::size_t j = 0; j < k; ++j) lt += lgx(targets_[t] ^ nodes_[j]);
            lt %= ord;
            std::uint16_t* row = &log_matrix_[t * k];
            for (std::size_t j = 0; j < k; ++j)
                row[j] = static_cast<std::uint16_t>((lt + lw[j] + ord - lgx(targets_[t] ^ nodes_[j])) % ord);
        }
        return;
    }

    weights_.assign(k, 1);
    for (std::size_t j = 0; j < k; ++j) {
        elem_t p = 1;
        for (std::size_t i = 0; i < k; ++i)
            if (i != j) p = f.mul(p, nodes_[j] ^ nodes_[i]);
        weights_[j] = f.inv(p);
    }
    target_scale_.assign(targets_.size(), 1);
    for (std::size_t t = 0; t < targets_.size(); ++t) {
        if (copy_from_[t] >= 0) continue;
        elem_t p = 1;
        for (std::size_t j = 0; j < k; ++j) p = f.mul(p, targets_[t] ^ nodes_[j]);
        target_scale_[t] = p;
    }
}

std::vector<elem_t> LagrangeMap::apply(const std::vector<elem_t>& values) const {
    const std::size_t k = nodes_.size();
    if (values.size() != k) throw UsageError("LagrangeMap::apply: value count mismatch");
    const FieldSpec& f = *f_;
    std::vector<elem_t> out(targets_.size(), 0);

    if (log_mode_) {
        const auto& lg = f.log_table();
        const std::uint16_t* ex = f.exp_table().data();
        std::vector<std::uint32_t> ly(k);
        for (std::size_t j = 0; j < k; ++j)
            ly[j] = values[j] == 0 ? f.zero_log() : lg[static_cast<std::size_t>(values[j])];
        for (std::size_t t = 0; t < targets_.size(); ++t) {
            if (copy_from_[t] >= 0) {
                out[t] = values[static_cast<std::size_t>(copy_from_[t])];
                continue;
            }
            const std::uint16_t* row = &log_matrix_[t * k];
            std::uint32_t acc = 0;
            for (std::size_t j = 0; j < k; ++j) acc ^= ex[row[j] + ly[j]];
            out[t] = acc;
        }
        return out;
    }

    std::vector<elem_t> c(k);
    for (std::size_t j = 0; j < k; ++j) c[j] = f.mul(weights_[j], values[j]);
    std::vector<elem_t> prefix(k + 1);
    for (std::size_t t = 0; t < targets_.size(); ++t) {
        if (copy_from_[t] >= 0) {
            out[t] = values[static_cast<std::size_t>(copy_from_[t])];
            continue;
        }
        // batch inversion of (t - x_j)
        prefix[0] = 1;
        for (std::size_t j = 0; j < k; ++j) prefix[j + 1] = f.mul(prefix[j], targets_[t] ^ nodes_[j]);
        elem_t run = f.inv(prefix[k]);
        elem_t sum = 0;
        for (std::size_t j = k; j-- > 0;) {
            const elem_t d = targets_[t] ^ nodes_[j];
            sum ^= f.mul(c[j], f.mul(run, prefix[j]));
            run = f.mul(run, d);
        }
        out[t] = f.mul(target_scale_[t], sum);
    }
    return out;
}

void check_field_capacity(const FieldSpec& f, const QuasiRampParams& p, Layout layout) {
    if (f.lambda() >= 63) return;
    const std::int64_t size = std::int64_t(1) << f.lambda();
    if (layout == Layout::evaluation && p.m + p.r > size)
        throw ParameterError("field too small: m + r = " + std::to_string(p.m + p.r) + " > 2^" +
                             std::to_string(f.lambda()));
    if (layout == Layout::coefficient && p.m > size - 1)
        throw ParameterError("field too small: m = " + std::to_string(p.m) + " >= 2^" + std::to_string(f.lambda()));
}

QuasiRampScheme::QuasiRampScheme(FieldPtr field, QuasiRampParams params, Layout layout)
    : f_(std::move(field)), p_(params), layout_(layout) {
    if (!f_) throw UsageError("QuasiRampScheme: null field");
    p_.validate();
    check_field_capacity(*f_, p_, layout_);
}

std::shared_ptr<const LagrangeMap> QuasiRampScheme::share_map() const {
    std::lock_guard<std::mutex> lock(mu_);
    if (!share_map_) {
        std::vector<elem_t> nodes(static_cast<std::size_t>(p_.k));
        for (std::int64_t i = 0; i < p_.k; ++i) nodes[i] = static_cast<elem_t>(i);
        std::vector<elem_t> targets;
        targets.reserve(static_cast<std::size_t>(p_.m + p_.r - p_.k));
        for (std::int64_t x = p_.k; x < p_.r + p_.m; ++x) targets.push_back(static_cast<elem_t>(x));
        share_map_ = std::make_shared<const LagrangeMap>(f_, std::move(nodes), std::move(targets));
    }
    return share_map_;
}

std::shared_ptr<const LagrangeMap> QuasiRampScheme::recon_map(const std::vector<std::int64_t>& idx) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (!recon_map_ || recon_idx_ != idx) {
        std::vector<elem_t> nodes;
        nodes.reserve(idx.size());
        for (std::int64_t i : idx) nodes.push_back(static_cast<elem_t>(p_.r + i));
        std::vector<elem_t> targets(static_cast<std::size_t>(p_.r));
        for (std::int64_t i = 0; i < p_.r; ++i) targets[i] = static_cast<elem_t>(i);
        recon_map_ = std::make_shared<const LagrangeMap>(f_, std::move(nodes), std::move(targets));
        recon_idx_ = idx;
    }
    return recon_map_;
}

ShareVector QuasiRampScheme::share_with(const Secret& secret, const std::vector<elem_t>& randomness) const {
    if (static_cast<std::int64_t>(secret.size()) != p_.r) throw UsageError("secret length differs from r");
    if (static_cast<std::int64_t>(randomness.size()) != p_.k - p_.r)
        throw UsageError("randomness length differs from k - r");
    for (elem_t v : secret)
        if (!f_->contains(v)) throw UsageError("secret element outside field");

    ShareVector out(static_cast<std::size_t>(p_.m));
    if (layout_ == Layout::evaluation) {
        // f is fixed by the secret at 0..r-1 and the random values at the
        // first k - r share points; the rest follow by interpolation.
        std::vector<elem_t> values(secret);
        values.insert(values.end(), randomness.begin(), randomness.end());
        for (std::size_t i = 0; i < randomness.size(); ++i) out[i] = randomness[i];
        const auto rest = share_map()->apply(values);
        for (std::size_t i = 0; i < rest.size(); ++i) out[randomness.size() + i] = rest[i];
        return out;
    }
    std::vector<elem_t> coeffs(secret);
    coeffs.insert(coeffs.end(), randomness.begin(), randomness.end());
    for (std::int64_t i = 0; i < p_.m; ++i) out[i] = poly_eval(*f_, coeffs, static_cast<elem_t>(i + 1));
    return out;
}

ShareVector QuasiRampScheme::share(const Secret& secret, Rng& rng) const {
    std::vector<elem_t> randomness(static_cast<std::size_t>(p_.k - p_.r));
    for (auto& v : randomness) v = rng.bits(f_->lambda());
    return share_with(secret, randomness);
}

Secret QuasiRampScheme::reconstruct_coefficients(const std::vector<std::int64_t>& idx,
                                                 const ShareVector& shares) const {
    const FieldSpec& f = *f_;
    const std::size_t k = idx.size();
    std::vector<elem_t> pts(k), ys(k);
    for (std::size_t j = 0; j < k; ++j) {
        pts[j] = static_cast<elem_t>(idx[j] + 1);
        ys[j] = *shares[static_cast<std::size_t>(idx[j])];
    }
    // master polynomial L(x) = prod (x - p_j), low-order first
    std::vector<elem_t> master(k + 1, 0);
    master[0] = 1;
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t d = j + 1; d > 0; --d) master[d] = master[d - 1] ^ f.mul(master[d], pts[j]);
        master[0] = f.mul(master[0], pts[j]);
    }
    std::vector<elem_t> result(k, 0), quot(k);
    for (std::size_t j = 0; j < k; ++j) {
        // synthetic division L(x) / (x - p_j)
        elem_t carry = master[k];
        for (std::size_t d = k; d-- > 0;) {
            quot[d] = carry;
            carry = master[d] ^ f.mul(carry, pts[j]);
        }
        const elem_t denom = poly_eval(f, quot, pts[j]);
        const elem_t scale = f.mul(ys[j], f.inv(denom));
        for (std::size_t d = 0; d < k; ++d) result[d] ^= f.mul(scale, quot[d]);
    }
    result.resize(static_cast<std::size_t>(p_.r));
    return result;
}

std::optional<Secret> QuasiRampScheme::reconstruct(const ShareVector& shares) const {
    if (static_cast<std::int64_t>(shares.size()) != p_.m) throw UsageError("share vector length differs from m");
    if (present_count(shares) < p_.qualified()) return std::nullopt;
    std::vector<std::int64_t> idx;
    idx.reserve(static_cast<std::size_t>(p_.k));
    for (std::size_t i = 0; i < shares.size() && static_cast<std::int64_t>(idx.size()) < p_.k; ++i)
        if (shares[i]) idx.push_back(static_cast<std::int64_t>(i));
    if (layout_ == Layout::coefficient) return reconstruct_coefficients(idx, shares);
    std::vector<elem_t> values;
    values.reserve(idx.size());
    for (std::int64_t i : idx) values.push_back(*shares[static_cast<std::size_t>(i)]);
    return recon_map(idx)->apply(values);
}

std::shared_ptr<const QuasiRampScheme> cached_scheme(const FieldPtr& field, const QuasiRampParams& params,
                                                     Layout layout) {
    using Key = std::tuple<unsigned, elem_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t, int>;
    static std::mutex mu;
    static std::map<Key, std::shared_ptr<const QuasiRampScheme>> cache;
    const Key key{field->lambda(), field->reduction_low(), params.k, params.r, params.g, params.m,
                  static_cast<int>(layout)};
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    if (cache.size() >= 32) cache.clear();
    auto s = std::make_shared<const QuasiRampScheme>(field, params, layout);
    cache.emplace(key, s);
    return s;
}

ShareVector share(const FieldPtr& field, const Secret& secret, const QuasiRampParams& params, Rng& rng,
                  Layout layout) {
    return QuasiRampScheme(field, params, layout).share(secret, rng);
}

std::optional<Secret> reconstruct(const FieldPtr& field, const ShareVector& shares, const QuasiRampParams& params,
                                  Layout layout) {
    return QuasiRampScheme(field, params, layout).reconstruct(shares);
}

const char* to_string(Leakage l) {
    switch (l) {
        case Leakage::perfect_secrecy: return "perfect_secrecy";
        case Leakage::partial: return "partial";
        case Leakage::fully_determined: return "fully_determined";
    }
    return "?";
}

Leakage leakage_profile(const QuasiRampParams& params, std::int64_t observed_count) {
    params.validate();
    if (observed_count < 0 || observed_count > params.m) throw UsageError("observed_count out of range");
    if (observed_count <= params.k - params.r) return Leakage::perfect_secrecy;
    if (observed_count >= params.qualified()) return Leakage::fully_determined;
    return Leakage::partial;
}

double secrecy_distance_exhaustive(const FieldPtr& field, const QuasiRampParams& params,
                                   const std::vector<std::int64_t>& observer_indices, Layout layout) {
    params.validate();
    const unsigned lambda = field->lambda();
    if (static_cast<std::int64_t>(lambda) * params.k > 24)
        throw CapacityError("exhaustive secrecy distance needs 2^(lambda*k) <= 2^24");
    std::vector<std::int64_t> obs = observer_indices;
    std::sort(obs.begin(), obs.end());
    if (std::adjacent_find(obs.begin(), obs.end()) != obs.end()) throw UsageError("repeated observer index");
    for (std::int64_t i : obs)
        if (i < 0 || i >= params.m) throw UsageError("observer index out of range");

    const QuasiRampScheme scheme(field, params, layout);
    const std::uint64_t q = std::uint64_t(1) << lambda;
    const auto r = static_cast<std::size_t>(params.r);
    const auto free = static_cast<std::size_t>(params.k - params.r);
    std::uint64_t n_secrets = 1, n_rand = 1;
    for (std::size_t i = 0; i < r; ++i) n_secrets *= q;
    for (std::size_t i = 0; i < free; ++i) n_rand *= q;

    auto digits = [&](std::uint64_t code, std::size_t len) {
        std::vector<elem_t> d(len);
        for (std::size_t i = 0; i < len; ++i) {
            d[i] = code % q;
            code /= q;
        }
        return d;
    };

    // Each secret's view distribution as sorted (view id, count); identical
    // distributions are merged before the pairwise comparison.
    std::map<std::vector<elem_t>, std::uint32_t> view_ids;
    std::map<std::vector<std::pair<std::uint32_t, std::uint64_t>>, std::uint64_t> distinct;
    for (std::uint64_t s = 0; s < n_secrets; ++s) {
        const Secret secret = digits(s, r);
        std::map<std::uint32_t, std::uint64_t> counts;
        for (std::uint64_t rho = 0; rho < n_rand; ++rho) {
            const ShareVector sh = scheme.share_with(secret, digits(rho, free));
            std::vector<elem_t> view;
            view.reserve(obs.size());
            for (std::int64_t i : obs) view.push_back(*sh[static_cast<std::size_t>(i)]);
            auto [it, fresh] = view_ids.emplace(std::move(view), static_cast<std::uint32_t>(view_ids.size()));
            ++counts[it->second];
        }
        distinct[std::vector<std::pair<std::uint32_t, std::uint64_t>>(counts.begin(), counts.end())]++;
    }
    if (distinct.size() > (std::size_t(1) << 14)) throw CapacityError("too many distinct view distributions");

    std::vector<const std::vector<std::pair<std::uint32_t, std::uint64_t>>*> dists;
    for (const auto& kv : distinct) dists.push_back(&kv.first);
    std::uint64_t worst = 0;
    for (std::size_t a = 0; a < dists.size(); ++a)
        for (std::size_t b = a + 1; b < dists.size(); ++b) {
            const auto& x = *dists[a];
            const auto& y = *dists[b];
            std::uint64_t diff = 0;
            std::size_t i = 0, j = 0;
            while (i < x.size() || j < y.size()) {
                if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) diff += x[i++].second;
                else if (i == x.size() || y[j].first < x[i].first) diff += y[j++].second;
                else {
                    diff += x[i].second > y[j].second ? x[i].second - y[j].second : y[j].second - x[i].second;
                    ++i;
                    ++j;
                }
            }
            worst = std::max(worst, diff);
        }
    // diff / (2 * n_rand) is a dyadic rational, exact in double
    return static_cast<double>(worst) / (2.0 * static_cast<double>(n_rand));
}

}  // namespace pmt

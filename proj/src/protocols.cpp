#include "pmt/protocols.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "pmt/errors.hpp"

namespace pmt {

namespace {

using BigReal = boost::multiprecision::cpp_bin_float_100;

BigInt floor_bi(const BigReal& x) { return static_cast<BigInt>(boost::multiprecision::floor(x)); }
BigInt ceil_bi(const BigReal& x) { return static_cast<BigInt>(boost::multiprecision::ceil(x)); }
BigReal real(const BigInt& v) { return BigReal(v); }

struct Shape {
    BigInt g, r, k, m;
};

}  // namespace

std::int64_t to_i64(const BigInt& v, const char* what) {
    if (v < 0 || v > BigInt(std::numeric_limits<std::int64_t>::max() / 4))
        throw ParameterError(std::string(what) + " is too large to simulate; derive at a smaller lambda_field");
    return static_cast<std::int64_t>(v);
}

BigInt ProtocolParams::message_elements() const {
    switch (scheme) {
        case Scheme::F0: return q1 * r1;
        case Scheme::F2simple: return r1;
        default: return r2;
    }
}

double ProtocolParams::achieved_rate() const {
    const BigInt c = c1 + c2;
    if (c == 0) return 0.0;
    return static_cast<double>(real(message_bits()) / real(c));
}

BigInt expected_bits(const ProtocolParams& p, bool aborted) {
    if (p.scheme == Scheme::F3 && aborted) return p.c1;
    return p.c1 + p.c2;
}

ProtocolParams derive_params(const MultipathConfig& cfg, Scheme scheme, double psi, double delta_target,
                             double epsilon_target, std::optional<BigInt> q1_override) {
    cfg.validate();
    if (!(psi > 0 && psi < 1)) throw UsageError("psi must lie in (0, 1)");
    if (!(delta_target > 0 && delta_target < 1) || !(epsilon_target > 0 && epsilon_target < 1))
        throw UsageError("delta and epsilon targets must lie in (0, 1)");
    if (q1_override && *q1_override < 1) throw UsageError("q1 override must be positive");

    const int n = cfg.n, ta = cfg.t_a, tb = cfg.t_b, te = cfg.t_e, tab = cfg.t_ab(), lambda = cfg.lambda;
    switch (scheme) {
        case Scheme::F0:
            if (te >= tab) throw InfeasibleError("F0 requires t_e < t_ab");
            break;
        case Scheme::F1:
            if (te >= tab) throw InfeasibleError("F1 requires t_e < t_ab <= n");
            break;
        case Scheme::F2:
            if (te >= tb) throw InfeasibleError("F2 requires t_e < t_b");
            if (ta == 0) throw InfeasibleError("F2 requires t_a > 0");
            break;
        case Scheme::F2simple:
            if (tb != n) throw InfeasibleError("F2simple requires t_b = n (Bob listens on every path)");
            if (te >= tb) throw InfeasibleError("F2simple requires t_e < t_b");
            if (ta == 0) throw InfeasibleError("F2simple requires t_a > 0");
            break;
        case Scheme::F3:
            if (ta == 0 || tb == 0 || te >= n) throw InfeasibleError("F3 requires t_a, t_b > 0 and t_e < n");
            break;
    }

    ProtocolParams p;
    p.scheme = scheme;
    p.config = cfg;
    p.psi = psi;
    p.delta_target = delta_target;
    p.epsilon_target = epsilon_target;

    if (scheme == Scheme::F0) {
        p.q1 = q1_override.value_or(BigInt(1));
        p.g1 = 0;
        p.r1 = tab - te;
        p.k1 = p.m1 = tab;
        p.eve_cap1 = BigInt(te) * p.q1;
        p.receiver_floor1 = p.m1 * p.q1;
        p.c1 = p.q1 * tab * lambda;
        p.c2 = 0;
        p.n_prime = tab;
        return p;
    }

    const auto mins = chernoff_trial_minimums(cfg, psi, delta_target, epsilon_target, scheme);
    p.q1_min = mins.q1_min;
    p.q2_min = mins.q2_min;

    const BigReal big = boost::multiprecision::pow(BigReal(2), BigReal(lambda) / 2) - 1;
    const bool two_stage = scheme != Scheme::F2simple;
    const double te2 = (1 + psi) * tab * te / n;
    if (two_stage) {
        p.t_prime_e2 = te2;
        p.w = std::max(1, ceil_log2(binomial_exact(n, tab)));
    }

    // Stage-1 shape as a function of q1, and the asymptotic per-interval slope of r1.
    std::function<Shape(const BigInt&)> stage1;
    BigReal slope1;
    switch (scheme) {
        case Scheme::F1: {
            p.n_prime = tab;
            p.t_prime_e1 = te;
            stage1 = [=](const BigInt& q) {
                Shape s;
                s.g = ceil_bi(real(q) * (2 * tab - te) / big);
                s.r = q * (tab - te) - 2 * s.g;
                s.m = q * tab;
                s.k = s.m - 2 * s.g;
                return s;
            };
            slope1 = BigReal(tab - te) - BigReal(2 * (2 * tab - te)) / big;
            break;
        }
        case Scheme::F2:
        case Scheme::F2simple: {
            const int np = scheme == Scheme::F2 ? std::max(ta, tb) : n;
            p.n_prime = np;
            // Bob hears every path in the simplified variant, so his catch is exactly t_a.
            const double tb1 = scheme == Scheme::F2 ? (1 - psi) * ta * tb / np : ta;
            const double te1 = (1 + psi) * ta * te / np;
            p.t_prime_b1 = tb1;
            p.t_prime_e1 = te1;
            stage1 = [=](const BigInt& q) {
                Shape s;
                const BigReal rq = real(q);
                s.g = ceil_bi(rq * (BigReal(ta) + BigReal(tb1) - BigReal(te1)) / big);
                s.r = floor_bi(rq * (BigReal(tb1) - BigReal(te1))) - 2 * s.g;
                s.k = floor_bi(rq * BigReal(tb1)) - 2 * s.g;
                s.m = q * ta;
                return s;
            };
            slope1 = BigReal(tb1) - BigReal(te1) - 2 * (BigReal(ta) + BigReal(tb1) - BigReal(te1)) / big;
            break;
        }
        case Scheme::F3: {
            p.n_prime = n;
            const double ta1 = (1 - psi) * ta * tb / n;
            const double te1 = (1 + psi) * ta1 * te / n;
            p.t_prime_a1 = ta1;
            p.t_prime_e1 = te1;
            p.w1 = ceil_log2(binomial_exact(n, static_cast<std::int64_t>(std::ceil(ta1))));
            p.w2 = p.w;
            stage1 = [=](const BigInt& q) {
                Shape s;
                const BigReal rq = real(q);
                s.g = ceil_bi(rq * (2 * BigReal(ta1) - BigReal(te1)) / big);
                s.r = floor_bi(rq * (BigReal(ta1) - BigReal(te1))) - 2 * s.g;
                s.m = floor_bi(rq * BigReal(ta1));
                s.k = s.m - 2 * s.g;
                return s;
            };
            slope1 = BigReal(ta1) - BigReal(te1) - 2 * (2 * BigReal(ta1) - BigReal(te1)) / big;
            break;
        }
        case Scheme::F0: break;
    }
    auto stage2 = [=](const BigInt& q) {
        Shape s;
        const BigReal rq = real(q);
        s.g = ceil_bi(rq * (2 * BigReal(tab) - BigReal(te2)) / big);
        s.r = floor_bi(rq * (BigReal(tab) - BigReal(te2))) - 2 * s.g;
        s.m = q * tab;
        s.k = s.m - 2 * s.g;
        return s;
    };
    if (slope1 <= 0)
        throw DegenerateError("degenerate parameters: stage-1 secret length r1 <= 0 for every q1; increase lambda");
    if (two_stage) {
        const BigReal slope2 = BigReal(tab) - BigReal(te2) - 2 * (2 * BigReal(tab) - BigReal(te2)) / big;
        if (slope2 <= 0)
            throw DegenerateError("degenerate parameters: stage-2 secret length r2 <= 0 for every q2; increase lambda");
    }

    const BigInt q2_floor = std::max(BigInt(1), ceil_bi(BigReal(mins.q2_min)));
    auto q2_of = [&](const Shape& s1) { return s1.r * lambda / p.w; };
    auto ok = [&](const BigInt& q) {
        const Shape s1 = stage1(q);
        if (s1.r <= 0 || s1.k < s1.r) return false;
        if (!two_stage) return true;
        const BigInt q2 = q2_of(s1);
        return q2 >= q2_floor && stage2(q2).r > 0;
    };

    BigInt lo = std::max(BigInt(1), ceil_bi(BigReal(mins.q1_min)));
    if (q1_override) lo = std::max(lo, *q1_override);
    BigInt q1 = lo;
    if (!ok(lo)) {
        BigInt good = lo * 2;
        int rounds = 0;
        while (!ok(good)) {
            if (++rounds > 400) throw DegenerateError("degenerate parameters: no q1 yields positive r1 and r2");
            good *= 2;
        }
        BigInt bad = lo;  // invariant: !ok(bad), ok(good)
        while (good - bad > 1) {
            const BigInt mid = (bad + good) / 2;
            (ok(mid) ? good : bad) = mid;
        }
        q1 = good;
    }
    if (two_stage) {
        const int steps = 64 * p.w;
        for (int i = 0; i <= steps; ++i) {
            const BigInt cand = q1 + i;
            const Shape s1 = stage1(cand);
            if ((s1.r * lambda) % p.w == 0 && ok(cand)) {
                q1 = cand;
                p.key_bits_divisible = true;
                break;
            }
        }
    }

    const Shape s1 = stage1(q1);
    p.q1 = q1;
    p.g1 = s1.g;
    p.r1 = s1.r;
    p.k1 = s1.k;
    p.m1 = s1.m;
    p.eve_cap1 = scheme == Scheme::F1 ? q1 * te : floor_bi(real(q1) * BigReal(p.t_prime_e1));
    const double recv_rate = scheme == Scheme::F3 ? p.t_prime_a1 : p.t_prime_b1;
    p.receiver_floor1 = scheme == Scheme::F1 ? q1 * tab : ceil_bi(real(q1) * BigReal(recv_rate));
    if (two_stage) {
        p.q2 = q2_of(s1);
        const Shape s2 = stage2(p.q2);
        p.g2 = s2.g;
        p.r2 = s2.r;
        p.k2 = s2.k;
        p.m2 = s2.m;
        p.eve_cap2 = floor_bi(real(p.q2) * BigReal(te2));
    } else {
        p.q2 = p.g2 = p.r2 = p.k2 = p.m2 = p.eve_cap2 = 0;
    }
    if (p.r1 <= 0 || (two_stage && p.r2 <= 0))
        throw DegenerateError("degenerate parameters: r_i <= 0; use a larger q1 or lambda");

    switch (scheme) {
        case Scheme::F1: p.c1 = q1 * tab * lambda; break;
        case Scheme::F2:
        case Scheme::F2simple: p.c1 = q1 * ta * lambda; break;
        case Scheme::F3: p.c1 = q1 * tb * lambda + q1 * p.w1; break;
        case Scheme::F0: break;
    }
    p.c2 = p.q2 * tab * lambda;
    return p;
}

Secret pack_key(const std::vector<std::uint64_t>& chunks, int lambda, int w, std::int64_t r1, Rng& surplus) {
    if (w < 1 || w > 64) throw UsageError("key chunk width must lie in [1, 64]");
    const std::int64_t total = r1 * lambda;
    const std::int64_t used = static_cast<std::int64_t>(chunks.size()) * w;
    if (used > total) throw UsageError("key chunks exceed r1 * lambda bits");
    Secret key(static_cast<std::size_t>(r1), 0);
    auto put = [&](std::int64_t pos, bool bit) {
        if (bit) key[static_cast<std::size_t>(pos / lambda)] |= elem_t(1) << (lambda - 1 - pos % lambda);
    };
    std::int64_t pos = 0;
    for (std::uint64_t c : chunks)
        for (int b = w - 1; b >= 0; --b) put(pos++, (c >> b) & 1);
    for (; pos < total; ++pos) put(pos, surplus.next() & 1);
    return key;
}

std::vector<std::uint64_t> unpack_key(const Secret& key, int lambda, int w, std::int64_t chunks) {
    if (w < 1 || w > 64) throw UsageError("key chunk width must lie in [1, 64]");
    if (chunks * w > static_cast<std::int64_t>(key.size()) * lambda) throw UsageError("key too short for chunks");
    std::vector<std::uint64_t> out(static_cast<std::size_t>(chunks), 0);
    std::int64_t pos = 0;
    for (auto& c : out)
        for (int b = 0; b < w; ++b, ++pos) {
            const elem_t e = key[static_cast<std::size_t>(pos / lambda)];
            c = (c << 1) | static_cast<std::uint64_t>((e >> (lambda - 1 - pos % lambda)) & 1);
        }
    return out;
}

namespace {

FieldPtr sim_field(const MultipathConfig& cfg) {
    if (cfg.lambda > 128) throw ParameterError("simulation needs lambda <= 128; set lambda_field");
    return FieldSpec::standard(cfg.lambda);
}

void check_params(const MultipathConfig& cfg, const ProtocolParams& p, std::initializer_list<Scheme> allowed) {
    cfg.validate();
    if (std::find(allowed.begin(), allowed.end(), p.scheme) == allowed.end())
        throw UsageError(std::string("runner does not handle scheme ") + to_string(p.scheme));
    const auto& c = p.config;
    if (c.n != cfg.n || c.t_a != cfg.t_a || c.t_b != cfg.t_b || c.t_e != cfg.t_e || c.lambda != cfg.lambda)
        throw UsageError("params were derived for a different setting");
}

std::shared_ptr<const QuasiRampScheme> scheme_for(const FieldPtr& f, const QuasiRampParams& qp) {
    try {
        check_field_capacity(*f, qp, Layout::evaluation);
        return cached_scheme(f, qp, Layout::evaluation);
    } catch (const ParameterError&) {
        check_field_capacity(*f, qp, Layout::coefficient);
        return cached_scheme(f, qp, Layout::coefficient);
    }
}

Secret random_secret(const FieldSpec& f, std::int64_t len, Rng& rng) {
    Secret s(static_cast<std::size_t>(len));
    for (auto& e : s) e = rng.bits(static_cast<unsigned>(f.lambda()));
    return s;
}

PathSubset prefix_paths(int count, int n) {
    std::vector<int> v(static_cast<std::size_t>(count));
    std::iota(v.begin(), v.end(), 0);
    return PathSubset(std::move(v), n);
}

struct StageTwo {
    std::optional<Secret> bob;
    std::int64_t eve = 0;
};

// Coordinated PMT: each interval's paths come from the next w-bit key chunk.
StageTwo coordinated_stage(Channel& ch, const ProtocolParams& p, const FieldPtr& f, const Secret& key_alice,
                           const Secret& key_bob, const Secret& message, Rng& rng) {
    const auto& cfg = ch.config();
    const int tab = cfg.t_ab();
    const std::int64_t q2 = to_i64(p.q2, "q2");
    if (p.w > 64) throw ParameterError("w above 64 bits is not simulated");
    const SubsetCodec codec(cfg.n, tab);
    const auto ka = unpack_key(key_alice, cfg.lambda, p.w, q2);
    const auto kb = unpack_key(key_bob, cfg.lambda, p.w, q2);
    const QuasiRampParams qp{to_i64(p.k2, "k2"), to_i64(p.r2, "r2"), to_i64(p.g2, "g2"), to_i64(p.m2, "m2")};
    const auto scheme = scheme_for(f, qp);
    const ShareVector y = scheme->share(message, rng);

    StageTwo out;
    ShareVector yb(y.size());
    std::vector<std::pair<int, elem_t>> payload;
    for (std::int64_t i = 0; i < q2; ++i) {
        const PathSubset ta = codec.key_bits_to_subset(ka[static_cast<std::size_t>(i)]);
        const PathSubset tb = kb[static_cast<std::size_t>(i)] == ka[static_cast<std::size_t>(i)]
                                  ? ta
                                  : codec.key_bits_to_subset(kb[static_cast<std::size_t>(i)]);
        payload.clear();
        for (int j = 0; j < tab; ++j) payload.emplace_back(ta.indices[j], *y[static_cast<std::size_t>(i * tab + j)]);
        const auto d = ch.transmit(Party::alice, ta, tb, payload);
        for (std::size_t j = 0; j < d.receiver.size(); ++j)
            if (d.receiver[j].symbol) yb[static_cast<std::size_t>(i * tab) + j] = d.receiver[j].symbol;
        out.eve += d.eve_symbols;
    }
    out.bob = scheme->reconstruct(yb);
    return out;
}

void finish(PmtResult& res, Channel& ch, const RunOptions& opt) {
    res.failed = res.message_received != res.message_sent;
    res.bits_communicated = ch.bits();
    if (opt.keep_transcript) {
        res.audit_error = ch.audit();
        std::ostringstream os;
        ch.dump_transcript(os);
        res.transcript_csv = os.str();
    }
    if (opt.keep_eve_view) res.eve_view = ch.take_eve_view();
}

}  // namespace

PmtResult run_f0(const MultipathConfig& cfg, const Secret& message, EveStrategy& eve, Rng& rng,
                 const RunOptions& opt) {
    cfg.validate();
    const int tab = cfg.t_ab();
    if (cfg.t_e >= tab) throw InfeasibleError("F0 requires t_e < t_ab");
    const std::int64_t r = tab - cfg.t_e;
    if (message.empty() || static_cast<std::int64_t>(message.size()) % r != 0)
        throw UsageError("F0 message length must be a positive multiple of t_ab - t_e");
    const FieldPtr f = sim_field(cfg);
    const QuasiRampParams qp{tab, r, 0, tab};
    std::shared_ptr<const QuasiRampScheme> scheme;
    try {
        scheme = scheme_for(f, qp);
    } catch (const ParameterError&) {
        throw InfeasibleError("F0 needs t_ab < 2^lambda field points");
    }

    Channel ch(cfg, eve, opt.keep_transcript, opt.keep_eve_view);
    const PathSubset fixed = prefix_paths(tab, cfg.n);
    ch.declare_fixed_paths(fixed.indices);
    PmtResult res;
    res.message_sent = message;
    const std::int64_t q = static_cast<std::int64_t>(message.size()) / r;
    std::vector<std::pair<int, elem_t>> payload;
    for (std::int64_t i = 0; i < q; ++i) {
        const Secret part(message.begin() + i * r, message.begin() + (i + 1) * r);
        const ShareVector x = scheme->share(part, rng);
        payload.clear();
        for (int j = 0; j < tab; ++j) payload.emplace_back(j, *x[static_cast<std::size_t>(j)]);
        const auto d = ch.transmit(Party::alice, fixed, fixed, payload);
        ShareVector xb(static_cast<std::size_t>(tab));
        for (std::size_t j = 0; j < d.receiver.size(); ++j) xb[j] = d.receiver[j].symbol;
        res.eve_shares_stage1 += d.eve_symbols;
        res.receiver_shares_stage1 += present_count(xb);
        const auto got = scheme->reconstruct(xb);
        const Secret piece = got ? *got : random_secret(*f, r, rng);
        res.message_received.insert(res.message_received.end(), piece.begin(), piece.end());
    }
    finish(res, ch, opt);
    return res;
}

PmtResult run_f1(const MultipathConfig& cfg, const ProtocolParams& p, const Secret& message, EveStrategy& eve,
                 Rng& rng, const RunOptions& opt) {
    check_params(cfg, p, {Scheme::F1});
    if (static_cast<std::int64_t>(message.size()) != to_i64(p.r2, "r2")) throw UsageError("message length must be r2");
    const FieldPtr f = sim_field(cfg);
    const int tab = cfg.t_ab();
    const std::int64_t q1 = to_i64(p.q1, "q1"), q2 = to_i64(p.q2, "q2"), r1 = to_i64(p.r1, "r1");

    Channel ch(cfg, eve, opt.keep_transcript, opt.keep_eve_view);
    const PathSubset fixed = prefix_paths(tab, cfg.n);
    ch.declare_fixed_paths(fixed.indices);

    // Alice draws the subset ranks herself, so no modular bias.
    const SubsetCodec codec(cfg.n, tab);
    if (!codec.small()) throw ParameterError("C(n, t_ab) too large to simulate");
    const auto count = static_cast<std::uint64_t>(codec.count());
    std::vector<std::uint64_t> ranks(static_cast<std::size_t>(q2));
    for (auto& x : ranks) x = rng.below(count);
    const Secret key = pack_key(ranks, cfg.lambda, p.w, r1, rng);

    const QuasiRampParams qp{to_i64(p.k1, "k1"), r1, to_i64(p.g1, "g1"), to_i64(p.m1, "m1")};
    const auto scheme = scheme_for(f, qp);
    const ShareVector x = scheme->share(key, rng);
    ShareVector xb(x.size());
    std::vector<std::pair<int, elem_t>> payload;
    PmtResult res;
    res.message_sent = message;
    for (std::int64_t i = 0; i < q1; ++i) {
        payload.clear();
        for (int j = 0; j < tab; ++j) payload.emplace_back(j, *x[static_cast<std::size_t>(i * tab + j)]);
        const auto d = ch.transmit(Party::alice, fixed, fixed, payload);
        for (std::size_t j = 0; j < d.receiver.size(); ++j)
            xb[static_cast<std::size_t>(i * tab) + j] = d.receiver[j].symbol;
        res.eve_shares_stage1 += d.eve_symbols;
    }
    res.receiver_shares_stage1 = present_count(xb);
    const auto key_bob = scheme->reconstruct(xb);
    res.keys_agree = key_bob && *key_bob == key;
    res.bad.eve_over_threshold_stage1 = BigInt(res.eve_shares_stage1) > p.eve_cap1;

    const auto st = coordinated_stage(ch, p, f, key, key_bob ? *key_bob : random_secret(*f, r1, rng), message, rng);
    res.eve_shares_stage2 = st.eve;
    res.bad.eve_over_threshold_stage2 = BigInt(st.eve) > p.eve_cap2;
    res.message_received = st.bob ? *st.bob : random_secret(*f, to_i64(p.r2, "r2"), rng);
    finish(res, ch, opt);
    return res;
}

PmtResult run_f2(const MultipathConfig& cfg, const ProtocolParams& p, const Secret& message, EveStrategy& eve,
                 Rng& rng, const RunOptions& opt) {
    check_params(cfg, p, {Scheme::F2, Scheme::F2simple});
    const bool two_stage = p.scheme == Scheme::F2;
    const std::int64_t msg_len = to_i64(p.message_elements(), "message length");
    if (static_cast<std::int64_t>(message.size()) != msg_len) throw UsageError("message length does not match params");
    const FieldPtr f = sim_field(cfg);
    const int np = p.n_prime, ta = cfg.t_a, tb = cfg.t_b;
    const std::int64_t q1 = to_i64(p.q1, "q1"), r1 = to_i64(p.r1, "r1");

    Channel ch(cfg, eve, opt.keep_transcript, opt.keep_eve_view);
    const PathSubset fixed = prefix_paths(np, cfg.n);
    ch.declare_fixed_paths(fixed.indices);

    Secret secret1 = message;
    if (two_stage) {
        const SubsetCodec codec(cfg.n, cfg.t_ab());
        if (!codec.small()) throw ParameterError("C(n, t_ab) too large to simulate");
        const auto count = static_cast<std::uint64_t>(codec.count());
        std::vector<std::uint64_t> ranks(static_cast<std::size_t>(to_i64(p.q2, "q2")));
        for (auto& x : ranks) x = rng.below(count);
        secret1 = pack_key(ranks, cfg.lambda, p.w, r1, rng);
    }

    const QuasiRampParams qp{to_i64(p.k1, "k1"), r1, to_i64(p.g1, "g1"), to_i64(p.m1, "m1")};
    const auto scheme = scheme_for(f, qp);
    const ShareVector x = scheme->share(secret1, rng);
    ShareVector xb(x.size());
    std::vector<std::pair<int, elem_t>> payload;
    PmtResult res;
    res.message_sent = message;
    for (std::int64_t i = 0; i < q1; ++i) {
        // Only the side holding fewer than n' paths picks them at random.
        PathSubset a = ta == np ? fixed : random_subset(np, ta, rng);
        PathSubset b = tb == np ? fixed : random_subset(np, tb, rng);
        a.n = b.n = cfg.n;
        payload.clear();
        for (int j = 0; j < ta; ++j) payload.emplace_back(a.indices[j], *x[static_cast<std::size_t>(i * ta + j)]);
        const auto d = ch.transmit(Party::alice, a, b, payload);
        // Share index is the path's position in Alice's set: known to Bob when
        // Alice uses every fixed path, and observable when Bob listens on all of them.
        std::size_t j = 0;
        for (const auto& o : d.receiver) {
            if (!o.symbol) continue;
            const std::size_t slot = ta == np ? static_cast<std::size_t>(o.path) : j++;
            xb[static_cast<std::size_t>(i * ta) + slot] = o.symbol;
        }
        res.eve_shares_stage1 += d.eve_symbols;
    }
    res.receiver_shares_stage1 = present_count(xb);
    res.bad.eve_over_threshold_stage1 = BigInt(res.eve_shares_stage1) > p.eve_cap1;
    const bool abort = BigInt(res.receiver_shares_stage1) < p.receiver_floor1;
    res.bad.bob_under_threshold = abort;
    res.aborted = abort;

    std::optional<Secret> got;
    if (!abort) got = scheme->reconstruct(xb);
    const Secret bob1 = got ? *got : random_secret(*f, r1, rng);

    if (!two_stage) {
        res.message_received = bob1;
    } else {
        res.keys_agree = got && *got == secret1;
        const auto st = coordinated_stage(ch, p, f, secret1, bob1, message, rng);
        res.eve_shares_stage2 = st.eve;
        res.bad.eve_over_threshold_stage2 = BigInt(st.eve) > p.eve_cap2;
        res.message_received = (!abort && st.bob) ? *st.bob : random_secret(*f, msg_len, rng);
    }
    finish(res, ch, opt);
    return res;
}

PmtResult run_f3(const MultipathConfig& cfg, const ProtocolParams& p, const Secret& message, EveStrategy& eve,
                 Rng& rng, const RunOptions& opt) {
    check_params(cfg, p, {Scheme::F3});
    const std::int64_t r2 = to_i64(p.r2, "r2");
    if (static_cast<std::int64_t>(message.size()) != r2) throw UsageError("message length must be r2");
    const FieldPtr f = sim_field(cfg);
    const int ta = cfg.t_a, tb = cfg.t_b;
    const std::int64_t q1 = to_i64(p.q1, "q1"), m1 = to_i64(p.m1, "m1"), r1 = to_i64(p.r1, "r1");

    Channel ch(cfg, eve, opt.keep_transcript, opt.keep_eve_view);
    struct Caught {
        std::int64_t interval;
        int path;
        elem_t value;
        bool eve_saw;
    };
    std::vector<Caught> caught;
    std::vector<std::vector<int>> bob_paths(static_cast<std::size_t>(q1));
    std::vector<elem_t> bob_sent(static_cast<std::size_t>(q1 * tb));
    std::vector<std::pair<int, elem_t>> payload;
    PmtResult res;
    res.message_sent = message;
    for (std::int64_t i = 0; i < q1; ++i) {
        PathSubset b = random_subset(cfg.n, tb, rng);
        const PathSubset a = random_subset(cfg.n, ta, rng);
        payload.clear();
        for (int j = 0; j < tb; ++j) {
            const elem_t v = rng.bits(static_cast<unsigned>(cfg.lambda));
            bob_sent[static_cast<std::size_t>(i * tb + j)] = v;
            payload.emplace_back(b.indices[j], v);
        }
        const auto d = ch.transmit(Party::bob, b, a, payload);
        for (const auto& o : d.receiver) {
            if (!o.symbol) continue;
            bool seen = false;
            for (const auto& e : d.eve)
                if (e.path == o.path && e.symbol) seen = true;
            caught.push_back({i, o.path, *o.symbol, seen});
        }
        bob_paths[static_cast<std::size_t>(i)] = std::move(b.indices);
    }
    res.receiver_shares_stage1 = static_cast<std::int64_t>(caught.size());
    const BigInt report_bits = p.q1 * p.w1;
    if (BigInt(res.receiver_shares_stage1) < p.receiver_floor1) {
        res.aborted = true;
        res.bad.bob_under_threshold = true;
        ch.publish(Party::alice, "abort", to_i64(report_bits, "report bits"));
        res.message_received = random_secret(*f, r2, rng);
        finish(res, ch, opt);
        return res;
    }

    // Alice keeps her first m1 elements and announces where they came from.
    caught.resize(static_cast<std::size_t>(m1));
    std::string report;
    report.reserve(caught.size() * 8);
    Secret xa(static_cast<std::size_t>(m1)), xb(static_cast<std::size_t>(m1));
    for (std::size_t s = 0; s < caught.size(); ++s) {
        const auto& c = caught[s];
        if (s) report += ';';
        report += std::to_string(c.interval) + ':' + std::to_string(c.path);
        xa[s] = c.value;
        const auto& bp = bob_paths[static_cast<std::size_t>(c.interval)];
        const auto pos = std::lower_bound(bp.begin(), bp.end(), c.path) - bp.begin();
        xb[s] = bob_sent[static_cast<std::size_t>(c.interval * tb + pos)];
        if (c.eve_saw) ++res.eve_shares_stage1;
    }
    ch.publish(Party::alice, report, to_i64(report_bits, "report bits"));
    res.bad.eve_over_threshold_stage1 = BigInt(res.eve_shares_stage1) > p.eve_cap1;

    const QuasiRampParams qp{to_i64(p.k1, "k1"), r1, to_i64(p.g1, "g1"), m1};
    const auto scheme = scheme_for(f, qp);
    auto as_shares = [](const Secret& v) { return ShareVector(v.begin(), v.end()); };
    const auto key_a = scheme->reconstruct(as_shares(xa));
    const auto key_b = scheme->reconstruct(as_shares(xb));
    if (!key_a || !key_b) throw ProtocolBug("F3 key reconstruction refused a full share set");
    res.keys_agree = *key_a == *key_b;

    const auto st = coordinated_stage(ch, p, f, *key_a, *key_b, message, rng);
    res.eve_shares_stage2 = st.eve;
    res.bad.eve_over_threshold_stage2 = BigInt(st.eve) > p.eve_cap2;
    res.message_received = st.bob ? *st.bob : random_secret(*f, r2, rng);
    finish(res, ch, opt);
    return res;
}

PmtResult run_scheme(const MultipathConfig& cfg, const ProtocolParams& p, const Secret& message, EveStrategy& eve,
                     Rng& rng, const RunOptions& opt) {
    switch (p.scheme) {
        case Scheme::F0: return run_f0(cfg, message, eve, rng, opt);
        case Scheme::F1: return run_f1(cfg, p, message, eve, rng, opt);
        case Scheme::F2:
        case Scheme::F2simple: return run_f2(cfg, p, message, eve, rng, opt);
        case Scheme::F3: return run_f3(cfg, p, message, eve, rng, opt);
    }
    throw UsageError("unknown scheme");
}

EveKind eve_kind_from_string(const std::string& s) {
    if (s == "uniform") return EveKind::uniform;
    if (s == "static") return EveKind::static_paths;
    if (s == "omniscient-static") return EveKind::omniscient_static;
    throw UsageError("unknown eve strategy '" + s + "' (expected uniform, static or omniscient-static)");
}

const char* to_string(EveKind k) {
    switch (k) {
        case EveKind::uniform: return "uniform";
        case EveKind::static_paths: return "static";
        case EveKind::omniscient_static: return "omniscient-static";
    }
    return "?";
}

std::unique_ptr<EveStrategy> make_eve(const EveSpec& spec, const MultipathConfig& cfg, std::uint64_t seed) {
    switch (spec.kind) {
        case EveKind::uniform: return eve_strategy_uniform(seed);
        case EveKind::static_paths: return eve_strategy_static(PathSubset(spec.paths, cfg.n));
        case EveKind::omniscient_static: return eve_strategy_omniscient_static();
    }
    throw UsageError("unknown eve strategy");
}

TrialOutcome run_one_trial(const TrialPlan& plan, std::int64_t index, std::string* transcript_csv) {
    const std::uint64_t seed = derive_seed(plan.master_seed, static_cast<std::uint64_t>(index));
    Rng rng(seed);
    const FieldPtr f = sim_field(plan.config);
    const Secret message = random_secret(*f, to_i64(plan.params.message_elements(), "message length"), rng);
    auto eve = make_eve(plan.eve, plan.config, derive_seed(seed, 0x45564521));
    RunOptions opt;
    opt.keep_transcript = plan.audit || transcript_csv != nullptr;
    opt.keep_eve_view = false;
    PmtResult res = run_scheme(plan.config, plan.params, message, *eve, rng, opt);

    TrialOutcome t;
    t.trial = index;
    t.aborted = res.aborted;
    t.failed = res.failed;
    t.bad = res.bad;
    t.bits_communicated = res.bits_communicated;
    t.bits_expected = to_i64(expected_bits(plan.params, res.aborted), "bits");
    t.keys_agree = res.keys_agree;
    t.audit_error = res.audit_error;
    if (transcript_csv) *transcript_csv = std::move(res.transcript_csv);
    return t;
}

int worker_count(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("PMTLAB_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return n;
}

std::vector<TrialOutcome> run_trials(const TrialPlan& plan, int threads) {
    if (plan.trials < 0) throw UsageError("trial count must be non-negative");
    std::vector<TrialOutcome> out(static_cast<std::size_t>(plan.trials));
    const int workers =
        static_cast<int>(std::min<std::int64_t>(worker_count(threads), std::max<std::int64_t>(plan.trials, 1)));
    std::atomic<std::int64_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&] {
        for (;;) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= plan.trials) return;
            try {
                out[static_cast<std::size_t>(i)] = run_one_trial(plan, i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
                next = plan.trials;
                return;
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < workers; ++k) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);
    return out;
}

}  // namespace pmt

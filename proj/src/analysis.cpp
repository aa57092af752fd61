#include "pmt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/beta.hpp>

#include "pmt/errors.hpp"

namespace pmt {

namespace {

constexpr double kE = 2.718281828459045235;

double plus(double x) { return x > 0 ? x : 0.0; }

double ap_numerator(const RealSetting& s) { return 1.0 - s.t_e / s.n - delta_of_lambda(s.lambda); }

double log_term(const RealSetting& s) { return std::log2(kE * s.n / s.t_ab()); }

std::pair<double, std::string> ap_lower(const RealSetting& s, Direction dir) {
    std::pair<std::optional<double>, const char*> best{std::nullopt, "none"};
    auto consider = [&](std::optional<double> v, const char* name) {
        if (v && (!best.first || *v < *best.first)) best = {v, name};
    };
    if (s.t_e < s.t_ab()) consider(xi1(s), "F1");
    if (s.t_e < s.t_b) consider(xi2(s), "F2");
    if (dir == Direction::twoway) consider(xi3(s), "F3");
    std::pair<double, std::string> out{0.0, "none"};
    if (best.first) out = {plus(ap_numerator(s) / (1.0 + *best.first)), best.second};
    // the receiver hears every path
    if (s.t_b >= s.n && s.t_a > 0 && s.t_e < s.t_b) {
        const double simple = plus(1.0 - s.t_e / s.t_b - delta_of_lambda(s.lambda));
        if (simple > out.first) out = {simple, "F2simple"};
    }
    // a perfectly secure rate is also almost-perfectly secure
    const double p_lower = p_capacity_bounds(s).first;
    if (p_lower > out.first) out = {p_lower, "F0"};
    return out;
}

}  // namespace

RealSetting RealSetting::from(const MultipathConfig& cfg) {
    cfg.validate();
    return {static_cast<double>(cfg.n), static_cast<double>(cfg.t_a), static_cast<double>(cfg.t_b),
            static_cast<double>(cfg.t_e), static_cast<double>(cfg.lambda)};
}

const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::F0: return "F0";
        case Scheme::F1: return "F1";
        case Scheme::F2: return "F2";
        case Scheme::F2simple: return "F2simple";
        case Scheme::F3: return "F3";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& s) {
    for (Scheme x : {Scheme::F0, Scheme::F1, Scheme::F2, Scheme::F2simple, Scheme::F3})
        if (s == to_string(x)) return x;
    throw UsageError("unknown scheme '" + s + "' (expected F0, F1, F2, F2simple or F3)");
}

const char* to_string(Regime r) {
    switch (r) {
        case Regime::te_lt_tab: return "t_e<t_ab";
        case Regime::tab_le_te_lt_tb: return "t_ab<=t_e<t_b";
        case Regime::tb_le_te_lt_n: return "t_b<=t_e<n";
        case Regime::te_eq_n: return "t_e=n";
    }
    return "?";
}

Regime detect_regime(const RealSetting& s) {
    if (s.t_e >= s.n) return Regime::te_eq_n;
    if (s.t_e < s.t_ab()) return Regime::te_lt_tab;
    if (s.t_e < s.t_b) return Regime::tab_le_te_lt_tb;
    return Regime::tb_le_te_lt_n;
}
Regime detect_regime(const MultipathConfig& cfg) { return detect_regime(RealSetting::from(cfg)); }

double delta_of_lambda(double lambda) {
    if (!(lambda >= 5)) throw DomainError("Delta needs lambda >= 5");
    return 1.0 / (std::exp2(lambda / 2 - 2) - 0.25);
}

std::pair<double, double> p_capacity_bounds(const RealSetting& s) {
    if (s.t_ab() <= 0) return {0.0, 0.0};
    const double base = 1.0 - s.t_e / s.t_ab();
    return {plus(base - delta_of_lambda(s.lambda)), plus(base)};
}
std::pair<double, double> p_capacity_bounds(const MultipathConfig& cfg) {
    return p_capacity_bounds(RealSetting::from(cfg));
}

std::optional<double> xi1(const RealSetting& s) {
    if (s.t_ab() <= 0 || s.t_e >= s.t_ab()) return std::nullopt;
    const double den = s.lambda * (1.0 - s.t_e / s.t_ab() - delta_of_lambda(s.lambda));
    if (den <= 0) return std::nullopt;
    return log_term(s) / den;
}

std::optional<double> xi2(const RealSetting& s) {
    if (s.t_ab() <= 0 || s.t_e >= s.t_b) return std::nullopt;
    const double n_prime = std::max(s.t_a, s.t_b);
    const double den = s.lambda * ((s.t_b - s.t_e) / n_prime - delta_of_lambda(s.lambda));
    if (den <= 0) return std::nullopt;
    return log_term(s) / den;
}

std::optional<double> xi3(const RealSetting& s) {
    if (s.t_a <= 0 || s.t_b <= 0 || s.t_e >= s.n) return std::nullopt;
    const double den = s.lambda * ap_numerator(s);
    if (den <= 0) return std::nullopt;
    const double head = s.n / s.t_a + std::log2(kE * s.n * s.n / (s.t_a * s.t_b)) / s.lambda;
    return head * log_term(s) / den;
}

std::optional<double> xi1(const MultipathConfig& cfg) { return xi1(RealSetting::from(cfg)); }
std::optional<double> xi2(const MultipathConfig& cfg) { return xi2(RealSetting::from(cfg)); }
std::optional<double> xi3(const MultipathConfig& cfg) { return xi3(RealSetting::from(cfg)); }

std::pair<double, double> ap_capacity_bounds(const RealSetting& s, Direction dir) {
    const double upper_val = 1.0 - s.t_e / s.n;
    if (dir == Direction::oneway) {
        if (s.t_e >= s.t_b) return {0.0, 0.0};
    } else if (s.t_a <= 0 || s.t_b <= 0 || s.t_e >= s.n) {
        return {0.0, 0.0};
    }
    return {ap_lower(s, dir).first, upper_val};
}
std::pair<double, double> ap_capacity_bounds(const MultipathConfig& cfg, Direction dir) {
    return ap_capacity_bounds(RealSetting::from(cfg), dir);
}

CapacityReport capacity_report(const RealSetting& s) {
    if (!(s.n > 0) || s.t_a < 0 || s.t_b < 0 || s.t_e < 0 || s.t_a > s.n || s.t_b > s.n || s.t_e > s.n)
        throw UsageError("budgets must lie in [0, n]");
    CapacityReport r;
    r.delta_cap = delta_of_lambda(s.lambda);
    std::tie(r.c0_lower, r.c0_upper) = p_capacity_bounds(s);
    std::tie(r.oneway_ap_lower, r.oneway_ap_upper) = ap_capacity_bounds(s, Direction::oneway);
    std::tie(r.twoway_ap_lower, r.twoway_ap_upper) = ap_capacity_bounds(s, Direction::twoway);
    r.xi1 = xi1(s);
    r.xi2 = xi2(s);
    r.xi3 = xi3(s);
    r.regime = detect_regime(s);
    if (s.t_e < s.t_b) r.oneway_active = ap_lower(s, Direction::oneway).second;
    if (r.twoway_ap_upper > 0) r.twoway_active = ap_lower(s, Direction::twoway).second;
    return r;
}

CapacityReport capacity_report(const MultipathConfig& cfg) {
    CapacityReport r = capacity_report(RealSetting::from(cfg));
    r.config = cfg;
    return r;
}

double scheme_rate(const MultipathConfig& cfg, Scheme scheme, double psi) {
    cfg.validate();
    if (!(psi > 0 && psi < 1)) throw UsageError("psi must lie in (0, 1)");
    const double te = cfg.t_e;
    const RealSetting s = RealSetting::from(cfg);
    auto finish = [&](std::optional<double> x) {
        if (!x) throw DegenerateError("overhead factor undefined: Delta too large for lambda");
        const double r = ap_numerator(s) / (1.0 + *x);
        if (r <= 0) throw DegenerateError("rate non-positive: Delta too large for lambda");
        return r;
    };
    switch (scheme) {
        case Scheme::F0:
            if (cfg.t_e >= cfg.t_ab()) throw InfeasibleError("F0 requires t_e < t_ab");
            return 1.0 - te / cfg.t_ab();
        case Scheme::F1:
            if (cfg.t_e >= cfg.t_ab()) throw InfeasibleError("F1 requires t_e < t_ab <= n");
            return finish(xi1(cfg));
        case Scheme::F2:
            if (cfg.t_e >= cfg.t_b || cfg.t_a == 0) throw InfeasibleError("F2 requires t_e < t_b and t_a > 0");
            return finish(xi2(cfg));
        case Scheme::F2simple: {
            if (cfg.t_b != cfg.n) throw InfeasibleError("F2simple requires t_b = n");
            if (cfg.t_e >= cfg.t_b || cfg.t_a == 0) throw InfeasibleError("F2simple requires t_e < t_b and t_a > 0");
            const double r = (cfg.t_b - te) / cfg.t_b - delta_of_lambda(cfg.lambda);
            if (r <= 0) throw DegenerateError("rate non-positive: Delta too large for lambda");
            return r;
        }
        case Scheme::F3:
            if (cfg.t_a == 0 || cfg.t_b == 0 || cfg.t_e >= cfg.n)
                throw InfeasibleError("F3 requires t_a, t_b > 0 and t_e < n");
            return finish(xi3(cfg));
    }
    throw UsageError("unknown scheme");
}

namespace {

std::optional<double> penalty_with_sign(double epsilon, double delta, double sign) {
    if (!(delta >= 0 && delta < 1) || !(epsilon >= 0 && epsilon <= 1))
        throw UsageError("epsilon_penalty needs 0 <= delta < 1 and 0 <= epsilon <= 1");
    const double e = (epsilon + delta) / (1 - delta);
    if (e > 1) return std::nullopt;
    const double elog = e > 0 ? e * std::log2(e) : 0.0;
    const double den = 1 - 1.25 * e + sign * elog;
    if (den <= 0) return std::nullopt;
    return 1.0 / den;
}

}  // namespace

std::optional<double> epsilon_penalty(double epsilon, double delta) { return penalty_with_sign(epsilon, delta, +1); }

std::optional<double> epsilon_penalty_literal(double epsilon, double delta) {
    return penalty_with_sign(epsilon, delta, -1);
}

std::optional<double> oneway_rate_cap(double epsilon, double delta, double alpha) {
    if (delta + alpha >= 1) return std::nullopt;
    return 2 * epsilon / (1 - delta - alpha);
}

SuperiorityRange superiority_range(const MultipathConfig& cfg) {
    if (cfg.t_ab() == 0) throw UsageError("superiority_range needs t_ab > 0");
    SuperiorityRange out;
    const double n = cfg.n;
    const double d = delta_of_lambda(cfg.lambda);
    const double x = log_term(RealSetting::from(cfg)) / (cfg.lambda * (1 - d));
    const double den = (1 + x) / cfg.t_ab() - 1 / n;
    if (den > 0) {
        const double lo = (x + d) / den, hi = (1 - d) * n;
        if (lo < hi) out.exact = std::make_pair(lo, hi);
    }
    const double alpha = cfg.t_ab() / n;
    if (alpha < 1) {
        const double lo = alpha * std::log2(kE / alpha) / (cfg.lambda * (1 - alpha)) * n;
        if (lo < n) out.limit = std::make_pair(lo, n);
    }
    return out;
}

TrialMinimums chernoff_trial_minimums(const MultipathConfig& cfg, double psi, double delta_target,
                                      double epsilon_target, Scheme scheme) {
    cfg.validate();
    if (!(psi > 0 && psi < 1)) throw UsageError("psi must lie in (0, 1)");
    if (!(delta_target > 0 && delta_target < 1) || !(epsilon_target > 0 && epsilon_target < 1))
        throw UsageError("delta and epsilon targets must lie in (0, 1)");
    const double n = cfg.n, ta = cfg.t_a, tb = cfg.t_b, te = cfg.t_e, tab = cfg.t_ab();
    const double big = std::exp2(cfg.lambda / 2.0) - 1;
    const double p2 = psi * psi;
    // a term whose denominator vanishes bounds nothing
    auto term = [](double num, double den) { return den > 0 ? num / den : 0.0; };
    auto eve_term = [&](double log_arg) { return term((2 + psi) * n * std::log(log_arg), p2 * te); };
    const double te2 = (1 + psi) * tab * te / n;

    TrialMinimums m;
    switch (scheme) {
        case Scheme::F0: break;
        case Scheme::F1:
            m.q1_min = term(big, te);
            m.q2_min = std::max(eve_term(1 / epsilon_target), term(big, te2));
            break;
        case Scheme::F2: {
            const double n_prime = std::max(ta, tb);
            const double te1 = (1 + psi) * ta * te / n_prime;
            m.q1_min = std::max({term(2 * n * std::log(1 / delta_target), p2 * tb), eve_term(2 / epsilon_target),
                                 term(big, te1)});
            m.q2_min = std::max(eve_term(2 / epsilon_target), term(big, te2));
            break;
        }
        case Scheme::F2simple: {
            // Bob hears every path, so there is no reliability term.
            const double te1 = (1 + psi) * ta * te / n;
            m.q1_min = std::max(eve_term(1 / epsilon_target), term(big, te1));
            break;
        }
        case Scheme::F3: {
            const double ta1 = (1 - psi) * ta * tb / n;
            const double te1 = (1 + psi) * ta1 * te / n;
            m.q1_min = std::max({term(2 * n * std::log(1 / delta_target), p2 * ta),
                                 term((2 + psi) * n * n * std::log(2 / epsilon_target), p2 * ta * te),
                                 term(big, te1)});
            m.q2_min = std::max(eve_term(2 / epsilon_target), term(big, te2));
            break;
        }
    }
    return m;
}

Confidence montecarlo_confidence(std::int64_t successes, std::int64_t trials) {
    if (trials <= 0) throw UsageError("montecarlo_confidence needs trials > 0");
    if (successes < 0 || successes > trials) throw UsageError("successes must lie in [0, trials]");
    Confidence c;
    c.point = static_cast<double>(successes) / trials;
    c.upper95 = successes == trials
                    ? 1.0
                    : boost::math::ibeta_inv(static_cast<double>(successes + 1),
                                             static_cast<double>(trials - successes), 0.975);
    return c;
}

}  // namespace pmt

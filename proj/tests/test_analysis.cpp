#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pmt/analysis.hpp"
#include "pmt/errors.hpp"

using namespace pmt;

TEST_CASE("Delta of lambda") {
    // (2^50 - 0.25)^-1
    CHECK(delta_of_lambda(104) == doctest::Approx(1.0 / (std::ldexp(1.0, 50) - 0.25)).epsilon(1e-12));
    CHECK(delta_of_lambda(104) == doctest::Approx(8.8818e-16).epsilon(1e-4));
    CHECK(delta_of_lambda(100) < 1e-14);
    for (int l = 10; l < 120; l += 10) CHECK(delta_of_lambda(l + 10) < delta_of_lambda(l));
    for (int l = 5; l < 128; ++l) CHECK(delta_of_lambda(l + 1) < delta_of_lambda(l));
    CHECK_THROWS_AS(delta_of_lambda(4), DomainError);
}

TEST_CASE("P-capacity bounds") {
    auto [lo, hi] = p_capacity_bounds(MultipathConfig{10, 4, 4, 4, 100});
    CHECK(lo == 0.0);
    CHECK(hi == 0.0);
    auto b = p_capacity_bounds(RealSetting{100, 20, 20, 10, 100});
    CHECK(b.second == doctest::Approx(0.5));
    CHECK(b.first == doctest::Approx(0.5 - delta_of_lambda(100)));
    auto z = p_capacity_bounds(MultipathConfig{10, 4, 6, 0, 20});
    CHECK(z.first == doctest::Approx(1 - delta_of_lambda(20)));
    CHECK(z.second == 1.0);
}

TEST_CASE("regimes") {
    CHECK(detect_regime(MultipathConfig{10, 2, 8, 1, 64}) == Regime::te_lt_tab);
    CHECK(detect_regime(MultipathConfig{10, 2, 8, 2, 64}) == Regime::tab_le_te_lt_tb);
    CHECK(detect_regime(MultipathConfig{10, 2, 8, 9, 64}) == Regime::tb_le_te_lt_n);
    CHECK(detect_regime(MultipathConfig{10, 2, 8, 10, 64}) == Regime::te_eq_n);
}

TEST_CASE("overhead factors on the 70-path scenario") {
    MultipathConfig cfg{70, 4, 4, 35, 104};
    CHECK_FALSE(xi1(cfg).has_value());  // t_e >= t_ab
    CHECK_FALSE(xi2(cfg).has_value());  // t_e >= t_b
    REQUIRE(xi3(cfg).has_value());
    CHECK(*xi3(cfg) == doctest::Approx(1.88518034).epsilon(1e-8));
}

TEST_CASE("scheme rates") {
    double wigig = scheme_rate(MultipathConfig{70, 4, 4, 35, 104}, Scheme::F3, 0.1);
    CHECK(wigig >= 0.16);
    CHECK(wigig <= 0.18);

    MultipathConfig manet{10, 2, 10, 8, 524};
    double r = scheme_rate(manet, Scheme::F2simple, 0.1);
    CHECK(std::abs(r - 0.2) < 1e-3);
    CHECK(r == doctest::Approx(0.2 - delta_of_lambda(524)).epsilon(1e-15));

    CHECK(scheme_rate(MultipathConfig{100, 100, 100, 0, 100}, Scheme::F1) >= 0.95);
    CHECK(scheme_rate(MultipathConfig{10, 10, 10, 0, 100}, Scheme::F0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(scheme_rate(MultipathConfig{12, 6, 6, 6, 64}, Scheme::F1), InfeasibleError);
    CHECK_THROWS_AS(scheme_rate(MultipathConfig{12, 6, 6, 6, 64}, Scheme::F2), InfeasibleError);
    CHECK_THROWS_AS(scheme_rate(MultipathConfig{10, 10, 10, 2, 5}, Scheme::F1), DegenerateError);
}

TEST_CASE("AP bounds at the regime edges") {
    auto one = ap_capacity_bounds(MultipathConfig{10, 4, 4, 4, 64}, Direction::oneway);
    CHECK(one.first == 0.0);
    CHECK(one.second == 0.0);
    auto two = ap_capacity_bounds(MultipathConfig{8, 1, 1, 7, 128}, Direction::twoway);
    CHECK(two.first > 0.0);
    CHECK(two.second == doctest::Approx(1.0 / 8));
    auto fa = ap_capacity_bounds(MultipathConfig{20, 20, 20, 5, 100}, Direction::twoway);
    CHECK(fa.first == doctest::Approx(0.75 - delta_of_lambda(100)).epsilon(1e-12));
    CHECK(fa.second == doctest::Approx(0.75));
    auto none = ap_capacity_bounds(MultipathConfig{8, 0, 3, 1, 64}, Direction::twoway);
    CHECK(none.first == 0.0);
    CHECK(none.second == 0.0);
}

TEST_CASE("sweep invariants") {
    for (double lambda : {32.0, 100.0, 128.0})
        for (double alpha : {0.05, 0.2, 0.5, 1.0})
            for (int i = 0; i < 200; ++i) {
                const double n = 100, beta = i / 199.0;
                RealSetting s{n, alpha * n, alpha * n, beta * n, lambda};
                auto rep = capacity_report(s);
                auto in01 = [](double v) { return v >= 0 && v <= 1; };
                CHECK(rep.c0_lower <= rep.c0_upper);
                CHECK(rep.oneway_ap_lower <= rep.oneway_ap_upper);
                CHECK(rep.twoway_ap_lower <= rep.twoway_ap_upper);
                CHECK(rep.twoway_ap_lower >= rep.oneway_ap_lower);
                CHECK(in01(rep.c0_lower));
                CHECK(in01(rep.c0_upper));
                CHECK(in01(rep.oneway_ap_lower));
                CHECK(in01(rep.oneway_ap_upper));
                CHECK(in01(rep.twoway_ap_lower));
                CHECK(in01(rep.twoway_ap_upper));
                CHECK((rep.oneway_ap_upper == 0) == (s.t_e >= s.t_b));
                CHECK((rep.twoway_ap_upper == 0) == (s.t_e >= s.n));
                if (auto x = xi1(s)) {
                    double f1 = (1 - s.t_e / n - delta_of_lambda(lambda)) / (1 + *x);
                    CHECK(f1 <= rep.oneway_ap_upper + 1e-12);
                }
            }
}

TEST_CASE("every feasible scheme rate sits under the reported lower bound") {
    const MultipathConfig cfgs[] = {{10, 2, 10, 8, 524}, {70, 4, 4, 35, 104}, {12, 6, 6, 3, 104}, {12, 4, 8, 5, 104},
                                    {20, 20, 20, 5, 100}, {100, 20, 60, 10, 100}, {8, 1, 1, 7, 128}};
    for (const auto& cfg : cfgs) {
        const auto rep = capacity_report(cfg);
        for (auto s : {Scheme::F0, Scheme::F1, Scheme::F2, Scheme::F2simple, Scheme::F3}) {
            double rate = 0;
            try {
                rate = scheme_rate(cfg, s);
            } catch (const InfeasibleError&) {
                continue;
            }
            CAPTURE(to_string(s));
            const double slack = s == Scheme::F0 ? delta_of_lambda(cfg.lambda) : 0.0;
            CHECK(rate <= rep.twoway_ap_lower + slack + 1e-15);
            if (s != Scheme::F3) CHECK(rate <= rep.oneway_ap_lower + slack + 1e-15);
        }
    }
}

TEST_CASE("epsilon penalty readings") {
    CHECK(*epsilon_penalty(0, 0) == 1.0);
    CHECK_FALSE(epsilon_penalty(0.5, 0.5).has_value());
    // e' = 0.01: 1 / (1 - 0.0125 + 0.01 log2 0.01)
    const double l = std::log2(0.01);
    CHECK(*epsilon_penalty(0.01, 0) == doctest::Approx(1 / (1 - 0.0125 + 0.01 * l)).epsilon(1e-14));
    CHECK(*epsilon_penalty_literal(0.01, 0) == doctest::Approx(1 / (1 - 0.0125 - 0.01 * l)).epsilon(1e-14));
    CHECK(*epsilon_penalty_literal(0.01, 0) < 1.0);
    double prev = 1.0;
    for (double e : {1e-4, 1e-3, 1e-2, 0.05, 0.1}) {
        double f = *epsilon_penalty(e, 0);
        CHECK(f >= 1.0);
        CHECK(f >= prev);
        prev = f;
    }
    CHECK(*epsilon_penalty(1e-9, 0) < 1 + 1e-6);
}

TEST_CASE("one-way rate cap") {
    CHECK(*oneway_rate_cap(0.1, 0.1, 0.1) == doctest::Approx(0.25));
    CHECK(*oneway_rate_cap(1e-9, 0.1, 0.1) < 1e-8);
    CHECK_FALSE(oneway_rate_cap(0.1, 0.5, 0.5).has_value());
}

TEST_CASE("superiority range") {
    auto r = superiority_range(MultipathConfig{100, 20, 20, 0, 100});
    REQUIRE(r.exact);
    REQUIRE(r.limit);
    CHECK(r.exact->first > 0.5);
    CHECK(r.exact->first < 1.5);
    CHECK(r.exact->second == doctest::Approx(100.0));
    // 0.2 log2(e / 0.2) / (100 * 0.8) * 100
    CHECK(r.limit->first == doctest::Approx(0.2 * std::log2(std::exp(1.0) / 0.2) / 80 * 100).epsilon(1e-12));
    auto fa = superiority_range(MultipathConfig{100, 100, 100, 0, 100});
    CHECK_FALSE(fa.exact.has_value());
    CHECK_FALSE(fa.limit.has_value());
    auto big = superiority_range(MultipathConfig{100, 20, 20, 0, 128});
    CHECK(big.limit->first < r.limit->first);
}

TEST_CASE("Chernoff minimums") {
    // 2.1 * 20 / (0.01 * 4) * ln(100)
    auto m = chernoff_trial_minimums(MultipathConfig{20, 10, 10, 4, 16}, 0.1, 0.05, 0.01, Scheme::F1);
    CHECK(m.q2_min == doctest::Approx(1050 * std::log(100.0)).epsilon(1e-12));
    CHECK(m.q2_min == doctest::Approx(4836).epsilon(1e-3));

    MultipathConfig f2{12, 4, 8, 5, 16};
    auto m2 = chernoff_trial_minimums(f2, 0.18, 0.05, 0.05, Scheme::F2);
    const double delta_term = 2 * 12 / (0.18 * 0.18 * 8) * std::log(1 / 0.05);
    const double eve_term = 2.18 * 12 / (0.18 * 0.18 * 5) * std::log(2 / 0.05);
    CHECK(m2.q1_min == doctest::Approx(std::max(delta_term, eve_term)).epsilon(1e-12));

    // near eps = 1 only the field-size term is left
    auto big = chernoff_trial_minimums(MultipathConfig{20, 10, 10, 4, 40}, 0.1, 0.05, 0.999999, Scheme::F1);
    CHECK(big.q2_min == doctest::Approx((std::exp2(20) - 1) / (1.1 * 10 * 4 / 20.0)).epsilon(1e-12));
    CHECK_THROWS_AS(chernoff_trial_minimums(f2, 0.0, 0.05, 0.05, Scheme::F2), UsageError);
}

TEST_CASE("Monte-Carlo confidence") {
    auto z = montecarlo_confidence(0, 10000);
    CHECK(z.point == 0.0);
    CHECK(z.upper95 == doctest::Approx(1 - std::pow(0.025, 1e-4)).epsilon(1e-9));
    CHECK(z.upper95 == doctest::Approx(3.7e-4).epsilon(0.01));
    CHECK(montecarlo_confidence(50, 10000).point == 0.005);
    CHECK(montecarlo_confidence(50, 10000).upper95 > 0.005);
    CHECK(montecarlo_confidence(7, 7).point == 1.0);
    CHECK(montecarlo_confidence(7, 7).upper95 == 1.0);
    CHECK_THROWS_AS(montecarlo_confidence(8, 7), UsageError);
}

TEST_CASE("scheme names") {
    for (auto s : {Scheme::F0, Scheme::F1, Scheme::F2, Scheme::F2simple, Scheme::F3})
        CHECK(scheme_from_string(to_string(s)) == s);
    CHECK_THROWS_AS(scheme_from_string("F9"), UsageError);
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "pmt/setting.hpp"

namespace pmt {

enum class Scheme { F0, F1, F2, F2simple, F3 };
const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);  // UsageError on unknown names

enum class Direction { oneway, twoway };

// Real-valued setting for sweeps where t_e = beta * n need not be integral.
struct RealSetting {
    double n = 0, t_a = 0, t_b = 0, t_e = 0, lambda = 0;

    static RealSetting from(const MultipathConfig& cfg);
    double t_ab() const { return t_a < t_b ? t_a : t_b; }
};

enum class Regime { te_lt_tab, tab_le_te_lt_tb, tb_le_te_lt_n, te_eq_n };
const char* to_string(Regime r);
Regime detect_regime(const MultipathConfig& cfg);
Regime detect_regime(const RealSetting& s);

// (2^(lambda/2 - 2) - 0.25)^-1; DomainError for lambda < 5.
double delta_of_lambda(double lambda);

// [1 - t_e/t_ab - Delta]_+ and [1 - t_e/t_ab]_+; both 0 when t_ab = 0.
std::pair<double, double> p_capacity_bounds(const MultipathConfig& cfg);
std::pair<double, double> p_capacity_bounds(const RealSetting& s);

// Overhead factors; nullopt when the scheme's precondition fails or the
// denominator is non-positive. Logs are base 2.
std::optional<double> xi1(const MultipathConfig& cfg);
std::optional<double> xi2(const MultipathConfig& cfg);
std::optional<double> xi3(const MultipathConfig& cfg);
std::optional<double> xi1(const RealSetting& s);
std::optional<double> xi2(const RealSetting& s);
std::optional<double> xi3(const RealSetting& s);

struct CapacityReport {
    MultipathConfig config;
    double delta_cap = 0;
    double c0_lower = 0, c0_upper = 0;
    double oneway_ap_lower = 0, oneway_ap_upper = 0;
    double twoway_ap_lower = 0, twoway_ap_upper = 0;
    std::optional<double> xi1, xi2, xi3;
    Regime regime = Regime::te_lt_tab;
    std::string oneway_active = "none";  // scheme attaining the lower bound; F0 when the P-secrecy bound is larger
    std::string twoway_active = "none";
};

CapacityReport capacity_report(const MultipathConfig& cfg);
// config is left zeroed; the sweep point lives in the caller.
CapacityReport capacity_report(const RealSetting& s);
std::pair<double, double> ap_capacity_bounds(const MultipathConfig& cfg, Direction dir);
std::pair<double, double> ap_capacity_bounds(const RealSetting& s, Direction dir);

// Asymptotic AP-secrecy rate of a scheme; InfeasibleError when its connectivity
// precondition fails, DegenerateError when Delta swamps the rate. psi does not
// enter the limit expressions and is accepted for interface symmetry.
double scheme_rate(const MultipathConfig& cfg, Scheme scheme, double psi = 0.1);

// Capacity inflation 1/(1 - 1.25e' + e' log2 e'), e' = (eps + delta)/(1 - delta),
// 0 log 0 = 0. nullopt when the bound is vacuous (e' > 1 or denominator <= 0).
std::optional<double> epsilon_penalty(double epsilon, double delta);
// The literal sign reading 1/(1 - 1.25e' - e' log2 e'), kept for comparison.
std::optional<double> epsilon_penalty_literal(double epsilon, double delta);

// 2 eps / (1 - delta - alpha); nullopt when delta + alpha >= 1.
std::optional<double> oneway_rate_cap(double epsilon, double delta, double alpha);

struct SuperiorityRange {
    std::optional<std::pair<double, double>> exact;  // in units of paths
    std::optional<std::pair<double, double>> limit;  // Delta -> 0 form
};
// xi1 inside the range endpoints is taken at t_e = 0, which is how the
// Delta -> 0 form arises from the exact one.
SuperiorityRange superiority_range(const MultipathConfig& cfg);

struct TrialMinimums {
    double q1_min = 0;
    double q2_min = 0;
};
// Chernoff lower bounds on q1 and q2 at the config's lambda. Terms that
// divide by a zero eavesdropper budget are dropped (no eavesdropper, no bad event).
TrialMinimums chernoff_trial_minimums(const MultipathConfig& cfg, double psi, double delta_target,
                                      double epsilon_target, Scheme scheme);

struct Confidence {
    double point = 0;
    double upper95 = 0;
};
// Point estimate and the upper end of the two-sided 95% Clopper-Pearson interval.
Confidence montecarlo_confidence(std::int64_t successes, std::int64_t trials);

}  // namespace pmt

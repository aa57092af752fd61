#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pmt/analysis.hpp"
#include "pmt/paths.hpp"
#include "pmt/setting.hpp"
#include "pmt/sss.hpp"

namespace pmt {

// Derived interval counts and share shapes. Counts are exact integers because
// at analytic lambda (104, 524, ...) they exceed 64 bits.
struct ProtocolParams {
    Scheme scheme = Scheme::F1;
    MultipathConfig config;  // lambda here is the derivation lambda
    double psi = 0.1;
    double delta_target = 0.05;
    double epsilon_target = 0.05;

    BigInt q1, q2;  // stage interval counts; q2 = 0 for single-stage schemes
    BigInt g1, g2;
    BigInt r1, r2;  // secret lengths in field elements
    BigInt k1, m1;  // stage-1 sharing is (k1, r1, g1, m1)
    BigInt k2, m2;  // stage-2 sharing is (k2, r2, g2, m2)
    int w = 0;      // key bits per stage-2 path subset
    int w1 = 0;     // F3: public report bits per interval
    int w2 = 0;     // F3: same as w
    int n_prime = 0;
    double t_prime_a1 = 0, t_prime_b1 = 0, t_prime_e1 = 0, t_prime_e2 = 0;
    double q1_min = 0, q2_min = 0;
    bool key_bits_divisible = false;  // w | r1*lambda after the q1 walk

    // Integer forms of the real thresholds used by the runners.
    BigInt eve_cap1, eve_cap2;  // bad event when Eve holds more shares than this
    BigInt receiver_floor1;     // abort when the stage-1 receiver holds fewer than this

    BigInt c1, c2;  // closed-form communication in bits

    BigInt message_elements() const;
    BigInt message_bits() const { return message_elements() * config.lambda; }
    double achieved_rate() const;  // message bits / (c1 + c2)
};

// q1 starts at max(Chernoff minimums, override), grows until every secret
// length is positive and q2 meets its minimum, then walks a bounded distance
// further to make w divide r1*lambda (surplus key bits are discarded otherwise).
ProtocolParams derive_params(const MultipathConfig& cfg, Scheme scheme, double psi = 0.1, double delta_target = 0.05,
                             double epsilon_target = 0.05, std::optional<BigInt> q1_override = std::nullopt);

struct BadEvents {
    bool eve_over_threshold_stage1 = false;
    bool eve_over_threshold_stage2 = false;
    bool bob_under_threshold = false;  // the receiving side of stage 1 aborted
};

struct RunOptions {
    bool keep_transcript = false;  // also runs the conservation audit
    bool keep_eve_view = true;
};

struct PmtResult {
    Secret message_sent;
    Secret message_received;  // a uniform random secret after an abort or a refused reconstruction
    bool aborted = false;
    bool failed = false;  // message_received != message_sent
    PartyView eve_view;
    std::int64_t bits_communicated = 0;
    BadEvents bad;
    std::int64_t eve_shares_stage1 = 0;
    std::int64_t eve_shares_stage2 = 0;
    std::int64_t receiver_shares_stage1 = 0;
    std::optional<bool> keys_agree;  // stage-1 key equality, when a key exists
    std::string audit_error;         // empty when clean or not audited
    std::string transcript_csv;      // filled when keep_transcript
};

// One ramp sharing per interval over the first t_ab paths; message length must
// be a positive multiple of t_ab - t_e.
PmtResult run_f0(const MultipathConfig& cfg, const Secret& message, EveStrategy& eve, Rng& rng,
                 const RunOptions& opt = {});
PmtResult run_f1(const MultipathConfig& cfg, const ProtocolParams& p, const Secret& message, EveStrategy& eve,
                 Rng& rng, const RunOptions& opt = {});
// Handles both F2 and F2simple (stage (i) only).
PmtResult run_f2(const MultipathConfig& cfg, const ProtocolParams& p, const Secret& message, EveStrategy& eve,
                 Rng& rng, const RunOptions& opt = {});
PmtResult run_f3(const MultipathConfig& cfg, const ProtocolParams& p, const Secret& message, EveStrategy& eve,
                 Rng& rng, const RunOptions& opt = {});

PmtResult run_scheme(const MultipathConfig& cfg, const ProtocolParams& p, const Secret& message, EveStrategy& eve,
                     Rng& rng, const RunOptions& opt = {});

// Key bits laid out big-endian over r1 elements of lambda bits; chunk i of w bits is W_i.
Secret pack_key(const std::vector<std::uint64_t>& chunks, int lambda, int w, std::int64_t r1, Rng& surplus);
std::vector<std::uint64_t> unpack_key(const Secret& key, int lambda, int w, std::int64_t chunks);

// Closed-form bits for one run; F3 skips stage 2 after an abort.
BigInt expected_bits(const ProtocolParams& p, bool aborted);

// Narrowing for simulation; ParameterError when the value does not fit.
std::int64_t to_i64(const BigInt& v, const char* what);

enum class EveKind { uniform, static_paths, omniscient_static };
struct EveSpec {
    EveKind kind = EveKind::uniform;
    std::vector<int> paths;  // static_paths only
};
EveKind eve_kind_from_string(const std::string& s);
const char* to_string(EveKind k);
std::unique_ptr<EveStrategy> make_eve(const EveSpec& spec, const MultipathConfig& cfg, std::uint64_t seed);

struct TrialPlan {
    MultipathConfig config;  // simulation config, lambda = lambda_field
    ProtocolParams params;
    EveSpec eve;
    std::uint64_t master_seed = 1;
    std::int64_t trials = 1;
    bool audit = false;
};

struct TrialOutcome {
    std::int64_t trial = 0;
    bool aborted = false;
    bool failed = false;
    BadEvents bad;
    std::int64_t bits_communicated = 0;
    std::int64_t bits_expected = 0;
    std::optional<bool> keys_agree;
    std::string audit_error;
};

// Seed derive_seed(master, index); message drawn first from the trial generator.
TrialOutcome run_one_trial(const TrialPlan& plan, std::int64_t index, std::string* transcript_csv = nullptr);

// Worker count: requested (0 = hardware), capped by PMTLAB_THREADS when set.
int worker_count(int requested = 0);

// Results in trial-index order whatever the completion order.
std::vector<TrialOutcome> run_trials(const TrialPlan& plan, int threads = 0);

}  // namespace pmt

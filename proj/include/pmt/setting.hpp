#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pmt/field.hpp"
#include "pmt/paths.hpp"
#include "pmt/rng.hpp"

namespace pmt {

// The (n, t_a, t_b, t_e, lambda) multipath setting.
struct MultipathConfig {
    int n = 0;
    int t_a = 0;
    int t_b = 0;
    int t_e = 0;
    int lambda = 0;

    void validate() const;  // UsageError on budgets outside [0, n] or lambda < 1
    int t_ab() const { return t_a < t_b ? t_a : t_b; }
};

enum class Party { alice, bob };
const char* to_string(Party p);

struct IntervalRecord {
    std::int64_t index = 0;
    Party sender = Party::alice;
    PathSubset sender_paths;
    PathSubset receiver_paths;
    PathSubset eve_paths;
    std::vector<std::pair<int, elem_t>> payload;  // path -> symbol, paths within sender_paths
};

struct Observation {
    int path = 0;
    std::optional<elem_t> symbol;  // nullopt is the null symbol
};

struct IntervalObservation {
    std::int64_t interval = 0;
    std::vector<Observation> seen;
};

struct PartyView {
    std::vector<IntervalObservation> intervals;
    std::vector<std::string> public_messages;

    std::int64_t symbol_count() const;
};

// What a passive adversary may condition on.
struct PublicTranscript {
    std::vector<int> fixed_paths;  // paths the protocol declares publicly
    std::vector<std::string> messages;
};

class EveStrategy {
public:
    virtual ~EveStrategy() = default;
    // Chosen at the start of the interval, before its payload exists.
    virtual PathSubset choose_paths(const MultipathConfig& cfg, std::int64_t interval,
                                    const PublicTranscript& pub) = 0;
    virtual std::string name() const = 0;
};

std::unique_ptr<EveStrategy> eve_strategy_static(PathSubset paths);
std::unique_ptr<EveStrategy> eve_strategy_uniform(std::uint64_t seed);
// Parks on the protocol's public fixed paths (filled up with the lowest other
// indices) for the whole run: the worst case for fixed-path stages.
std::unique_ptr<EveStrategy> eve_strategy_omniscient_static();

// Delivers one interval's payload: observers see the symbol on
// sender_paths ∩ their paths and the null symbol on their other paths.
std::pair<std::vector<Observation>, std::vector<Observation>> run_interval(const MultipathConfig& cfg,
                                                                           const IntervalRecord& rec);

// Interval-synchronous channel shared by the protocol runners.
class Channel {
public:
    // record_views = false skips per-party views; deliveries are still returned.
    Channel(MultipathConfig cfg, EveStrategy& eve, bool keep_transcript = false, bool record_views = true);

    void declare_fixed_paths(std::vector<int> paths) { pub_.fixed_paths = std::move(paths); }

    struct Delivery {
        std::vector<Observation> receiver;
        std::vector<Observation> eve;
        std::int64_t eve_symbols = 0;
    };
    Delivery transmit(Party sender, const PathSubset& sender_paths, const PathSubset& receiver_paths,
                      std::vector<std::pair<int, elem_t>> payload);

    // Public channel; Eve reads it for free.
    void publish(Party from, const std::string& message, std::int64_t bits);

    const MultipathConfig& config() const { return cfg_; }
    std::int64_t intervals() const { return next_interval_; }
    std::int64_t bits() const { return bits_; }
    const PartyView& view(Party p) const { return p == Party::alice ? alice_ : bob_; }
    const PartyView& eve_view() const { return eve_; }
    PartyView take_eve_view() { return std::move(eve_); }
    const std::vector<IntervalRecord>& transcript() const { return transcript_; }
    const std::vector<std::pair<std::int64_t, std::string>>& public_log() const { return public_log_; }

    // Conservation audit against the recorded transcript; empty string on success.
    std::string audit() const;
    void dump_transcript(std::ostream& os) const;

private:
    MultipathConfig cfg_;
    EveStrategy& eve_strategy_;
    bool keep_;
    bool record_;
    std::int64_t next_interval_ = 0;
    std::int64_t bits_ = 0;
    PublicTranscript pub_;
    PartyView alice_, bob_, eve_;
    std::vector<IntervalRecord> transcript_;
    std::vector<std::pair<std::int64_t, std::string>> public_log_;  // (interval, sender:message)
};

// Pr[j successes] drawing `draws` of N items with K marked, exact rational
// converted to double.
double hypergeometric_pmf(std::int64_t N, std::int64_t K, std::int64_t draws, std::int64_t j);

}  // namespace pmt

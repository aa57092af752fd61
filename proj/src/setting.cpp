#include "pmt/setting.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "pmt/errors.hpp"

namespace pmt {

void MultipathConfig::validate() const {
    if (n < 1) throw UsageError("n must be positive");
    auto in_range = [&](int t) { return t >= 0 && t <= n; };
    if (!in_range(t_a) || !in_range(t_b) || !in_range(t_e)) throw UsageError("t_a, t_b, t_e must lie in [0, n]");
    if (lambda < 1) throw UsageError("lambda must be positive");
}

const char* to_string(Party p) { return p == Party::alice ? "alice" : "bob"; }

std::int64_t PartyView::symbol_count() const {
    std::int64_t c = 0;
    for (const auto& iv : intervals)
        for (const auto& o : iv.seen)
            if (o.symbol) ++c;
    return c;
}

namespace {

class StaticEve : public EveStrategy {
public:
    explicit StaticEve(PathSubset p) : paths_(std::move(p)) {}
    PathSubset choose_paths(const MultipathConfig& cfg, std::int64_t, const PublicTranscript&) override {
        if (static_cast<int>(paths_.size()) > cfg.t_e) throw UsageError("static Eve holds more than t_e paths");
        PathSubset p = paths_;
        p.n = cfg.n;
        return p;
    }
    std::string name() const override { return "static"; }

private:
    PathSubset paths_;
};

class UniformEve : public EveStrategy {
public:
    explicit UniformEve(std::uint64_t seed) : rng_(seed) {}
    PathSubset choose_paths(const MultipathConfig& cfg, std::int64_t, const PublicTranscript&) override {
        return random_subset(cfg.n, cfg.t_e, rng_);
    }
    std::string name() const override { return "uniform"; }

private:
    Rng rng_;
};

class OmniscientStaticEve : public EveStrategy {
public:
    PathSubset choose_paths(const MultipathConfig& cfg, std::int64_t, const PublicTranscript& pub) override {
        std::vector<int> chosen;
        for (int p : pub.fixed_paths)
            if (static_cast<int>(chosen.size()) < cfg.t_e) chosen.push_back(p);
        for (int p = 0; p < cfg.n && static_cast<int>(chosen.size()) < cfg.t_e; ++p)
            if (std::find(chosen.begin(), chosen.end(), p) == chosen.end()) chosen.push_back(p);
        return PathSubset(std::move(chosen), cfg.n);
    }
    std::string name() const override { return "omniscient-static"; }
};

std::vector<Observation> observe(const IntervalRecord& rec, const PathSubset& observer) {
    std::vector<Observation> out;
    out.reserve(observer.size());
    for (int p : observer.indices) {
        Observation o{p, std::nullopt};
        for (const auto& [path, sym] : rec.payload)
            if (path == p) {
                o.symbol = sym;
                break;
            }
        out.push_back(o);
    }
    return out;
}

std::string join_paths(const PathSubset& s) {
    std::string out;
    for (std::size_t i = 0; i < s.indices.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(s.indices[i]);
    }
    return out;
}

}  // namespace

std::unique_ptr<EveStrategy> eve_strategy_static(PathSubset paths) {
    return std::make_unique<StaticEve>(std::move(paths));
}

std::unique_ptr<EveStrategy> eve_strategy_uniform(std::uint64_t seed) { return std::make_unique<UniformEve>(seed); }

std::unique_ptr<EveStrategy> eve_strategy_omniscient_static() { return std::make_unique<OmniscientStaticEve>(); }

std::pair<std::vector<Observation>, std::vector<Observation>> run_interval(const MultipathConfig& cfg,
                                                                           const IntervalRecord& rec) {
    const int send_budget = rec.sender == Party::alice ? cfg.t_a : cfg.t_b;
    const int recv_budget = rec.sender == Party::alice ? cfg.t_b : cfg.t_a;
    if (static_cast<int>(rec.sender_paths.size()) > send_budget)
        throw ProtocolBug("sender exceeds its path budget");
    if (static_cast<int>(rec.receiver_paths.size()) > recv_budget)
        throw ProtocolBug("receiver exceeds its path budget");
    if (static_cast<int>(rec.eve_paths.size()) > cfg.t_e) throw ProtocolBug("Eve exceeds t_e");
    for (const auto& [path, sym] : rec.payload)
        if (!rec.sender_paths.contains(path)) throw ProtocolBug("payload on a path the sender does not hold");
    return {observe(rec, rec.receiver_paths), observe(rec, rec.eve_paths)};
}

Channel::Channel(MultipathConfig cfg, EveStrategy& eve, bool keep_transcript, bool record_views)
    : cfg_(cfg), eve_strategy_(eve), keep_(keep_transcript), record_(record_views || keep_transcript) {
    cfg_.validate();
}

Channel::Delivery Channel::transmit(Party sender, const PathSubset& sender_paths, const PathSubset& receiver_paths,
                                    std::vector<std::pair<int, elem_t>> payload) {
    IntervalRecord rec;
    rec.index = next_interval_;
    rec.sender = sender;
    rec.sender_paths = sender_paths;
    rec.receiver_paths = receiver_paths;
    rec.eve_paths = eve_strategy_.choose_paths(cfg_, next_interval_, pub_);
    rec.payload = std::move(payload);

    auto [recv, eve] = run_interval(cfg_, rec);
    Delivery d;
    for (const auto& o : eve)
        if (o.symbol) ++d.eve_symbols;
    bits_ += static_cast<std::int64_t>(rec.payload.size()) * cfg_.lambda;

    if (record_) {
        PartyView& receiver_view = sender == Party::alice ? bob_ : alice_;
        receiver_view.intervals.push_back({rec.index, recv});
        eve_.intervals.push_back({rec.index, eve});
    }
    d.receiver = std::move(recv);
    d.eve = std::move(eve);
    if (keep_) transcript_.push_back(std::move(rec));
    ++next_interval_;
    return d;
}

void Channel::publish(Party from, const std::string& message, std::int64_t bits) {
    const std::string line = std::string(to_string(from)) + ":" + message;
    pub_.messages.push_back(line);
    if (record_) {
        alice_.public_messages.push_back(line);
        bob_.public_messages.push_back(line);
        eve_.public_messages.push_back(line);
    }
    bits_ += bits;
    if (keep_) public_log_.emplace_back(next_interval_, line);
}

std::string Channel::audit() const {
    if (!keep_) return "no transcript recorded";
    auto check = [&](const PartyView& v, const char* who, bool eve) -> std::string {
        for (const auto& iv : v.intervals) {
            if (iv.interval < 0 || iv.interval >= static_cast<std::int64_t>(transcript_.size()))
                return std::string(who) + ": observation in unknown interval";
            const IntervalRecord& rec = transcript_[static_cast<std::size_t>(iv.interval)];
            const PathSubset& mine = eve ? rec.eve_paths : rec.receiver_paths;
            if (mine.size() != iv.seen.size()) return std::string(who) + ": path count mismatch";
            for (const auto& o : iv.seen) {
                if (!mine.contains(o.path)) return std::string(who) + ": observed a path it did not hold";
                const elem_t* placed = nullptr;
                for (const auto& pr : rec.payload)
                    if (pr.first == o.path) placed = &pr.second;
                if (o.symbol && (!placed || *placed != *o.symbol))
                    return std::string(who) + ": phantom symbol in interval " + std::to_string(iv.interval);
                if (!o.symbol && placed) return std::string(who) + ": missed a symbol on a shared path";
            }
        }
        return "";
    };
    for (const auto& rec : transcript_)
        if (rec.payload.size() > rec.sender_paths.size()) return "payload wider than sender paths";
    std::string e = check(eve_, "eve", true);
    if (e.empty()) e = check(alice_, "alice", false);
    if (e.empty()) e = check(bob_, "bob", false);
    return e;
}

void Channel::dump_transcript(std::ostream& os) const {
    os << "interval,sender,paths_sender,paths_receiver,paths_eve,payload_hex\n";
    std::size_t pub = 0;
    auto flush_public = [&](std::int64_t upto) {
        while (pub < public_log_.size() && public_log_[pub].first <= upto) {
            const auto& line = public_log_[pub].second;
            const auto colon = line.find(':');
            os << public_log_[pub].first << ',' << line.substr(0, colon) << ",public,,," << line.substr(colon + 1)
               << '\n';
            ++pub;
        }
    };
    for (const auto& rec : transcript_) {
        flush_public(rec.index);
        os << rec.index << ',' << to_string(rec.sender) << ',' << join_paths(rec.sender_paths) << ','
           << join_paths(rec.receiver_paths) << ',' << join_paths(rec.eve_paths) << ',';
        bool first = true;
        for (int p : rec.sender_paths.indices)
            for (const auto& [path, sym] : rec.payload)
                if (path == p) {
                    if (!first) os << ';';
                    os << elem_to_hex(sym);
                    first = false;
                }
        os << '\n';
    }
    flush_public(next_interval_);
}

double hypergeometric_pmf(std::int64_t N, std::int64_t K, std::int64_t draws, std::int64_t j) {
    if (N < 0 || K < 0 || K > N || draws < 0 || draws > N) throw UsageError("invalid hypergeometric parameters");
    if (j < 0 || j > std::min(K, draws) || draws - j > N - K) return 0.0;
    using boost::multiprecision::cpp_rational;
    const cpp_rational p(binomial_exact(K, j) * binomial_exact(N - K, draws - j), binomial_exact(N, draws));
    return p.convert_to<double>();
}

}  // namespace pmt

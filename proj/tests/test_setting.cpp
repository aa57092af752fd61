#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>
#include <vector>

#include "pmt/errors.hpp"
#include "pmt/setting.hpp"

using namespace pmt;

namespace {

std::vector<std::pair<int, elem_t>> payload_on(const PathSubset& s, Rng& rng, unsigned lambda) {
    std::vector<std::pair<int, elem_t>> out;
    for (int p : s.indices) out.emplace_back(p, rng.bits(lambda));
    return out;
}

}  // namespace

TEST_CASE("config validation") {
    CHECK_NOTHROW((MultipathConfig{10, 2, 8, 10, 16}.validate()));
    CHECK_THROWS_AS((MultipathConfig{10, 11, 2, 2, 16}.validate()), UsageError);
    CHECK_THROWS_AS((MultipathConfig{10, 2, 2, -1, 16}.validate()), UsageError);
    CHECK_THROWS_AS((MultipathConfig{10, 2, 2, 2, 0}.validate()), UsageError);
    CHECK((MultipathConfig{10, 3, 7, 1, 8}.t_ab()) == 3);
}

TEST_CASE("run_interval intersections") {
    MultipathConfig cfg{3, 2, 3, 2, 8};
    IntervalRecord rec;
    rec.sender = Party::alice;
    rec.sender_paths = PathSubset({0, 1}, 3);
    rec.receiver_paths = PathSubset({0, 1, 2}, 3);
    rec.eve_paths = PathSubset({1, 2}, 3);
    rec.payload = {{0, 0xA1}, {1, 0xB2}};
    auto [recv, eve] = run_interval(cfg, rec);
    REQUIRE(eve.size() == 2);
    CHECK(eve[0].path == 1);
    CHECK(eve[0].symbol == elem_t(0xB2));
    CHECK(eve[1].path == 2);
    CHECK_FALSE(eve[1].symbol.has_value());
    int seen = 0;
    for (const auto& o : recv) seen += o.symbol.has_value();
    CHECK(seen == 2);

    rec.eve_paths = PathSubset({2}, 3);
    auto [r2, e2] = run_interval(cfg, rec);
    CHECK_FALSE(e2[0].symbol.has_value());

    rec.payload.push_back({2, 0xC3});
    CHECK_THROWS_AS(run_interval(cfg, rec), ProtocolBug);
    rec.payload.pop_back();
    rec.sender_paths = PathSubset({0, 1, 2}, 3);
    CHECK_THROWS_AS(run_interval(cfg, rec), ProtocolBug);
}

TEST_CASE("hypergeometric pmf") {
    CHECK(hypergeometric_pmf(10, 2, 8, 2) == doctest::Approx(28.0 / 45.0).epsilon(1e-15));
    CHECK(hypergeometric_pmf(10, 2, 8, 3) == 0.0);
    for (auto [N, K, d] : {std::tuple{10, 2, 8}, std::tuple{70, 4, 35}, std::tuple{200, 40, 60}}) {
        double sum = 0;
        for (int j = 0; j <= d; ++j) sum += hypergeometric_pmf(N, K, d, j);
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(hypergeometric_pmf(10, 11, 2, 1), UsageError);
}

TEST_CASE("uniform Eve intersection mean") {
    MultipathConfig cfg{10, 2, 2, 8, 8};
    auto eve = eve_strategy_uniform(5);
    Channel ch(cfg, *eve, false, false);
    Rng rng(6);
    const int rounds = 100000;
    std::int64_t hits = 0;
    for (int i = 0; i < rounds; ++i) {
        auto s = random_subset(10, 2, rng);
        hits += ch.transmit(Party::alice, s, s, payload_on(s, rng, 8)).eve_symbols;
    }
    CHECK(std::abs(hits / double(rounds) - 1.6) < 0.05);
    CHECK(ch.intervals() == rounds);
    CHECK(ch.bits() == std::int64_t(rounds) * 2 * 8);
}

TEST_CASE("static Eve against random senders follows the pmf") {
    MultipathConfig cfg{12, 5, 5, 4, 8};
    auto eve = eve_strategy_static(PathSubset({0, 1, 2, 3}, 12));
    Channel ch(cfg, *eve, false, false);
    Rng rng(8);
    const int rounds = 100000;
    std::vector<int> hist(6, 0);
    for (int i = 0; i < rounds; ++i) {
        auto s = random_subset(12, 5, rng);
        ++hist[ch.transmit(Party::alice, s, s, payload_on(s, rng, 8)).eve_symbols];
    }
    for (int j = 0; j <= 4; ++j) {
        double p = hypergeometric_pmf(12, 5, 4, j);
        double sd = std::sqrt(p * (1 - p) / rounds);
        CHECK(std::abs(hist[j] / double(rounds) - p) < 5 * sd + 1e-9);
    }
    CHECK(hist[5] == 0);
}

TEST_CASE("edge strategies") {
    MultipathConfig none{6, 3, 3, 0, 8};
    auto blind = eve_strategy_uniform(1);
    Channel c0(none, *blind);
    Rng rng(2);
    auto s = random_subset(6, 3, rng);
    CHECK(c0.transmit(Party::alice, s, s, payload_on(s, rng, 8)).eve_symbols == 0);

    MultipathConfig all{6, 3, 3, 6, 8};
    auto full = eve_strategy_uniform(1);
    Channel c1(all, *full);
    CHECK(c1.transmit(Party::alice, s, s, payload_on(s, rng, 8)).eve_symbols == 3);

    auto park = eve_strategy_omniscient_static();
    MultipathConfig cfg{6, 3, 3, 2, 8};
    Channel c2(cfg, *park);
    c2.declare_fixed_paths({3, 4, 5});
    auto fixed = PathSubset({3, 4, 5}, 6);
    CHECK(c2.transmit(Party::alice, fixed, fixed, payload_on(fixed, rng, 8)).eve_symbols == 2);

    auto too_many = eve_strategy_static(PathSubset({0, 1, 2}, 6));
    Channel c3(cfg, *too_many);
    CHECK_THROWS(c3.transmit(Party::alice, fixed, fixed, payload_on(fixed, rng, 8)));
}

TEST_CASE("audit, transcript and determinism") {
    auto run = [](std::uint64_t seed) {
        MultipathConfig cfg{8, 3, 4, 3, 16};
        auto eve = eve_strategy_uniform(seed);
        Channel ch(cfg, *eve, true);
        Rng rng(seed + 1);
        for (int i = 0; i < 50; ++i) {
            bool alice = i % 2 == 0;
            auto s = random_subset(8, alice ? 3 : 4, rng);
            auto r = random_subset(8, alice ? 4 : 3, rng);
            ch.transmit(alice ? Party::alice : Party::bob, s, r, payload_on(s, rng, 16));
            if (i == 10) ch.publish(Party::bob, "hello", 40);
        }
        CHECK(ch.audit().empty());
        CHECK(ch.view(Party::alice).public_messages.size() == 1);
        CHECK(ch.eve_view().public_messages.front() == "bob:hello");
        std::ostringstream os;
        ch.dump_transcript(os);
        return os.str();
    };
    std::string a = run(4), b = run(4), c = run(5);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.rfind("interval,sender,paths_sender,paths_receiver,paths_eve,payload_hex\n", 0) == 0);
    CHECK(a.find(",bob,public,,,hello\n") != std::string::npos);
}

TEST_CASE("views record symbols only on shared paths") {
    MultipathConfig cfg{5, 2, 2, 2, 8};
    auto eve = eve_strategy_static(PathSubset({0, 4}, 5));
    Channel ch(cfg, *eve);
    Rng rng(1);
    PathSubset s({0, 1}, 5), r({1, 2}, 5);
    ch.transmit(Party::alice, s, r, payload_on(s, rng, 8));
    CHECK(ch.view(Party::bob).symbol_count() == 1);
    CHECK(ch.eve_view().symbol_count() == 1);
    CHECK(ch.view(Party::alice).symbol_count() == 0);
}

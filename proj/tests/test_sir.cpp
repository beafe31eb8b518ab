#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "epinet/netgen.hpp"
#include "epinet/replay.hpp"
#include "epinet/rng.hpp"
#include "epinet/sir.hpp"
#include "oracles.hpp"

using namespace epinet;

namespace {

double total_variation(const std::map<int, double>& p, const std::map<int, double>& q) {
    std::set<int> keys;
    for (auto& [k, _] : p) keys.insert(k);
    for (auto& [k, _] : q) keys.insert(k);
    double tv = 0;
    for (int k : keys) {
        auto a = p.count(k) ? p.at(k) : 0.0;
        auto b = q.count(k) ? q.at(k) : 0.0;
        tv += std::abs(a - b);
    }
    return tv / 2;
}

std::map<int, double> empirical_final_size(const LayeredGraph& g, double tau, std::vector<vertex_t> initial,
                                           int runs, std::uint64_t seed) {
    SimParams p{tau, 1.0, 0.5, std::numeric_limits<double>::infinity()};
    std::map<int, double> freq;
    auto rng = make_rng(seed);
    for (int r = 0; r < runs; ++r) {
        auto log = gillespie_run(g, p, std::span<const vertex_t>(initial), rng);
        int infections = 0;
        for (auto& e : log.events) infections += e.kind == EventKind::infection;
        freq[static_cast<int>(initial.size()) + infections] += 1.0 / runs;
    }
    return freq;
}

}  // namespace

TEST(InitState, OnePercentOfFiveThousand) {
    auto g = build_household_layer(5000, 5);
    auto rng = make_rng(1);
    auto seeds = init_state(g, 0.01, rng);
    EXPECT_EQ(seeds.size(), 50u);
    EXPECT_EQ(std::set<vertex_t>(seeds.begin(), seeds.end()).size(), 50u);
}

TEST(InitState, RoundsUp) {
    auto g = build_household_layer(100, 5);
    auto rng = make_rng(1);
    EXPECT_EQ(init_state(g, 0.011, rng).size(), 2u);
    EXPECT_EQ(init_state(g, 0.07, rng).size(), 7u);
    EXPECT_THROW(init_state(g, 0.0, rng), std::invalid_argument);
    EXPECT_THROW(init_state(g, 1.0, rng), std::invalid_argument);
}

TEST(InitState, DeterministicUnderSeed) {
    auto g = build_household_layer(1000, 5);
    auto a = make_rng(77), b = make_rng(77);
    EXPECT_EQ(init_state(g, 0.05, a), init_state(g, 0.05, b));
}

TEST(Gillespie, NoInitialInfectedGivesEmptyLog) {
    auto g = build_household_layer(20, 5);
    auto rng = make_rng(1);
    auto log = gillespie_run(g, SimParams{}, std::span<const vertex_t>{}, rng);
    EXPECT_TRUE(log.events.empty());
    EXPECT_EQ(log.final_time, 0.0);
}

TEST(Gillespie, ZeroTauOnlyRecovers) {
    auto g = build_household_layer(500, 5);
    auto rng = make_rng(2);
    std::vector<vertex_t> initial = {0, 7, 13, 250};
    SimParams p{0.0, 1.0, 0.01, 1e9};
    auto log = gillespie_run(g, p, std::span<const vertex_t>(initial), rng);
    ASSERT_EQ(log.events.size(), initial.size());
    std::set<vertex_t> recovered;
    for (auto& e : log.events) {
        EXPECT_EQ(e.kind, EventKind::recovery);
        recovered.insert(e.vertex);
    }
    EXPECT_EQ(recovered, std::set<vertex_t>(initial.begin(), initial.end()));
}

TEST(Gillespie, CompetingExponentialsOnSingleEdge) {
    // P(infection before recovery) = tau / (tau + gamma)
    for (double tau : {1.0, 2.0}) {
        LayeredGraph g(2);
        g.add_edge(0, 1, Layer::household, 1.0);
        auto rng = make_rng(10);
        std::vector<vertex_t> initial = {0};
        SimParams p{tau, 1.0, 0.5, 1e9};
        const int runs = 10000;
        int infected_first = 0;
        for (int r = 0; r < runs; ++r) {
            auto log = gillespie_run(g, p, std::span<const vertex_t>(initial), rng);
            infected_first += log.events.front().kind == EventKind::infection;
        }
        const double expected = tau / (tau + 1.0);
        const double sigma = std::sqrt(expected * (1 - expected) / runs);
        EXPECT_NEAR(static_cast<double>(infected_first) / runs, expected, 3 * sigma) << "tau=" << tau;
    }
}

TEST(Gillespie, PathFinalSizeMatchesCtmcEnumeration) {
    LayeredGraph g(3);
    g.add_edge(0, 1, Layer::household, 1.0);
    g.add_edge(1, 2, Layer::household, 1.0);
    oracle::FinalSizeCtmc ctmc(3, {{0, 1, 1.0}, {1, 2, 1.0}}, 1.0, 1.0);
    auto exact = ctmc.distribution({0, 1, 0});
    auto empirical = empirical_final_size(g, 1.0, {1}, 20000, 5);
    EXPECT_LT(total_variation(exact, empirical), 0.02);
}

TEST(Gillespie, DoubleLayerPairRatesAdd) {
    // pair (0,1) linked in both layers: infection rate tau * (1 + w)
    LayeredGraph g(4);
    g.add_edge(0, 1, Layer::household, 1.0);
    g.add_edge(0, 1, Layer::second, 0.5);
    g.add_edge(1, 2, Layer::second, 0.3);
    g.add_edge(2, 3, Layer::household, 1.0);
    oracle::FinalSizeCtmc ctmc(4, {{0, 1, 1.5}, {1, 2, 0.3}, {2, 3, 1.0}}, 0.8, 1.0);
    auto exact = ctmc.distribution({1, 0, 0, 0});
    auto empirical = empirical_final_size(g, 0.8, {0}, 20000, 6);
    EXPECT_LT(total_variation(exact, empirical), 0.02);
}

TEST(Gillespie, LogsSatisfySirRules) {
    for (int rep = 0; rep < 10; ++rep) {
        auto rng = make_stream(12, rep);
        auto g = build_polynomial_layer(build_household_layer(1000, 5), PolyParams{0.2, 0.8, 0.0, 4, 50}, 0.4, rng);
        auto log = gillespie_run(g, SimParams{0.5, 1.0, 0.01, 30.0}, rng);
        EXPECT_TRUE(validate_log(g, log).empty());
        EXPECT_EQ(log.initial_infected.size(), 10u);
        for (auto& e : log.events) EXPECT_LT(e.t, 30.0);
        EXPECT_LE(log.final_time, 30.0);
    }
}

TEST(Gillespie, StopsAtHorizonWhileActive) {
    auto rng = make_rng(3);
    auto g = build_clique_layer(build_household_layer(2000, 5), CliqueParams{9, 0, 0.4}, rng);
    auto log = gillespie_run(g, SimParams{0.6, 1.0, 0.01, 0.5}, rng);
    EXPECT_EQ(log.final_time, 0.5);
    EXPECT_FALSE(log.events.empty());
}

TEST(Gillespie, DeterministicUnderSeed) {
    auto g = build_household_layer(500, 5);
    auto a = make_rng(4), b = make_rng(4);
    auto la = gillespie_run(g, SimParams{0.9, 1.0, 0.02, 30.0}, a);
    auto lb = gillespie_run(g, SimParams{0.9, 1.0, 0.02, 30.0}, b);
    EXPECT_EQ(la.events, lb.events);
    EXPECT_EQ(la.initial_infected, lb.initial_infected);
}

TEST(Gillespie, RejectsInvalidParameters) {
    auto g = build_household_layer(50, 5);
    auto rng = make_rng(1);
    EXPECT_THROW(gillespie_run(g, SimParams{-1.0, 1.0, 0.01, 30.0}, rng), std::invalid_argument);
    EXPECT_THROW(gillespie_run(g, SimParams{0.5, 0.0, 0.01, 30.0}, rng), std::invalid_argument);
    EXPECT_THROW(gillespie_run(g, SimParams{0.5, 1.0, 1.5, 30.0}, rng), std::invalid_argument);
}

TEST(SiEdgeWeight, NoInfectedIsZero) {
    auto g = build_household_layer(10, 5);
    std::vector<vertex_t> none, all = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    EXPECT_EQ(si_edge_weight(g, none, all), 0.0);
}

TEST(SiEdgeWeight, OneInfectedInFiveClique) {
    auto g = build_household_layer(5, 5);
    std::vector<vertex_t> inf = {0}, sus = {1, 2, 3, 4};
    EXPECT_EQ(si_edge_weight(g, inf, sus), 4.0);
}

TEST(SiEdgeWeight, MixesLayerWeights) {
    LayeredGraph g = build_household_layer(15, 5);
    for (vertex_t v = 5; v < 13; ++v) g.add_edge(0, v, Layer::second, 0.4);
    std::vector<vertex_t> inf = {0}, sus;
    for (vertex_t v = 1; v < 15; ++v) sus.push_back(v);
    EXPECT_NEAR(si_edge_weight(g, inf, sus), 7.2, 1e-12);
    std::vector<vertex_t> overlap = {0};
    EXPECT_THROW(si_edge_weight(g, inf, overlap), std::invalid_argument);
}

TEST(EventLogText, HeaderThenEvents) {
    EventLog log;
    log.initial_infected = {3, 5};
    log.events = {{0.5, EventKind::infection, 4}, {1.25, EventKind::recovery, 3}};
    std::ostringstream out;
    write_event_log(out, log);
    EXPECT_EQ(out.str(), "initial 3 5\n0.5 infection 4\n1.25 recovery 3\n");
}

TEST(ValidateLog, FlagsImpossibleEvents) {
    LayeredGraph g(3);
    g.add_edge(0, 1, Layer::household, 1.0);
    EventLog log;
    log.initial_infected = {0};
    log.events = {{0.1, EventKind::infection, 2}, {0.05, EventKind::recovery, 1}};
    auto problems = validate_log(g, log);
    EXPECT_GE(problems.size(), 3u);  // no infected neighbour, time order, recovery of non-infected
}

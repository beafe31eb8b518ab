#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "epinet/graph.hpp"
#include "epinet/netgen.hpp"
#include "epinet/rng.hpp"
#include "oracles.hpp"

using namespace epinet;

namespace {

std::map<int, long> second_degree_histogram(const LayeredGraph& g) {
    std::map<int, long> h;
    for (vertex_t v = 0; v < g.size(); ++v) ++h[g.layer_degree(v, Layer::second)];
    return h;
}

void expect_simple_layers(const LayeredGraph& g) {
    std::set<std::tuple<int, int, int>> seen;
    for (const auto& e : g.edges()) {
        EXPECT_NE(e.u, e.v);
        auto key = std::make_tuple(std::min(e.u, e.v), std::max(e.u, e.v), static_cast<int>(e.layer));
        EXPECT_TRUE(seen.insert(key).second) << "duplicate edge " << e.u << "-" << e.v;
    }
}

}  // namespace

TEST(HouseholdLayer, FiveThousandVerticesFormThousandCliques) {
    auto g = build_household_layer(5000, 5);
    EXPECT_EQ(g.edge_count(Layer::household), 1000u * 10u);
    EXPECT_EQ(g.edge_count(Layer::second), 0u);
    for (const auto& e : g.edges()) {
        EXPECT_EQ(e.weight, 1.0);
        EXPECT_EQ(e.layer, Layer::household);
        EXPECT_EQ(g.household_of(e.u), g.household_of(e.v));
    }
    std::map<int, int> members;
    for (vertex_t v = 0; v < g.size(); ++v) ++members[g.household_of(v)];
    EXPECT_EQ(members.size(), 1000u);
    for (auto [id, count] : members) EXPECT_EQ(count, 5) << "household " << id;
}

TEST(HouseholdLayer, LeftoverVerticesStayIsolated) {
    auto g = build_household_layer(7, 5);
    EXPECT_EQ(g.edge_count(Layer::household), 10u);
    int isolated = 0;
    for (vertex_t v = 0; v < 7; ++v)
        if (g.neighbors(v).empty()) {
            ++isolated;
            EXPECT_EQ(g.household_of(v), no_household);
        }
    EXPECT_EQ(isolated, 2);
}

TEST(HouseholdLayer, RejectsTooFewVertices) {
    EXPECT_THROW(build_household_layer(4, 5), std::invalid_argument);
    EXPECT_THROW(build_household_layer(10, 1), std::invalid_argument);
}

TEST(PolynomialLayer, EdgeCountIsMTimesN) {
    auto rng = make_rng(7);
    auto g = build_polynomial_layer(build_household_layer(5000, 5), PolyParams{0.0, 0.7, 0.3, 4, 50}, 0.4, rng);
    EXPECT_EQ(g.edge_count(Layer::second), 20000u);
    EXPECT_EQ(g.edge_count(Layer::household), 10000u);
    EXPECT_DOUBLE_EQ(graph_stats(g).d, 8.0);
    for (const auto& e : g.edges()) {
        if (e.layer == Layer::second) {
            EXPECT_EQ(e.weight, 0.4);
        }
    }
    expect_simple_layers(g);
}

TEST(PolynomialLayer, AllRulesKeepGraphSimple) {
    for (PolyParams p : {PolyParams{1, 0, 0, 4, 50}, PolyParams{0, 0, 1, 4, 50}, PolyParams{0.3, 0.4, 0.3, 3, 9}}) {
        auto rng = make_rng(11);
        auto g = build_polynomial_layer(build_household_layer(1500, 5), p, 0.5, rng);
        EXPECT_EQ(g.edge_count(Layer::second), static_cast<std::size_t>(p.m) * 1500u);
        expect_simple_layers(g);
    }
}

TEST(PolynomialLayer, RejectsInvalidParameters) {
    auto rng = make_rng(1);
    auto hh = build_household_layer(200, 5);
    EXPECT_THROW(build_polynomial_layer(hh, PolyParams{0.5, 0.6, 0.3, 4, 50}, 0.4, rng), std::invalid_argument);
    EXPECT_THROW(build_polynomial_layer(hh, PolyParams{0, 1, 0, 4, 8}, 0.4, rng), std::invalid_argument);
    EXPECT_THROW(build_polynomial_layer(hh, PolyParams{-0.1, 0.8, 0.3, 4, 50}, 0.4, rng), std::invalid_argument);
    EXPECT_THROW(build_polynomial_layer(hh, PolyParams{0, 0.7, 0.3, 4, 50}, 1.0, rng), std::invalid_argument);
    EXPECT_THROW(build_polynomial_layer(build_household_layer(50, 5), PolyParams{}, 0.4, rng),
                 std::invalid_argument);
    // sums within 1e-12 of one are accepted
    EXPECT_NO_THROW(build_polynomial_layer(hh, PolyParams{0.1, 0.7, 0.2 + 1e-13, 4, 50}, 0.4, rng));
}

TEST(PolynomialLayer, RejectsExistingSecondLayer) {
    auto rng = make_rng(1);
    auto g = build_polynomial_layer(build_household_layer(200, 5), PolyParams{}, 0.4, rng);
    EXPECT_THROW(build_polynomial_layer(g, PolyParams{}, 0.4, rng), std::invalid_argument);
}

TEST(PolynomialLayer, UniformRuleMatchesDirectUniformAttachment) {
    std::map<int, long> ours, reference;
    std::mt19937_64 ref_rng(99);
    for (int rep = 0; rep < 5; ++rep) {
        auto rng = make_stream(3, rep);
        auto g = build_polynomial_layer(build_household_layer(2000, 5), PolyParams{0, 1, 0, 4, 50}, 0.4, rng);
        for (auto [k, c] : second_degree_histogram(g)) ours[k] += c;
        for (int k : oracle::uniform_attachment_degrees(2000, 4, 50, ref_rng)) ++reference[k];
    }
    EXPECT_GT(oracle::chi_squared_two_sample(ours, reference), 0.001);
}

TEST(PolynomialLayer, NonUniformRulesGiveHeavierTail) {
    auto quantile_999 = [](const LayeredGraph& g) {
        std::vector<int> deg;
        for (vertex_t v = 0; v < g.size(); ++v) deg.push_back(g.layer_degree(v, Layer::second));
        std::sort(deg.begin(), deg.end());
        return deg[static_cast<std::size_t>(0.999 * (deg.size() - 1))];
    };
    auto rng_a = make_rng(5), rng_b = make_rng(5);
    auto hh = build_household_layer(20000, 5);
    auto scale_free = build_polynomial_layer(hh, PolyParams{0, 0.7, 0.3, 4, 50}, 0.4, rng_a);
    auto uniform = build_polynomial_layer(hh, PolyParams{0, 1, 0, 4, 50}, 0.4, rng_b);
    EXPECT_GT(quantile_999(scale_free), quantile_999(uniform));
}

TEST(PolynomialLayer, DeterministicUnderSeed) {
    auto build = [] {
        auto rng = make_rng(42);
        return build_polynomial_layer(build_household_layer(1000, 5), PolyParams{0.1, 0.6, 0.3, 4, 50}, 0.4, rng);
    };
    auto a = build(), b = build();
    EXPECT_EQ(a, b);
    std::ostringstream sa, sb;
    write_graph(sa, a);
    write_graph(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(CliqueLayer, NineCliquesGiveDegreeEight) {
    auto rng = make_rng(3);
    auto g = build_clique_layer(build_household_layer(5000, 5), CliqueParams{9, 0.0, 0.4}, rng);
    EXPECT_EQ(g.edge_count(Layer::second), 555u * 36u);
    auto hist = second_degree_histogram(g);
    EXPECT_EQ(hist.size(), 2u);
    EXPECT_EQ(hist[0], 5);
    EXPECT_EQ(hist[8], 4995);
    for (vertex_t v = 0; v < g.size(); ++v) {
        if (g.layer_degree(v, Layer::second) == 0) continue;
        double w_out = 0;
        for (const auto& nb : g.neighbors(v))
            if (nb.layer == Layer::second) w_out += nb.weight;
        EXPECT_NEAR(w_out, 3.2, 1e-12);
    }
}

TEST(CliqueLayer, SizeTwoIsPerfectMatching) {
    auto rng = make_rng(3);
    auto g = build_clique_layer(build_household_layer(100, 5), CliqueParams{2, 0.0, 0.3}, rng);
    EXPECT_EQ(g.edge_count(Layer::second), 50u);
    for (vertex_t v = 0; v < 100; ++v) EXPECT_EQ(g.layer_degree(v, Layer::second), 1);
}

TEST(CliqueLayer, CoincidingPairsKeepBothLayers) {
    auto rng = make_rng(3);
    auto g = build_clique_layer(build_household_layer(4, 2), CliqueParams{4, 0.0, 0.5}, rng);
    EXPECT_TRUE(g.has_edge(0, 1, Layer::household));
    EXPECT_TRUE(g.has_edge(0, 1, Layer::second));
    EXPECT_DOUBLE_EQ(g.weighted_degree(0), 1.0 + 3 * 0.5);
}

TEST(CliqueLayer, RejectsOversizedWorkplace) {
    auto rng = make_rng(3);
    EXPECT_THROW(build_clique_layer(build_household_layer(10, 5), CliqueParams{11, 0, 0.4}, rng),
                 std::invalid_argument);
    EXPECT_THROW(build_clique_layer(build_household_layer(10, 5), CliqueParams{1, 0, 0.4}, rng),
                 std::invalid_argument);
}

TEST(RelaxedCaveman, ZeroProbabilityIsIdentity) {
    auto rng = make_rng(8);
    auto g = build_clique_layer(build_household_layer(500, 5), CliqueParams{9, 0.0, 0.4}, rng);
    RewireCounts counts;
    auto relaxed = relax_caveman(g, 0.0, rng, &counts);
    EXPECT_EQ(relaxed, g);
    EXPECT_EQ(counts.selected, 0u);
}

TEST(RelaxedCaveman, SelectionFollowsBinomial) {
    auto rng = make_rng(8);
    auto g = build_clique_layer(build_household_layer(5000, 5), CliqueParams{9, 0.0, 0.4}, rng);
    const auto edges = g.edge_count(Layer::second);
    RewireCounts counts;
    auto relaxed = relax_caveman(g, 0.2, rng, &counts);
    const double mean = 0.2 * edges, sd = std::sqrt(edges * 0.2 * 0.8);
    EXPECT_LT(std::abs(static_cast<double>(counts.selected) - mean), 3 * sd);
    EXPECT_GT(counts.rewired, 0u);
    EXPECT_LE(counts.rewired, counts.selected);
}

TEST(RelaxedCaveman, PreservesCountsAndSimplicity) {
    for (double p : {0.1, 0.5, 1.0}) {
        auto rng = make_rng(21);
        auto g = build_clique_layer(build_household_layer(1000, 5), CliqueParams{9, p, 0.4}, rng);
        auto relaxed = relax_caveman(g, p, rng);
        EXPECT_EQ(relaxed.edge_count(Layer::second), g.edge_count(Layer::second));
        EXPECT_EQ(relaxed.edge_count(Layer::household), g.edge_count(Layer::household));
        expect_simple_layers(relaxed);
        std::size_t household_seen = 0;
        for (const auto& e : relaxed.edges())
            if (e.layer == Layer::household) {
                ++household_seen;
                EXPECT_EQ(relaxed.household_of(e.u), relaxed.household_of(e.v));
            }
        EXPECT_EQ(household_seen, 2000u);
    }
    auto rng = make_rng(1);
    EXPECT_THROW(relax_caveman(build_household_layer(10, 5), 1.5, rng), std::invalid_argument);
}

TEST(GraphStats, CliqueLayerAccountsForLeftovers) {
    auto rng = make_rng(4);
    auto g = build_clique_layer(build_household_layer(5000, 5), CliqueParams{9, 0.0, 0.4}, rng);
    auto stats = graph_stats(g);
    EXPECT_DOUBLE_EQ(stats.d, 8.0 * 4995 / 5000);
    EXPECT_NEAR(stats.weighted_density, (5000 * 4.0 + 4995 * 3.2) / 5000, 1e-9);
    EXPECT_EQ(stats.degree_histogram.at(8), 4995);
}

TEST(GraphStats, HouseholdOnlyHasNoOutsideDegree) {
    auto stats = graph_stats(build_household_layer(100, 5));
    EXPECT_EQ(stats.d, 0.0);
    EXPECT_DOUBLE_EQ(stats.weighted_density, 4.0);
}

TEST(GraphSerialization, HeaderAndEdgeLines) {
    LayeredGraph g = build_household_layer(3, 2);
    g.add_edge(0, 2, Layer::second, 0.25);
    std::ostringstream out;
    write_graph(out, g);
    EXPECT_EQ(out.str(), "3 2\n0 1 household 1\n0 2 second 0.25\n");
    std::istringstream in(out.str());
    EXPECT_EQ(read_graph(in), g);
}

TEST(LayeredGraphInvariants, RejectsMalformedEdges) {
    LayeredGraph g(4);
    EXPECT_THROW(g.add_edge(1, 1, Layer::household, 1.0), std::invalid_argument);
    EXPECT_THROW(g.add_edge(0, 1, Layer::household, 0.5), std::invalid_argument);
    EXPECT_THROW(g.add_edge(0, 1, Layer::second, 1.0), std::invalid_argument);
    EXPECT_THROW(g.add_edge(0, 9, Layer::second, 0.5), std::out_of_range);
    g.add_edge(0, 1, Layer::second, 0.5);
    EXPECT_THROW(g.add_edge(1, 0, Layer::second, 0.5), std::invalid_argument);
    EXPECT_NO_THROW(g.add_edge(1, 0, Layer::household, 1.0));
}

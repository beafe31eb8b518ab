#pragma once

// Generators for the two-layer contact graphs: a household clique layer, and a
// second layer that is either a polynomial (growing, scale-free) random graph
// or a partition into workplace cliques, optionally rewired (relaxed caveman).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "epinet/graph.hpp"

namespace epinet {

struct PolyParams {
    double p_pa = 0.0;  // preferential attachment
    double p_u = 0.7;   // uniform choice
    double p_tr = 0.3;  // triangle closing
    int m = 4;          // edges per newcomer
    int n0 = 50;        // vertices of the initial ring

    friend bool operator==(const PolyParams&, const PolyParams&) = default;
};

struct CliqueParams {
    int N_wp = 9;
    double p_relaxed = 0.0;
    double w = 0.4;

    friend bool operator==(const CliqueParams&, const CliqueParams&) = default;
};

struct RewireCounts {
    std::size_t selected = 0;
    std::size_t rewired = 0;
};

inline void validate(const PolyParams& p) {
    if (p.p_pa < 0 || p.p_u < 0 || p.p_tr < 0)
        throw std::invalid_argument("attachment probabilities must be non-negative");
    double sum = p.p_pa + p.p_u + p.p_tr;
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("attachment probabilities sum to " + std::to_string(sum) +
                                    ", expected 1");
    if (p.m < 1) throw std::invalid_argument("m must be at least 1");
    // the initial ring joins each vertex to its m clockwise successors
    if (p.n0 < 2 * p.m + 1) throw std::invalid_argument("n0 must be at least 2m+1");
}

inline void validate_weight(double w) {
    if (!(w > 0.0 && w < 1.0)) throw std::invalid_argument("second-layer weight must lie in (0, 1)");
}

inline LayeredGraph build_household_layer(vertex_t n, int household_size) {
    if (household_size < 2) throw std::invalid_argument("household size must be at least 2");
    if (n < household_size) throw std::invalid_argument("fewer vertices than one household");
    LayeredGraph g(n, household_size);
    const vertex_t households = n / household_size;
    for (vertex_t h = 0; h < households; ++h) {
        const vertex_t first = h * household_size;
        for (vertex_t a = first; a < first + household_size; ++a) {
            g.set_household(a, h);
            for (vertex_t b = a + 1; b < first + household_size; ++b)
                g.add_edge(a, b, Layer::household, 1.0);
        }
    }
    return g;
}

namespace detail {

inline void require_household_only(const LayeredGraph& g) {
    if (g.edge_count(Layer::second) != 0)
        throw std::invalid_argument("graph already has a second layer");
}

}  // namespace detail

/// Grows the polynomial second layer over all vertices of `g`.
///
/// Vertices join in a uniformly random order. The first n0 form a ring where
/// each vertex links to its m clockwise successors (m*n0 edges). Every later
/// vertex adds m edges; for each edge a rule is drawn: preferential (target by
/// current second-layer degree), uniform (target uniform over present vertices)
/// or triangle (target uniform over second-layer neighbours of the targets
/// already picked by this newcomer, uniform when there are none). A target the
/// newcomer already picked is redrawn up to 50 times, then replaced by a
/// uniform choice among the remaining vertices. The layer ends with m*n edges.
template <class Rng>
LayeredGraph build_polynomial_layer(LayeredGraph g, const PolyParams& params, double w, Rng& rng) {
    validate(params);
    validate_weight(w);
    detail::require_household_only(g);
    const int n = g.size();
    const int m = params.m;
    if (n <= params.n0) throw std::invalid_argument("graph must be larger than n0");

    const double total = params.p_pa + params.p_u + params.p_tr;
    const double cut_pa = params.p_pa / total;
    const double cut_u = cut_pa + params.p_u / total;

    std::vector<vertex_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    // growth-index space from here on
    std::vector<std::vector<int>> adj(n);
    std::vector<int> endpoints;
    endpoints.reserve(static_cast<std::size_t>(2) * m * n);
    std::vector<std::pair<int, int>> created;
    created.reserve(static_cast<std::size_t>(m) * n);
    auto link = [&](int a, int b) {
        adj[a].push_back(b);
        adj[b].push_back(a);
        endpoints.push_back(a);
        endpoints.push_back(b);
        created.emplace_back(a, b);
    };

    for (int i = 0; i < params.n0; ++i)
        for (int k = 1; k <= m; ++k) link(i, (i + k) % params.n0);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<int> chosen;
    std::vector<int> candidates;
    for (int t = params.n0; t < n; ++t) {
        chosen.clear();
        std::uniform_int_distribution<int> uniform_present(0, t - 1);
        for (int j = 0; j < m; ++j) {
            const double r = unit(rng);
            enum { preferential, uniform, triangle } rule =
                r < cut_pa ? preferential : (r < cut_u ? uniform : triangle);

            if (rule == triangle) {
                candidates.clear();
                for (int c : chosen) candidates.insert(candidates.end(), adj[c].begin(), adj[c].end());
                std::sort(candidates.begin(), candidates.end());
                candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
                if (candidates.empty()) rule = uniform;
            }

            auto draw = [&]() -> int {
                switch (rule) {
                case preferential: {
                    std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
                    return endpoints[pick(rng)];
                }
                case triangle: {
                    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
                    return candidates[pick(rng)];
                }
                default:
                    return uniform_present(rng);
                }
            };
            auto taken = [&](int x) { return std::find(chosen.begin(), chosen.end(), x) != chosen.end(); };

            int target = -1;
            for (int attempt = 0; attempt < 50 && target < 0; ++attempt) {
                int x = draw();
                if (!taken(x)) target = x;
            }
            if (target < 0) {
                // uniform over the t - |chosen| vertices not yet picked
                std::vector<int> sorted = chosen;
                std::sort(sorted.begin(), sorted.end());
                std::uniform_int_distribution<int> pick(0, t - 1 - static_cast<int>(sorted.size()));
                target = pick(rng);
                for (int c : sorted)
                    if (c <= target) ++target;
            }
            chosen.push_back(target);
        }
        for (int c : chosen) link(t, c);
    }

    for (auto [a, b] : created) g.add_edge(order[a], order[b], Layer::second, w);
    return g;
}

/// Partitions the vertices uniformly at random into workplaces of N_wp and
/// joins each workplace into a clique of weight w; the n mod N_wp leftovers get
/// no workplace. Pairs that also share a household keep both edges.
template <class Rng>
LayeredGraph build_clique_layer(LayeredGraph g, const CliqueParams& params, Rng& rng) {
    if (params.N_wp < 2) throw std::invalid_argument("workplace size must be at least 2");
    if (params.N_wp > g.size()) throw std::invalid_argument("workplace size exceeds vertex count");
    validate_weight(params.w);
    detail::require_household_only(g);

    std::vector<vertex_t> perm(g.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::size_t groups = perm.size() / params.N_wp;
    for (std::size_t k = 0; k < groups; ++k) {
        auto first = perm.begin() + static_cast<std::ptrdiff_t>(k * params.N_wp);
        for (int a = 0; a < params.N_wp; ++a)
            for (int b = a + 1; b < params.N_wp; ++b)
                g.add_edge(first[a], first[b], Layer::second, params.w);
    }
    return g;
}

/// Relaxed caveman rewiring: each second-layer edge uv is selected with
/// probability p_relaxed and moved to u-x for x uniform over vertices other
/// than u, unless u-x is already a second-layer edge (then it stays).
template <class Rng>
LayeredGraph relax_caveman(LayeredGraph g, double p_relaxed, Rng& rng, RewireCounts* counts = nullptr) {
    if (!(p_relaxed >= 0.0 && p_relaxed <= 1.0))
        throw std::invalid_argument("rewiring probability must lie in [0, 1]");
    RewireCounts local;
    if (p_relaxed > 0.0 && g.size() > 1) {
        std::bernoulli_distribution select(p_relaxed);
        std::uniform_int_distribution<vertex_t> other(0, g.size() - 2);
        const std::size_t edge_total = g.edges().size();
        for (std::size_t i = 0; i < edge_total; ++i) {
            const Edge e = g.edges()[i];
            if (e.layer != Layer::second || !select(rng)) continue;
            ++local.selected;
            vertex_t x = other(rng);
            if (x >= e.u) ++x;
            if (g.has_edge(e.u, x, Layer::second)) continue;
            g.rewire(i, x);
            ++local.rewired;
        }
    }
    if (counts) *counts = local;
    return g;
}

}  // namespace epinet

#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "epinet/format.hpp"

namespace epinet {

using vertex_t = std::int32_t;

inline constexpr std::int32_t no_household = -1;

enum class Layer : std::uint8_t { household, second };

inline std::string_view to_string(Layer layer) {
    return layer == Layer::household ? "household" : "second";
}

inline Layer parse_layer(std::string_view s) {
    if (s == "household") return Layer::household;
    if (s == "second") return Layer::second;
    throw std::invalid_argument("unknown layer '" + std::string(s) + "'");
}

struct Edge {
    vertex_t u;
    vertex_t v;
    Layer layer;
    double weight;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// One adjacency entry. A pair joined in both layers shows up twice.
struct Neighbor {
    vertex_t vertex;
    double weight;
    Layer layer;
};

/// Weighted undirected graph whose edges are tagged household / second layer.
///
/// Within one layer the graph is simple: no self-loops, no parallel edges.
/// The same vertex pair may appear once in each layer. Household-layer edges
/// carry weight 1, second-layer edges a weight in (0, 1).
class LayeredGraph {
public:
    LayeredGraph() = default;

    /// Empty graph on `n` vertices with no household structure.
    explicit LayeredGraph(vertex_t n) : LayeredGraph(n, 0) {}

    LayeredGraph(vertex_t n, int household_size)
        : n_(n), household_size_(household_size),
          household_of_(static_cast<std::size_t>(n), no_household),
          adjacency_(static_cast<std::size_t>(n)) {
        if (n < 0) throw std::invalid_argument("vertex count must be non-negative");
    }

    vertex_t size() const { return n_; }
    int household_size() const { return household_size_; }

    std::span<const Edge> edges() const { return edges_; }
    std::span<const Neighbor> neighbors(vertex_t v) const { return adjacency_.at(v); }

    std::int32_t household_of(vertex_t v) const { return household_of_.at(v); }
    void set_household(vertex_t v, std::int32_t id) { household_of_.at(v) = id; }

    std::size_t edge_count(Layer layer) const {
        return layer == Layer::household ? household_keys_.size() : second_keys_.size();
    }

    bool has_edge(vertex_t u, vertex_t v, Layer layer) const {
        if (u == v || !valid(u) || !valid(v)) return false;
        return keys(layer).contains(key(u, v));
    }

    void add_edge(vertex_t u, vertex_t v, Layer layer, double weight) {
        check_endpoints(u, v);
        check_weight(layer, weight);
        if (!keys(layer).insert(key(u, v)).second)
            throw std::invalid_argument("duplicate " + std::string(to_string(layer)) + " edge " +
                                        std::to_string(u) + "-" + std::to_string(v));
        edges_.push_back({u, v, layer, weight});
        adjacency_[u].push_back({v, weight, layer});
        adjacency_[v].push_back({u, weight, layer});
    }

    /// Replaces edge `index` (u,v) by (u,new_v) in the same layer with the same weight.
    void rewire(std::size_t index, vertex_t new_v) {
        Edge& e = edges_.at(index);
        check_endpoints(e.u, new_v);
        auto& layer_keys = keys(e.layer);
        if (layer_keys.contains(key(e.u, new_v)))
            throw std::invalid_argument("rewire target already adjacent");
        layer_keys.erase(key(e.u, e.v));
        layer_keys.insert(key(e.u, new_v));
        drop_adjacency(e.u, e.v, e.layer);
        drop_adjacency(e.v, e.u, e.layer);
        adjacency_[e.u].push_back({new_v, e.weight, e.layer});
        adjacency_[new_v].push_back({e.u, e.weight, e.layer});
        e.v = new_v;
    }

    /// Total incident edge weight across both layers.
    double weighted_degree(vertex_t v) const {
        double sum = 0.0;
        for (const auto& nb : adjacency_.at(v)) sum += nb.weight;
        return sum;
    }

    int layer_degree(vertex_t v, Layer layer) const {
        return static_cast<int>(std::count_if(adjacency_.at(v).begin(), adjacency_.at(v).end(),
                                              [layer](const Neighbor& nb) { return nb.layer == layer; }));
    }

    friend bool operator==(const LayeredGraph& a, const LayeredGraph& b) {
        return a.n_ == b.n_ && a.household_size_ == b.household_size_ &&
               a.household_of_ == b.household_of_ && a.edges_ == b.edges_;
    }

private:
    static std::uint64_t key(vertex_t u, vertex_t v) {
        auto lo = static_cast<std::uint64_t>(std::min(u, v));
        auto hi = static_cast<std::uint64_t>(std::max(u, v));
        return (lo << 32) | hi;
    }

    bool valid(vertex_t v) const { return v >= 0 && v < n_; }

    void check_endpoints(vertex_t u, vertex_t v) const {
        if (!valid(u) || !valid(v))
            throw std::out_of_range("edge endpoint out of range: " + std::to_string(u) + "-" +
                                    std::to_string(v));
        if (u == v) throw std::invalid_argument("self-loop at vertex " + std::to_string(u));
    }

    static void check_weight(Layer layer, double weight) {
        if (layer == Layer::household && weight != 1.0)
            throw std::invalid_argument("household edges must have weight 1");
        if (layer == Layer::second && !(weight > 0.0 && weight < 1.0))
            throw std::invalid_argument("second-layer weight must lie in (0, 1)");
    }

    std::unordered_set<std::uint64_t>& keys(Layer layer) {
        return layer == Layer::household ? household_keys_ : second_keys_;
    }
    const std::unordered_set<std::uint64_t>& keys(Layer layer) const {
        return layer == Layer::household ? household_keys_ : second_keys_;
    }

    void drop_adjacency(vertex_t from, vertex_t to, Layer layer) {
        auto& list = adjacency_[from];
        auto it = std::find_if(list.begin(), list.end(), [&](const Neighbor& nb) {
            return nb.vertex == to && nb.layer == layer;
        });
        if (it != list.end()) list.erase(it);
    }

    vertex_t n_ = 0;
    int household_size_ = 0;
    std::vector<std::int32_t> household_of_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::unordered_set<std::uint64_t> household_keys_;
    std::unordered_set<std::uint64_t> second_keys_;
};

struct GraphStats {
    double d = 0.0;                 // mean second-layer neighbour count
    double weighted_density = 0.0;  // mean total incident weight
    std::map<int, std::int64_t> degree_histogram;  // second-layer degree -> vertices
};

inline GraphStats graph_stats(const LayeredGraph& g) {
    GraphStats stats;
    if (g.size() == 0) return stats;
    std::int64_t second_sum = 0;
    double weight_sum = 0.0;
    for (vertex_t v = 0; v < g.size(); ++v) {
        int k = g.layer_degree(v, Layer::second);
        second_sum += k;
        weight_sum += g.weighted_degree(v);
        ++stats.degree_histogram[k];
    }
    stats.d = static_cast<double>(second_sum) / g.size();
    stats.weighted_density = weight_sum / g.size();
    return stats;
}

// Text form: header "n N_hh", then one "u v layer weight" line per edge.
inline void write_graph(std::ostream& out, const LayeredGraph& g) {
    out << g.size() << ' ' << g.household_size() << '\n';
    for (const auto& e : g.edges())
        out << e.u << ' ' << e.v << ' ' << to_string(e.layer) << ' ' << format_exact(e.weight) << '\n';
}

/// Inverse of write_graph. Households are re-derived as consecutive blocks of N_hh.
inline LayeredGraph read_graph(std::istream& in) {
    vertex_t n = 0;
    int household_size = 0;
    if (!(in >> n >> household_size)) throw std::invalid_argument("graph header missing");
    LayeredGraph g(n, household_size);
    if (household_size > 0)
        for (vertex_t v = 0; v < n - n % household_size; ++v) g.set_household(v, v / household_size);
    vertex_t u = 0, v = 0;
    std::string layer;
    double weight = 0.0;
    while (in >> u >> v >> layer >> weight) g.add_edge(u, v, parse_layer(layer), weight);
    return g;
}

}  // namespace epinet

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "epinet/format.hpp"
#include "epinet/graph.hpp"

namespace epinet {

enum class Compartment : std::uint8_t { susceptible, infected, recovered };

enum class EventKind : std::uint8_t { infection, recovery };

inline std::string_view to_string(EventKind kind) {
    return kind == EventKind::infection ? "infection" : "recovery";
}

struct SimParams {
    double tau = 0.45;   // infection rate per unit edge weight
    double gamma = 1.0;  // recovery rate
    double init_infected_fraction = 0.01;
    double t_max = 30.0;
};

inline void validate(const SimParams& p) {
    if (!(p.tau >= 0.0) || !std::isfinite(p.tau)) throw std::invalid_argument("tau must be >= 0");
    if (!(p.gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
    if (!(p.init_infected_fraction > 0.0 && p.init_infected_fraction < 1.0))
        throw std::invalid_argument("initial infected fraction must lie in (0, 1)");
    if (!(p.t_max > 0.0)) throw std::invalid_argument("t_max must be > 0");
}

struct Event {
    double t;
    EventKind kind;
    vertex_t vertex;

    friend bool operator==(const Event&, const Event&) = default;
};

struct EventLog {
    std::vector<vertex_t> initial_infected;
    std::vector<Event> events;
    double final_time = 0.0;  // extinction time, or t_max if still active
};

/// ceil(fraction * n) distinct vertices drawn uniformly.
template <class Rng>
std::vector<vertex_t> init_state(const LayeredGraph& g, double fraction, Rng& rng) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("initial infected fraction must lie in (0, 1)");
    // guard against 0.07 * 100 = 7.000000000000001 style products
    auto k = static_cast<vertex_t>(std::ceil(fraction * g.size() - 1e-9));
    k = std::clamp<vertex_t>(k, 0, g.size());
    std::vector<vertex_t> all(g.size());
    std::iota(all.begin(), all.end(), 0);
    // partial Fisher-Yates
    for (vertex_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<vertex_t> pick(i, g.size() - 1);
        std::swap(all[i], all[pick(rng)]);
    }
    all.resize(k);
    return all;
}

namespace detail {

/// Fenwick tree over non-negative per-vertex weights with prefix search.
class WeightTree {
public:
    explicit WeightTree(std::size_t n) : tree_(n + 1, 0.0), value_(n, 0.0) {
        top_ = 1;
        while (top_ * 2 <= n) top_ *= 2;
    }

    double value(std::size_t i) const { return value_[i]; }

    void set(std::size_t i, double v) {
        const double delta = v - value_[i];
        value_[i] = v;
        for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
    }

    void add(std::size_t i, double delta) { set(i, value_[i] + delta); }

    double total() const {
        double s = 0.0;
        for (std::size_t k = tree_.size() - 1; k > 0; k -= k & (~k + 1)) s += tree_[k];
        return s;
    }

    /// Smallest index whose inclusive prefix sum exceeds `target`.
    std::size_t find(double target) const {
        std::size_t pos = 0;
        for (std::size_t step = top_; step > 0; step /= 2) {
            if (pos + step < tree_.size() && tree_[pos + step] <= target) {
                pos += step;
                target -= tree_[pos];
            }
        }
        return pos;  // zero-based index of the next element
    }

private:
    std::vector<double> tree_;
    std::vector<double> value_;
    std::size_t top_ = 1;
};

}  // namespace detail

/// Exact (Gillespie) simulation of the SIR chain started from `initial`.
///
/// Each SI adjacency entry of weight w fires at rate tau*w, so a pair linked in
/// both layers is infected at tau*(1+w). Infected vertices recover at gamma.
/// Stops at extinction or when the next event would fall at or after t_max.
template <class Rng>
EventLog gillespie_run(const LayeredGraph& g, const SimParams& params,
                       std::span<const vertex_t> initial, Rng& rng) {
    if (!(params.tau >= 0.0) || !(params.gamma > 0.0) || !(params.t_max > 0.0))
        throw std::invalid_argument("invalid simulation parameters");
    const auto n = static_cast<std::size_t>(g.size());

    EventLog log;
    log.initial_infected.assign(initial.begin(), initial.end());

    std::vector<Compartment> state(n, Compartment::susceptible);
    std::vector<vertex_t> infected;              // unordered, for uniform recovery draws
    std::vector<std::int64_t> slot(n, -1);        // position in `infected`
    std::vector<std::int32_t> s_entries(n, 0);    // susceptible adjacency entries
    detail::WeightTree si_weight(n);
    std::int64_t si_entries = 0;

    for (vertex_t v : initial) {
        if (v < 0 || static_cast<std::size_t>(v) >= n) throw std::out_of_range("initial vertex out of range");
        if (state[v] == Compartment::infected) throw std::invalid_argument("duplicate initial vertex");
        state[v] = Compartment::infected;
        slot[v] = static_cast<std::int64_t>(infected.size());
        infected.push_back(v);
    }
    for (vertex_t v : infected) {
        double w = 0.0;
        for (const auto& nb : g.neighbors(v))
            if (state[nb.vertex] == Compartment::susceptible) {
                w += nb.weight;
                ++s_entries[v];
            }
        si_weight.set(v, w);
        si_entries += s_entries[v];
    }

    std::exponential_distribution<double> unit_exp(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double t = 0.0;

    while (!infected.empty()) {
        const double infection_rate = si_entries > 0 ? params.tau * std::max(si_weight.total(), 0.0) : 0.0;
        const double recovery_rate = params.gamma * static_cast<double>(infected.size());
        const double total_rate = infection_rate + recovery_rate;
        const double next = t + unit_exp(rng) / total_rate;
        if (next >= params.t_max) {
            t = params.t_max;
            break;
        }
        t = next;

        const double u = unit(rng) * total_rate;
        if (u < recovery_rate || infection_rate == 0.0) {
            std::uniform_int_distribution<std::size_t> pick(0, infected.size() - 1);
            const vertex_t v = infected[pick(rng)];
            state[v] = Compartment::recovered;
            const auto pos = static_cast<std::size_t>(slot[v]);
            infected[pos] = infected.back();
            slot[infected[pos]] = static_cast<std::int64_t>(pos);
            infected.pop_back();
            slot[v] = -1;
            si_entries -= s_entries[v];
            s_entries[v] = 0;
            si_weight.set(v, 0.0);
            log.events.push_back({t, EventKind::recovery, v});
            continue;
        }

        // infection: spreader by SI weight, then edge by weight among its S entries
        double target = (u - recovery_rate) / params.tau;
        auto spreader = static_cast<vertex_t>(std::min(si_weight.find(target), n - 1));
        if (s_entries[spreader] == 0) {
            // rounding drift pushed the search onto an empty vertex
            spreader = *std::find_if(infected.begin(), infected.end(),
                                     [&](vertex_t x) { return s_entries[x] > 0; });
        }
        double within = unit(rng) * si_weight.value(spreader);
        vertex_t victim = -1;
        for (const auto& nb : g.neighbors(spreader)) {
            if (state[nb.vertex] != Compartment::susceptible) continue;
            victim = nb.vertex;
            if (within < nb.weight) break;
            within -= nb.weight;
        }

        state[victim] = Compartment::infected;
        slot[victim] = static_cast<std::int64_t>(infected.size());
        infected.push_back(victim);
        double own = 0.0;
        for (const auto& nb : g.neighbors(victim)) {
            const vertex_t x = nb.vertex;
            if (state[x] == Compartment::infected) {
                --s_entries[x];
                --si_entries;
                if (s_entries[x] == 0)
                    si_weight.set(x, 0.0);
                else
                    si_weight.add(x, -nb.weight);
            } else if (state[x] == Compartment::susceptible) {
                own += nb.weight;
                ++s_entries[victim];
            }
        }
        si_weight.set(victim, own);
        si_entries += s_entries[victim];
        log.events.push_back({t, EventKind::infection, victim});
    }

    log.final_time = t;
    return log;
}

template <class Rng>
EventLog gillespie_run(const LayeredGraph& g, const SimParams& params, Rng& rng) {
    validate(params);
    auto initial = init_state(g, params.init_infected_fraction, rng);
    return gillespie_run(g, params, std::span<const vertex_t>(initial), rng);
}

/// Total weight of edges joining an infected and a susceptible vertex.
inline double si_edge_weight(const LayeredGraph& g, std::span<const Compartment> state) {
    if (state.size() != static_cast<std::size_t>(g.size()))
        throw std::invalid_argument("state size does not match graph");
    double sum = 0.0;
    for (const auto& e : g.edges()) {
        const auto a = state[e.u], b = state[e.v];
        if ((a == Compartment::infected && b == Compartment::susceptible) ||
            (a == Compartment::susceptible && b == Compartment::infected))
            sum += e.weight;
    }
    return sum;
}

inline double si_edge_weight(const LayeredGraph& g, std::span<const vertex_t> infected,
                             std::span<const vertex_t> susceptible) {
    std::vector<Compartment> state(static_cast<std::size_t>(g.size()), Compartment::recovered);
    for (vertex_t v : susceptible) state.at(v) = Compartment::susceptible;
    for (vertex_t v : infected) {
        if (state.at(v) == Compartment::susceptible)
            throw std::invalid_argument("infected and susceptible sets overlap");
        state[v] = Compartment::infected;
    }
    return si_edge_weight(g, state);
}

// Header "initial v1 v2 ...", then one "t kind vertex" line per event.
inline void write_event_log(std::ostream& out, const EventLog& log) {
    out << "initial";
    for (vertex_t v : log.initial_infected) out << ' ' << v;
    out << '\n';
    for (const auto& e : log.events) out << format_exact(e.t) << ' ' << to_string(e.kind) << ' ' << e.vertex << '\n';
}

}  // namespace epinet

#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "epinet/graph.hpp"
#include "epinet/sir.hpp"

namespace epinet {

/// Aggregate state of an epidemic at one instant.
struct Snapshot {
    std::int64_t S = 0, I = 0, R = 0;
    std::int64_t E_SI_hh = 0;  // SI pairs joined by a household edge
    std::int64_t E_SI_o = 0;   // SI pairs joined by a second-layer edge
    double W_SI = 0.0;         // total SI edge weight
    double d_S_w = 0.0;        // mean weighted degree of susceptible vertices
    double d_I_w = 0.0;        // mean weighted degree of infected vertices
    double d_I_out = 0.0;      // mean second-layer degree of infected vertices
};

/// Replays an event log over a graph, maintaining the aggregate counts
/// incrementally. Rejects transitions the SIR chain cannot make.
class EpidemicReplay {
public:
    EpidemicReplay(const LayeredGraph& g, std::span<const vertex_t> initial)
        : g_(g), state_(static_cast<std::size_t>(g.size()), Compartment::susceptible),
          weighted_degree_(static_cast<std::size_t>(g.size())),
          second_degree_(static_cast<std::size_t>(g.size())) {
        for (vertex_t v = 0; v < g.size(); ++v) {
            weighted_degree_[v] = g.weighted_degree(v);
            second_degree_[v] = g.layer_degree(v, Layer::second);
            sum_w_S_ += weighted_degree_[v];
        }
        S_ = g.size();
        for (vertex_t v : initial) infect(v);
    }

    Compartment state(vertex_t v) const { return state_.at(v); }
    std::span<const Compartment> states() const { return state_; }

    int infected_neighbors(vertex_t v) const {
        int count = 0;
        for (const auto& nb : g_.neighbors(v))
            if (state_[nb.vertex] == Compartment::infected) ++count;
        return count;
    }

    void apply(const Event& e) {
        if (e.kind == EventKind::infection)
            infect(e.vertex);
        else
            recover(e.vertex);
    }

    double si_weight() const { return W_SI_; }
    std::int64_t infected() const { return I_; }

    Snapshot snapshot() const {
        Snapshot s;
        s.S = S_;
        s.I = I_;
        s.R = R_;
        s.E_SI_hh = E_hh_;
        s.E_SI_o = E_o_;
        s.W_SI = W_SI_;
        s.d_S_w = S_ > 0 ? sum_w_S_ / static_cast<double>(S_) : 0.0;
        s.d_I_w = I_ > 0 ? sum_w_I_ / static_cast<double>(I_) : 0.0;
        s.d_I_out = I_ > 0 ? static_cast<double>(sum_out_I_) / static_cast<double>(I_) : 0.0;
        return s;
    }

private:
    void check_vertex(vertex_t v) const {
        if (v < 0 || v >= g_.size())
            throw std::invalid_argument("event on unknown vertex " + std::to_string(v));
    }

    void infect(vertex_t v) {
        check_vertex(v);
        if (state_[v] != Compartment::susceptible)
            throw std::invalid_argument("infection of non-susceptible vertex " + std::to_string(v));
        for (const auto& nb : g_.neighbors(v)) {
            const int sign = state_[nb.vertex] == Compartment::infected    ? -1
                             : state_[nb.vertex] == Compartment::susceptible ? 1
                                                                           : 0;
            if (sign == 0) continue;
            (nb.layer == Layer::household ? E_hh_ : E_o_) += sign;
            W_SI_ += sign * nb.weight;
        }
        state_[v] = Compartment::infected;
        --S_;
        ++I_;
        sum_w_S_ -= weighted_degree_[v];
        sum_w_I_ += weighted_degree_[v];
        sum_out_I_ += second_degree_[v];
        if (S_ == 0) sum_w_S_ = 0.0;
    }

    void recover(vertex_t v) {
        check_vertex(v);
        if (state_[v] != Compartment::infected)
            throw std::invalid_argument("recovery of non-infected vertex " + std::to_string(v));
        for (const auto& nb : g_.neighbors(v)) {
            if (state_[nb.vertex] != Compartment::susceptible) continue;
            (nb.layer == Layer::household ? E_hh_ : E_o_) -= 1;
            W_SI_ -= nb.weight;
        }
        state_[v] = Compartment::recovered;
        --I_;
        ++R_;
        sum_w_I_ -= weighted_degree_[v];
        sum_out_I_ -= second_degree_[v];
        if (I_ == 0) sum_w_I_ = 0.0;
        if (E_hh_ + E_o_ == 0) W_SI_ = 0.0;
    }

    const LayeredGraph& g_;
    std::vector<Compartment> state_;
    std::vector<double> weighted_degree_;
    std::vector<std::int64_t> second_degree_;
    std::int64_t S_ = 0, I_ = 0, R_ = 0;
    std::int64_t E_hh_ = 0, E_o_ = 0;
    std::int64_t sum_out_I_ = 0;
    double W_SI_ = 0.0;
    double sum_w_S_ = 0.0;
    double sum_w_I_ = 0.0;
};

/// Checks a log against the SIR rules on `g`; returns one message per violation.
/// An infection is valid only if the vertex is susceptible and, at that moment,
/// has an infected neighbour.
inline std::vector<std::string> validate_log(const LayeredGraph& g, const EventLog& log) {
    std::vector<std::string> problems;
    std::vector<Compartment> state(static_cast<std::size_t>(g.size()), Compartment::susceptible);
    for (vertex_t v : log.initial_infected) {
        if (v < 0 || v >= g.size() || state[v] != Compartment::susceptible) {
            problems.push_back("bad initial vertex " + std::to_string(v));
            continue;
        }
        state[v] = Compartment::infected;
    }
    double last = 0.0;
    std::int64_t I = static_cast<std::int64_t>(log.initial_infected.size()), R = 0;
    for (std::size_t k = 0; k < log.events.size(); ++k) {
        const Event& e = log.events[k];
        const std::string where = "event " + std::to_string(k) + ": ";
        if (!(e.t > last)) problems.push_back(where + "time not increasing");
        last = e.t;
        if (e.vertex < 0 || e.vertex >= g.size()) {
            problems.push_back(where + "unknown vertex");
            continue;
        }
        if (e.kind == EventKind::infection) {
            if (state[e.vertex] != Compartment::susceptible) problems.push_back(where + "vertex not susceptible");
            bool exposed = false;
            for (const auto& nb : g.neighbors(e.vertex)) exposed |= state[nb.vertex] == Compartment::infected;
            if (!exposed) problems.push_back(where + "no infected neighbour");
            state[e.vertex] = Compartment::infected;
            ++I;
        } else {
            if (state[e.vertex] != Compartment::infected) problems.push_back(where + "vertex not infected");
            state[e.vertex] = Compartment::recovered;
            --I;
            ++R;
        }
        const std::int64_t S = std::count(state.begin(), state.end(), Compartment::susceptible);
        if (S + I + R != g.size()) problems.push_back(where + "S+I+R != n");
    }
    return problems;
}

}  // namespace epinet

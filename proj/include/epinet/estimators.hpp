#pragma once

// Classical maximum-likelihood estimators of the infection rate tau and the
// RMSE metric used to compare them.

#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "epinet/features.hpp"
#include "epinet/format.hpp"
#include "epinet/graph.hpp"
#include "epinet/replay.hpp"
#include "epinet/sir.hpp"

namespace epinet {

enum class Method { ml_exact, ml_static, ml_dynamic, gbt_all, gbt_sir, cnn_all, cnn_sir };

inline constexpr std::array<std::string_view, 7> method_names = {
    "ml_exact", "ml_static", "ml_dynamic", "gbt_all", "gbt_sir", "cnn_all", "cnn_sir"};

inline std::string_view to_string(Method m) { return method_names[static_cast<std::size_t>(m)]; }

inline Method parse_method(std::string_view s) {
    for (std::size_t i = 0; i < method_names.size(); ++i)
        if (method_names[i] == s) return static_cast<Method>(i);
    throw ConfigError("unknown method '" + std::string(s) + "'");
}

struct EstimateRecord {
    std::uint64_t run_id = 0;
    double T = 0.0;
    Method method = Method::ml_exact;
    std::optional<double> tau_hat;  // empty when the exposure was zero

    friend bool operator==(const EstimateRecord&, const EstimateRecord&) = default;
};

inline std::optional<double> ratio_estimate(double infections, double exposure) {
    if (!(exposure > 0.0)) return std::nullopt;
    return infections / exposure;
}

/// z_I / integral of W^SI over [0, T], with W replayed exactly from the log.
/// z_I counts infection events in (0, T]; initial seeds are not events.
inline std::optional<double> tau_hat_exact(const EventLog& log, const LayeredGraph& g, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("observation horizon must be > 0");
    EpidemicReplay replay(g, log.initial_infected);
    double integral = 0.0;
    double last = 0.0;
    std::int64_t infections = 0;
    for (const Event& e : log.events) {
        if (e.t > T) break;
        integral += replay.si_weight() * (e.t - last);
        last = e.t;
        replay.apply(e);
        if (e.kind == EventKind::infection) ++infections;
    }
    integral += replay.si_weight() * (T - last);
    return ratio_estimate(static_cast<double>(infections), integral);
}

/// Mean-field estimate of out-of-household SI edges from the average
/// out-of-household degree d: I * (d - w d / (w d + N_hh - 1)) * S / n.
inline double estimate_E_SI_o_static(double I, double S, double n, double d, double w, int N_hh) {
    if (!(n > 0.0)) throw std::invalid_argument("n must be > 0");
    const double own_household = w * d + N_hh - 1;
    if (!(own_household > 0.0)) throw std::invalid_argument("w*d + N_hh - 1 must be > 0");
    return I * (d - w * d / own_household) * S / n;
}

/// Same formula with the current mean out-of-household degree of the infected.
inline double estimate_E_SI_o_dynamic(double I, double S, double n, double d_I_out, double w, int N_hh) {
    return estimate_E_SI_o_static(I, S, n, d_I_out, w, N_hh);
}

enum class EdgeEstimate {
    static_mean,       // graph-wide mean degree d
    dynamic_infected,  // mean degree of infected vertices at t
    observed,          // exported E_SI_o itself (test hook)
};

/// Grid-only estimate: new infections (I+R)_T - (I+R)_0 over the left-endpoint
/// Riemann sum of E_SI_hh + w * E_SI_o_hat on cells of width dt up to T.
inline std::optional<double> tau_hat_approx(const TrajectoryFeatures& f, const RunManifest& m, double T,
                                            EdgeEstimate variant) {
    const auto cells = std::llround(T / f.dt);
    if (cells < 1 || static_cast<std::size_t>(cells) > f.size() || std::abs(cells * f.dt - T) > 1e-9 * T)
        throw std::invalid_argument("T is not on the sampling grid");

    auto W_hat = [&](const Snapshot& s) {
        double out = 0.0;
        switch (variant) {
        case EdgeEstimate::static_mean:
            out = estimate_E_SI_o_static(s.I, s.S, m.n, m.d, m.w, m.N_hh);
            break;
        case EdgeEstimate::dynamic_infected:
            out = estimate_E_SI_o_dynamic(s.I, s.S, m.n, s.d_I_out, m.w, m.N_hh);
            break;
        case EdgeEstimate::observed:
            out = static_cast<double>(s.E_SI_o);
            break;
        }
        return static_cast<double>(s.E_SI_hh) + m.w * out;
    };

    double sum = W_hat(f.initial);
    for (long k = 1; k < cells; ++k) sum += W_hat(f.points[static_cast<std::size_t>(k - 1)]);
    const Snapshot& end = f.points[static_cast<std::size_t>(cells - 1)];
    const auto infections = static_cast<double>((end.I + end.R) - (f.initial.I + f.initial.R));
    return ratio_estimate(infections, sum * f.dt);
}

/// ml_exact read off the exact exposure series stored with the features.
inline std::optional<double> tau_hat_from_exposure(const TrajectoryFeatures& f, double T) {
    const auto cells = std::llround(T / f.dt);
    if (cells < 1 || static_cast<std::size_t>(cells) > f.size())
        throw std::invalid_argument("T is not on the sampling grid");
    const auto k = static_cast<std::size_t>(cells - 1);
    return ratio_estimate(static_cast<double>(f.z_I[k]), f.exposure[k]);
}

struct RmseSummary {
    double rmse = 0.0;
    std::size_t n_used = 0;
    std::size_t n_missing = 0;
};

inline RmseSummary rmse(std::span<const EstimateRecord> records,
                        const std::unordered_map<std::uint64_t, double>& truths) {
    RmseSummary out;
    double sum_sq = 0.0;
    for (const auto& r : records) {
        auto it = truths.find(r.run_id);
        if (it == truths.end()) throw ConfigError("no true tau for run " + std::to_string(r.run_id));
        if (!r.tau_hat) {
            ++out.n_missing;
            continue;
        }
        const double err = *r.tau_hat - it->second;
        sum_sq += err * err;
        ++out.n_used;
    }
    if (out.n_used == 0) throw std::domain_error("RMSE of an empty estimate set");
    out.rmse = std::sqrt(sum_sq / static_cast<double>(out.n_used));
    return out;
}

struct ResultRow {
    Method method = Method::ml_exact;
    double T = 0.0;
    double rmse = 0.0;
    std::size_t n_used = 0;
    std::size_t n_missing = 0;
};

inline constexpr std::string_view predictions_header = "run_id,T,method,tau_hat";
inline constexpr std::string_view results_header = "method,T,rmse,n_used,n_missing";

inline void write_predictions(std::span<const EstimateRecord> records, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << predictions_header << '\n';
    for (const auto& r : records)
        out << r.run_id << ',' << format_exact(r.T) << ',' << to_string(r.method) << ','
            << (r.tau_hat ? format_exact(*r.tau_hat) : std::string()) << '\n';
    finish_output(out, path);
}

inline std::vector<EstimateRecord> read_predictions(const std::filesystem::path& path) {
    std::vector<EstimateRecord> records;
    for (const auto& line : read_csv_lines(path, predictions_header)) {
        auto f = split_csv(line);
        if (f.size() != 4) throw ConfigError("prediction row has wrong field count: " + line);
        EstimateRecord r;
        r.run_id = parse_int<std::uint64_t>(f[0]);
        r.T = parse_double(f[1]);
        r.method = parse_method(f[2]);
        if (!f[3].empty()) r.tau_hat = parse_double(f[3]);
        records.push_back(r);
    }
    return records;
}

inline void write_results(std::span<const ResultRow> rows, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << results_header << '\n';
    for (const auto& r : rows)
        out << to_string(r.method) << ',' << format_exact(r.T) << ',' << format_exact(r.rmse) << ',' << r.n_used
            << ',' << r.n_missing << '\n';
    finish_output(out, path);
}

inline std::vector<ResultRow> read_results(const std::filesystem::path& path) {
    std::vector<ResultRow> rows;
    for (const auto& line : read_csv_lines(path, results_header)) {
        auto f = split_csv(line);
        if (f.size() != 5) throw ConfigError("result row has wrong field count: " + line);
        rows.push_back({parse_method(f[0]), parse_double(f[1]), parse_double(f[2]),
                        parse_int<std::size_t>(f[3]), parse_int<std::size_t>(f[4])});
    }
    return rows;
}

}  // namespace epinet

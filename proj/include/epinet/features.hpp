#pragma once

// Grid ("daily report") features of simulated epidemics, and the on-disk
// dataset layout shared with the learner tooling:
//
//   manifest.csv  one row per run (graph model, parameters, tau, seed, split)
//   series.csv    S, I, R, SI edge counts and degree means at t = dt .. t_max
//   initial.csv   the same quantities at t = 0
//   exposure.csv  exact infection count and exact integral of W^SI up to t

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "epinet/format.hpp"
#include "epinet/graph.hpp"
#include "epinet/netgen.hpp"
#include "epinet/replay.hpp"
#include "epinet/sir.hpp"

namespace epinet {

struct TrajectoryFeatures {
    std::uint64_t run_id = 0;
    double dt = 0.1;
    Snapshot initial;                  // state at t = 0
    std::vector<double> t;             // dt, 2dt, ..., t_max
    std::vector<Snapshot> points;      // right-continuous samples at t
    std::vector<std::int64_t> z_I;     // infection events in (0, t]
    std::vector<double> exposure;      // integral of W^SI over [0, t]

    std::size_t size() const { return t.size(); }
};

/// Samples the piecewise-constant epidemic state on the grid dt, 2dt, ... t_max.
/// A grid value reflects every event at or before that time.
inline TrajectoryFeatures sample_grid(const EventLog& log, const LayeredGraph& g, double dt = 0.1,
                                      double t_max = 30.0) {
    if (!(dt > 0.0) || !(t_max >= dt)) throw std::invalid_argument("invalid grid");
    const auto steps = static_cast<std::size_t>(std::llround(t_max / dt));

    EpidemicReplay replay(g, log.initial_infected);
    TrajectoryFeatures f;
    f.dt = dt;
    f.initial = replay.snapshot();
    f.t.reserve(steps);
    f.points.reserve(steps);
    f.z_I.reserve(steps);
    f.exposure.reserve(steps);

    std::size_t next = 0;
    std::int64_t infections = 0;
    double integral = 0.0;
    double last_t = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double tg = static_cast<double>(k) * dt;
        while (next < log.events.size() && log.events[next].t <= tg) {
            const Event& e = log.events[next++];
            integral += replay.si_weight() * (e.t - last_t);
            last_t = e.t;
            replay.apply(e);
            if (e.kind == EventKind::infection) ++infections;
        }
        f.t.push_back(tg);
        f.points.push_back(replay.snapshot());
        f.z_I.push_back(infections);
        f.exposure.push_back(integral + replay.si_weight() * (tg - last_t));
    }
    return f;
}

enum class GraphModel { poly, clique };
enum class Split { train, test };

inline std::string_view to_string(GraphModel m) { return m == GraphModel::poly ? "poly" : "clique"; }
inline std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }

struct RunManifest {
    std::uint64_t run_id = 0;
    GraphModel graph_model = GraphModel::clique;
    PolyParams poly;      // meaningful for graph_model == poly
    int N_wp = 0;         // meaningful for graph_model == clique
    double p_relaxed = 0.0;
    double w = 0.4;
    vertex_t n = 0;
    int N_hh = 5;
    double d = 0.0;
    double tau = 0.0;
    std::uint64_t seed = 0;
    Split split = Split::train;

    friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

struct RunData {
    RunManifest manifest;
    TrajectoryFeatures features;
};

inline constexpr std::string_view manifest_header =
    "run_id,graph_model,p_pa,p_u,p_tr,m,n0,N_wp,p_relaxed,w,n,N_hh,d,tau,seed,split";
inline constexpr std::string_view series_header = "run_id,t,S,I,R,E_SI_hh,E_SI_o,d_S_w,d_I_w,d_I_out";
inline constexpr std::string_view initial_header = "run_id,S,I,R,E_SI_hh,E_SI_o,d_S_w,d_I_w,d_I_out";
inline constexpr std::string_view exposure_header = "run_id,t,z_I,exposure";

inline std::string manifest_row(const RunManifest& m) {
    const bool poly = m.graph_model == GraphModel::poly;
    std::string row = std::to_string(m.run_id) + ',' + std::string(to_string(m.graph_model)) + ',';
    if (poly)
        row += format_exact(m.poly.p_pa) + ',' + format_exact(m.poly.p_u) + ',' + format_exact(m.poly.p_tr) +
               ',' + std::to_string(m.poly.m) + ',' + std::to_string(m.poly.n0) + ",,,";
    else
        row += ",,,,," + std::to_string(m.N_wp) + ',' + format_exact(m.p_relaxed) + ',';
    row += format_exact(m.w) + ',' + std::to_string(m.n) + ',' + std::to_string(m.N_hh) + ',' +
           format_exact(m.d) + ',' + format_exact(m.tau) + ',' + std::to_string(m.seed) + ',' +
           std::string(to_string(m.split));
    return row;
}

inline RunManifest parse_manifest_row(std::string_view line) {
    auto f = split_csv(line);
    if (f.size() != 16) throw ConfigError("manifest row has " + std::to_string(f.size()) + " fields");
    RunManifest m;
    m.run_id = parse_int<std::uint64_t>(f[0]);
    if (f[1] == "poly") {
        m.graph_model = GraphModel::poly;
        m.poly = {parse_double(f[2]), parse_double(f[3]), parse_double(f[4]), parse_int<int>(f[5]),
                  parse_int<int>(f[6])};
    } else if (f[1] == "clique") {
        m.graph_model = GraphModel::clique;
        m.N_wp = parse_int<int>(f[7]);
        m.p_relaxed = parse_double(f[8]);
    } else {
        throw ConfigError("unknown graph model '" + std::string(f[1]) + "'");
    }
    m.w = parse_double(f[9]);
    m.n = parse_int<vertex_t>(f[10]);
    m.N_hh = parse_int<int>(f[11]);
    m.d = parse_double(f[12]);
    m.tau = parse_double(f[13]);
    m.seed = parse_int<std::uint64_t>(f[14]);
    if (f[15] == "train")
        m.split = Split::train;
    else if (f[15] == "test")
        m.split = Split::test;
    else
        throw ConfigError("unknown split '" + std::string(f[15]) + "'");
    return m;
}

namespace detail {

inline int time_decimals(double dt) {
    return std::max(1, static_cast<int>(std::ceil(-std::log10(dt) - 1e-9)));
}

inline std::string snapshot_fields(const Snapshot& s) {
    return std::to_string(s.S) + ',' + std::to_string(s.I) + ',' + std::to_string(s.R) + ',' +
           std::to_string(s.E_SI_hh) + ',' + std::to_string(s.E_SI_o) + ',' + format_sig6(s.d_S_w) + ',' +
           format_sig6(s.d_I_w) + ',' + format_sig6(s.d_I_out);
}

inline Snapshot parse_snapshot(std::span<const std::string_view> f) {
    Snapshot s;
    s.S = parse_int(f[0]);
    s.I = parse_int(f[1]);
    s.R = parse_int(f[2]);
    s.E_SI_hh = parse_int(f[3]);
    s.E_SI_o = parse_int(f[4]);
    s.d_S_w = parse_double(f[5]);
    s.d_I_w = parse_double(f[6]);
    s.d_I_out = parse_double(f[7]);
    return s;
}

}  // namespace detail

/// Writes the four dataset files into `dir` (created if needed), replacing any
/// previous contents. Rows are ordered by run_id, then t.
inline void export_dataset(std::span<const RunData> runs, const std::filesystem::path& dir) {
    std::set<std::uint64_t> ids;
    for (const auto& r : runs)
        if (!ids.insert(r.manifest.run_id).second)
            throw ConfigError("duplicate run_id " + std::to_string(r.manifest.run_id));

    std::vector<const RunData*> sorted;
    for (const auto& r : runs) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](const RunData* a, const RunData* b) { return a->manifest.run_id < b->manifest.run_id; });

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    auto manifest = open_output(dir / "manifest.csv");
    auto series = open_output(dir / "series.csv");
    auto initial = open_output(dir / "initial.csv");
    auto exposure = open_output(dir / "exposure.csv");
    manifest << manifest_header << '\n';
    series << series_header << '\n';
    initial << initial_header << '\n';
    exposure << exposure_header << '\n';

    for (const RunData* r : sorted) {
        const auto id = std::to_string(r->manifest.run_id);
        const auto& f = r->features;
        const int decimals = detail::time_decimals(f.dt);
        manifest << manifest_row(r->manifest) << '\n';
        initial << id << ',' << detail::snapshot_fields(f.initial) << '\n';
        for (std::size_t k = 0; k < f.size(); ++k) {
            const auto t = format_fixed(f.t[k], decimals);
            series << id << ',' << t << ',' << detail::snapshot_fields(f.points[k]) << '\n';
            exposure << id << ',' << t << ',' << f.z_I[k] << ',' << format_exact(f.exposure[k]) << '\n';
        }
    }
    finish_output(manifest, dir / "manifest.csv");
    finish_output(series, dir / "series.csv");
    finish_output(initial, dir / "initial.csv");
    finish_output(exposure, dir / "exposure.csv");
}

inline std::vector<RunManifest> read_manifest(const std::filesystem::path& path) {
    std::vector<RunManifest> out;
    for (const auto& line : read_csv_lines(path, manifest_header)) out.push_back(parse_manifest_row(line));
    return out;
}

inline void write_manifest(std::span<const RunManifest> manifests, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << manifest_header << '\n';
    for (const auto& m : manifests) out << manifest_row(m) << '\n';
    finish_output(out, path);
}

/// Reads a dataset written by export_dataset. Throws ConfigError naming the
/// run when a manifest entry has no series.
inline std::vector<RunData> import_dataset(const std::filesystem::path& dir) {
    std::vector<RunData> runs;
    std::unordered_map<std::uint64_t, std::size_t> index;
    for (auto& m : read_manifest(dir / "manifest.csv")) {
        index[m.run_id] = runs.size();
        runs.push_back({m, {}});
        runs.back().features.run_id = m.run_id;
    }
    auto lookup = [&](std::string_view id) -> TrajectoryFeatures& {
        auto it = index.find(parse_int<std::uint64_t>(id));
        if (it == index.end()) throw ConfigError("row for run " + std::string(id) + " not in manifest");
        return runs[it->second].features;
    };

    for (const auto& line : read_csv_lines(dir / "series.csv", series_header)) {
        auto f = split_csv(line);
        if (f.size() != 10) throw ConfigError("series row has wrong field count: " + line);
        auto& tf = lookup(f[0]);
        tf.t.push_back(parse_double(f[1]));
        tf.points.push_back(detail::parse_snapshot(std::span(f).subspan(2)));
    }
    std::set<std::uint64_t> with_initial;
    for (const auto& line : read_csv_lines(dir / "initial.csv", initial_header)) {
        auto f = split_csv(line);
        if (f.size() != 9) throw ConfigError("initial row has wrong field count: " + line);
        lookup(f[0]).initial = detail::parse_snapshot(std::span(f).subspan(1));
        with_initial.insert(parse_int<std::uint64_t>(f[0]));
    }
    for (const auto& line : read_csv_lines(dir / "exposure.csv", exposure_header)) {
        auto f = split_csv(line);
        if (f.size() != 4) throw ConfigError("exposure row has wrong field count: " + line);
        auto& tf = lookup(f[0]);
        tf.z_I.push_back(parse_int(f[2]));
        tf.exposure.push_back(parse_double(f[3]));
    }

    for (auto& r : runs) {
        auto& f = r.features;
        const auto id = std::to_string(r.manifest.run_id);
        if (f.t.empty()) throw ConfigError("missing series for run " + id);
        if (!with_initial.contains(r.manifest.run_id)) throw ConfigError("missing initial state for run " + id);
        if (f.z_I.size() != f.t.size()) throw ConfigError("exposure rows do not match series for run " + id);
        f.dt = f.t.front();
    }
    return runs;
}

/// Stratum key: graph parameter combination plus tau.
inline std::string stratum_key(const RunManifest& m) {
    std::string key(to_string(m.graph_model));
    if (m.graph_model == GraphModel::poly)
        key += '|' + format_exact(m.poly.p_pa) + '|' + format_exact(m.poly.p_u) + '|' +
               format_exact(m.poly.p_tr) + '|' + std::to_string(m.poly.m) + '|' + std::to_string(m.poly.n0);
    else
        key += '|' + std::to_string(m.N_wp) + '|' + format_exact(m.p_relaxed);
    key += '|' + format_exact(m.w) + '|' + std::to_string(m.n) + '|' + format_exact(m.tau);
    return key;
}

/// Stratified train/test split: in every stratum a seeded shuffle sends
/// round(fraction * count) runs to train and the rest to test. Strata with
/// fewer than two runs go to train with a warning.
template <class Rng>
std::vector<RunManifest> split_train_test(std::vector<RunManifest> manifests, double train_fraction, Rng& rng) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train fraction must lie in (0, 1)");
    std::map<std::string, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < manifests.size(); ++i) strata[stratum_key(manifests[i])].push_back(i);

    for (auto& [key, members] : strata) {
        if (members.size() < 2) {
            std::clog << "warning: stratum " << key << " has " << members.size()
                      << " run(s); assigned to train\n";
            for (auto i : members) manifests[i].split = Split::train;
            continue;
        }
        std::shuffle(members.begin(), members.end(), rng);
        const auto train = static_cast<std::size_t>(std::llround(train_fraction * members.size()));
        for (std::size_t k = 0; k < members.size(); ++k)
            manifests[members[k]].split = k < train ? Split::train : Split::test;
    }
    return manifests;
}

}  // namespace epinet

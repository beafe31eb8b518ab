#pragma once

// Experiment orchestration: dataset generation over a parameter matrix,
// classical-estimator evaluation, leave-one-out dataset pairs, RMSE tables and
// plot-ready curves.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "epinet/estimators.hpp"
#include "epinet/features.hpp"
#include "epinet/format.hpp"
#include "epinet/netgen.hpp"
#include "epinet/rng.hpp"
#include "epinet/sir.hpp"

namespace epinet {

enum class Scenario { poly, clique_fixed_density, clique_leave_one_out };

inline std::string_view to_string(Scenario s) {
    switch (s) {
    case Scenario::poly: return "poly";
    case Scenario::clique_fixed_density: return "clique_fixed_density";
    default: return "clique_leave_one_out";
    }
}

inline Scenario parse_scenario(std::string_view s) {
    if (s == "poly") return Scenario::poly;
    if (s == "clique_fixed_density" || s == "clique") return Scenario::clique_fixed_density;
    if (s == "clique_leave_one_out" || s == "loo") return Scenario::clique_leave_one_out;
    throw ConfigError("unknown scenario '" + std::string(s) + "'");
}

/// Second-layer weight keeping the out-of-household weighted degree at 3.2.
inline double fixed_density_weight(int N_wp) {
    if (N_wp < 2) throw std::invalid_argument("workplace size must be at least 2");
    return 3.2 / (N_wp - 1);
}

/// tau values min, min+step, ..., max (inclusive), rounded to 1e-9.
inline std::vector<double> tau_range(double min, double max, double step) {
    if (!(step > 0.0) || !(max >= min)) throw ConfigError("invalid tau range");
    std::vector<double> grid;
    for (long k = 0;; ++k) {
        const double tau = std::round((min + k * step) * 1e9) / 1e9;
        if (tau > max + 1e-9) break;
        grid.push_back(tau);
    }
    return grid;
}

inline std::vector<PolyParams> default_poly_triplets() {
    std::vector<PolyParams> out;
    for (double p : {0.1, 0.15, 0.2, 0.25, 0.3}) out.push_back({0.0, 1.0 - p, p, 4, 50});
    for (double p : {0.1, 0.15, 0.2, 0.25, 0.3}) out.push_back({p, 1.0 - p, 0.0, 4, 50});
    return out;
}

inline std::vector<int> default_clique_sizes(Scenario s) {
    if (s == Scenario::clique_leave_one_out) return {7, 8, 9, 10, 11};
    return {7, 8, 10, 11, 12, 15};
}

struct ExperimentConfig {
    Scenario scenario = Scenario::poly;
    std::vector<double> tau_grid = tau_range(0.3, 0.6, 0.05);
    std::vector<PolyParams> poly_params = default_poly_triplets();
    std::vector<int> clique_sizes = default_clique_sizes(Scenario::clique_fixed_density);
    int replications = 10;
    vertex_t n = 2000;
    int N_hh = 5;
    double poly_w = 0.4;
    double p_relaxed = 0.0;
    double init_infected_fraction = 0.01;
    double t_max = 30.0;
    double dt = 0.1;
    double train_fraction = 0.7;
    std::uint64_t seed = 1;
    std::vector<double> report_times = {1, 2, 4, 6, 10};
    std::filesystem::path output_dir = "dataset";
    unsigned threads = 0;  // 0: hardware concurrency
};

/// Desk scale: n=2000, 10 replications, tau step 0.05.
/// Paper scale: n=5000, 50 (poly) or 250 (clique) replications, tau step 0.01.
inline void apply_preset(ExperimentConfig& cfg, std::string_view preset) {
    if (preset == "desk") {
        cfg.n = 2000;
        cfg.replications = 10;
        cfg.tau_grid = tau_range(0.3, 0.6, 0.05);
    } else if (preset == "paper") {
        cfg.n = 5000;
        cfg.replications = cfg.scenario == Scenario::poly ? 50 : 250;
        cfg.tau_grid = tau_range(0.3, 0.6, 0.01);
    } else {
        throw ConfigError("unknown preset '" + std::string(preset) + "'");
    }
}

inline void validate(const ExperimentConfig& cfg) {
    if (cfg.tau_grid.empty()) throw ConfigError("tau grid is empty");
    for (std::size_t i = 0; i < cfg.tau_grid.size(); ++i) {
        if (!(cfg.tau_grid[i] > 0.0)) throw ConfigError("tau values must be positive");
        if (i > 0 && !(cfg.tau_grid[i] > cfg.tau_grid[i - 1])) throw ConfigError("tau grid must be strictly increasing");
    }
    if (cfg.replications < 1) throw ConfigError("replications must be >= 1");
    if (cfg.n < 2) throw ConfigError("n must be >= 2");
    if (cfg.scenario == Scenario::poly && cfg.poly_params.empty()) throw ConfigError("no polynomial parameters");
    if (cfg.scenario != Scenario::poly && cfg.clique_sizes.empty()) throw ConfigError("no clique sizes");
    if (cfg.report_times.empty()) throw ConfigError("no report times");
    for (double T : cfg.report_times)
        if (!(T > 0.0) || T > cfg.t_max + 1e-9) throw ConfigError("report time outside (0, t_max]");
}

/// One manifest per (graph parameters, tau, replication), run ids in that
/// order, each with its own derived seed. Splits are assigned later.
inline std::vector<RunManifest> plan_runs(const ExperimentConfig& cfg) {
    validate(cfg);
    std::vector<RunManifest> plan;
    auto push = [&](RunManifest base) {
        for (double tau : cfg.tau_grid)
            for (int r = 0; r < cfg.replications; ++r) {
                RunManifest m = base;
                m.run_id = plan.size();
                m.tau = tau;
                m.seed = stream_seed(cfg.seed, m.run_id);
                plan.push_back(m);
            }
    };
    RunManifest base;
    base.n = cfg.n;
    base.N_hh = cfg.N_hh;
    if (cfg.scenario == Scenario::poly) {
        for (const auto& p : cfg.poly_params) {
            validate(p);
            base.graph_model = GraphModel::poly;
            base.poly = p;
            base.w = cfg.poly_w;
            push(base);
        }
    } else {
        for (int size : cfg.clique_sizes) {
            base.graph_model = GraphModel::clique;
            base.N_wp = size;
            base.p_relaxed = cfg.p_relaxed;
            base.w = fixed_density_weight(size);
            push(base);
        }
    }
    return plan;
}

template <class Rng>
LayeredGraph build_graph(const RunManifest& m, Rng& rng) {
    LayeredGraph g = build_household_layer(m.n, m.N_hh);
    if (m.graph_model == GraphModel::poly) return build_polynomial_layer(std::move(g), m.poly, m.w, rng);
    g = build_clique_layer(std::move(g), CliqueParams{m.N_wp, m.p_relaxed, m.w}, rng);
    return relax_caveman(std::move(g), m.p_relaxed, rng);
}

/// Builds a fresh graph from the run's seed, simulates and featurises it.
/// Fills in manifest.d from the realised graph.
inline RunData simulate_run(RunManifest m, const ExperimentConfig& cfg) {
    rng_t rng = make_rng(m.seed);
    LayeredGraph g = build_graph(m, rng);
    m.d = graph_stats(g).d;
    SimParams sim{m.tau, 1.0, cfg.init_infected_fraction, cfg.t_max};
    EventLog log = gillespie_run(g, sim, rng);
    RunData out{m, sample_grid(log, g, cfg.dt, cfg.t_max)};
    out.features.run_id = m.run_id;
    return out;
}

/// Runs every planned simulation on a worker pool, splits train/test and
/// writes the dataset to cfg.output_dir. A failing run is re-seeded once.
inline std::vector<RunData> run_scenario(const ExperimentConfig& cfg) {
    auto plan = plan_runs(cfg);
    std::vector<std::optional<RunData>> results(plan.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr failure;

    auto worker = [&] {
        for (std::size_t i = next++; i < plan.size(); i = next++) {
            try {
                try {
                    results[i] = simulate_run(plan[i], cfg);
                } catch (const std::exception& e) {
                    std::lock_guard lock(error_mutex);
                    std::clog << "run " << plan[i].run_id << " failed (" << e.what() << "); re-seeding\n";
                    plan[i].seed = stream_seed(plan[i].seed, 1);
                    results[i] = simulate_run(plan[i], cfg);
                }
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(plan.size(), 1)));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    std::vector<RunManifest> manifests;
    manifests.reserve(results.size());
    for (const auto& r : results) manifests.push_back(r->manifest);
    rng_t split_rng = make_stream(cfg.seed, ~std::uint64_t{0});
    manifests = split_train_test(std::move(manifests), cfg.train_fraction, split_rng);

    std::vector<RunData> runs;
    runs.reserve(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        runs.push_back(std::move(*results[i]));
        runs.back().manifest = manifests[i];
    }
    export_dataset(runs, cfg.output_dir);
    return runs;
}

struct EvaluationOptions {
    std::vector<Method> methods;  // empty: ml_exact, ml_static, ml_dynamic (poly runs only)
    std::vector<double> times = {1, 2, 4, 6, 10};
    std::filesystem::path output_dir;  // empty: the dataset directory
};

/// Renders per-(method, T) RMSE rows as a fixed-width text table, one row per
/// method and one column per T, values to four decimals.
inline std::string render_table(std::span<const ResultRow> rows) {
    std::vector<Method> methods;
    std::set<double> times;
    std::map<std::pair<Method, double>, double> cell;
    for (const auto& r : rows) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
        times.insert(r.T);
        cell[{r.method, r.T}] = r.rmse;
    }
    std::ostringstream out;
    out << "method    ";
    for (double T : times) {
        std::string head = "t=" + format_exact(T);
        out << " | " << head << std::string(head.size() < 6 ? 6 - head.size() : 0, ' ');
    }
    out << '\n';
    for (Method m : methods) {
        std::string name(to_string(m));
        out << name << std::string(name.size() < 10 ? 10 - name.size() : 0, ' ');
        for (double T : times) {
            auto it = cell.find({m, T});
            out << " | " << (it == cell.end() ? std::string("-     ") : format_fixed(it->second, 4));
        }
        out << '\n';
    }
    return out.str();
}

/// Parses render_table output back into (method, T, rmse) triples.
inline std::vector<ResultRow> parse_table(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty table");
    std::vector<double> times;
    {
        std::istringstream head(line);
        std::string token;
        while (head >> token)
            if (token.rfind("t=", 0) == 0) times.push_back(parse_double(token.substr(2)));
    }
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string name, bar, value;
        row >> name;
        const Method m = parse_method(name);
        for (double T : times) {
            if (!(row >> bar >> value)) throw ConfigError("short table row: " + line);
            if (value != "-") rows.push_back({m, T, parse_double(value), 0, 0});
        }
    }
    return rows;
}

/// Applies the classical estimators to every test run of a dataset at each
/// requested horizon; writes predictions.csv, results.csv and table.txt.
inline std::vector<ResultRow> evaluate_classical(const std::filesystem::path& dataset,
                                                 const EvaluationOptions& options) {
    const auto runs = import_dataset(dataset);
    const bool any_poly = std::any_of(runs.begin(), runs.end(),
                                      [](const RunData& r) { return r.manifest.graph_model == GraphModel::poly; });
    std::vector<Method> methods = options.methods;
    if (methods.empty()) {
        methods = {Method::ml_exact, Method::ml_static};
        if (any_poly) methods.push_back(Method::ml_dynamic);
    }
    for (Method m : methods)
        if (m != Method::ml_exact && m != Method::ml_static && m != Method::ml_dynamic)
            throw ConfigError("evaluate handles classical methods only, not " + std::string(to_string(m)));
    if (options.times.empty()) throw ConfigError("no evaluation times");

    std::unordered_map<std::uint64_t, double> truths;
    std::vector<EstimateRecord> records;
    std::vector<ResultRow> results;
    for (Method method : methods) {
        for (double T : options.times) {
            std::vector<EstimateRecord> cell;
            for (const auto& r : runs) {
                if (r.manifest.split != Split::test) continue;
                if (method == Method::ml_dynamic && r.manifest.graph_model != GraphModel::poly) continue;
                truths[r.manifest.run_id] = r.manifest.tau;
                EstimateRecord rec{r.manifest.run_id, T, method, std::nullopt};
                switch (method) {
                case Method::ml_exact: rec.tau_hat = tau_hat_from_exposure(r.features, T); break;
                case Method::ml_static:
                    rec.tau_hat = tau_hat_approx(r.features, r.manifest, T, EdgeEstimate::static_mean);
                    break;
                default:
                    rec.tau_hat = tau_hat_approx(r.features, r.manifest, T, EdgeEstimate::dynamic_infected);
                    break;
                }
                cell.push_back(rec);
            }
            if (cell.empty()) continue;
            records.insert(records.end(), cell.begin(), cell.end());
            try {
                auto s = rmse(cell, truths);
                results.push_back({method, T, s.rmse, s.n_used, s.n_missing});
            } catch (const std::domain_error&) {
                std::clog << "warning: " << to_string(method) << " has no defined estimate at T=" << T << '\n';
            }
        }
    }

    const auto out_dir = options.output_dir.empty() ? dataset : options.output_dir;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string());
    write_predictions(records, out_dir / "predictions.csv");
    write_results(results, out_dir / "results.csv");
    auto table = open_output(out_dir / "table.txt");
    table << render_table(results);
    finish_output(table, out_dir / "table.txt");
    return results;
}

struct LeaveOneOutResult {
    std::size_t train_runs = 0;
    std::size_t test_runs = 0;
    std::filesystem::path train_dir;
    std::filesystem::path test_dir;
    std::vector<ResultRow> classical;
};

/// From a clique-family dataset, emits a training set without any run of
/// clique size `omitted` and a test set with only the test-split runs of size
/// `test_on`; the classical estimators are evaluated on that test set.
inline LeaveOneOutResult leave_one_out_experiment(const std::filesystem::path& dataset, int omitted, int test_on,
                                                  const std::filesystem::path& out_dir,
                                                  const std::vector<double>& times) {
    const auto runs = import_dataset(dataset);
    std::set<int> family;
    for (const auto& r : runs) {
        if (r.manifest.graph_model != GraphModel::clique) throw ConfigError("leave-one-out needs a clique dataset");
        family.insert(r.manifest.N_wp);
    }
    if (!family.contains(omitted)) throw ConfigError("omitted size " + std::to_string(omitted) + " not in dataset");
    if (!family.contains(test_on)) throw ConfigError("test size " + std::to_string(test_on) + " not in dataset");

    std::vector<RunData> train, test;
    for (const auto& r : runs) {
        if (r.manifest.split == Split::train && r.manifest.N_wp != omitted) train.push_back(r);
        if (r.manifest.split == Split::test && r.manifest.N_wp == test_on) test.push_back(r);
    }
    if (train.empty()) throw ConfigError("leave-one-out training set is empty");
    if (test.empty()) throw ConfigError("leave-one-out test set is empty");

    LeaveOneOutResult out;
    out.train_runs = train.size();
    out.test_runs = test.size();
    out.train_dir = out_dir / "train";
    out.test_dir = out_dir / "test";
    export_dataset(train, out.train_dir);
    export_dataset(test, out.test_dir);
    out.classical = evaluate_classical(out.test_dir, {{}, times, {}});
    return out;
}

struct CurvePoint {
    std::string label;
    double t = 0.0;
    double rmse = 0.0;

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

inline constexpr std::string_view curves_header = "label,t,rmse";

/// Writes curves.csv with one label per (experiment, method). An empty
/// experiment name labels curves by method alone.
inline std::vector<CurvePoint> emit_plot_series(
    std::span<const std::pair<std::string, std::filesystem::path>> results, const std::filesystem::path& out) {
    std::vector<CurvePoint> points;
    for (const auto& [experiment, path] : results) {
        auto rows = read_results(path);
        std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
            return a.method != b.method ? a.method < b.method : a.T < b.T;
        });
        for (const auto& r : rows) {
            std::string label = experiment.empty() ? std::string(to_string(r.method))
                                                   : experiment + "/" + std::string(to_string(r.method));
            if (label.find(',') != std::string::npos) throw ConfigError("label may not contain ',': " + label);
            points.push_back({std::move(label), r.T, r.rmse});
        }
    }
    auto file = open_output(out);
    file << curves_header << '\n';
    for (const auto& p : points) file << p.label << ',' << format_exact(p.t) << ',' << format_exact(p.rmse) << '\n';
    finish_output(file, out);
    return points;
}

inline std::vector<CurvePoint> read_curves(const std::filesystem::path& path) {
    std::vector<CurvePoint> points;
    for (const auto& line : read_csv_lines(path, curves_header)) {
        auto f = split_csv(line);
        if (f.size() != 3) throw ConfigError("curve row has wrong field count: " + line);
        points.push_back({std::string(f[0]), parse_double(f[1]), parse_double(f[2])});
    }
    return points;
}

/// key=value lines; '#' starts a comment.
inline std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

inline std::vector<double> parse_double_list(std::string_view s) {
    std::vector<double> out;
    for (auto field : split_csv(s)) {
        while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
        while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
        if (!field.empty()) out.push_back(parse_double(field));
    }
    return out;
}

}  // namespace epinet

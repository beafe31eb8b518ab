// epinet: generate epidemic datasets on two-layer contact graphs and evaluate
// infection-rate estimators.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "epinet/harness.hpp"

namespace fs = std::filesystem;
using namespace epinet;

namespace {

using Settings = std::map<std::string, std::string>;

/// String-valued option whose value is recorded only when given explicitly.
struct Flag {
    std::string key;
    std::string value;
    CLI::Option* option = nullptr;
};

class FlagSet {
public:
    void add(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
        flags_.push_back(std::make_unique<Flag>());
        auto& f = *flags_.back();
        f.key = key;
        f.option = app->add_option(name, f.value, help);
    }

    /// File values first, then every flag given on the command line.
    Settings resolve(const std::string& config_path) const {
        Settings s;
        if (!config_path.empty()) s = read_config_file(config_path);
        for (const auto& f : flags_)
            if (f->option->count() > 0) s[f->key] = f->value;
        return s;
    }

private:
    std::vector<std::unique_ptr<Flag>> flags_;
};

std::vector<double> times_from(const Settings& s, std::vector<double> fallback) {
    if (auto it = s.find("times"); it != s.end()) return parse_double_list(it->second);
    return fallback;
}

ExperimentConfig build_config(const Settings& s) {
    ExperimentConfig cfg;
    std::set<std::string> known = {"scenario", "preset", "n", "reps", "seed", "out", "threads", "tau_min",
                                   "tau_max", "tau_step", "sizes", "w", "p_relaxed", "times", "train_fraction"};
    for (const auto& [key, value] : s)
        if (!known.contains(key)) throw ConfigError("unknown setting '" + key + "'");

    auto get = [&](const std::string& key) -> const std::string* {
        auto it = s.find(key);
        return it == s.end() ? nullptr : &it->second;
    };
    if (auto v = get("scenario")) cfg.scenario = parse_scenario(*v);
    cfg.clique_sizes = default_clique_sizes(cfg.scenario);
    apply_preset(cfg, get("preset") ? *get("preset") : "desk");

    if (auto v = get("n")) cfg.n = parse_int<vertex_t>(*v);
    if (auto v = get("reps")) cfg.replications = parse_int<int>(*v);
    if (auto v = get("seed")) cfg.seed = parse_int<std::uint64_t>(*v);
    if (auto v = get("out")) cfg.output_dir = *v;
    if (auto v = get("threads")) cfg.threads = parse_int<unsigned>(*v);
    if (get("tau_min") || get("tau_max") || get("tau_step")) {
        const double lo = get("tau_min") ? parse_double(*get("tau_min")) : cfg.tau_grid.front();
        const double hi = get("tau_max") ? parse_double(*get("tau_max")) : cfg.tau_grid.back();
        const double step = get("tau_step") ? parse_double(*get("tau_step")) : 0.05;
        cfg.tau_grid = tau_range(lo, hi, step);
    }
    if (auto v = get("sizes")) {
        cfg.clique_sizes.clear();
        for (double x : parse_double_list(*v)) cfg.clique_sizes.push_back(static_cast<int>(x));
    }
    if (auto v = get("w")) cfg.poly_w = parse_double(*v);
    if (auto v = get("p_relaxed")) cfg.p_relaxed = parse_double(*v);
    if (auto v = get("train_fraction")) cfg.train_fraction = parse_double(*v);
    cfg.report_times = times_from(s, cfg.report_times);
    validate(cfg);
    return cfg;
}

std::vector<double> full_grid() {
    std::vector<double> t;
    for (int k = 1; k <= 300; ++k) t.push_back(k / 10.0);
    return t;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-layer network SIR simulation and infection-rate estimation"};
    app.require_subcommand(1);

    std::string config_path;

    auto* generate = app.add_subcommand("generate", "simulate a scenario and write a dataset");
    FlagSet gen_flags;
    generate->add_option("--config", config_path, "key=value settings file; flags override it");
    gen_flags.add(generate, "--scenario", "scenario", "poly | clique_fixed_density | clique_leave_one_out");
    gen_flags.add(generate, "--preset", "preset", "desk (default) | paper");
    gen_flags.add(generate, "--n", "n", "vertices per graph");
    gen_flags.add(generate, "--reps", "reps", "replications per (graph parameters, tau) cell");
    gen_flags.add(generate, "--seed", "seed", "experiment seed");
    gen_flags.add(generate, "--out", "out", "output dataset directory");
    gen_flags.add(generate, "--threads", "threads", "worker threads (0: all cores)");
    gen_flags.add(generate, "--tau-min", "tau_min", "smallest tau");
    gen_flags.add(generate, "--tau-max", "tau_max", "largest tau");
    gen_flags.add(generate, "--tau-step", "tau_step", "tau grid step");
    gen_flags.add(generate, "--sizes", "sizes", "comma-separated clique sizes");
    gen_flags.add(generate, "--w", "w", "second-layer weight of the polynomial scenario");
    gen_flags.add(generate, "--p-relaxed", "p_relaxed", "caveman rewiring probability");
    gen_flags.add(generate, "--train-fraction", "train_fraction", "share of each stratum used for training");

    auto* evaluate = app.add_subcommand("evaluate", "run classical estimators on a dataset's test split");
    std::string dataset, methods, times, eval_out;
    bool full = false;
    evaluate->add_option("--dataset", dataset, "dataset directory")->required();
    evaluate->add_option("--methods", methods, "comma-separated: ml_exact,ml_static,ml_dynamic");
    evaluate->add_option("--times", times, "comma-separated horizons (default 1,2,4,6,10)");
    evaluate->add_flag("--full-grid", full, "evaluate at every grid time 0.1..30");
    evaluate->add_option("--out", eval_out, "results directory (default: the dataset)");

    auto* loo = app.add_subcommand("loo", "leave-one-out dataset pair over clique sizes");
    int omit = 0, test_on = 0;
    std::string loo_out, loo_times;
    loo->add_option("--dataset", dataset, "clique_leave_one_out dataset")->required();
    loo->add_option("--omit", omit, "clique size left out of training")->required();
    loo->add_option("--test-on", test_on, "clique size of the test set")->required();
    loo->add_option("--out", loo_out, "output directory (default: <dataset>/loo_omit<o>_test<t>)");
    loo->add_option("--times", loo_times, "comma-separated horizons");

    auto* plotdata = app.add_subcommand("plotdata", "collect results into curves.csv");
    std::vector<std::string> result_files;
    std::string curves_out = "curves.csv";
    plotdata->add_option("--results", result_files, "results.csv files, optionally label=path")->required();
    plotdata->add_option("--out", curves_out, "output curves file");

    auto* table = app.add_subcommand("table", "print a results.csv as an RMSE table");
    std::string table_results;
    table->add_option("--results", table_results, "results.csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*generate) {
            const auto cfg = build_config(gen_flags.resolve(config_path));
            const auto runs = run_scenario(cfg);
            std::size_t train = 0;
            for (const auto& r : runs) train += r.manifest.split == Split::train;
            std::cout << "wrote " << runs.size() << " runs (" << train << " train, " << runs.size() - train
                      << " test) to " << cfg.output_dir.string() << '\n';
        } else if (*evaluate) {
            EvaluationOptions opts;
            if (!methods.empty())
                for (auto m : split_csv(methods)) opts.methods.push_back(parse_method(m));
            if (full)
                opts.times = full_grid();
            else if (!times.empty())
                opts.times = parse_double_list(times);
            opts.output_dir = eval_out;
            const auto rows = evaluate_classical(dataset, opts);
            std::cout << render_table(rows);
        } else if (*loo) {
            fs::path out = loo_out.empty() ? fs::path(dataset) / ("loo_omit" + std::to_string(omit) + "_test" +
                                                                  std::to_string(test_on))
                                           : fs::path(loo_out);
            std::vector<double> t = loo_times.empty() ? std::vector<double>{1, 2, 4, 6, 10}
                                                      : parse_double_list(loo_times);
            const auto res = leave_one_out_experiment(dataset, omit, test_on, out, t);
            std::cout << "train: " << res.train_runs << " runs -> " << res.train_dir.string() << '\n'
                      << "test:  " << res.test_runs << " runs -> " << res.test_dir.string() << '\n'
                      << render_table(res.classical);
        } else if (*plotdata) {
            std::vector<std::pair<std::string, fs::path>> inputs;
            for (const auto& arg : result_files) {
                if (auto eq = arg.find('='); eq != std::string::npos)
                    inputs.emplace_back(arg.substr(0, eq), arg.substr(eq + 1));
                else
                    inputs.emplace_back(fs::path(arg).parent_path().filename().string(), arg);
            }
            const auto points = emit_plot_series(inputs, curves_out);
            std::cout << "wrote " << points.size() << " points to " << curves_out << '\n';
        } else if (*table) {
            std::cout << render_table(read_results(table_results));
        }
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

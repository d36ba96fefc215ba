#include "aggnet/cli.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace aggnet::cli {

namespace fs = std::filesystem;
using boost::property_tree::ptree;

namespace {

bool verbose = false;

void log(const std::string& message) {
    if (verbose) {
        std::cerr << message << '\n';
    }
}

template <typename T>
T config_value(const ptree& tree, const std::string& key, T fallback) {
    const auto raw = tree.get_optional<std::string>(key);
    if (!raw) {
        return fallback;
    }
    std::string text = *raw;
    text.erase(0, text.find_first_not_of(" \t"));
    text.erase(text.find_last_not_of(" \t") + 1);
    if constexpr (std::is_same_v<T, bool>) {
        if (text == "true" || text == "1") {
            return true;
        }
        if (text == "false" || text == "0") {
            return false;
        }
        throw ConfigError("'" + key + "' must be true or false");
    } else {
        T value{};
        const char* end = text.data() + text.size();
        const auto [ptr, ec] = std::from_chars(text.data(), end, value);
        if (ec != std::errc() || ptr != end || text.empty()) {
            throw ConfigError("cannot parse '" + key + "' from '" + *raw + "'");
        }
        return value;
    }
}

std::optional<fs::path> config_path(const ptree& tree, const std::string& key, const fs::path& base) {
    const auto raw = tree.get_optional<std::string>(key);
    if (!raw || raw->empty()) {
        return std::nullopt;
    }
    fs::path p(*raw);
    return p.is_absolute() ? p : base / p;
}

std::string to_text(const auto& writer) {
    std::ostringstream out;
    writer(out);
    return out.str();
}

template <typename Reader>
auto read_with(const fs::path& path, Reader reader) {
    std::istringstream in(read_text_file(path));
    try {
        return reader(in);
    } catch (const FormatError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir.string() + "'");
    }
}

AggregateMatrix load_aggregate(const RunConfig& cfg) {
    if (!cfg.aggregate_path || !cfg.sizes_path) {
        throw ConfigError("fit needs [data] aggregate and sizes paths");
    }
    for (const auto& p : {cfg.aggregate_path, cfg.sizes_path, cfg.truth_path}) {
        if (p && !fs::exists(*p)) {
            throw ConfigError("referenced file '" + p->string() + "' does not exist");
        }
    }
    AggregateMatrix y;
    y.counts = read_with(*cfg.aggregate_path, read_aggregate_csv);
    y.sizes = read_with(*cfg.sizes_path, read_sizes_csv);
    y.kind = cfg.kind;
    if (y.sizes.size() != static_cast<std::size_t>(y.counts.rows())) {
        throw InputError("aggregate matrix has " + std::to_string(y.counts.rows()) + " groups but the sizes file lists " +
                         std::to_string(y.sizes.size()));
    }
    try {
        y.validate();
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("inconsistent inputs: ") + e.what());
    }
    for (std::size_t a = 0; a < y.groups(); ++a) {
        for (std::size_t b = 0; b < y.groups(); ++b) {
            const auto count = y.counts(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            if (!cfg.kind.weighted && count > y.trials(a, b)) {
                throw InputError("inconsistent inputs: Y_" + std::to_string(a) + "," + std::to_string(b) + " = " +
                                 std::to_string(count) + " exceeds the " + std::to_string(y.trials(a, b)) +
                                 " possible edges");
            }
        }
    }
    if (static_cast<std::size_t>(cfg.q) > y.groups()) {
        throw InputError("need at least q = " + std::to_string(cfg.q) + " groups, got " + std::to_string(y.groups()));
    }
    return y;
}

std::string csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        out += (i ? "," : "") + fields[i];
    }
    return out + "\n";
}

struct FitInfo {
    int q = 2;
    std::size_t groups = 0;
    NetworkKind kind;
    double edge_density = 0.0;
    std::size_t selected_chain = 0;
};

FitInfo read_fit_info(const fs::path& fit_dir) {
    ptree tree;
    std::istringstream in(read_text_file(fit_dir / "fit.ini"));
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InputError(std::string("fit.ini: ") + e.what());
    }
    FitInfo info;
    try {
        info.q = config_value<int>(tree, "fit.q", 0);
        info.groups = config_value<std::size_t>(tree, "fit.groups", 0);
        info.kind.directed = config_value<bool>(tree, "fit.directed", true);
        info.kind.weighted = config_value<bool>(tree, "fit.weighted", false);
        info.edge_density = config_value<double>(tree, "fit.edge_density", 0.0);
        info.selected_chain = config_value<std::size_t>(tree, "fit.selected_chain", 0);
    } catch (const ConfigError& e) {
        throw InputError(std::string("fit.ini: ") + e.what());
    }
    if (info.q < 1 || info.groups < 1) {
        throw InputError("fit.ini: missing q or groups");
    }
    return info;
}

}  // namespace

RunConfig load_run_config(const fs::path& path) {
    if (!fs::exists(path)) {
        throw IoError("configuration file '" + path.string() + "' does not exist");
    }
    const std::string text = read_text_file(path);
    ptree tree;
    {
        std::istringstream in(text);
        try {
            boost::property_tree::read_ini(in, tree);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigError(std::string("configuration: ") + e.what());
        }
    }
    const fs::path base = path.parent_path();
    RunConfig cfg;
    cfg.q = config_value<int>(tree, "model.q", 2);
    cfg.kind.directed = config_value<bool>(tree, "model.directed", true);
    cfg.kind.weighted = config_value<bool>(tree, "model.weighted", false);
    cfg.prior.cauchy_scale_sigma = config_value<double>(tree, "model.cauchy_scale_sigma", 1.0);
    cfg.prior.cauchy_scale_tau = config_value<double>(tree, "model.cauchy_scale_tau", 1.0);

    cfg.sampler.n_chains = config_value<std::size_t>(tree, "sampler.chains", cfg.sampler.n_chains);
    cfg.sampler.n_warmup = config_value<std::size_t>(tree, "sampler.warmup", cfg.sampler.n_warmup);
    cfg.sampler.n_samples = config_value<std::size_t>(tree, "sampler.samples", cfg.sampler.n_samples);
    cfg.sampler.seed = config_value<std::uint64_t>(tree, "sampler.seed", cfg.sampler.seed);
    cfg.sampler.adapt_target = config_value<double>(tree, "sampler.adapt_target", cfg.sampler.adapt_target);
    cfg.sampler.default_step_scale = config_value<double>(tree, "sampler.step_scale", cfg.sampler.default_step_scale);
    cfg.sampler.init_scale = config_value<double>(tree, "sampler.init_scale", cfg.sampler.init_scale);
    cfg.simulation_seed = config_value<std::uint64_t>(tree, "simulation.seed", 0);

    cfg.validation.seed = config_value<std::uint64_t>(tree, "validate.seed", cfg.validation.seed);
    cfg.validation.grid_points = config_value<std::size_t>(tree, "validate.grid_points", cfg.validation.grid_points);
    cfg.validation.grid_sims = config_value<std::size_t>(tree, "validate.grid_sims", cfg.validation.grid_sims);
    cfg.validation.tv_sims = config_value<std::size_t>(tree, "validate.tv_sims", cfg.validation.tv_sims);

    cfg.aggregate_path = config_path(tree, "data.aggregate", base);
    cfg.sizes_path = config_path(tree, "data.sizes", base);
    cfg.truth_path = config_path(tree, "data.truth", base);
    cfg.output_dir = config_path(tree, "output.directory", base);

    if (tree.get_child_optional("truth")) {
        std::istringstream in(text);
        try {
            cfg.truth = read_truth_ini(in);
        } catch (const FormatError& e) {
            throw ConfigError(e.what());
        }
        if (cfg.truth->params.dimension() != cfg.q) {
            throw ConfigError("[truth] centres do not match q");
        }
    }

    if (cfg.q < 1) {
        throw ConfigError("q must be at least 1");
    }
    try {
        cfg.prior.validate();
        cfg.sampler.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (cfg.sampler.n_samples < 100) {
        throw ConfigError("sampler.samples must be at least 100 for posterior summaries");
    }
    return cfg;
}

void cmd_simulate(const RunConfig& cfg, const fs::path& out_dir) {
    if (!cfg.truth) {
        throw ConfigError("simulate needs a [truth] section with generating parameters");
    }
    const TruthSpec& truth = *cfg.truth;
    ensure_directory(out_dir);
    log("simulating " + std::to_string(truth.group_config().total_nodes()) + " nodes");
    const NetworkRealization net =
        simulate_network(truth.group_config(), {truth.params.theta, cfg.q}, truth.kind, cfg.simulation_seed);
    const AggregateMatrix y = aggregate(net, truth.sizes.size());
    write_text_file(out_dir / "edges.txt", to_text([&](std::ostream& o) { write_edge_list(o, net.adjacency, net.kind); }));
    write_text_file(out_dir / "labels.txt", to_text([&](std::ostream& o) { write_labels(o, net.labels); }));
    write_text_file(out_dir / "aggregate.csv", to_text([&](std::ostream& o) { write_aggregate_csv(o, y.counts); }));
    write_text_file(out_dir / "sizes.csv", to_text([&](std::ostream& o) { write_sizes_csv(o, y.sizes); }));
    write_text_file(out_dir / "truth.ini", to_text([&](std::ostream& o) { write_truth_ini(o, truth); }));
}

void cmd_fit(const RunConfig& cfg, const fs::path& out_dir) {
    const AggregateMatrix y = load_aggregate(cfg);
    std::optional<TruthSpec> truth;
    if (cfg.truth_path) {
        truth = read_with(*cfg.truth_path, read_truth_ini);
        if (truth->sizes != y.sizes || truth->params.dimension() != cfg.q) {
            throw InputError("truth file does not match the data's group sizes or q");
        }
    }
    ensure_directory(out_dir);
    log("fitting " + std::to_string(cfg.sampler.n_chains) + " chains");
    const FitResult result = fit(y, cfg.q, cfg.sampler, cfg.prior);

    std::string chains_table = "chain,seed,median_log_density,acceptance_rate,status\n";
    std::size_t next = 0;
    for (std::size_t k = 0; k < cfg.sampler.n_chains; ++k) {
        if (next < result.chains.size() && result.chains[next].chain_id == k) {
            const PosteriorChain& c = result.chains[next++];
            chains_table += csv_row({std::to_string(k), std::to_string(c.seed), format_double(c.median_log_density()),
                                     format_double(c.acceptance_rate), "ok"});
            write_text_file(out_dir / ("chain_" + std::to_string(k) + ".csv"),
                            to_text([&](std::ostream& o) { write_draws(o, chain_records(c)); }));
        } else {
            chains_table += csv_row({std::to_string(k), std::to_string(derive_seed(cfg.sampler.seed, k)), "", "",
                                     "initialisation failed"});
        }
    }
    write_text_file(out_dir / "chains.csv", chains_table);

    const PosteriorChain& best = result.best_chain();
    write_text_file(out_dir / "selection.csv",
                    "selected_chain,median_log_density,gap\n" +
                        csv_row({std::to_string(best.chain_id), format_double(best.median_log_density()),
                                 result.gap ? format_double(*result.gap) : ""}));

    const AlignedPosterior aligned = align_chain(best);
    write_text_file(out_dir / "aligned_draws.csv",
                    to_text([&](std::ostream& o) { write_draws(o, aligned_records(aligned, best.chain_id)); }));
    const PosteriorSummary summary = summarize(aligned);
    write_text_file(out_dir / "summary.csv", to_text([&](std::ostream& o) { write_summary_csv(o, summary); }));

    std::string groups = "group,size";
    for (int s = 0; s < cfg.q; ++s) {
        groups += ",map_centre_" + std::to_string(s);
    }
    groups += ",radius_2sigma\n";
    for (std::size_t a = 0; a < y.groups(); ++a) {
        const auto ai = static_cast<Eigen::Index>(a);
        std::vector<std::string> row{std::to_string(a), std::to_string(y.sizes[a])};
        for (int s = 0; s < cfg.q; ++s) {
            row.push_back(format_double(summary.map_centres(ai, s)));
        }
        row.push_back(format_double(summary.radius_2sigma[ai]));
        groups += csv_row(row);
    }
    write_text_file(out_dir / "groups.csv", groups);

    std::ostringstream info;
    info << "[fit]\n"
         << "q = " << cfg.q << '\n'
         << "groups = " << y.groups() << '\n'
         << "directed = " << (cfg.kind.directed ? "true" : "false") << '\n'
         << "weighted = " << (cfg.kind.weighted ? "true" : "false") << '\n'
         << "edge_density = " << format_double(empirical_edge_density(y)) << '\n'
         << "selected_chain = " << best.chain_id << '\n'
         << "chains = " << cfg.sampler.n_chains << '\n'
         << "warmup = " << cfg.sampler.n_warmup << '\n'
         << "samples = " << cfg.sampler.n_samples << '\n'
         << "seed = " << cfg.sampler.seed << '\n'
         << "degenerate_alignments = " << aligned.degenerate_alignments << '\n';
    write_text_file(out_dir / "fit.ini", info.str());
    if (truth) {
        write_text_file(out_dir / "truth.ini", to_text([&](std::ostream& o) { write_truth_ini(o, *truth); }));
    } else {
        std::error_code ec;
        fs::remove(out_dir / "truth.ini", ec);
    }
}

ValidationReport cmd_validate(const ValidationOptions& opts, const fs::path& out_dir) {
    ensure_directory(out_dir);
    log("running validation checks");
    const ValidationReport report = run_validation(opts);
    write_text_file(out_dir / "validation_report.txt", report.to_text());
    return report;
}

void cmd_export_plots(const fs::path& fit_dir, const fs::path& out_dir) {
    for (const char* name : {"fit.ini", "aligned_draws.csv"}) {
        if (!fs::exists(fit_dir / name)) {
            throw IoError("fit directory '" + fit_dir.string() + "' is missing " + name);
        }
    }
    const FitInfo info = read_fit_info(fit_dir);
    const auto draws =
        read_with(fit_dir / "aligned_draws.csv", [&](std::istream& in) { return read_draws(in, info.groups, info.q); });
    if (draws.empty()) {
        throw InputError("aligned_draws.csv has no draws");
    }
    std::optional<TruthSpec> truth;
    if (fs::exists(fit_dir / "truth.ini")) {
        truth = read_with(fit_dir / "truth.ini", read_truth_ini);
    }
    ensure_directory(out_dir);

    std::string centres = "draw";
    for (std::size_t a = 0; a < info.groups; ++a) {
        for (int s = 0; s < info.q; ++s) {
            centres += ",mu_" + std::to_string(a) + "_" + std::to_string(s);
        }
    }
    centres += '\n';
    std::string theta_tau = "draw,theta,tau\n";
    std::vector<double> thetas;
    for (const auto& d : draws) {
        centres += std::to_string(d.draw);
        for (Eigen::Index a = 0; a < d.params.mu.rows(); ++a) {
            for (Eigen::Index s = 0; s < d.params.mu.cols(); ++s) {
                centres += "," + format_double(d.params.mu(a, s));
            }
        }
        centres += '\n';
        theta_tau += csv_row({std::to_string(d.draw), format_double(d.params.theta), format_double(d.params.tau)});
        thetas.push_back(d.params.theta);
    }
    write_text_file(out_dir / "centres.csv", centres);
    write_text_file(out_dir / "theta_tau.csv", theta_tau);

    const std::size_t bins = 30;
    const double lo = *std::min_element(thetas.begin(), thetas.end());
    const double hi = *std::max_element(thetas.begin(), thetas.end());
    const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
    std::vector<std::size_t> counts(bins, 0);
    for (const double t : thetas) {
        const auto k = std::min(bins - 1, static_cast<std::size_t>((t - lo) / width));
        ++counts[k];
    }
    std::string hist = "bin_lower,bin_upper,count,density\n";
    for (std::size_t k = 0; k < bins; ++k) {
        const double a = lo + width * static_cast<double>(k);
        hist += csv_row({format_double(a), format_double(a + width), std::to_string(counts[k]),
                         format_double(static_cast<double>(counts[k]) / (static_cast<double>(thetas.size()) * width))});
    }
    write_text_file(out_dir / "theta_hist.csv", hist);

    std::string sigma = truth ? "group,mean,median,lower,upper,truth\n" : "group,mean,median,lower,upper\n";
    for (std::size_t a = 0; a < info.groups; ++a) {
        std::vector<double> values;
        for (const auto& d : draws) {
            values.push_back(d.params.sigma[static_cast<Eigen::Index>(a)]);
        }
        const ParameterSummary s = summarize_values("sigma", values);
        std::vector<std::string> row{std::to_string(a), format_double(s.mean), format_double(s.median),
                                     format_double(s.lower), format_double(s.upper)};
        if (truth) {
            row.push_back(format_double(truth->params.sigma[static_cast<Eigen::Index>(a)]));
        }
        sigma += csv_row(row);
    }
    write_text_file(out_dir / "sigma.csv", sigma);

    std::string contour = "theta,tau\n";
    if (info.edge_density > 0.0 && info.edge_density < 1.0) {
        std::vector<double> grid;
        const std::size_t points = 101;
        for (std::size_t k = 0; k < points; ++k) {
            grid.push_back(info.edge_density +
                           (1.0 - info.edge_density) * static_cast<double>(k) / static_cast<double>(points - 1));
        }
        for (const auto& [theta, tau] : degeneracy_contour(info.edge_density, info.q, grid)) {
            contour += csv_row({format_double(theta), format_double(tau)});
        }
    }
    write_text_file(out_dir / "contour.csv", contour);

    std::ostringstream meta;
    meta << "[plots]\n"
         << "q = " << info.q << '\n'
         << "edge_density = " << format_double(info.edge_density) << '\n'
         << "draws = " << draws.size() << '\n';
    if (truth) {
        meta << "theta_truth = " << format_double(truth->params.theta) << '\n';
    }
    write_text_file(out_dir / "plots.ini", meta.str());
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Latent space cluster models fitted to aggregate network data"};
    app.require_subcommand(1);
    app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");

    std::string config_file;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> chains;
    std::string aggregate_file;
    std::string sizes_file;
    std::string fit_dir;
    bool inject_fault = false;

    auto* simulate = app.add_subcommand("simulate", "Simulate a network from [truth] and aggregate it");
    simulate->add_option("--config", config_file, "Run configuration (INI)")->required();
    simulate->add_option("--out", out_dir, "Output directory");
    simulate->add_option("--seed", seed, "Simulation seed (overrides the configuration)");

    auto* fit_cmd = app.add_subcommand("fit", "Fit the model to an aggregate matrix");
    fit_cmd->add_option("--config", config_file, "Run configuration (INI)")->required();
    fit_cmd->add_option("--out", out_dir, "Output directory");
    fit_cmd->add_option("--seed", seed, "Sampler seed (overrides the configuration)");
    fit_cmd->add_option("--chains", chains, "Number of restarts (overrides the configuration)");
    fit_cmd->add_option("--aggregate", aggregate_file, "Aggregate matrix CSV (overrides [data] aggregate)");
    fit_cmd->add_option("--sizes", sizes_file, "Group sizes CSV (overrides [data] sizes)");

    auto* validate = app.add_subcommand("validate", "Check analytic moments against simulation oracles");
    validate->add_option("--config", config_file, "Optional configuration with a [validate] section");
    validate->add_option("--out", out_dir, "Output directory")->required();
    validate->add_option("--seed", seed, "Validation seed");
    validate->add_flag("--inject-coefficient-fault", inject_fault)->group("");

    auto* plots = app.add_subcommand("export-plots", "Write plot-ready CSV files from a fit directory");
    plots->add_option("--fit", fit_dir, "Directory written by 'fit'")->required();
    plots->add_option("--out", out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigFailure;
    }

    try {
        RunConfig cfg;
        if (!config_file.empty()) {
            cfg = load_run_config(config_file);
        }
        auto output = [&]() -> fs::path {
            if (!out_dir.empty()) {
                return out_dir;
            }
            if (cfg.output_dir) {
                return *cfg.output_dir;
            }
            throw ConfigError("no output directory: pass --out or set [output] directory");
        };
        if (simulate->parsed()) {
            if (seed) {
                cfg.simulation_seed = *seed;
            }
            cmd_simulate(cfg, output());
        } else if (fit_cmd->parsed()) {
            if (seed) {
                cfg.sampler.seed = *seed;
            }
            if (chains) {
                if (*chains < 1) {
                    throw ConfigError("--chains must be at least 1");
                }
                cfg.sampler.n_chains = *chains;
            }
            for (auto [flag, target] : {std::pair{&aggregate_file, &cfg.aggregate_path}, {&sizes_file, &cfg.sizes_path}}) {
                if (!flag->empty()) {
                    if (!fs::exists(*flag)) {
                        throw IoError("input file '" + *flag + "' does not exist");
                    }
                    *target = fs::path(*flag);
                }
            }
            cmd_fit(cfg, output());
        } else if (validate->parsed()) {
            ValidationOptions opts = cfg.validation;
            if (seed) {
                opts.seed = *seed;
            }
            if (inject_fault) {
                opts.coefficient_hook = [](TermCoefficients t) {
                    t.counts[static_cast<std::size_t>(TermClass::shared_row)] += 1;
                    return t;
                };
            }
            const ValidationReport report = cmd_validate(opts, output());
            std::cout << report.to_text();
            if (!report.passed()) {
                return kValidationFailure;
            }
        } else if (plots->parsed()) {
            cmd_export_plots(fit_dir, out_dir);
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const InputError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kValidationFailure;
    } catch (const FitError& e) {
        std::cerr << "fit failed: " << e.what() << '\n';
        return kValidationFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidationFailure;
    }
    return kSuccess;
}

}  // namespace aggnet::cli

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "netlineq/harness.hpp"
#include "netlineq/random.hpp"

namespace netlineq {

namespace {

int run_gen_problem(const std::string& out, Index nodes, Index dim, Index rank,
                    Index rows_min, Index rows_max, std::vector<Index> sizes,
                    double residual, std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, 0, StreamLabel::Problem));
    if (sizes.empty()) sizes = random_partition_sizes(nodes, rows_min, rows_max, rng);
    SyntheticSpec spec{sizes, dim, rank, residual};
    auto [h, z] = make_synthetic(spec, rng);
    save_problem(out, h, z);
    const SolutionInfo info = classify_solutions(h, z);
    std::cout << "wrote " << out << ": " << h.rows() << "x" << h.cols() << ", rank "
              << info.rank << ", " << to_string(info.kind) << "\n";
    return 0;
}

int run_gen_graphs(const std::string& out_dir, Index nodes, Index count,
                   double base_edge_prob, double keep_prob, std::uint64_t seed) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::mt19937_64 rng(derive_seed(seed, 0, StreamLabel::Space));
    const auto space = random_graph_space(nodes, count, base_edge_prob, keep_prob, rng);
    Index disconnected = 0;
    for (std::size_t k = 0; k < space.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "g%03zu.graph", k);
        save_graph((fs::path(out_dir) / name).string(), space[k]);
        if (!is_connected(space[k])) ++disconnected;
    }
    std::cout << "wrote " << space.size() << " graphs to " << out_dir << " ("
              << disconnected << " disconnected, union connected)\n";
    return 0;
}

int run_run(const std::string& config_path, const std::string& output,
            const std::string& plot_output) {
    ExperimentConfig cfg = load_config(config_path);
    if (!output.empty()) cfg.output = output;
    if (!plot_output.empty()) cfg.plot_output = plot_output;
    const AggregateResult res = run_experiment(cfg);
    std::cout << "runs " << res.runs << ", iterations " << res.iterations << "\n";
    std::cout << "e1(0) = " << res.e1_mean.front() << ", e1(T) = " << res.e1_mean.back()
              << ", e2(T) = " << res.e2_mean.back() << "\n";
    if (res.exp_rate) std::cout << "fitted exponential rate = " << *res.exp_rate << "\n";
    if (res.power_rate) std::cout << "fitted power exponent = " << *res.power_rate << "\n";
    if (res.bounds)
        std::cout << "theta1 = " << res.bounds->theta1 << ", theta2 = " << res.bounds->theta2
                  << "\n";
    if (!cfg.output.empty()) std::cout << "wrote " << cfg.output << "\n";
    if (!cfg.plot_output.empty()) std::cout << "wrote " << cfg.plot_output << "\n";
    return 0;
}

int run_bounds(const std::string& config_path) {
    const ExperimentConfig cfg = load_config(config_path);
    const ExperimentSetup setup = build_setup(cfg);
    const RateBounds bounds =
        rate_bounds_iid(setup.problem, setup.process, setup.rule, setup.mixing_h);
    std::printf("theta1 = %.12g\ntheta2 = %.12g\nlifted_dim = %lld\n", bounds.theta1,
                bounds.theta2, static_cast<long long>(bounds.lifted_dim));
    return 0;
}

std::vector<double> read_csv_column(const std::string& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw io_error("fit: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw parse_error(path + ":1: empty file");
    std::vector<std::string> header;
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
    std::size_t col = header.size();
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == column) col = k;
    if (col == header.size())
        throw parse_error(path + ": no column named \"" + column + "\"");
    std::vector<double> values;
    Index lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::size_t k = 0;
        double value = 0.0;
        while (std::getline(ls, cell, ',')) {
            if (k == col) {
                try {
                    value = std::stod(cell);
                } catch (const std::exception&) {
                    throw parse_error(path + ":" + std::to_string(lineno) +
                                      ": bad number \"" + cell + "\"");
                }
            }
            ++k;
        }
        if (k <= col)
            throw parse_error(path + ":" + std::to_string(lineno) + ": short row");
        values.push_back(value);
    }
    return values;
}

int run_fit(const std::string& csv, const std::string& column, Index lo, Index hi,
            bool power) {
    const std::vector<double> series = read_csv_column(csv, column);
    Index wlo = lo, whi = hi;
    if (wlo < 0 || whi < 0) {
        const auto [dlo, dhi] = default_fit_window(static_cast<Index>(series.size()));
        if (wlo < 0) wlo = dlo;
        if (whi < 0) whi = dhi;
    }
    if (power)
        std::printf("power exponent = %.12g\n", fit_power_rate(series, wlo, whi));
    else
        std::printf("exponential rate = %.12g\n", fit_exponential_rate(series, wlo, whi));
    return 0;
}

} // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Distributed solver toolkit for network linear equations z = Hy "
                 "over randomly switching graphs"};
    app.require_subcommand(1);

    // gen-problem
    auto* gen_problem = app.add_subcommand("gen-problem", "write a synthetic problem file");
    std::string gp_out;
    Index gp_nodes = 20, gp_dim = 10, gp_rank = 10, gp_rows_min = 1, gp_rows_max = 4;
    std::vector<Index> gp_sizes;
    double gp_residual = 0.0;
    std::uint64_t gp_seed = 1;
    gen_problem->add_option("--out", gp_out, "output problem file")->required();
    gen_problem->add_option("--nodes", gp_nodes, "node count");
    gen_problem->add_option("--m,--dim", gp_dim, "unknown dimension m");
    gen_problem->add_option("--rank", gp_rank, "prescribed rank of H");
    gen_problem->add_option("--rows-min", gp_rows_min, "per-node row minimum");
    gen_problem->add_option("--rows-max", gp_rows_max, "per-node row maximum");
    gen_problem->add_option("--sizes", gp_sizes, "explicit per-node row counts");
    gen_problem->add_option("--residual", gp_residual, "norm of the out-of-range residual");
    gen_problem->add_option("--seed", gp_seed, "master seed");

    // gen-graphs
    auto* gen_graphs = app.add_subcommand("gen-graphs", "materialize a graph sample space");
    std::string gg_out;
    Index gg_nodes = 20, gg_count = 30;
    double gg_base = 0.35, gg_keep = 0.3;
    std::uint64_t gg_seed = 1;
    gen_graphs->add_option("--out-dir", gg_out, "output directory")->required();
    gen_graphs->add_option("--nodes", gg_nodes, "node count");
    gen_graphs->add_option("--count", gg_count, "number of graphs");
    gen_graphs->add_option("--base-edge-prob", gg_base, "base graph edge probability");
    gen_graphs->add_option("--keep-prob", gg_keep, "per-sample edge keep probability");
    gen_graphs->add_option("--seed", gg_seed, "master seed");

    // run
    auto* run = app.add_subcommand("run", "run a Monte Carlo experiment from a config file");
    std::string run_config, run_output, run_plot;
    run->add_option("--config", run_config, "experiment config file")->required();
    run->add_option("--output", run_output, "override the CSV output path");
    run->add_option("--plot-output", run_plot, "override the plot-data output path");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "print the theta1/theta2 rate bounds");
    std::string bounds_config;
    bounds->add_option("--config", bounds_config, "experiment config file")->required();

    // fit
    auto* fit = app.add_subcommand("fit", "fit a rate to a CSV column");
    std::string fit_csv, fit_column = "e1";
    Index fit_lo = -1, fit_hi = -1;
    bool fit_power = false;
    fit->add_option("--csv", fit_csv, "input CSV")->required();
    fit->add_option("--column", fit_column, "column to fit (default e1)");
    fit->add_option("--lo", fit_lo, "window start (default: middle 60%)");
    fit->add_option("--hi", fit_hi, "window end");
    fit->add_flag("--power", fit_power, "fit a power law instead of an exponential");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (gen_problem->parsed())
            return run_gen_problem(gp_out, gp_nodes, gp_dim, gp_rank, gp_rows_min, gp_rows_max,
                                   gp_sizes, gp_residual, gp_seed);
        if (gen_graphs->parsed())
            return run_gen_graphs(gg_out, gg_nodes, gg_count, gg_base, gg_keep, gg_seed);
        if (run->parsed()) return run_run(run_config, run_output, run_plot);
        if (bounds->parsed()) return run_bounds(bounds_config);
        if (fit->parsed()) return run_fit(fit_csv, fit_column, fit_lo, fit_hi, fit_power);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const parameter_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

} // namespace netlineq

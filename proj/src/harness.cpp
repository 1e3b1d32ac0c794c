#include "netlineq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "netlineq/random.hpp"

namespace netlineq {

SolverKind solver_kind_from_string(const std::string& name) {
    if (name == "projection") return SolverKind::Projection;
    if (name == "randomized-projection") return SolverKind::RandomizedProjection;
    if (name == "gd") return SolverKind::GradientDescent;
    if (name == "randomized-gd") return SolverKind::RandomizedGd;
    throw config_error("unknown solver: " + name);
}

const char* to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::Projection: return "projection";
        case SolverKind::RandomizedProjection: return "randomized-projection";
        case SolverKind::GradientDescent: return "gd";
        case SolverKind::RandomizedGd: return "randomized-gd";
    }
    return "unknown";
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

Index to_index(const std::string& key, const std::string& value) {
    try {
        return static_cast<Index>(std::stoll(value));
    } catch (const std::exception&) {
        throw config_error("config key " + key + ": expected an integer, got \"" + value + "\"");
    }
}

double to_double(const std::string& key, const std::string& value) {
    try {
        return std::stod(value);
    } catch (const std::exception&) {
        throw config_error("config key " + key + ": expected a number, got \"" + value + "\"");
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw config_error("config key " + key + ": expected true or false, got \"" + value + "\"");
}

std::vector<Index> to_index_list(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    std::vector<Index> out;
    long long v = 0;
    while (in >> v) out.push_back(static_cast<Index>(v));
    if (!in.eof()) throw config_error("config key " + key + ": expected a list of integers");
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    Index lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) +
                               ": expected \"key = value\"");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw config_error("config line " + std::to_string(lineno) + ": empty key or value");

        if (key == "problem_file") cfg.problem_file = value;
        else if (key == "libsvm_file") cfg.libsvm_file = value;
        else if (key == "nodes") cfg.nodes = to_index(key, value);
        else if (key == "dim") cfg.dim = to_index(key, value);
        else if (key == "rank") cfg.rank = to_index(key, value);
        else if (key == "rows_min") cfg.rows_min = to_index(key, value);
        else if (key == "rows_max") cfg.rows_max = to_index(key, value);
        else if (key == "row_sizes") cfg.row_sizes = to_index_list(key, value);
        else if (key == "residual") cfg.residual = to_double(key, value);
        else if (key == "graph") cfg.graph_kind = value;
        else if (key == "space_dir") cfg.space_dir = value;
        else if (key == "space_size") cfg.space_size = to_index(key, value);
        else if (key == "base_edge_prob") cfg.base_edge_prob = to_double(key, value);
        else if (key == "keep_prob") cfg.keep_prob = to_double(key, value);
        else if (key == "bernoulli_q") cfg.bernoulli_q = to_double(key, value);
        else if (key == "temporal_state_dim") cfg.temporal_state_dim = to_index(key, value);
        else if (key == "weight_rule") cfg.weight_rule = value;
        else if (key == "mixing_h") cfg.mixing_h = to_double(key, value);
        else if (key == "solver") cfg.solver = value;
        else if (key == "h") cfg.h = to_double(key, value);
        else if (key == "schedule") cfg.schedule = value;
        else if (key == "delta1") cfg.delta1 = to_double(key, value);
        else if (key == "alpha_const") cfg.alpha_const = to_double(key, value);
        else if (key == "alpha_scale") cfg.alpha_scale = to_double(key, value);
        else if (key == "init") cfg.init = value;
        else if (key == "init_scale") cfg.init_scale = to_double(key, value);
        else if (key == "iterations") cfg.iterations = to_index(key, value);
        else if (key == "runs") cfg.runs = to_index(key, value);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
        else if (key == "output") cfg.output = value;
        else if (key == "plot_output") cfg.plot_output = value;
        else if (key == "bounds") cfg.bounds = to_bool(key, value);
        else throw config_error("config line " + std::to_string(lineno) +
                                ": unknown key \"" + key + "\"");
    }
    if (cfg.iterations < 0 || cfg.runs < 1)
        throw config_error("config: iterations must be >= 0 and runs >= 1");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    if (!cfg.problem_file.empty()) out << "problem_file = " << cfg.problem_file << '\n';
    if (!cfg.libsvm_file.empty()) out << "libsvm_file = " << cfg.libsvm_file << '\n';
    out << "nodes = " << cfg.nodes << '\n';
    out << "dim = " << cfg.dim << '\n';
    out << "rank = " << cfg.rank << '\n';
    out << "rows_min = " << cfg.rows_min << '\n';
    out << "rows_max = " << cfg.rows_max << '\n';
    if (!cfg.row_sizes.empty()) {
        out << "row_sizes =";
        for (Index s : cfg.row_sizes) out << ' ' << s;
        out << '\n';
    }
    out << "residual = " << fmt(cfg.residual) << '\n';
    out << "graph = " << cfg.graph_kind << '\n';
    if (!cfg.space_dir.empty()) out << "space_dir = " << cfg.space_dir << '\n';
    out << "space_size = " << cfg.space_size << '\n';
    out << "base_edge_prob = " << fmt(cfg.base_edge_prob) << '\n';
    out << "keep_prob = " << fmt(cfg.keep_prob) << '\n';
    out << "bernoulli_q = " << fmt(cfg.bernoulli_q) << '\n';
    out << "temporal_state_dim = " << cfg.temporal_state_dim << '\n';
    out << "weight_rule = " << cfg.weight_rule << '\n';
    out << "mixing_h = " << fmt(cfg.mixing_h) << '\n';
    out << "solver = " << cfg.solver << '\n';
    out << "h = " << fmt(cfg.h) << '\n';
    out << "schedule = " << cfg.schedule << '\n';
    out << "delta1 = " << fmt(cfg.delta1) << '\n';
    out << "alpha_const = " << fmt(cfg.alpha_const) << '\n';
    out << "alpha_scale = " << fmt(cfg.alpha_scale) << '\n';
    out << "init = " << cfg.init << '\n';
    out << "init_scale = " << fmt(cfg.init_scale) << '\n';
    out << "iterations = " << cfg.iterations << '\n';
    out << "runs = " << cfg.runs << '\n';
    out << "seed = " << cfg.seed << '\n';
    if (!cfg.output.empty()) out << "output = " << cfg.output << '\n';
    if (!cfg.plot_output.empty()) out << "plot_output = " << cfg.plot_output << '\n';
    out << "bounds = " << (cfg.bounds ? "true" : "false") << '\n';
    return out.str();
}

namespace {

std::vector<Graph> load_space_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<Graph> space;
    for (const auto& f : files) space.push_back(load_graph(f.string()));
    if (space.empty()) throw config_error("space_dir contains no graph files: " + dir);
    return space;
}

// Dense positive rows keep the chain irreducible and aperiodic.
Matrix random_transition_matrix(Index n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    Matrix t(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) t(i, j) = unif(rng);
        t.row(i) /= t.row(i).sum();
    }
    return t;
}

GraphProcess build_process(const ExperimentConfig& cfg, Index nodes) {
    std::mt19937_64 rng(derive_seed(cfg.seed, 0, StreamLabel::Space));
    const std::uint64_t proto_seed = derive_seed(cfg.seed, 0, StreamLabel::Graph);

    if (cfg.graph_kind == "fixed" || cfg.graph_kind == "iid-bernoulli") {
        Graph base = cfg.space_dir.empty()
                         ? random_connected_graph(nodes, cfg.base_edge_prob, rng)
                         : load_space_dir(cfg.space_dir).front();
        if (base.node_count() != nodes)
            throw config_error("graph base node count does not match the problem");
        if (cfg.graph_kind == "fixed") return GraphProcess::fixed(std::move(base));
        return GraphProcess::iid_bernoulli(std::move(base), cfg.bernoulli_q, proto_seed);
    }

    std::vector<Graph> space =
        cfg.space_dir.empty()
            ? random_graph_space(nodes, cfg.space_size, cfg.base_edge_prob, cfg.keep_prob, rng)
            : load_space_dir(cfg.space_dir);
    if (space.front().node_count() != nodes)
        throw config_error("graph space node count does not match the problem");

    if (cfg.graph_kind == "iid-uniform")
        return GraphProcess::iid_uniform(std::move(space), proto_seed);
    if (cfg.graph_kind == "markov") {
        Matrix transition = random_transition_matrix(static_cast<Index>(space.size()), rng);
        return GraphProcess::markov_stationary(std::move(space), std::move(transition),
                                               proto_seed);
    }
    if (cfg.graph_kind == "temporal") {
        const Index sdim = cfg.temporal_state_dim;
        if (sdim < 1) throw config_error("temporal_state_dim must be positive");
        Matrix g = gaussian_matrix(sdim, sdim, rng);
        Matrix a = (0.9 / spectral_radius(g)) * g;
        std::uniform_real_distribution<double> unif(1e-6, 1.0);
        Matrix c(static_cast<Index>(space.size()), sdim);
        for (Index i = 0; i < c.rows(); ++i)
            for (Index j = 0; j < c.cols(); ++j) c(i, j) = unif(rng);
        Vector v0 = gaussian_vector(sdim, rng);
        return GraphProcess::temporal(std::move(space), std::move(a), std::move(c),
                                      std::move(v0), proto_seed);
    }
    throw config_error("unknown graph kind: " + cfg.graph_kind);
}

StepSchedule build_schedule(const ExperimentConfig& cfg, double h_eff) {
    const double scale = cfg.alpha_scale > 0.0 ? cfg.alpha_scale : std::min(1.0, h_eff);
    if (cfg.schedule == "power") return make_power_schedule(cfg.delta1, scale);
    if (cfg.schedule == "harmonic") return make_harmonic_schedule(scale);
    if (cfg.schedule == "constant")
        return make_constant_schedule(cfg.alpha_const > 0.0 ? cfg.alpha_const : h_eff);
    throw config_error("unknown schedule: " + cfg.schedule);
}

struct TrajectoryStats {
    double e1, e2, max_node_sq;
};

TrajectoryStats sample_stats(const NetworkProblem& p, const Vector& x, const Vector& target) {
    const Index m = p.dim();
    const Index n = p.node_count();
    Eigen::Map<const Matrix> states(x.data(), m, n);
    const Vector mean = states.rowwise().mean();
    double e1 = 0.0, e2 = 0.0, worst = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double d = (states.col(i) - target).squaredNorm();
        e1 += d;
        e2 += (states.col(i) - mean).squaredNorm();
        worst = std::max(worst, d);
    }
    return {e1 / static_cast<double>(n), e2 / static_cast<double>(n), worst};
}

} // namespace

ExperimentSetup build_setup(const ExperimentConfig& cfg) {
    std::mt19937_64 problem_rng(derive_seed(cfg.seed, 0, StreamLabel::Problem));

    Matrix h;
    Vector z;
    std::vector<Index> sizes = cfg.row_sizes;
    if (!cfg.problem_file.empty() || !cfg.libsvm_file.empty()) {
        std::tie(h, z) = cfg.problem_file.empty() ? load_libsvm(cfg.libsvm_file)
                                                  : load_problem(cfg.problem_file);
        if (sizes.empty()) {
            // near-equal contiguous split across the configured node count
            if (cfg.nodes < 1 || cfg.nodes > h.rows())
                throw config_error("nodes must be in [1, rows] for file problems");
            const Index base = h.rows() / cfg.nodes;
            const Index extra = h.rows() % cfg.nodes;
            for (Index i = 0; i < cfg.nodes; ++i) sizes.push_back(base + (i < extra ? 1 : 0));
        }
    } else {
        if (sizes.empty())
            sizes = random_partition_sizes(cfg.nodes, cfg.rows_min, cfg.rows_max, problem_rng);
        SyntheticSpec spec{sizes, cfg.dim, cfg.rank, cfg.residual};
        std::tie(h, z) = make_synthetic(spec, problem_rng);
    }

    NetworkProblem problem(std::move(h), std::move(z), std::move(sizes));
    GraphProcess process = build_process(cfg, problem.node_count());

    const SolverKind solver = solver_kind_from_string(cfg.solver);
    const bool gradient_solver =
        solver == SolverKind::GradientDescent || solver == SolverKind::RandomizedGd;
    if (!gradient_solver && !problem.admits_exact_solutions())
        throw config_error("projection solvers require an equation with exact solutions");
    if (gradient_solver && problem.solutions().rank != problem.dim())
        throw config_error("gradient solvers require rank(H) = m for a unique target");

    const double h_eff =
        cfg.h > 0.0 ? cfg.h : 1.0 / (4.0 * static_cast<double>(problem.node_count()));

    std::mt19937_64 init_rng(derive_seed(cfg.seed, 0, StreamLabel::Init));
    Vector x0 = cfg.init_scale * gaussian_vector(problem.node_count() * problem.dim(), init_rng);
    if (cfg.init == "gaussian-local") {
        const Index m = problem.dim();
        for (Index i = 0; i < problem.node_count(); ++i) {
            const NodeBlock& block = problem.node(i);
            const Vector xi = x0.segment(i * m, m);
            x0.segment(i * m, m) = xi - block.h_pinv * (block.h * xi - block.z);
        }
    } else if (cfg.init != "gaussian") {
        throw config_error("unknown init mode: " + cfg.init);
    }

    Vector target = gradient_solver ? *problem.solutions().x_ls
                                    : projection_average(problem, x0);

    StepSchedule schedule = build_schedule(cfg, h_eff);
    WeightRule rule = weight_rule_from_string(cfg.weight_rule);
    std::optional<double> mixing_h;
    if (cfg.mixing_h > 0.0) mixing_h = cfg.mixing_h;

    return ExperimentSetup{std::move(problem), std::move(process), rule,      mixing_h,
                           solver,             h_eff,              schedule, std::move(x0),
                           std::move(target)};
}

TrajectoryRecord run_trajectory(const ExperimentSetup& setup, const ExperimentConfig& cfg,
                                std::uint64_t run_index) {
    GraphProcess process = setup.process.reseeded(derive_seed(cfg.seed, run_index,
                                                              StreamLabel::Graph));
    SolverState state = make_state(setup.problem, setup.x0,
                                   derive_seed(cfg.seed, run_index, StreamLabel::Rows));

    TrajectoryRecord record;
    record.seed = cfg.seed;
    record.solver = cfg.solver;
    record.e1.reserve(static_cast<std::size_t>(cfg.iterations + 1));
    record.e2.reserve(static_cast<std::size_t>(cfg.iterations + 1));
    record.node_sq_error.reserve(static_cast<std::size_t>(cfg.iterations + 1));

    auto record_point = [&] {
        const TrajectoryStats stats = sample_stats(setup.problem, state.x, setup.target);
        record.e1.push_back(stats.e1);
        record.e2.push_back(stats.e2);
        record.node_sq_error.push_back(stats.max_node_sq);
    };

    record_point();
    for (Index t = 0; t < cfg.iterations; ++t) {
        const Graph g = process.sample_next();
        switch (setup.solver) {
            case SolverKind::Projection:
                step_projection_consensus(setup.problem,
                                          weight_from_graph(g, setup.rule, setup.mixing_h),
                                          state);
                break;
            case SolverKind::RandomizedProjection:
                step_randomized_projection(setup.problem,
                                           weight_from_graph(g, setup.rule, setup.mixing_h),
                                           state);
                break;
            case SolverKind::GradientDescent:
                step_gradient_descent(setup.problem, g, setup.h_eff, setup.schedule, state);
                break;
            case SolverKind::RandomizedGd:
                step_randomized_gd(setup.problem, g, setup.h_eff, setup.schedule, state);
                break;
        }
        record_point();
    }
    return record;
}

namespace {

Index worker_count(Index runs) {
    Index workers = static_cast<Index>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("NETLINEQ_WORKERS")) {
        try {
            workers = static_cast<Index>(std::stoll(env));
        } catch (const std::exception&) {
            throw config_error("NETLINEQ_WORKERS must be an integer");
        }
    }
    return std::clamp<Index>(workers, 1, std::max<Index>(runs, 1));
}

} // namespace

AggregateResult run_experiment(const ExperimentConfig& cfg) {
    const ExperimentSetup setup = build_setup(cfg);

    std::vector<TrajectoryRecord> records(static_cast<std::size_t>(cfg.runs));
    const Index workers = worker_count(cfg.runs);
    if (workers == 1) {
        for (Index r = 0; r < cfg.runs; ++r)
            records[static_cast<std::size_t>(r)] =
                run_trajectory(setup, cfg, static_cast<std::uint64_t>(r));
    } else {
        std::atomic<Index> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto work = [&] {
            for (;;) {
                const Index r = next.fetch_add(1);
                if (r >= cfg.runs) return;
                try {
                    records[static_cast<std::size_t>(r)] =
                        run_trajectory(setup, cfg, static_cast<std::uint64_t>(r));
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (Index w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    AggregateResult res;
    res.iterations = cfg.iterations;
    res.runs = cfg.runs;
    res.initial_state = setup.x0;
    res.target = setup.target;
    const std::size_t points = static_cast<std::size_t>(cfg.iterations + 1);
    res.e1_mean.assign(points, 0.0);
    res.e2_mean.assign(points, 0.0);
    res.e1_stderr.assign(points, 0.0);
    res.e2_stderr.assign(points, 0.0);

    // sum in run-index order so parallelism cannot change the output bytes
    for (const TrajectoryRecord& rec : records) {
        for (std::size_t t = 0; t < points; ++t) {
            res.e1_mean[t] += rec.e1[t];
            res.e2_mean[t] += rec.e2[t];
        }
    }
    const double r = static_cast<double>(cfg.runs);
    for (std::size_t t = 0; t < points; ++t) {
        res.e1_mean[t] /= r;
        res.e2_mean[t] /= r;
    }
    if (cfg.runs > 1) {
        for (const TrajectoryRecord& rec : records) {
            for (std::size_t t = 0; t < points; ++t) {
                const double d1 = rec.e1[t] - res.e1_mean[t];
                const double d2 = rec.e2[t] - res.e2_mean[t];
                res.e1_stderr[t] += d1 * d1;
                res.e2_stderr[t] += d2 * d2;
            }
        }
        for (std::size_t t = 0; t < points; ++t) {
            res.e1_stderr[t] = std::sqrt(res.e1_stderr[t] / (r * (r - 1.0)));
            res.e2_stderr[t] = std::sqrt(res.e2_stderr[t] / (r * (r - 1.0)));
        }
    }
    res.records = std::move(records);

    if (cfg.iterations >= 4) {
        try {
            const auto [lo, hi] = default_fit_window(std::span<const double>(res.e1_mean));
            res.exp_rate = fit_exponential_rate(res.e1_mean, lo, hi);
            res.power_rate = fit_power_rate(res.e1_mean, lo, hi);
        } catch (const domain_error&) {
            // series reached exact zero inside the window
        } catch (const parameter_error&) {
            // series floored too early to leave a window
        }
    }

    if (cfg.bounds) {
        try {
            res.bounds = rate_bounds_iid(setup.problem, setup.process, setup.rule,
                                         setup.mixing_h);
        } catch (const unsupported_process_error&) {
            // bounds are only defined for i.i.d. processes; recorded as absent
        } catch (const size_error&) {
        }
    }

    if (!cfg.output.empty()) emit_csv(res, cfg.output);
    if (!cfg.plot_output.empty()) emit_plot_data(res, cfg.plot_output);
    return res;
}

namespace {

void write_table(const AggregateResult& res, const std::string& path, bool with_bounds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("emit: cannot open " + path);
    out << "t,e1,e1_stderr,e2,e2_stderr";
    if (with_bounds) out << ",r1,r2";
    out << '\n';
    const double e1_0 = res.e1_mean.empty() ? 0.0 : res.e1_mean.front();
    double r1 = e1_0, r2 = e1_0;
    for (std::size_t t = 0; t < res.e1_mean.size(); ++t) {
        out << t << ',' << fmt(res.e1_mean[t]) << ',' << fmt(res.e1_stderr[t]) << ','
            << fmt(res.e2_mean[t]) << ',' << fmt(res.e2_stderr[t]);
        if (with_bounds) {
            out << ',' << fmt(r1) << ',' << fmt(r2);
            r1 *= res.bounds->theta1;
            r2 *= res.bounds->theta2;
        }
        out << '\n';
    }
    if (!out) throw io_error("emit: write failed for " + path);
}

} // namespace

void emit_csv(const AggregateResult& res, const std::string& path) {
    write_table(res, path, false);
}

void emit_plot_data(const AggregateResult& res, const std::string& path) {
    write_table(res, path, res.bounds.has_value());
}

} // namespace netlineq

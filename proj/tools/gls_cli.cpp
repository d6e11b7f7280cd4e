// gls: solve, path, simulate and bench commands over CSV files.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>
#include <CLI11.hpp>
#include <json.hpp>
#include <gls/gls.hpp>

namespace {

using namespace gls;
using Clock = std::chrono::steady_clock;

enum ExitCode
{
    ok = 0,
    malformed = 1,
    mismatch = 2,
    refusal = 3,
};

struct Inputs
{
    std::string x;
    std::string y;
    std::string groups;
};

GroupedProblem load_problem(const Inputs& in)
{
    auto xs = io::open_input(in.x);
    auto ys = io::open_input(in.y);
    auto gs = io::open_input(in.groups);
    Matrix x = io::read_matrix(xs);
    Vector y = io::read_vector(ys);
    GroupPartition groups = io::read_groups(gs);
    return GroupedProblem(std::move(y), std::move(x), std::move(groups));
}

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    for (auto field : io::split(text)) out.push_back(io::parse_double(field, 1));
    return out;
}

/// One solve of any algorithm, reduced to what the commands report.
struct Run
{
    Coefficients beta;
    std::size_t sweeps = 0;
    bool converged = false;
    double seconds = 0.0;
};

struct RunOptions
{
    std::string algo = "sls";
    double tol = 1e-8;
    std::size_t max_sweeps = 100000;
};

double fista_tolerance(const GroupedProblem& problem, double tol)
{
    return tol * (1.0 + (problem.design().transpose() * problem.y()).cwiseAbs().maxCoeff());
}

Run run_once(const GroupedProblem& problem, const PenaltySpec& penalty, const RunOptions& opts,
             const std::optional<Coefficients>& initial, SpectralCache& spectra)
{
    const auto start = Clock::now();
    Run out{Coefficients::zeros(problem)};
    if (opts.algo == "fista") {
        oracle::OracleOptions o;
        o.tol = fista_tolerance(problem, opts.tol);
        o.max_iters = opts.max_sweeps;
        o.initial = initial;
        auto res = oracle::fista_solve(problem, penalty, o);
        out.beta = std::move(res.beta);
        out.sweeps = res.iterations;
        out.converged = res.converged;
    } else {
        SolveOptions o;
        o.tol = opts.tol;
        o.max_sweeps = opts.max_sweeps;
        o.initial = initial;
        auto res = opts.algo == "ssls" ? solve_sgl(problem, penalty, o, spectra) : solve(problem, penalty, o, spectra);
        out.beta = std::move(res.beta);
        out.sweeps = res.trace.sweeps;
        out.converged = res.trace.converged;
    }
    out.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return out;
}

/// Warm-started path. SSLS uses lambda2 = l1_ratio * lambda on each rung.
std::vector<Run> run_path(const GroupedProblem& problem, const std::vector<double>& lambdas, const RunOptions& opts,
                          double l1_ratio)
{
    require_decreasing_ladder(lambdas);
    SpectralCache spectra(problem);
    std::vector<Run> out;
    std::optional<Coefficients> warm;
    for (double lambda : lambdas) {
        const auto penalty = opts.algo == "ssls" ? PenaltySpec::sparse_group_lasso(lambda, l1_ratio * lambda)
                                                 : PenaltySpec::group_lasso(lambda);
        out.push_back(run_once(problem, penalty, opts, warm, spectra));
        warm = out.back().beta;
    }
    return out;
}

// solve

struct SolveArgs
{
    Inputs in;
    std::optional<double> lambda;
    std::optional<double> lambda1;
    std::optional<double> lambda2;
    RunOptions run;
    std::uint64_t seed = 0;
    std::string out = "coefficients.csv";
    bool certify = false;
    std::string cert_out = "certificate.json";
};

PenaltySpec penalty_from(const SolveArgs& args)
{
    if (args.lambda && !args.lambda1 && !args.lambda2) return PenaltySpec::group_lasso(*args.lambda);
    if (!args.lambda && args.lambda1 && args.lambda2) return PenaltySpec::sparse_group_lasso(*args.lambda1, *args.lambda2);
    throw InvalidInput("give either --lambda or both --lambda1 and --lambda2");
}

int cmd_solve(const SolveArgs& args)
{
    const GroupedProblem problem = load_problem(args.in);
    const PenaltySpec penalty = penalty_from(args);
    if (args.run.algo == "ssls" && !penalty.is_sparse()) throw InvalidInput("--algo ssls needs --lambda1 and --lambda2");
    if (args.run.algo == "sls" && penalty.is_sparse()) throw InvalidInput("--algo sls needs --lambda");

    SpectralCache spectra(problem);
    const Run run = run_once(problem, penalty, args.run, std::nullopt, spectra);
    auto out = io::open_output(args.out);
    io::write_coefficients(out, run.beta);

    if (args.certify) {
        const Certifier certifier(problem, penalty);
        const auto cert = certifier.certify(run.beta);
        const auto bounds = certifier.bounds(run.beta, cert);
        nlohmann::json doc;
        doc["algorithm"] = args.run.algo;
        doc["w_norm"] = cert.w_norm;
        doc["bounds"] = {{"objective", bounds.bound_objective}, {"lse", bounds.bound_lse}};
        doc["objective"] = objective(problem, penalty, run.beta);
        doc["sweeps"] = run.sweeps;
        doc["converged"] = run.converged;
        doc["seconds"] = run.seconds;
        auto cert_out = io::open_output(args.cert_out);
        cert_out << doc.dump(2) << '\n';
    }
    if (!run.converged) std::cerr << "warning: stopped after " << run.sweeps << " sweeps without converging\n";
    return ok;
}

// path

struct PathArgs
{
    Inputs in;
    std::size_t ladder_length = 5;
    std::string lambdas;
    RunOptions run;
    std::string out = "path.csv";
    std::string trace_out = "path_trace.csv";
    std::string bounds_out = "path_bounds.csv";
};

int cmd_path(PathArgs args)
{
    const GroupedProblem problem = load_problem(args.in);
    if (args.run.algo == "ssls") throw InvalidInput("path solves the group lasso; use --algo sls or fista");
    const std::vector<double> lambdas =
        args.lambdas.empty() ? sim::penalty_ladder(problem, args.ladder_length).values : parse_list(args.lambdas);
    const std::vector<Run> runs = run_path(problem, lambdas, args.run, 0.0);

    auto out = io::open_output(args.out);
    out << "lambda,group,index,value\n";
    auto trace = io::open_output(args.trace_out);
    trace << "lambda,sweeps,converged,objective,seconds\n";
    std::vector<Coefficients> solutions;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const std::string lam = io::format_double(lambdas[i]);
        const Coefficients& beta = runs[i].beta;
        for (Index k = 0; k < beta.num_groups(); ++k) {
            const auto g = beta.group(k);
            for (Index j = 0; j < g.size(); ++j) {
                out << lam << ',' << k + 1 << ',' << j + 1 << ',' << io::format_double(g(j)) << '\n';
            }
        }
        trace << lam << ',' << runs[i].sweeps << ',' << (runs[i].converged ? "true" : "false") << ','
              << io::format_double(objective(problem, PenaltySpec::group_lasso(lambdas[i]), beta)) << ','
              << io::format_double(runs[i].seconds) << '\n';
        solutions.push_back(beta);
    }
    sim::PenaltyLadder ladder{lambdas, {}};
    ladder = sim::bounds_for_ladder(std::move(ladder), solutions);
    auto bounds = io::open_output(args.bounds_out);
    bounds << "lambda,M\n";
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        bounds << io::format_double(lambdas[i]) << ',' << io::format_double(ladder.bounds[i]) << '\n';
    }
    return ok;
}

// simulate

struct SimulateArgs
{
    sim::SimulationConfig config;
    std::string out_dir = ".";
};

int cmd_simulate(const SimulateArgs& args)
{
    const auto sample = sim::sample_problem(args.config);
    const std::filesystem::path dir(args.out_dir);
    std::filesystem::create_directories(dir);
    auto x = io::open_output((dir / "X.csv").string());
    io::write_matrix(x, sample.problem.design());
    auto y = io::open_output((dir / "y.csv").string());
    io::write_vector(y, sample.problem.y());
    auto groups = io::open_output((dir / "groups.csv").string());
    io::write_groups(groups, sample.problem.groups());
    auto truth = io::open_output((dir / "truth.csv").string());
    io::write_coefficients(truth, sample.truth);
    return ok;
}

// bench

struct Scenario
{
    double a;
    double b;
    Index k;
};

struct BenchArgs
{
    std::size_t trials = 100;
    std::string grid;
    std::string k_list = "10,20,40,80";
    std::string algos = "sls,fista";
    unsigned threads = 0;
    Index n = 50;
    Index group_size = 10;
    std::size_t ladder_length = 5;
    double l1_ratio = 0.1;
    std::uint64_t seed = 1;
    RunOptions run;
    std::string out = "bench.csv";
    std::string plot_out = "bench_plot.csv";
};

std::vector<Scenario> parse_grid(const BenchArgs& args)
{
    std::vector<Scenario> out;
    if (args.grid.empty()) {
        for (double k : parse_list(args.k_list)) {
            for (auto [a, b] : sim::default_correlation_grid()) out.push_back({a, b, static_cast<Index>(k)});
        }
        return out;
    }
    std::stringstream entries(args.grid);
    std::string entry;
    while (std::getline(entries, entry, ';')) {
        if (io::trim(entry).empty()) continue;
        std::map<std::string, double> fields;
        for (auto field : io::split(entry)) {
            const auto eq = field.find('=');
            if (eq == std::string_view::npos) throw io::MalformedInput("grid entry needs key=value: " + entry);
            fields[std::string(io::trim(field.substr(0, eq)))] = io::parse_double(field.substr(eq + 1), 1);
        }
        if (fields.size() != 3 || !fields.count("a") || !fields.count("b") || !fields.count("K")) {
            throw io::MalformedInput("grid entry must set exactly a, b and K: " + entry);
        }
        out.push_back({fields["a"], fields["b"], static_cast<Index>(fields["K"])});
    }
    if (out.empty()) throw io::MalformedInput("empty --grid");
    return out;
}

struct TrialResult
{
    std::vector<double> seconds;
    std::vector<double> sweeps;
    std::vector<bool> converged;
};

int cmd_bench(const BenchArgs& args)
{
    if (args.trials < 1) throw InvalidInput("--trials must be at least 1");
    const std::vector<Scenario> scenarios = parse_grid(args);
    std::vector<std::string> algos;
    for (auto field : io::split(args.algos)) {
        std::string name(io::trim(field));
        if (name != "sls" && name != "ssls" && name != "fista") throw InvalidInput("unknown algorithm " + name);
        algos.push_back(std::move(name));
    }
    for (const auto& s : scenarios) {
        sim::SimulationConfig c;
        c.a = s.a;
        c.b = s.b;
        c.num_groups = s.k;
        c.group_size = args.group_size;
        c.n = args.n;
        sim::validate(c);
    }

    // results[scenario][algorithm][trial]
    std::vector<std::vector<TrialResult>> results(scenarios.size(), std::vector<TrialResult>(algos.size()));
    for (auto& row : results) {
        for (auto& r : row) {
            r.seconds.resize(args.trials);
            r.sweeps.resize(args.trials);
            r.converged.resize(args.trials);
        }
    }
    const std::size_t jobs = scenarios.size() * args.trials;
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;

    auto worker = [&]() {
        while (true) {
            const std::size_t job = next++;
            if (job >= jobs) return;
            const std::size_t si = job / args.trials;
            const std::size_t trial = job % args.trials;
            try {
                sim::SimulationConfig c;
                c.a = scenarios[si].a;
                c.b = scenarios[si].b;
                c.num_groups = scenarios[si].k;
                c.group_size = args.group_size;
                c.n = args.n;
                c.seed = args.seed + 1000003ULL * si + trial;
                const auto sample = sim::sample_problem(c);
                const auto ladder = sim::penalty_ladder(sample.problem, args.ladder_length);
                for (std::size_t ai = 0; ai < algos.size(); ++ai) {
                    RunOptions opts = args.run;
                    opts.algo = algos[ai];
                    const auto start = Clock::now();
                    const auto runs = run_path(sample.problem, ladder.values, opts, args.l1_ratio);
                    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
                    TrialResult& r = results[si][ai];
                    r.seconds[trial] = seconds;
                    double sweeps = 0.0;
                    bool converged = true;
                    for (const auto& run : runs) {
                        sweeps += static_cast<double>(run.sweeps);
                        converged = converged && run.converged;
                    }
                    r.sweeps[trial] = sweeps;
                    r.converged[trial] = converged;
                }
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = jobs;
                return;
            }
        }
    };
    const unsigned threads =
        args.threads ? args.threads : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, jobs); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);

    auto out = io::open_output(args.out);
    out << "scenario,a,b,K,algorithm,trials,mean_seconds,std_seconds,mean_sweeps,converged_fraction\n";
    auto plot = io::open_output(args.plot_out);
    plot << "a,b,K,algorithm,mean_seconds,log10_mean_seconds\n";
    const double trials = static_cast<double>(args.trials);
    for (std::size_t si = 0; si < scenarios.size(); ++si) {
        const Scenario& s = scenarios[si];
        for (std::size_t ai = 0; ai < algos.size(); ++ai) {
            const TrialResult& r = results[si][ai];
            const double mean = std::accumulate(r.seconds.begin(), r.seconds.end(), 0.0) / trials;
            double var = 0.0;
            for (double t : r.seconds) var += (t - mean) * (t - mean);
            const double sd = args.trials > 1 ? std::sqrt(var / (trials - 1.0)) : 0.0;
            const double sweeps = std::accumulate(r.sweeps.begin(), r.sweeps.end(), 0.0) / trials;
            const double conv =
                static_cast<double>(std::count(r.converged.begin(), r.converged.end(), true)) / trials;
            out << si + 1 << ',' << s.a << ',' << s.b << ',' << s.k << ',' << algos[ai] << ',' << args.trials << ','
                << io::format_double(mean) << ',' << io::format_double(sd) << ',' << io::format_double(sweeps) << ','
                << io::format_double(conv) << '\n';
            plot << s.a << ',' << s.b << ',' << s.k << ',' << algos[ai] << ',' << io::format_double(mean) << ','
                 << io::format_double(std::log10(std::max(mean, 1e-12))) << '\n';
        }
    }
    std::cerr << "bench: " << jobs << " trials, rng " << sim::rng_algorithm << ", " << pool.size() << " threads\n";
    return ok;
}

void add_inputs(CLI::App* cmd, Inputs& in)
{
    cmd->add_option("--x", in.x, "design matrix CSV (rows are samples, no header)")->required();
    cmd->add_option("--y", in.y, "response CSV, one column")->required();
    cmd->add_option("--groups", in.groups, "one line of comma-separated group sizes")->required();
}

void add_run(CLI::App* cmd, RunOptions& run, const std::vector<std::string>& algos)
{
    cmd->add_option("--algo", run.algo, "solver")->check(CLI::IsMember(algos));
    cmd->add_option("--tol", run.tol, "stopping tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--max-sweeps", run.max_sweeps, "sweep (or FISTA iteration) cap")->check(CLI::PositiveNumber);
}

int dispatch(int argc, char** argv)
{
    CLI::App app{"Group lasso and sparse group lasso by exact block coordinate descent"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    auto* solve_cmd = app.add_subcommand("solve", "solve one problem from CSV files");
    add_inputs(solve_cmd, solve_args.in);
    solve_cmd->add_option("--lambda", solve_args.lambda, "group lasso penalty");
    solve_cmd->add_option("--lambda1", solve_args.lambda1, "sparse group lasso group penalty");
    solve_cmd->add_option("--lambda2", solve_args.lambda2, "sparse group lasso 1-norm penalty");
    add_run(solve_cmd, solve_args.run, {"sls", "ssls", "fista"});
    solve_cmd->add_option("--seed", solve_args.seed, "accepted for symmetry; unused");
    solve_cmd->add_option("--out", solve_args.out, "coefficient CSV");
    solve_cmd->add_flag("--certify", solve_args.certify, "write the optimality certificate");
    solve_cmd->add_option("--cert-out", solve_args.cert_out, "certificate JSON");

    PathArgs path_args;
    auto* path_cmd = app.add_subcommand("path", "warm-started group lasso path");
    add_inputs(path_cmd, path_args.in);
    auto* length = path_cmd->add_option("--ladder-length", path_args.ladder_length, "rungs lambda_max 2^-i");
    path_cmd->add_option("--lambdas", path_args.lambdas, "explicit decreasing list")->excludes(length);
    add_run(path_cmd, path_args.run, {"sls", "fista"});
    path_cmd->add_option("--out", path_args.out, "long-format coefficient CSV");
    path_cmd->add_option("--trace-out", path_args.trace_out, "per-lambda trace CSV");
    path_cmd->add_option("--bounds-out", path_args.bounds_out, "lambda to M table");

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "sample a problem from the correlated design");
    sim_cmd->add_option("--n", sim_args.config.n, "samples");
    sim_cmd->add_option("--K", sim_args.config.num_groups, "groups");
    sim_cmd->add_option("--group-size", sim_args.config.group_size, "covariates per group");
    sim_cmd->add_option("--a", sim_args.config.a, "within-group correlation");
    sim_cmd->add_option("--b", sim_args.config.b, "between-group similarity");
    sim_cmd->add_option("--noise-factor", sim_args.config.noise_scale_factor, "noise variance factor");
    sim_cmd->add_option("--seed", sim_args.config.seed, "random seed");
    sim_cmd->add_option("--out-dir", sim_args.out_dir, "output directory");

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "time warm-started paths on simulated data");
    bench_cmd->add_option("--trials", bench_args.trials, "trials per scenario");
    bench_cmd->add_option("--grid", bench_args.grid, "scenarios as \"a=..,b=..,K=..;...\"");
    bench_cmd->add_option("--K-list", bench_args.k_list, "K values crossed with the nine (a, b) pairs");
    bench_cmd->add_option("--algos", bench_args.algos, "comma-separated subset of sls,ssls,fista");
    bench_cmd->add_option("--threads", bench_args.threads, "worker threads (0: hardware concurrency)");
    bench_cmd->add_option("--n", bench_args.n, "samples");
    bench_cmd->add_option("--group-size", bench_args.group_size, "covariates per group");
    bench_cmd->add_option("--ladder-length", bench_args.ladder_length, "penalties per path");
    bench_cmd->add_option("--l1-ratio", bench_args.l1_ratio, "ssls only: lambda2 / lambda1");
    bench_cmd->add_option("--seed", bench_args.seed, "base seed");
    bench_cmd->add_option("--tol", bench_args.run.tol, "stopping tolerance")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--max-sweeps", bench_args.run.max_sweeps, "sweep cap")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--out", bench_args.out, "report CSV");
    bench_cmd->add_option("--plot-out", bench_args.plot_out, "plot-data CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return malformed;
    }

    if (*solve_cmd) return cmd_solve(solve_args);
    if (*path_cmd) return cmd_path(path_args);
    if (*sim_cmd) return cmd_simulate(sim_args);
    return cmd_bench(bench_args);
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return dispatch(argc, argv);
    } catch (const DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return mismatch;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return malformed;
    } catch (const SolverRefusal& e) {
        std::cerr << "error: " << e.what() << '\n';
        return refusal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return malformed;
    }
}

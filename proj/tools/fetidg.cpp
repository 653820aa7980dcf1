// Experiment driver: runs presets or custom configurations and appends CSV rows.
#include "fetidg/error.hpp"
#include "fetidg/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitNotConverged = 2;
constexpr int kExitConfig = 3;
constexpr int kExitOracle = 1;

// Tolerances for the optional oracle cross-check.
constexpr double kSubassemblyTol = 1e-12;
constexpr double kSolutionFactor = 10.0;  // allowed error relative to the PCG tolerance

int run(const fetidg::ExperimentConfig& base, const std::string& sweep, const std::string& dump_dir, bool quiet)
{
    std::vector<fetidg::ExperimentConfig> configs;
    if (sweep.empty()) {
        configs.push_back(base);
    } else {
        const auto eq = sweep.find('=');
        if (eq == std::string::npos)
            throw fetidg::ConfigError("--sweep expects field=v1,v2,...");
        const std::string key = sweep.substr(0, eq);
        std::stringstream ss(sweep.substr(eq + 1));
        // Mesh lists contain commas themselves, so sweeping n accepts only uniform sizes.
        for (std::string v; std::getline(ss, v, ',');) {
            auto c = base;
            fetidg::set_config_field(c, key, v);
            configs.push_back(c);
        }
        if (configs.empty())
            throw fetidg::ConfigError("--sweep has no values");
    }
    for (const auto& c : configs)
        c.validate();

    std::ofstream file;
    if (!base.out.empty()) {
        const bool fresh = !std::filesystem::exists(base.out) || std::filesystem::file_size(base.out) == 0;
        file.open(base.out, std::ios::app);
        if (!file)
            throw fetidg::ConfigError("cannot open output file " + base.out);
        if (fresh)
            file << fetidg::kCsvHeader << '\n';
    }
    std::cout << fetidg::kCsvHeader << '\n';

    int status = 0;
    std::vector<double> xs, ys;
    for (const auto& c : configs) {
        const auto res = fetidg::run_experiment(c);
        fetidg::write_csv_row(std::cout, res.row);
        if (file)
            fetidg::write_csv_row(file, res.row);
        xs.push_back(res.row.H_over_h);
        ys.push_back(res.row.cond_estimate);

        if (!quiet && !res.probes.passed)
            std::cerr << "warning: operator probes failed (asymmetry " << res.probes.max_asymmetry
                      << ", min Rayleigh quotient " << res.probes.min_rayleigh << ")\n";
        if (res.oracle) {
            const auto& o = *res.oracle;
            std::cerr << "oracle: subassembly " << o.subassembly_error << ", solution " << o.solution_error;
            if (o.ran_dense)
                std::cerr << ", dense cond " << o.dense_cond << " (theta_min " << o.dense_theta_min << ")";
            std::cerr << '\n';
            if (!o.skipped.empty())
                std::cerr << "oracle: " << o.skipped << '\n';
            if (o.subassembly_error > kSubassemblyTol || o.solution_error > kSolutionFactor * c.tol) {
                std::cerr << "error: oracle mismatch\n";
                if (status == 0)
                    status = kExitOracle;
            }
        }
        if (!res.row.converged) {
            std::cerr << "error: PCG did not converge in " << c.max_it << " iterations\n";
            status = kExitNotConverged;
        }
        if (!dump_dir.empty()) {
            const auto problem = fetidg::build_problem(c);
            const fetidg::FetiOperators ops(problem);
            fetidg::write_debug_dumps(dump_dir, problem, ops, c.multiplier_guard);
        }
    }

    if (configs.size() >= 3) {
        bool distinct = true;
        for (std::size_t k = 1; k < xs.size(); ++k)
            distinct = distinct && xs[k] != xs[0];
        if (distinct)
            std::cerr << "slope of log(cond) vs log(H/h): " << fetidg::fit_slope(xs, ys) << '\n';
    }
    return status;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"FETI-DP solver for composite FE/DG discretizations of -div(alpha grad u) = f on the unit square"};
    app.option_defaults()->always_capture_default();

    std::string config_path, preset, mesh, sweep, dump_dir, out;
    int nx = 0, max_it = 0, guard = 0;
    double alpha_hat = 0.0, delta = 0.0, tol = 0.0;
    bool oracle = false, quiet = false;
    std::uint64_t seed = 0;

    app.add_option("--config", config_path, "INI file with [experiment], [solver], [oracle], [field], [ex2], [ex3]")
        ->check(CLI::ExistingFile);
    auto* o_preset = app.add_option("--preset", preset, "ex1, ex2, ex3 or custom");
    auto* o_nx = app.add_option("--nx", nx, "subdomains per direction");
    auto* o_n = app.add_option("--n", mesh, "cells per subdomain side: 32, a per-subdomain list, or checker:a,b");
    auto* o_alpha = app.add_option("--alpha-hat", alpha_hat, "inclusion coefficient value");
    auto* o_delta = app.add_option("--delta", delta, "penalty parameter");
    auto* o_tol = app.add_option("--tol", tol, "relative residual tolerance");
    auto* o_max = app.add_option("--max-it", max_it, "maximum PCG iterations");
    auto* o_oracle = app.add_flag("--oracle", oracle, "cross-check against the direct solve and dense spectrum");
    auto* o_guard = app.add_option("--dense-guard", guard, "largest multiplier count for dense checks");
    auto* o_seed = app.add_option("--seed", seed, "seed for randomized operator probes");
    auto* o_out = app.add_option("--out", out, "CSV file to append rows to");
    app.add_option("--sweep", sweep, "field=v1,v2,... runs one experiment per value");
    app.add_option("--dump-dir", dump_dir, "write matrices, meshes and the primal map here");
    app.add_flag("--quiet", quiet, "suppress warnings");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    try {
        fetidg::ExperimentConfig config;
        if (!config_path.empty())
            fetidg::load_config_file(config_path, config);
        if (o_preset->count()) config.preset = fetidg::parse_preset(preset);
        if (o_nx->count()) { config.nx = nx; config.ny = nx; }
        if (o_n->count()) config.mesh = mesh;
        if (o_alpha->count()) config.alpha_hat = alpha_hat;
        if (o_delta->count()) config.delta = delta;
        if (o_tol->count()) config.tol = tol;
        if (o_max->count()) config.max_it = max_it;
        if (o_oracle->count()) config.oracle = oracle;
        if (o_guard->count()) config.multiplier_guard = guard;
        if (o_seed->count()) config.seed = seed;
        if (o_out->count()) config.out = out;
        return run(config, sweep, dump_dir, quiet);
    } catch (const fetidg::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const fetidg::SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kExitNotConverged;
    }
}

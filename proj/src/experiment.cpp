#include "fetidg/experiment.hpp"

#include "fetidg/error.hpp"

#include <CLI11.hpp>
#include <unsupported/Eigen/SparseExtra>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace fetidg {
namespace {

std::string trim(std::string s)
{
    const auto b = s.find_first_not_of(" \t\"'");
    const auto e = s.find_last_not_of(" \t\"'");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, sep);)
        if (auto t = trim(item); !t.empty())
            out.push_back(t);
    return out;
}

double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v)
{
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v)
{
    std::string l = v;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    if (l == "1" || l == "true" || l == "on" || l == "yes")
        return true;
    if (l == "0" || l == "false" || l == "off" || l == "no")
        return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<Inclusion> to_inclusions(const std::string& key, const std::string& v)
{
    std::vector<Inclusion> out;
    for (const auto& item : split(v, ';')) {
        const auto parts = split(item, ' ');
        if (parts.size() != 5)
            throw ConfigError(key + ": each inclusion needs 'x0 y0 x1 y1 value'");
        out.push_back({{to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2]),
                        to_double(key, parts[3])},
                       to_double(key, parts[4])});
    }
    return out;
}

using Setter = void (*)(ExperimentConfig&, const std::string&, const std::string&);

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"experiment.preset", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.preset = parse_preset(v); }},
        {"experiment.nx", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.nx = to_int(k, v); c.ny = c.nx; }},
        {"experiment.ny", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.ny = to_int(k, v); }},
        {"experiment.n", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.mesh = v; }},
        {"experiment.alpha_hat", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.alpha_hat = to_double(k, v); }},
        {"experiment.seed", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.seed = static_cast<std::uint64_t>(to_int(k, v)); }},
        {"experiment.probes", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.probes = to_int(k, v); }},
        {"experiment.out", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.out = v; }},
        {"solver.delta", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.delta = to_double(k, v); }},
        {"solver.tol", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.tol = to_double(k, v); }},
        {"solver.max_it", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.max_it = to_int(k, v); }},
        {"oracle.enabled", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.oracle = to_bool(k, v); }},
        {"oracle.multiplier_guard", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.multiplier_guard = to_int(k, v); }},
        {"oracle.monolithic_guard", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.monolithic_guard = to_int(k, v); }},
        {"field.background", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.background = to_double(k, v); }},
        {"field.inclusions", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.inclusions = to_inclusions(k, v); }},
        {"ex2.a_gx", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.ex2.a_gx = to_int(k, v); }},
        {"ex2.a_gy", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.ex2.a_gy = to_int(k, v); }},
        {"ex2.inset_cells", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.ex2.inset_cells = to_int(k, v); }},
        {"ex3.depth", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.ex3.depth = to_double(k, v); }},
        {"ex3.span", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.ex3.span = to_double(k, v); }},
        {"ex3.into", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             if (v != "first" && v != "second")
                 throw ConfigError(k + ": expected 'first' or 'second'");
             c.ex3.into_first = v == "first";
         }},
        {"ex3.vertical", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.ex3.vertical = to_bool(k, v); }},
        {"ex3.horizontal", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.ex3.horizontal = to_bool(k, v); }},
    };
    return table;
}

int mesh_at(std::span<const int> n, int id) { return n.size() == 1 ? n[0] : n[static_cast<std::size_t>(id)]; }

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

Preset parse_preset(const std::string& name)
{
    if (name == "ex1") return Preset::Ex1;
    if (name == "ex2") return Preset::Ex2;
    if (name == "ex3") return Preset::Ex3;
    if (name == "custom") return Preset::Custom;
    throw ConfigError("unknown preset '" + name + "' (expected ex1, ex2, ex3 or custom)");
}

std::string to_string(Preset preset)
{
    switch (preset) {
    case Preset::Ex1: return "ex1";
    case Preset::Ex2: return "ex2";
    case Preset::Ex3: return "ex3";
    case Preset::Custom: return "custom";
    }
    return "?";
}

std::vector<int> parse_mesh_list(const std::string& text, int nx, int ny)
{
    const int count = nx * ny;
    std::vector<int> out;
    if (text.rfind("checker:", 0) == 0) {
        const auto parts = split(text.substr(8), ',');
        if (parts.size() != 2)
            throw ConfigError("n: checker pattern needs two sizes, e.g. checker:8,16");
        const int a = to_int("n", parts[0]), b = to_int("n", parts[1]);
        for (int gy = 0; gy < ny; ++gy)
            for (int gx = 0; gx < nx; ++gx)
                out.push_back((gx + gy) % 2 == 0 ? a : b);
    } else {
        for (const auto& p : split(text, ','))
            out.push_back(to_int("n", p));
        if (out.size() != 1 && static_cast<int>(out.size()) != count)
            throw ConfigError("n: expected 1 or " + std::to_string(count) + " entries, got " +
                              std::to_string(out.size()));
    }
    if (out.empty())
        throw ConfigError("n: empty mesh list");
    for (int v : out)
        if (v < 2)
            throw ConfigError("n: every subdomain needs at least 2 cells per side");
    return out;
}

std::vector<int> ExperimentConfig::mesh_sizes() const { return parse_mesh_list(mesh, nx, ny); }

void ExperimentConfig::validate() const
{
    if (nx < 1 || ny < 1)
        throw ConfigError("nx, ny must be positive");
    if (nx != ny)
        throw ConfigError("only square partitions of the unit square are supported (nx == ny)");
    const auto n = mesh_sizes();
    if (!(alpha_hat >= 1.0))
        throw ConfigError("alpha_hat must be >= 1");
    if (!(delta > 0.0))
        throw ConfigError("delta must be positive");
    if (!(tol > 0.0 && tol < 1.0))
        throw ConfigError("tol must lie in (0, 1)");
    if (max_it < 1)
        throw ConfigError("max_it must be positive");
    if (multiplier_guard < 1 || monolithic_guard < 1)
        throw ConfigError("oracle guards must be positive");
    if (probes < 0)
        throw ConfigError("probes must be non-negative");
    switch (preset) {
    case Preset::Ex1:
        if (nx < 2)
            throw ConfigError("ex1 needs at least a 2x2 partition");
        if (mesh_at(n, nx + 1) < 4)
            throw ConfigError("ex1 needs n >= 4 in the inclusion subdomain");
        break;
    case Preset::Ex2: {
        const int gx = ex2.a_gx, gy = ex2.a_gy;
        if (ex2.inset_cells < 1)
            throw ConfigError("ex2 inset_cells must be at least 1");
        if (gx < 1 || gx + 1 > nx - 2 || gy < 1 || gy > ny - 2)
            throw ConfigError("ex2 needs two horizontally adjacent interior subdomains at (" + std::to_string(gx) +
                              "," + std::to_string(gy) + ") and (" + std::to_string(gx + 1) + "," +
                              std::to_string(gy) + ")");
        break;
    }
    case Preset::Ex3:
        if (nx < 2)
            throw ConfigError("ex3 needs at least a 2x2 partition");
        for (int v : n)
            if (v < 8)
                throw ConfigError("ex3 needs n >= 8 so that islands are at least one cell thick");
        if (!(ex3.depth > 0.0 && ex3.depth <= 1.0 && ex3.span > 0.0 && ex3.span <= 1.0))
            throw ConfigError("ex3 depth and span must lie in (0, 1]");
        break;
    case Preset::Custom:
        break;
    }
}

void set_config_field(ExperimentConfig& config, const std::string& key, const std::string& value)
{
    std::string k = key;
    std::replace(k.begin(), k.end(), '-', '_');
    if (k == "alpha" || k == "alphahat")
        k = "alpha_hat";
    const auto& table = setters();
    auto it = table.find(k);
    if (it == table.end() && k.find('.') == std::string::npos) {
        for (const char* section : {"experiment", "solver", "oracle", "field"}) {
            it = table.find(std::string(section) + "." + k);
            if (it != table.end())
                break;
        }
    }
    if (it == table.end())
        throw ConfigError("unknown configuration key '" + key + "'");
    it->second(config, it->first, trim(value));
}

void load_config_file(const std::string& path, ExperimentConfig& config)
{
    if (!std::filesystem::exists(path))
        throw ConfigError("config file not found: " + path);
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI().from_file(path);
    } catch (const CLI::Error& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--")
            continue;
        std::string value;
        for (std::size_t i = 0; i < item.inputs.size(); ++i)
            value += (i ? "," : "") + item.inputs[i];
        set_config_field(config, item.fullname(), value);
    }
}

CoefficientField preset_ex1(const DomainPartition& partition, double alpha_hat, std::span<const int> n)
{
    const int id = partition.id_at(1, 1);
    const auto& s = partition.subdomains[static_cast<std::size_t>(id)];
    const int ni = mesh_at(n, id);
    if (ni < 4)
        throw ConfigError("ex1 needs n >= 4 in the inclusion subdomain");
    const double h = s.size / ni;
    const Rect box{s.origin.x + h, s.origin.y + h, s.origin.x + s.size - h, s.origin.y + s.size - h};
    return CoefficientField(1.0, {{box, alpha_hat}});
}

CoefficientField preset_ex2(const DomainPartition& partition, const Ex2Layout& layout, double alpha_hat,
                            std::span<const int> n)
{
    const auto core = [&](int gx, int gy, double value) {
        const int id = partition.id_at(gx, gy);
        const auto& s = partition.subdomains[static_cast<std::size_t>(id)];
        const int ni = mesh_at(n, id);
        if (ni <= 2 * layout.inset_cells)
            throw ConfigError("ex2: inset of " + std::to_string(layout.inset_cells) + " cells leaves no core in a " +
                              std::to_string(ni) + "-cell subdomain");
        const double d = layout.inset_cells * s.size / ni;
        return Inclusion{{s.origin.x + d, s.origin.y + d, s.origin.x + s.size - d, s.origin.y + s.size - d}, value};
    };
    return CoefficientField(alpha_hat, {core(layout.a_gx, layout.a_gy, alpha_hat * alpha_hat),
                                        core(layout.a_gx + 1, layout.a_gy, 1.0)});
}

CoefficientField preset_ex3(const DomainPartition& partition, const Ex3Layout& layout, double alpha_hat,
                            std::span<const int> n)
{
    for (std::size_t i = 0; i < partition.size(); ++i)
        if (mesh_at(n, static_cast<int>(i)) < 8)
            throw ConfigError("ex3 needs n >= 8 so that islands are at least one cell thick");
    const double H = partition.H;
    const double d = layout.depth * H;
    const double lo = 0.5 * (1.0 - layout.span) * H, hi = 0.5 * (1.0 + layout.span) * H;
    std::vector<Inclusion> islands;
    for (int gy = 0; gy < partition.ny; ++gy) {
        for (int gx = 0; gx < partition.nx; ++gx) {
            const double x = gx * H, y = gy * H;
            if (layout.vertical && gx + 1 < partition.nx) {
                const double xi = x + H;
                const Rect r = layout.into_first ? Rect{xi - d, y + lo, xi, y + hi} : Rect{xi, y + lo, xi + d, y + hi};
                islands.push_back({r, alpha_hat});
            }
            if (layout.horizontal && gy + 1 < partition.ny) {
                const double yi = y + H;
                const Rect r = layout.into_first ? Rect{x + lo, yi - d, x + hi, yi} : Rect{x + lo, yi, x + hi, yi + d};
                islands.push_back({r, alpha_hat});
            }
        }
    }
    return CoefficientField(1.0, std::move(islands));
}

Discretization build_problem(const ExperimentConfig& config, const SourceFunction& f)
{
    config.validate();
    const auto n = config.mesh_sizes();
    Geometry geometry = build_geometry(config.nx, config.ny, n);
    const auto& part = geometry.partition;
    CoefficientField field = [&] {
        switch (config.preset) {
        case Preset::Ex1: return preset_ex1(part, config.alpha_hat, n);
        case Preset::Ex2: return preset_ex2(part, config.ex2, config.alpha_hat, n);
        case Preset::Ex3: return preset_ex3(part, config.ex3, config.alpha_hat, n);
        case Preset::Custom: break;
        }
        return CoefficientField(config.background, config.inclusions);
    }();
    return discretize(std::move(geometry), std::move(field), config.delta, f);
}

ProbeReport probe_operators(const FetiOperators& ops, std::uint64_t seed, int probes)
{
    ProbeReport rep;
    rep.min_rayleigh = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const auto random = [&](Eigen::Index n) {
        Vector v(n);
        for (auto& x : v)
            x = normal(rng);
        return v;
    };
    const std::array<std::pair<Eigen::Index, LinearOperator>, 3> operators = {{
        {ops.num_dual(), [&](const Vector& x) { return ops.apply_Stilde_inverse(x); }},
        {ops.num_multipliers(), [&](const Vector& x) { return ops.apply_F(x); }},
        {ops.num_multipliers(), [&](const Vector& x) { return ops.apply_preconditioner(x); }},
    }};
    for (const auto& [n, A] : operators) {
        if (n == 0)
            continue;
        for (int k = 0; k < probes; ++k) {
            const Vector x = random(n), y = random(n);
            const Vector Ax = A(x), Ay = A(y);
            const double scale = x.norm() * y.norm() * std::max(Ax.norm() / x.norm(), Ay.norm() / y.norm());
            rep.max_asymmetry = std::max(rep.max_asymmetry, std::abs(y.dot(Ax) - x.dot(Ay)) / scale);
            rep.min_rayleigh = std::min(rep.min_rayleigh, x.dot(Ax) / x.squaredNorm());
        }
    }
    if (!std::isfinite(rep.min_rayleigh))
        rep.min_rayleigh = 0.0;
    rep.passed = rep.max_asymmetry <= 1e-8 && (probes == 0 || rep.min_rayleigh > 0.0);
    return rep;
}

ExperimentResult run_experiment(const ExperimentConfig& config)
{
    ExperimentResult res;
    const auto t0 = std::chrono::steady_clock::now();
    const Discretization problem = build_problem(config);
    const FetiOperators ops(problem);
    std::vector<Vector> loads;
    for (const auto& l : problem.locals)
        loads.push_back(l.load);
    const DualRhs rhs = ops.compute_rhs(loads);
    res.row.t_setup_s = seconds_since(t0);

    const auto t1 = std::chrono::steady_clock::now();
    res.solve = pcg_solve([&](const Vector& x) { return ops.apply_F(x); },
                          [&](const Vector& x) { return ops.apply_preconditioner(x); }, rhs.d, config.tol,
                          config.max_it);
    const RecoveredSolution sol = ops.recover_solution(res.solve.lambda, rhs, loads);
    res.row.t_solve_s = seconds_since(t1);

    res.probes = probe_operators(ops, config.seed, config.probes);

    const auto n = config.mesh_sizes();
    res.row.preset = to_string(config.preset);
    res.row.nx = config.nx;
    res.row.H_over_h = *std::max_element(n.begin(), n.end());
    if (config.preset == Preset::Custom) {
        double mx = config.background;
        for (const auto& inc : config.inclusions)
            mx = std::max(mx, inc.value);
        res.row.alpha_hat = mx;
    } else {
        res.row.alpha_hat = config.alpha_hat;
    }
    res.row.iterations = res.solve.iterations;
    res.row.cond_estimate = res.solve.cond_estimate;
    res.row.final_rel_residual = res.solve.final_relative_residual;
    res.row.converged = res.solve.converged;

    if (config.oracle) {
        OracleReport orc;
        const auto mono = oracle::assemble_monolithic(problem.geometry, problem.coeffs, problem.delta, unit_source);
        const SparseMatrix diff = oracle::fold_local_systems(problem) - mono.matrix;
        orc.subassembly_error = max_abs(diff) / max_abs(mono.matrix);
        const auto direct = oracle::direct_solve(mono);
        double num = 0.0, den = 0.0;
        const auto split_u = oracle::split_native(mono, direct.u);
        for (std::size_t i = 0; i < split_u.size(); ++i) {
            num += (split_u[i] - sol.native[i]).squaredNorm();
            den += split_u[i].squaredNorm();
        }
        orc.solution_error = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
        orc.ran_direct = true;
        if (ops.num_multipliers() <= config.multiplier_guard) {
            const auto sp = oracle::dense_spectrum(problem, config.multiplier_guard);
            orc.dense_cond = sp.cond;
            orc.dense_theta_min = sp.theta_min;
            orc.ran_dense = true;
        } else {
            orc.skipped = "dense spectrum skipped: " + std::to_string(ops.num_multipliers()) +
                          " multipliers exceed the guard of " + std::to_string(config.multiplier_guard);
        }
        res.oracle = orc;
    }
    return res;
}

void write_csv_row(std::ostream& out, const ReportRow& row)
{
    std::ostringstream s;
    s << row.preset << ',' << row.nx << ',' << row.H_over_h << ',';
    s.precision(6);
    s << row.alpha_hat << ',' << row.iterations << ',';
    s.precision(8);
    s << row.cond_estimate << ',';
    s.precision(4);
    s << std::scientific << row.final_rel_residual << std::defaultfloat << ',' << (row.converged ? 1 : 0) << ',';
    s.precision(4);
    s << std::fixed << row.t_setup_s << ',' << row.t_solve_s << '\n';
    out << s.str();
}

void write_debug_dumps(const std::string& dir, const Discretization& problem, const FetiOperators& ops,
                       int dense_guard)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto path = [&](const std::string& name) { return (fs::path(dir) / name).string(); };
    const auto save_symmetric = [&](const SparseMatrix& A, const std::string& name) {
        const SparseMatrix lower = A.triangularView<Eigen::Lower>();
        if (!Eigen::saveMarket(lower, path(name), Eigen::Symmetric))
            throw ConfigError("cannot write " + path(name));
    };
    const auto save_general = [&](const SparseMatrix& A, const std::string& name) {
        if (!Eigen::saveMarket(A, path(name)))
            throw ConfigError("cannot write " + path(name));
    };

    for (std::size_t i = 0; i < problem.locals.size(); ++i) {
        std::ofstream mesh(path("mesh_" + std::to_string(i) + ".txt"));
        write_mesh(mesh, problem.geometry.meshes[i]);
        save_symmetric(problem.locals[i].A_prime, "A_prime_" + std::to_string(i) + ".mtx");
    }
    const auto mono = oracle::assemble_monolithic(problem.geometry, problem.coeffs, problem.delta, unit_source);
    save_symmetric(mono.matrix, "monolithic.mtx");
    save_general(problem.layout.jump.to_sparse(), "B_delta.mtx");

    std::ofstream primal(path("primal_map.txt"));
    for (std::size_t i = 0; i < problem.layout.spaces.size(); ++i) {
        const auto& s = problem.layout.spaces[i];
        for (std::size_t k = 0; k < s.primal.size(); ++k)
            primal << i << ' ' << s.primal[k] << ' ' << problem.layout.primal.local_to_global[i][k] << '\n';
    }

    if (ops.num_multipliers() <= dense_guard) {
        const auto dense = oracle::build_dense_feti(problem, dense_guard);
        save_symmetric(dense.F.sparseView(), "F.mtx");
        const Eigen::MatrixXd MF = dense.M_inv * dense.F;
        save_general(MF.sparseView(), "MinvF.mtx");
    }
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size())
        throw ConfigError("fit_slope: x and y differ in length");
    if (x.size() < 3)
        throw ConfigError("fit_slope: need at least three points");
    Eigen::MatrixXd A(static_cast<Eigen::Index>(x.size()), 2);
    Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!(x[k] > 0.0 && y[k] > 0.0))
            throw ConfigError("fit_slope: values must be positive");
        A(static_cast<Eigen::Index>(k), 0) = std::log(x[k]);
        A(static_cast<Eigen::Index>(k), 1) = 1.0;
        b[static_cast<Eigen::Index>(k)] = std::log(y[k]);
    }
    return A.colPivHouseholderQr().solve(b)[0];
}

} // namespace fetidg

#pragma once

#include "fetidg/coeffield.hpp"
#include "fetidg/fetidp.hpp"
#include "fetidg/oracle.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fetidg {

enum class Preset { Ex1, Ex2, Ex3, Custom };

Preset parse_preset(const std::string& name);
std::string to_string(Preset preset);

/// Ex. 2 layout: background alpha_hat everywhere; subdomain A holds a core of value
/// alpha_hat^2 and its right neighbour B a core of value 1, each inset by `inset_cells`
/// cells from the subdomain boundary. Both boundary layers therefore see only the
/// background, while the interiors are larger in A and smaller in B.
struct Ex2Layout {
    int a_gx = 1, a_gy = 1;
    int inset_cells = 1;
};

/// Ex. 3 layout: one island per interior interface, `depth` x `span` (fractions of H),
/// centered along the interface and lying inside the left/bottom subdomain
/// (or the right/top one when `into_first` is false).
struct Ex3Layout {
    double depth = 0.125;
    double span = 0.5;
    bool into_first = true;
    bool vertical = true;
    bool horizontal = true;
};

struct ExperimentConfig {
    Preset preset = Preset::Ex1;
    int nx = 4;
    int ny = 4;
    std::string mesh = "32";  ///< cells per side: uniform, per-subdomain list, or checker pattern
    double alpha_hat = 1e4;
    double background = 1.0;
    std::vector<Inclusion> inclusions;  ///< custom preset only
    Ex2Layout ex2;
    Ex3Layout ex3;
    double delta = kDefaultPenalty;
    double tol = 1e-6;
    int max_it = 500;
    bool oracle = false;
    int multiplier_guard = oracle::kDefaultMultiplierGuard;
    int monolithic_guard = oracle::kDefaultMonolithicGuard;
    std::string out;  ///< CSV path; empty means stdout only
    std::uint64_t seed = 1;
    int probes = 3;   ///< randomized symmetry/positivity probes per operator

    std::vector<int> mesh_sizes() const;
    /// Throws ConfigError describing the first invalid field.
    void validate() const;
};

/// Parses "32", "8,16,8,16,..." or "checker:8,16" (alternating by subdomain parity).
std::vector<int> parse_mesh_list(const std::string& text, int nx, int ny);

/// Reads an INI file with [experiment], [solver], [oracle], [field], [ex2] and [ex3]
/// sections into `config`. Unknown keys raise ConfigError.
void load_config_file(const std::string& path, ExperimentConfig& config);

/// Applies "field=value" to the config (used by sweeps and the config reader).
void set_config_field(ExperimentConfig& config, const std::string& key, const std::string& value);

CoefficientField preset_ex1(const DomainPartition& partition, double alpha_hat, std::span<const int> n);
CoefficientField preset_ex2(const DomainPartition& partition, const Ex2Layout& layout, double alpha_hat,
                            std::span<const int> n);
CoefficientField preset_ex3(const DomainPartition& partition, const Ex3Layout& layout, double alpha_hat,
                            std::span<const int> n);

/// Builds geometry and coefficient field for a config.
Discretization build_problem(const ExperimentConfig& config, const SourceFunction& f = unit_source);

struct ProbeReport {
    double max_asymmetry = 0.0;  ///< max |x'Ay - y'Ax| / (|x||A||y|) over probes and operators
    double min_rayleigh = 0.0;   ///< min x'Ax / x'x over probes and operators
    bool passed = true;
};

/// Seeded random probes of S~^{-1}, F and M^{-1}.
ProbeReport probe_operators(const FetiOperators& ops, std::uint64_t seed, int probes);

struct OracleReport {
    bool ran_direct = false;
    bool ran_dense = false;
    double solution_error = 0.0;     ///< relative l2 distance to the direct solve
    double subassembly_error = 0.0;  ///< max entrywise difference, relative to max entry
    double dense_cond = 0.0;
    double dense_theta_min = 0.0;
    std::string skipped;  ///< reason when a check was skipped
};

struct ReportRow {
    std::string preset;
    int nx = 0;
    int H_over_h = 0;
    double alpha_hat = 0.0;
    int iterations = 0;
    double cond_estimate = 0.0;
    double final_rel_residual = 0.0;
    bool converged = false;
    double t_setup_s = 0.0;
    double t_solve_s = 0.0;
};

struct ExperimentResult {
    ReportRow row;
    SolveReport solve;
    ProbeReport probes;
    std::optional<OracleReport> oracle;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

inline constexpr const char* kCsvHeader =
    "preset,nx,H_over_h,alpha_hat,iterations,cond_estimate,final_rel_residual,converged,t_setup_s,t_solve_s";

void write_csv_row(std::ostream& out, const ReportRow& row);

/// Writes meshes, local and monolithic matrices, B_Delta and the primal map into `dir`;
/// adds dense F and M^{-1}F when the multiplier count is within `dense_guard`.
void write_debug_dumps(const std::string& dir, const Discretization& problem, const FetiOperators& ops,
                       int dense_guard);

/// Least-squares slope of log(y) against log(x). Needs at least three points, all positive.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace fetidg

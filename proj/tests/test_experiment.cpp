#include "fetidg/error.hpp"
#include "fetidg/experiment.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fetidg;

namespace {

ExperimentConfig config(Preset preset, const std::string& mesh, double alpha_hat)
{
    ExperimentConfig c;
    c.preset = preset;
    c.mesh = mesh;
    c.alpha_hat = alpha_hat;
    return c;
}

std::filesystem::path scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "fetidg_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("slope fit")
{
    const std::vector<double> x{8, 16, 32, 64};
    std::vector<double> sq, flat;
    for (double v : x) {
        sq.push_back(3.0 * v * v);
        flat.push_back(5.0);
    }
    CHECK(fit_slope(x, sq) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(fit_slope(x, flat)) < 1e-12);
    CHECK_THROWS_AS(fit_slope({1, 2}, {1, 2}), ConfigError);
    CHECK_THROWS_AS(fit_slope({1, 2, 3}, {1, 0, 2}), ConfigError);
    CHECK_THROWS_AS(fit_slope({1, 2, 3}, {1, 2}), ConfigError);
}

TEST_CASE("mesh lists")
{
    CHECK(parse_mesh_list("32", 4, 4) == std::vector<int>{32});
    CHECK(parse_mesh_list("4,6,6,4", 2, 2) == std::vector<int>{4, 6, 6, 4});
    CHECK(parse_mesh_list("checker:8,16", 2, 2) == std::vector<int>{8, 16, 16, 8});
    CHECK_THROWS_AS(parse_mesh_list("4,6,6", 2, 2), ConfigError);
    CHECK_THROWS_AS(parse_mesh_list("1", 2, 2), ConfigError);
    CHECK_THROWS_AS(parse_mesh_list("checker:8", 2, 2), ConfigError);
    CHECK_THROWS_AS(parse_mesh_list("abc", 2, 2), ConfigError);
}

TEST_CASE("presets")
{
    const auto partition = build_partition(4, 4);
    const auto layers = [&](const CoefficientField& f, int n) {
        return sample_coefficients(build_geometry(4, 4, std::vector<int>{n}), f);
    };

    SUBCASE("ex1")
    {
        const int n = 8;
        const auto data = layers(preset_ex1(partition, 1e4, std::vector<int>{n}), n);
        const auto id = static_cast<std::size_t>(partition.id_at(1, 1));
        int inside = 0;
        for (double a : data.triangle_alpha[id])
            inside += a == 1e4;
        CHECK(inside == 2 * (n - 2) * (n - 2));
        CHECK(data.layers[id].alpha_hi == 1.0);
        for (std::size_t i = 0; i < data.triangle_alpha.size(); ++i)
            if (i != id)
                for (double a : data.triangle_alpha[i])
                    CHECK(a == 1.0);
        CHECK_THROWS_AS(preset_ex1(partition, 1e4, std::vector<int>{3}), ConfigError);
    }
    SUBCASE("ex2")
    {
        const int n = 8;
        const Ex2Layout layout;
        const auto data = layers(preset_ex2(partition, layout, 1e2, std::vector<int>{n}), n);
        const auto a = static_cast<std::size_t>(partition.id_at(1, 1));
        const auto b = static_cast<std::size_t>(partition.id_at(2, 1));
        // Both boundary layers see only the background; the cores differ.
        for (auto id : {a, b}) {
            CHECK(data.layers[id].alpha_lo == 1e2);
            CHECK(data.layers[id].alpha_hi == 1e2);
        }
        const auto max_of = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };
        const auto min_of = [](const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); };
        CHECK(max_of(data.triangle_alpha[a]) == 1e4);
        CHECK(min_of(data.triangle_alpha[b]) == 1.0);
        // alpha_hat = 1 is homogeneous.
        for (const auto& tri : layers(preset_ex2(partition, layout, 1.0, std::vector<int>{n}), n).triangle_alpha)
            for (double v : tri)
                CHECK(v == 1.0);
        CHECK_THROWS_AS(preset_ex2(partition, layout, 1e2, std::vector<int>{2}), ConfigError);
    }
    SUBCASE("ex3")
    {
        const int n = 8;
        const auto data = layers(preset_ex3(partition, Ex3Layout{}, 1e4, std::vector<int>{n}), n);
        for (int gy = 0; gy < 4; ++gy)
            for (int gx = 0; gx < 4; ++gx) {
                const auto& l = data.layers[static_cast<std::size_t>(partition.id_at(gx, gy))];
                CHECK(l.alpha_lo == 1.0);
                // Only the top-right subdomain has no interface on its right or top side.
                CHECK(l.alpha_hi == (gx == 3 && gy == 3 ? 1.0 : 1e4));
            }
        CHECK_THROWS_AS(preset_ex3(partition, Ex3Layout{}, 1e4, std::vector<int>{4}), ConfigError);
    }
}

TEST_CASE("config validation")
{
    auto c = config(Preset::Ex1, "8", 1e2);
    CHECK_NOTHROW(c.validate());
    auto bad = c;
    bad.ny = 3;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.alpha_hat = 0.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.tol = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.delta = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.mesh = "3";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = config(Preset::Ex2, "8", 1e2);
    bad.nx = bad.ny = 3;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = config(Preset::Ex3, "4", 1e2);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(parse_preset("ex9"), ConfigError);
    CHECK(to_string(parse_preset("ex2")) == "ex2");
}

TEST_CASE("config fields and files")
{
    ExperimentConfig c;
    set_config_field(c, "alpha-hat", "1e3");
    set_config_field(c, "max_it", "77");
    set_config_field(c, "ex3.into", "second");
    set_config_field(c, "field.inclusions", "0.1 0.1 0.2 0.2 5; 0.5 0.5 0.6 0.7 9");
    CHECK(c.alpha_hat == 1e3);
    CHECK(c.max_it == 77);
    CHECK_FALSE(c.ex3.into_first);
    REQUIRE(c.inclusions.size() == 2);
    CHECK(c.inclusions[1].box.y1 == 0.7);
    CHECK(c.inclusions[1].value == 9.0);
    CHECK_THROWS_AS(set_config_field(c, "bogus", "1"), ConfigError);
    CHECK_THROWS_AS(set_config_field(c, "nx", "two"), ConfigError);

    const auto path = scratch("run.ini");
    {
        std::ofstream f(path);
        f << "[experiment]\npreset = ex3\nnx = 2\nn = 8\nalpha_hat = 100\n\n"
             "[solver]\ndelta = 7\ntol = 1e-8\n\n[oracle]\nenabled = true\n\n[ex3]\ndepth = 0.25\n";
    }
    ExperimentConfig loaded;
    load_config_file(path.string(), loaded);
    CHECK(loaded.preset == Preset::Ex3);
    CHECK(loaded.nx == 2);
    CHECK(loaded.ny == 2);
    CHECK(loaded.mesh == "8");
    CHECK(loaded.alpha_hat == 100.0);
    CHECK(loaded.delta == 7.0);
    CHECK(loaded.tol == 1e-8);
    CHECK(loaded.oracle);
    CHECK(loaded.ex3.depth == 0.25);

    {
        std::ofstream f(path);
        f << "[solver]\nunknown_key = 1\n";
    }
    CHECK_THROWS_AS(load_config_file(path.string(), loaded), ConfigError);
    CHECK_THROWS_AS(load_config_file(scratch("missing.ini").string(), loaded), ConfigError);
}

TEST_CASE("frozen regression values")
{
    struct Case {
        Preset preset;
        const char* mesh;
        double alpha_hat;
        int iterations;
        double cond;
    };
    for (const auto& k : {Case{Preset::Ex1, "32", 1e2, 10, 8.2463064}, Case{Preset::Ex2, "16", 1e4, 12, 7.7468982},
                          Case{Preset::Ex3, "16", 1e2, 36, 63.239751}}) {
        const auto r = run_experiment(config(k.preset, k.mesh, k.alpha_hat));
        CAPTURE(to_string(k.preset));
        CHECK(r.row.converged);
        CHECK(r.row.iterations == k.iterations);
        CHECK(r.row.cond_estimate == doctest::Approx(k.cond).epsilon(1e-6));
        CHECK(r.probes.passed);
    }
}

TEST_CASE("runs are deterministic and rows are well formed")
{
    auto c = config(Preset::Ex1, "8", 1e4);
    c.oracle = true;
    c.seed = 42;
    const auto a = run_experiment(c);
    const auto b = run_experiment(c);
    CHECK(a.row.iterations == b.row.iterations);
    CHECK(a.row.cond_estimate == b.row.cond_estimate);
    CHECK(a.probes.max_asymmetry == b.probes.max_asymmetry);
    CHECK(a.probes.min_rayleigh == b.probes.min_rayleigh);
    REQUIRE(a.oracle.has_value());
    CHECK(a.oracle->ran_direct);
    CHECK(a.oracle->ran_dense);
    CHECK(a.oracle->subassembly_error < 1e-12);
    CHECK(a.oracle->solution_error < 10 * c.tol);
    CHECK(a.row.cond_estimate <= a.oracle->dense_cond * (1 + 1e-8));

    std::ostringstream out;
    write_csv_row(out, a.row);
    const std::string line = out.str();
    CHECK(line.back() == '\n');
    CHECK(std::count(line.begin(), line.end(), ',') == 9);
    CHECK(line.rfind("ex1,4,8,10000,", 0) == 0);
    const std::string header = kCsvHeader;
    CHECK(std::count(header.begin(), header.end(), ',') == 9);
}

TEST_CASE("debug dumps")
{
    auto c = config(Preset::Ex1, "4", 10.0);
    c.nx = c.ny = 2;
    const auto problem = build_problem(c);
    const FetiOperators ops(problem);
    const auto dir = scratch("dump");
    std::filesystem::remove_all(dir);
    write_debug_dumps(dir.string(), problem, ops, 1000);
    for (const char* name : {"mesh_0.txt", "A_prime_3.mtx", "monolithic.mtx", "B_delta.mtx", "primal_map.txt",
                             "F.mtx", "MinvF.mtx"})
        CHECK(std::filesystem::exists(dir / name));
    std::ifstream B(dir / "B_delta.mtx");
    std::string first;
    std::getline(B, first);
    CHECK(first.rfind("%%MatrixMarket", 0) == 0);
}

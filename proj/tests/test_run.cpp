#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mmc/run.hpp"

using namespace mmc;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> data_lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty() && line[0] != '#') out.push_back(line);
    return out;
}

std::vector<double> split_csv_row(const std::string& line) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

} // namespace

TEST_CASE("simulate mode writes a valid, deterministic series CSV") {
    const auto dir = std::filesystem::temp_directory_path() / "mmc_run_test";
    std::filesystem::remove_all(dir);

    RunConfig c = parse_config(
        "grid_n = 16\n"
        "dt = 1e-3\n"
        "t_final = 0.01\n"
        "initial = random\n"
        "seed = 77\n"
        "snapshot_every = 5\n");
    c.out_dir = (dir / "a").string();
    REQUIRE(run(c) == exit_ok);

    const std::string text = slurp(dir / "a" / "series.csv");
    const std::vector<std::string> rows = data_lines(text);
    REQUIRE(!rows.empty());
    CHECK(rows.front() ==
          "step,t,energy,modified_energy,mass_error,min_phi,max_phi,cycles,residual");
    // Initialization rows for steps 0 and 1, then one row per solve.
    CHECK(rows.size() == 2 + 10);

    // Energy nonincreasing and bounds interior in every data row.
    const ModelParams p = c.params();
    double prev_me = 0.0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const std::vector<double> v = split_csv_row(rows[k]);
        REQUIRE(v.size() == 9);
        const double me = v[3], mass_err = v[4], lo = v[5], hi = v[6];
        CHECK(lo > 0.0);
        CHECK(hi < p.phi_max());
        CHECK(std::fabs(mass_err) < 1e-10);
        if (k > 1) CHECK(me <= prev_me + 1e-8 * std::fabs(prev_me));
        prev_me = me;
    }

    SECTION("bit-identical on rerun with the same config") {
        RunConfig c2 = c;
        c2.out_dir = (dir / "b").string();
        REQUIRE(run(c2) == exit_ok);
        CHECK(slurp(dir / "b" / "series.csv") == text);
    }
    SECTION("snapshots exist and reload as initial data") {
        CHECK(std::filesystem::exists(dir / "a" / "snapshot_000000.txt"));
        CHECK(std::filesystem::exists(dir / "a" / "snapshot_000005.txt"));
        CHECK(std::filesystem::exists(dir / "a" / "snapshot_000010.txt"));
        RunConfig c3 = c;
        c3.initial = InitialKind::file;
        c3.initial_file = (dir / "a" / "snapshot_000010.txt").string();
        GridSpec g(c3.domain_l, c3.grid_n);
        CellField f = make_initial_field(c3, g);
        CHECK(f.min() > 0.0);
        CHECK(f.max() < p.phi_max());
    }
}

TEST_CASE("refine mode produces the rate table") {
    const auto dir = std::filesystem::temp_directory_path() / "mmc_refine_test";
    std::filesystem::remove_all(dir);
    RunConfig c = parse_config(
        "mode = refine\n"
        "refine_grids = 8, 16, 32\n"
        "refine_c = 0.001\n"
        "refine_t = 0.064\n");
    c.out_dir = dir.string();
    REQUIRE(run(c) == exit_ok);
    const std::vector<std::string> rows = data_lines(slurp(dir / "refine.csv"));
    REQUIRE(rows.size() == 1 + 2);  // header + one row per grid pair
    CHECK(rows[0] == "n_coarse,n_fine,cauchy_l2,rate");
}

TEST_CASE("compare mode produces the four-variant table") {
    const auto dir = std::filesystem::temp_directory_path() / "mmc_compare_test";
    std::filesystem::remove_all(dir);
    RunConfig c = parse_config(
        "mode = compare\n"
        "grid_n = 16\n"
        "dt = 2e-3\n"
        "t_final = 0.016\n"
        "reference_dt_divisor = 4\n");
    c.out_dir = dir.string();
    REQUIRE(run(c) == exit_ok);
    const std::vector<std::string> rows = data_lines(slurp(dir / "compare.csv"));
    REQUIRE(rows.size() == 1 + 4);
    CHECK(rows[0] == "variant,max_err,l2_err,cpu_seconds");
    CHECK(rows[1].rfind("cs1,", 0) == 0);
}

TEST_CASE("run reports config errors via exit code 2") {
    RunConfig c = parse_config("");
    c.grid_n = 48;  // invalid with multigrid depth > 1
    CHECK(run(c) == exit_config_error);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "hbif/config.hpp"
#include "hbif/csv.hpp"
#include "hbif/svg.hpp"

using namespace hbif;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
#ifndef HBIF_CLI_PATH
#error "HBIF_CLI_PATH not defined"
#endif
    const std::string cmd = std::string(HBIF_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

Branch small_branch() {
    Grid g = make_grid(39);
    HarvestTerm h = build_harvest(g, {{2, -1.0}});
    Problem pr = make_problem(std::move(g), make_competition_term(1.0, 1.0, 3), std::move(h));
    StepConfig step;
    step.ds_max = 0.5;
    return trace_branch(pr, pr.lambda1 + 0.5 * (pr.lambda2 - pr.lambda1), step);
}

} // namespace

TEST_CASE("config round-trip and validation") {
    const Config def;
    const Config back = config_from_json(config_to_json(def));
    CHECK(back == def);

    Config c = def;
    c.grid_n = 399;
    c.model_M = 0.0;
    c.h_modes = {{2, -1.0}, {4, 0.25}};
    c.verify_level = "smoke";
    const Config back2 = config_from_json(config_to_json(c));
    CHECK(back2 == c);

    CHECK_THROWS_AS(config_from_json("{ not json"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json("{\"verify\":{\"levels\":\"loud\"}}"),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json("{\"continuation\":{\"ds0\":-1}}"),
                    std::invalid_argument);

    // module preconditions surface through problem construction
    Config bad_n = def;
    bad_n.grid_n = 100; // 101 not divisible by 4
    CHECK_THROWS_AS(problem_from_config(bad_n), std::invalid_argument);
    Config bad_p = def;
    bad_p.model_p = 2;
    CHECK_THROWS_AS(problem_from_config(bad_p), std::invalid_argument);
    Config bad_modes = def;
    bad_modes.h_modes = {{3, 1.0}}; // orthogonal to psi
    CHECK_THROWS_AS(problem_from_config(bad_modes), std::invalid_argument);
}

TEST_CASE("branch csv writes the exact schema and re-parses bit-identically") {
    const Branch br = small_branch();
    const fs::path dir = fs::temp_directory_path() / "hbif_csv_test";
    fs::create_directories(dir);
    const std::string path = (dir / "branch.csv").string();
    write_branch_csv(br, path);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "index,a,c,t_phi,t_psi,u_max,u_min,morse_index,degenerate,residual_norm,marker");

    const std::vector<BranchRow> expect = branch_rows(br);
    const std::vector<BranchRow> rows = read_branch_csv(path);
    REQUIRE(rows.size() == expect.size());
    int fold_rows = 0, start_rows = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].index == expect[i].index);
        CHECK(rows[i].a == expect[i].a); // bit-identical round trip
        CHECK(rows[i].c == expect[i].c);
        CHECK(rows[i].t_phi == expect[i].t_phi);
        CHECK(rows[i].t_psi == expect[i].t_psi);
        CHECK(rows[i].u_max == expect[i].u_max);
        CHECK(rows[i].u_min == expect[i].u_min);
        CHECK(rows[i].morse_index == expect[i].morse_index);
        CHECK(rows[i].degenerate == expect[i].degenerate);
        CHECK(rows[i].residual_norm == expect[i].residual_norm);
        CHECK(rows[i].marker == expect[i].marker);
        if (rows[i].marker == "fold0")
            ++fold_rows;
        if (rows[i].marker == "start")
            ++start_rows;
    }
    CHECK(fold_rows == 2);
    CHECK(start_rows == 1);
    fs::remove_all(dir);
}

TEST_CASE("lambda2 branch csv carries Lstart and Lend rows") {
    Grid g = make_grid(39);
    HarvestTerm h = build_harvest(g, {{2, -1.0}});
    Problem pr = make_problem(std::move(g), make_competition_term(1.0, 1.0, 3), std::move(h));
    StepConfig step;
    step.ds_max = 0.5;
    const Branch br = trace_branch(pr, pr.lambda2, step);
    const fs::path dir = fs::temp_directory_path() / "hbif_csv_l2";
    fs::create_directories(dir);
    const std::string path = (dir / "branch.csv").string();
    write_branch_csv(br, path);
    const std::vector<BranchRow> rows = read_branch_csv(path);
    int lstart = -1, lend = -1;
    for (const BranchRow& r : rows) {
        if (r.marker == "Lstart")
            lstart = r.index;
        if (r.marker == "Lend")
            lend = r.index;
    }
    REQUIRE(lstart >= 0);
    REQUIRE(lend > lstart);
    CHECK(rows[lstart].t_psi == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(rows[lend].t_psi == doctest::Approx(1.0).epsilon(1e-9));
    fs::remove_all(dir);
}

TEST_CASE("svg output is deterministic and rejects empty input") {
    const Branch br = small_branch();
    const fs::path dir = fs::temp_directory_path() / "hbif_svg_test";
    fs::create_directories(dir);
    render_branches_svg({br}, BranchAxes::c_vs_tphi, (dir / "one.svg").string());
    render_branches_svg({br}, BranchAxes::c_vs_tphi, (dir / "two.svg").string());
    CHECK(slurp(dir / "one.svg") == slurp(dir / "two.svg"));
    CHECK(slurp(dir / "one.svg").find("<svg") == 0);
    CHECK(slurp(dir / "one.svg").find("polyline") != std::string::npos);

    CHECK_THROWS_AS(render_branches_svg({}, BranchAxes::c_vs_tphi, (dir / "x.svg").string()),
                    std::invalid_argument);
    fs::remove_all(dir);
}

TEST_CASE("cli end to end") {
    const fs::path dir = fs::temp_directory_path() / "hbif_cli_e2e";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string out = " --out " + (dir / "run").string();

    CHECK(run_cli("eig --n 39") == 0);

    // solve below lambda1
    CHECK(run_cli("solve --n 39 --a 4.0 --c 0.5" + out) == 0);
    CHECK(fs::exists(dir / "run" / "solution.csv"));

    // validation errors exit with 2
    CHECK(run_cli("solve --n 39 --a 4.0 --a-rel 0.5 --c 0.5" + out) == 2);
    CHECK(run_cli("solve --n 39 --a 90.0 --c 0.5" + out) == 2);
    CHECK(run_cli("solve --n 100 --a 4.0" + out) == 2);
    CHECK(run_cli("definitely-not-a-command") == 2);

    // branch + files
    CHECK(run_cli("branch --n 39 --a-rel 0.5" + out) == 0);
    CHECK(fs::exists(dir / "run" / "branch.csv"));
    CHECK(fs::exists(dir / "run" / "diagram.svg"));

    // plot from the emitted csv
    CHECK(run_cli("plot --in " + (dir / "run" / "branch.csv").string() + " --axes c_vs_tphi" +
                  " --out " + (dir / "plot").string()) == 0);
    CHECK(fs::exists(dir / "plot" / "diagram.svg"));

    // lambda1 geometry
    CHECK(run_cli("lambda1-geometry --n 39" + out) == 0);
    CHECK(fs::exists(dir / "run" / "lambda_set.csv"));
    CHECK(fs::exists(dir / "run" / "lambda_set.svg"));

    // determinism: identical config implies byte-identical outputs
    CHECK(run_cli("branch --n 39 --a-rel 0.5 --out " + (dir / "d1").string()) == 0);
    CHECK(run_cli("branch --n 39 --a-rel 0.5 --out " + (dir / "d2").string()) == 0);
    CHECK(slurp(dir / "d1" / "branch.csv") == slurp(dir / "d2" / "branch.csv"));
    CHECK(slurp(dir / "d1" / "diagram.svg") == slurp(dir / "d2" / "diagram.svg"));

    // config file pipeline
    Config cfg;
    cfg.grid_n = 39;
    save_config(cfg, (dir / "config.json").string());
    CHECK(run_cli("--config " + (dir / "config.json").string() + " eig") == 0);
    {
        std::ofstream bad(dir / "bad.json");
        bad << "{\"model\":{\"p\":2}}";
    }
    CHECK(run_cli("--config " + (dir / "bad.json").string() + " eig") == 2);

    // smoke verification on a small grid
    CHECK(run_cli("verify --level smoke --n 39 --seed 5" + out) == 0);
    CHECK(fs::exists(dir / "run" / "report.txt"));

    // sweep writes per-branch files and a summary
    CHECK(run_cli("sweep --n 39 --count 3 --a-rel-min 0.3 --a-rel-max 0.7 --workers 2" + out) ==
          0);
    CHECK(fs::exists(dir / "run" / "summary.csv"));
    CHECK(fs::exists(dir / "run" / "branch_0.csv"));
    CHECK(fs::exists(dir / "run" / "branch_2.csv"));

    fs::remove_all(dir);
}

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("CRS_CLI_PATH");
    REQUIRE_MESSAGE(p != nullptr, "CRS_CLI_PATH must point at the crs binary");
    return p;
}

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    auto log = fs::temp_directory_path() / "crs_cli_out.txt";
    std::string cmd = cli_path() + " " + args + " > " + log.string() + " 2>&1";
    int raw = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(log);
    std::ostringstream buf;
    buf << in.rdbuf();
    r.output = buf.str();
    return r;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const char* name) {
    auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

// Small problem so the pipeline stays fast.
fs::path write_small_config(const char* name) {
    nlohmann::json config;
    config["synth"]["sensors"] = 6;
    config["synth"]["analytes"] = 3;
    config["synth"]["informative"] = {0, 1, 2};
    config["synth"]["mixture_max_size"] = 3;
    config["synth"]["repeats"] = 6;
    config["committee"]["threshold"] = 0.4;
    config["committee"]["repeats"] = 2;
    config["committee"]["rank_depth"] = 3;
    config["modes"]["sizes"] = {3, 1};
    config["modes"]["repeats"] = 2;
    config["theory"]["trials"] = 100;
    config["theory"]["n_max"] = 8;
    for (const char* kind : {"LR", "EN", "L-SVC", "RBF-SVC", "DT", "ET", "RF", "XGB"}) {
        config["models"][kind]["trees"] = 15;
        config["models"][kind]["max_iters"] = 120;
    }
    auto path = fs::temp_directory_path() / name;
    std::ofstream out(path);
    out << config.dump();
    return path;
}

} // namespace

TEST_CASE("default-config prints the resolved defaults") {
    auto r = run_cli("default-config");
    CHECK(r.exit_code == 0);
    auto config = nlohmann::json::parse(r.output);
    CHECK(config["seed"] == 42);
    CHECK(config["committee"]["threshold"] == 0.7);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("no-such-command").exit_code == 2);
    CHECK(run_cli("synth --bogus-flag 1").exit_code == 2);
    CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("synth is byte-deterministic per seed and validates flags") {
    auto config = write_small_config("crs_cli_synth_cfg.json");
    auto a = fresh_dir("crs_cli_synth_a");
    auto b = fresh_dir("crs_cli_synth_b");
    std::string base = "synth --config " + config.string() + " --seed 4 --out ";
    CHECK(run_cli(base + a.string()).exit_code == 0);
    CHECK(run_cli(base + b.string()).exit_code == 0);
    CHECK(read_file(a / "dataset.csv") == read_file(b / "dataset.csv"));
    CHECK(!read_file(a / "dataset.csv").empty());

    auto manifest = nlohmann::json::parse(read_file(a / "manifest.json"));
    CHECK(manifest["informative_sensors"].size() == 3);

    auto dense = fresh_dir("crs_cli_synth_dense");
    nlohmann::json no_plant;
    no_plant["synth"]["informative"] = nlohmann::json::array();
    no_plant["synth"]["sensors"] = 5;
    no_plant["synth"]["analytes"] = 3;
    no_plant["synth"]["mixture_max_size"] = 2;
    no_plant["synth"]["repeats"] = 2;
    auto np_path = fs::temp_directory_path() / "crs_cli_noplant.json";
    std::ofstream(np_path) << no_plant.dump();
    auto bad = run_cli("synth --config " + np_path.string() + " --density 7 --out " +
                       dense.string());
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("density") != std::string::npos);
}

TEST_CASE("pipeline produces a bundle and report re-renders it") {
    auto config = write_small_config("crs_cli_pipe_cfg.json");
    auto out = fresh_dir("crs_cli_pipe_out");
    auto r = run_cli("pipeline --config " + config.string() + " --seed 11 --out " + out.string());
    CHECK_MESSAGE(r.exit_code == 0, r.output);
    CHECK(fs::exists(out / "summary.json"));
    CHECK(fs::exists(out / "scorecards.json"));
    CHECK(fs::exists(out / "ranking.json"));
    CHECK(fs::exists(out / "ranking_scores.csv"));
    CHECK(fs::exists(out / "modes.json"));
    CHECK(fs::exists(out / "theory_curve.csv"));
    CHECK(fs::exists(out / "config.json"));

    auto summary_before = read_file(out / "summary.json");
    auto rep = run_cli("report " + out.string());
    CHECK(rep.exit_code == 0);
    CHECK(read_file(out / "summary.json") == summary_before);
    CHECK(rep.output.find("\"ranking\"") != std::string::npos);

    // selected sensors are the planted ones (S01..S03 lead the id list)
    auto summary = nlohmann::json::parse(summary_before);
    auto selected = summary["ranking"]["selected"].get<std::vector<std::string>>();
    REQUIRE(selected.size() >= 3);
}

TEST_CASE("pipeline failures name the stage and exit 1") {
    auto out = fresh_dir("crs_cli_pipe_fail");
    auto r = run_cli("pipeline --data /nonexistent/x.csv --out " + out.string());
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("stage") != std::string::npos);
}

TEST_CASE("theory sweep writes one curve per mu") {
    auto out = fresh_dir("crs_cli_theory_out");
    auto r = run_cli("theory --trials 100 --mu-sweep 0.62 1.0 --seed 2 --out " + out.string());
    CHECK_MESSAGE(r.exit_code == 0, r.output);
    CHECK(fs::exists(out / "theory_mu0.620.csv"));
    CHECK(fs::exists(out / "theory_mu1.000.csv"));
    auto verdicts = nlohmann::json::parse(read_file(out / "theory_verdicts.json"));
    REQUIRE(verdicts.size() == 2);
    for (const auto& v : verdicts) CHECK(v["crossings_within_one"] == true);
}

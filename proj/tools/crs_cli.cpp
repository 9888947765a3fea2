// Command-line front end for the sensor-array optimization library.
// All heavy lifting goes through the C API; this translator only maps
// flags onto the config document. Exit codes: 0 success, 1 stage
// failure, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "crs_array.h"

using nlohmann::json;

namespace {

struct CommonFlags {
    std::string data;
    std::string config_path;
    std::string out = "out";
    std::int64_t seed = -1;
    int workers = 0;
    double threshold = -1;
    std::vector<std::size_t> mode_sizes;
    std::int64_t trials = -1;
    std::vector<double> mu_sweep;
    double noise_sd = -1;
    double density = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--data", f.data, "Dataset CSV path (default: synthesize)");
    cmd->add_option("--config", f.config_path, "Config JSON file; flags override file values");
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--threshold", f.threshold, "Committee admission threshold");
    cmd->add_option("--mode-sizes", f.mode_sizes, "Green mode sensor counts");
    cmd->add_option("--trials", f.trials, "Monte Carlo trial count");
    cmd->add_option("--workers", f.workers, "Worker thread count");
}

// File config first, then flags on top.
std::string build_config(const CommonFlags& f) {
    json config = json::object();
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw CLI::ValidationError("--config", "cannot open " + f.config_path);
        in >> config;
    }
    if (!f.data.empty()) config["data"]["path"] = f.data;
    if (f.seed >= 0) config["seed"] = f.seed;
    if (f.workers > 0) config["workers"] = f.workers;
    if (f.threshold >= 0) config["committee"]["threshold"] = f.threshold;
    if (!f.mode_sizes.empty()) config["modes"]["sizes"] = f.mode_sizes;
    if (f.trials > 0) config["theory"]["trials"] = f.trials;
    if (!f.mu_sweep.empty()) config["theory"]["mu_sweep"] = f.mu_sweep;
    if (f.noise_sd >= 0) config["synth"]["noise_sd"] = f.noise_sd;
    if (f.density >= 0) config["synth"]["density"] = f.density;
    return config.dump();
}

int fail(const char* command) {
    std::cerr << "crs " << command << ": " << crs_last_error() << "\n";
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-efficient sensor-array optimization pipeline"};
    app.require_subcommand(1);

    CommonFlags synth_flags, pipeline_flags, theory_flags;
    std::string report_bundle;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset CSV + manifest");
    add_common(synth, synth_flags);
    synth->add_option("--noise-sd", synth_flags.noise_sd, "Readout noise standard deviation");
    synth->add_option("--density", synth_flags.density,
                      "Sensitivity matrix density (used when no sensors are planted)");

    auto* pipeline =
        app.add_subcommand("pipeline", "Run the full train/elect/vote/modes/theory workflow");
    add_common(pipeline, pipeline_flags);

    auto* theory = app.add_subcommand("theory", "Analytic bound vs Monte Carlo curve sweep");
    add_common(theory, theory_flags);
    theory->add_option("--mu-sweep", theory_flags.mu_sweep, "Capability means to sweep");

    auto* report = app.add_subcommand("report", "Re-render summary.json from an existing bundle");
    report->add_option("bundle", report_bundle, "Bundle directory")->required();

    auto* defaults = app.add_subcommand("default-config", "Print the fully-resolved defaults");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // 2 = usage error, 0 = help/version
    }

    try {
        if (synth->parsed()) {
            if (crs_run_synth(build_config(synth_flags).c_str(), synth_flags.out.c_str()) != CRS_OK)
                return fail("synth");
            std::cout << "wrote " << synth_flags.out << "/dataset.csv\n";
        } else if (pipeline->parsed()) {
            if (crs_run_pipeline(build_config(pipeline_flags).c_str(),
                                 pipeline_flags.out.c_str()) != CRS_OK)
                return fail("pipeline");
            std::cout << "wrote " << pipeline_flags.out << "/summary.json\n";
        } else if (theory->parsed()) {
            if (crs_run_theory(build_config(theory_flags).c_str(), theory_flags.out.c_str()) !=
                CRS_OK)
                return fail("theory");
            std::cout << "wrote " << theory_flags.out << "/theory_verdicts.json\n";
        } else if (report->parsed()) {
            char* text = nullptr;
            if (crs_run_report(report_bundle.c_str(), &text) != CRS_OK) return fail("report");
            std::cout << text;
            crs_string_free(text);
        } else if (defaults->parsed()) {
            char* text = nullptr;
            if (crs_default_config(&text) != CRS_OK) return fail("default-config");
            std::cout << text;
            crs_string_free(text);
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "crs: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

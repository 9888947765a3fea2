#include "crs/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crs/committee.hpp"
#include "crs/dataset.hpp"
#include "crs/error.hpp"
#include "crs/metrics.hpp"
#include "crs/model.hpp"
#include "crs/modes.hpp"
#include "crs/rng.hpp"
#include "crs/synth.hpp"
#include "crs/theory.hpp"

namespace crs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json scorecard_to_json(const ModelScorecard& sc) {
    return {{"accuracy", sc.accuracy},
            {"macro_precision", sc.macro_precision},
            {"macro_recall", sc.macro_recall},
            {"macro_f1", sc.macro_f1},
            {"micro_precision", sc.micro_precision},
            {"micro_recall", sc.micro_recall},
            {"micro_f1", sc.micro_f1}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    json doc;
    in >> doc;
    return doc;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void merge_into(json& base, const json& overrides, const std::string& where) {
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        if (!base.contains(it.key()))
            throw Error(ErrorCode::Parameter,
                        "unknown config key '" + where + it.key() + "'");
        if (base[it.key()].is_object() && it.value().is_object())
            merge_into(base[it.key()], it.value(), where + it.key() + ".");
        else
            base[it.key()] = it.value();
    }
}

json hyperparams_to_json(const HyperParams& p) {
    return {{"trees", p.trees},
            {"max_depth", p.max_depth},
            {"learning_rate", p.learning_rate},
            {"xgb_l2", p.xgb_l2},
            {"xgb_min_gain", p.xgb_min_gain},
            {"max_iters", p.max_iters},
            {"l1", p.l1},
            {"l2", p.l2},
            {"svm_c", p.svm_c},
            {"rbf_gamma", p.rbf_gamma},
            {"feature_subsample", p.feature_subsample},
            {"bootstrap", p.bootstrap},
            {"perm_repeats", p.perm_repeats},
            {"perm_max_rows", p.perm_max_rows}};
}

HyperParams hyperparams_from_json(ModelKind kind, const json& j) {
    HyperParams p = HyperParams::defaults(kind);
    json base = hyperparams_to_json(p);
    merge_into(base, j, "models." + kind_name(kind) + ".");
    p.trees = base["trees"].get<int>();
    p.max_depth = base["max_depth"].get<int>();
    p.learning_rate = base["learning_rate"].get<double>();
    p.xgb_l2 = base["xgb_l2"].get<double>();
    p.xgb_min_gain = base["xgb_min_gain"].get<double>();
    p.max_iters = base["max_iters"].get<int>();
    p.l1 = base["l1"].get<double>();
    p.l2 = base["l2"].get<double>();
    p.svm_c = base["svm_c"].get<double>();
    p.rbf_gamma = base["rbf_gamma"].get<double>();
    p.feature_subsample = base["feature_subsample"].get<int>();
    p.bootstrap = base["bootstrap"].get<bool>();
    p.perm_repeats = base["perm_repeats"].get<int>();
    p.perm_max_rows = base["perm_max_rows"].get<int>();
    p.validate(kind);
    return p;
}

std::map<ModelKind, HyperParams> model_overrides(const json& config) {
    std::map<ModelKind, HyperParams> out;
    for (auto it = config.at("models").begin(); it != config.at("models").end(); ++it)
        out[kind_from_name(it.key())] = hyperparams_from_json(kind_from_name(it.key()), it.value());
    return out;
}

CapabilityModel capability_from_config(const json& theory) {
    CapabilityModel model;
    model.mu_frac = theory.at("mu_frac").get<double>();
    model.sigma_frac = theory.at("sigma_frac").get<double>();
    model.m = theory.at("analytes").get<std::size_t>();
    model.epsilon = 1.0 - model.mu_frac;
    return model;
}

McEstimator estimator_from_config(const json& theory) {
    auto name = theory.at("estimator").get<std::string>();
    if (name == "all_covered") return McEstimator::AllAnalytesCovered;
    if (name == "fraction_covered") return McEstimator::FractionCovered;
    throw Error(ErrorCode::Parameter, "unknown estimator '" + name + "'");
}

struct SynthBuild {
    SensitivityMatrix D;
    LabeledDataset dataset;
    std::vector<std::string> informative_ids;
};

SynthBuild build_synthetic(const json& config) {
    const json& sy = config.at("synth");
    auto n = sy.at("sensors").get<std::size_t>();
    auto m = sy.at("analytes").get<std::size_t>();
    auto seed = config.at("seed").get<std::uint64_t>();
    auto informative = sy.at("informative").get<std::vector<std::size_t>>();

    SynthBuild out;
    if (!informative.empty())
        out.D = planted_sensitivity(n, informative, m, derive_seed(seed, {0x53594e31ull}));
    else
        out.D = synth_sensitivity(n, m, sy.at("density").get<double>(),
                                  derive_seed(seed, {0x53594e31ull}));

    auto mixtures = enumerate_mixtures(m, sy.at("mixture_max_size").get<std::size_t>(),
                                       sy.at("amount").get<double>(),
                                       sy.at("include_none").get<bool>());
    out.dataset = synth_dataset(out.D, mixtures, sy.at("repeats").get<std::size_t>(),
                                sy.at("noise_sd").get<double>(), derive_seed(seed, {0x53594e32ull}));
    for (std::size_t i : informative) out.informative_ids.push_back(out.dataset.sensor_ids[i]);
    return out;
}

LabeledDataset resolve_dataset(const json& config) {
    auto path = config.at("data").at("path").get<std::string>();
    if (!path.empty()) return load_csv(path);
    return build_synthetic(config).dataset;
}

json dataset_info(const LabeledDataset& ds, const json& config) {
    json classes = json::array();
    for (const auto& [label, count] : ds.class_counts())
        classes.push_back({{"label", label.canonical()}, {"rows", count}});
    return {{"rows", ds.rows()},
            {"sensors", ds.sensor_ids},
            {"source", config.at("data").at("path").get<std::string>().empty() ? "synthetic"
                                                                               : "csv"},
            {"classes", classes}};
}

json ranking_to_json(const SensorRanking& ranking) {
    json per_model = json::object();
    for (const auto& [kind, ranks] : ranking.per_model_ranks) per_model[kind_name(kind)] = ranks;
    json f1 = json::object();
    for (const auto& [kind, v] : ranking.model_f1) f1[kind_name(kind)] = v;
    json scores = json::object();
    for (const auto& [id, v] : ranking.weighted_scores) scores[id] = v;
    return {{"per_model_ranks", per_model},
            {"model_f1", f1},
            {"weighted_scores", scores},
            {"selected", ranking.selected}};
}

json build_summary(const json& config, const json& info, const json& scorecards,
                   const json& ranking, const json& modes, const json& theory) {
    // workers is an execution resource, not an experiment parameter;
    // keeping it out lets runs with different pools produce identical
    // summaries
    json experiment = config;
    experiment.erase("workers");
    return {{"seed", config.at("seed")},
            {"config", experiment},
            {"dataset", info},
            {"scorecards", scorecards},
            {"ranking", ranking},
            {"modes", modes},
            {"theory", theory}};
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), "[stage " + name + "] " + e.what());
    } catch (const std::exception& e) {
        throw Error(ErrorCode::Io, "[stage " + name + "] " + e.what());
    }
}

} // namespace

json default_config() {
    json models = json::object();  // per-kind overrides; empty = defaults
    return {
        {"seed", 42},
        {"workers", 1},
        {"data", {{"path", ""}}},
        {"split", {{"train_fraction", 0.8}}},
        {"committee",
         {{"threshold", 0.7}, {"metric", "min_all"}, {"rank_depth", 5}, {"repeats", 5}}},
        {"models", models},
        {"modes",
         {{"sizes", {5, 3, 1}},
          {"readout", "XGB"},
          {"repeats", 5},
          {"power", json::array()}}},
        {"theory",
         {{"mu_frac", 0.62},
          {"sigma_frac", 0.1},
          {"analytes", 6},
          {"trials", 500},
          {"target_capability", 0.9},
          {"n_max", 0},  // 0 = sensor count
          {"estimator", "all_covered"},
          {"mu_sweep", {0.4, 0.62, 0.8, 1.0}}}},
        {"synth",
         {{"sensors", 17},
          {"analytes", 6},
          {"informative", {0, 1, 2, 3, 4}},
          {"density", 0.62},
          {"mixture_max_size", 6},
          {"include_none", true},
          {"amount", 1.0},
          {"repeats", 12},
          {"noise_sd", 0.02}}},
    };
}

json resolve_config(const json& overrides) {
    json config = default_config();
    if (!overrides.is_null()) {
        if (!overrides.is_object())
            throw Error(ErrorCode::Parameter, "config must be a JSON object");
        // model overrides are open-keyed by kind name; splice them first
        json rest = overrides;
        if (rest.contains("models")) {
            for (auto it = rest["models"].begin(); it != rest["models"].end(); ++it) {
                kind_from_name(it.key());  // validates the name
                config["models"][it.key()] = it.value();
            }
            rest.erase("models");
        }
        merge_into(config, rest, "");
    }
    return config;
}

void run_synth(const json& config, const std::string& out_dir) {
    fs::create_directories(out_dir);
    auto build = stage("synth", [&] { return build_synthetic(config); });

    stage("write", [&] {
        save_csv(build.dataset, (fs::path(out_dir) / "dataset.csv").string());
        json manifest = {{"config", config},
                         {"sensor_ids", build.dataset.sensor_ids},
                         {"informative_sensors", build.informative_ids},
                         {"sensitivity", build.D.entries.data()},
                         {"sensitivity_mask", build.D.mask},
                         {"rows", build.dataset.rows()}};
        write_json(fs::path(out_dir) / "manifest.json", manifest);
        write_json(fs::path(out_dir) / "config.json", config);
        return 0;
    });
}

void run_pipeline(const json& config, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    write_json(out / "config.json", config);

    auto seed = config.at("seed").get<std::uint64_t>();
    int workers = config.at("workers").get<int>();

    LabeledDataset ds = stage("load", [&] {
        auto d = resolve_dataset(config);
        d.validate();
        return d;
    });
    json info = dataset_info(ds, config);
    write_json(out / "dataset_info.json", info);

    CommitteePolicy policy;
    policy.admission_threshold = config.at("committee").at("threshold").get<double>();
    policy.metric = config.at("committee").at("metric").get<std::string>();
    policy.rank_depth = config.at("committee").at("rank_depth").get<std::size_t>();
    policy.repeats = config.at("committee").at("repeats").get<std::size_t>();
    policy.train_fraction = config.at("split").at("train_fraction").get<double>();
    auto overrides = model_overrides(config);

    CommitteeResult committee = stage("committee", [&] {
        return run_committee(ds, policy, derive_seed(seed, {0x50495031ull}), overrides, workers);
    });

    // one representative shot re-fit for confusion matrices and raw
    // prediction dumps (plot-ready exports)
    stage("evaluation-report", [&] {
        auto [train, test] = stratified_split(
            ds, SplitSpec{policy.train_fraction, derive_seed(seed, {0x50495032ull})});
        std::ostringstream preds;
        preds << "row,truth,";
        for (ModelKind kind : kAllModelKinds) preds << kind_name(kind) << ",";
        preds << "\n";
        std::vector<std::vector<MixtureLabel>> all_preds;
        for (ModelKind kind : kAllModelKinds) {
            auto it = overrides.find(kind);
            HyperParams params = it != overrides.end() ? it->second : HyperParams::defaults(kind);
            auto model = fit_model(kind, params, train, derive_seed(seed, {0x50495033ull,
                                                                           static_cast<std::uint64_t>(kind)}));
            auto [cm, sc] = evaluate(*model, test);
            all_preds.push_back(model->predict(test.features));

            json cj = {{"kind", kind_name(kind)}, {"scorecard", scorecard_to_json(sc)}};
            json classes = json::array();
            for (const auto& c : cm.classes) classes.push_back(c.canonical());
            cj["classes"] = classes;
            cj["counts"] = cm.counts;
            write_json(out / ("confusion_" + kind_name(kind) + ".json"), cj);

            std::ostringstream csv;
            csv << "class";
            for (const auto& c : cm.classes) csv << ',' << c.canonical();
            csv << '\n';
            for (std::size_t r = 0; r < cm.size(); ++r) {
                csv << cm.classes[r].canonical();
                for (std::size_t c = 0; c < cm.size(); ++c) csv << ',' << cm.counts[r][c];
                csv << '\n';
            }
            write_text(out / ("confusion_" + kind_name(kind) + ".csv"), csv.str());

            json model_doc = model->to_json();
            write_json(out / ("model_" + kind_name(kind) + ".json"), model_doc);
        }
        for (std::size_t r = 0; r < test.rows(); ++r) {
            preds << r << ',' << test.labels[r].canonical() << ',';
            for (const auto& p : all_preds) preds << p[r].canonical() << ',';
            preds << '\n';
        }
        write_text(out / "predictions.csv", preds.str());
        return 0;
    });

    json scorecards = json::object();
    for (const auto& [kind, sc] : committee.mean_scorecards) {
        json entry = scorecard_to_json(sc);
        entry["convergence_warning"] = committee.convergence_warnings.at(kind);
        entry["admitted"] = std::find(committee.admitted.begin(), committee.admitted.end(),
                                      kind) != committee.admitted.end();
        scorecards[kind_name(kind)] = entry;
    }
    write_json(out / "scorecards.json", scorecards);

    json ranking = ranking_to_json(committee.ranking);
    // rank-frequency diagnostics (inadequate selectors by themselves;
    // exported for plotting only)
    {
        json freq = json::object();
        for (const auto& [kind, ranks] : committee.ranking.per_model_ranks)
            for (const auto& id : ranks) freq[id] = freq.value(id, 0) + 1;
        ranking["top_k_frequency"] = freq;
        write_json(out / "ranking.json", ranking);
        std::ostringstream csv;
        csv << "sensor,weighted_score\n";
        for (const auto& id : committee.ranking.selected)
            csv << id << ',' << fmt(committee.ranking.weighted_scores.at(id)) << '\n';
        write_text(out / "ranking_scores.csv", csv.str());
    }

    json modes_json = stage("modes", [&] {
        auto sizes = config.at("modes").at("sizes").get<std::vector<std::size_t>>();
        auto readout = kind_from_name(config.at("modes").at("readout").get<std::string>());
        auto repeats = config.at("modes").at("repeats").get<std::size_t>();
        auto power = config.at("modes").at("power").get<std::vector<double>>();
        auto it = overrides.find(readout);
        HyperParams readout_params =
            it != overrides.end() ? it->second : HyperParams::defaults(readout);

        auto modes = build_modes(committee.ranking, sizes, ds.sensor_ids, readout);
        json entries = json::array();
        std::ostringstream repeats_csv;
        repeats_csv << "mode,repeat,macro_f1\n";
        double blue_f1 = 0;
        for (std::size_t mi = 0; mi < modes.size(); ++mi) {
            auto scores = evaluate_mode(modes[mi], ds, repeats, derive_seed(seed, {0x50495034ull, mi}),
                                        readout_params, policy.train_fraction);
            if (mi == 0) blue_f1 = scores.mean.macro_f1;
            double savings;
            if (power.empty()) {
                savings = energy_savings(modes[mi].active_sensors.size(), ds.sensor_count());
            } else {
                std::vector<std::size_t> idx;
                for (const auto& id : modes[mi].active_sensors)
                    idx.push_back(static_cast<std::size_t>(
                        std::find(ds.sensor_ids.begin(), ds.sensor_ids.end(), id) -
                        ds.sensor_ids.begin()));
                savings = energy_savings(idx, power);
            }
            json e = {{"mode", modes[mi].name},
                      {"active_sensors", modes[mi].active_sensors},
                      {"readout", kind_name(modes[mi].readout_model_kind)},
                      {"scores", scorecard_to_json(scores.mean)},
                      {"scores_stddev", scorecard_to_json(scores.stddev)},
                      {"f1_reduction_vs_blue", f1_reduction(blue_f1, scores.mean.macro_f1)},
                      {"energy_savings", savings}};
            entries.push_back(e);
            for (std::size_t rep = 0; rep < scores.per_repeat_macro_f1.size(); ++rep)
                repeats_csv << modes[mi].name << ',' << rep << ','
                            << fmt(scores.per_repeat_macro_f1[rep]) << '\n';
        }
        write_text(out / "modes_repeats.csv", repeats_csv.str());
        json doc = {{"entries", entries}};
        write_json(out / "modes.json", doc);
        return doc;
    });

    json theory_json = stage("theory", [&] {
        const json& tc = config.at("theory");
        CapabilityModel model = capability_from_config(tc);
        auto trials = tc.at("trials").get<std::size_t>();
        auto n_max = tc.at("n_max").get<std::size_t>();
        if (n_max == 0) n_max = ds.sensor_count();

        std::vector<std::size_t> sizes;
        std::vector<double> caps;
        for (const auto& e : modes_json.at("entries")) {
            if (e.at("mode").get<std::string>() == "blue") continue;
            sizes.push_back(e.at("active_sensors").size());
            caps.push_back(e.at("scores").at("macro_f1").get<double>());
        }
        auto report = validate_green_modes(sizes, caps, model, trials,
                                           derive_seed(seed, {0x50495035ull}), n_max,
                                           tc.at("target_capability").get<double>(),
                                           estimator_from_config(tc), workers);

        std::ostringstream csv;
        csv << "n,analytic,mc_mean,mc_ci_low,mc_ci_high\n";
        for (std::size_t i = 0; i < report.curve.n_values.size(); ++i)
            csv << report.curve.n_values[i] << ',' << fmt(report.curve.analytic[i]) << ','
                << fmt(report.curve.mc_mean[i]) << ',' << fmt(report.curve.mc_ci_low[i]) << ','
                << fmt(report.curve.mc_ci_high[i]) << '\n';
        write_text(out / "theory_curve.csv", csv.str());

        json greens = json::array();
        for (const auto& g : report.green_modes)
            greens.push_back({{"sensors", g.sensors},
                              {"empirical_capability", g.empirical_capability},
                              {"above_analytic_curve", g.above_analytic_curve}});
        json doc = {{"mu_frac", model.mu_frac},
                    {"sigma_frac", model.sigma_frac},
                    {"analytes", model.m},
                    {"trials", trials},
                    {"target_capability", report.target_capability},
                    {"analytic_crossing", report.analytic_crossing},
                    {"mc_crossing", report.mc_crossing},
                    {"crossings_within_one", report.crossings_within_one},
                    {"green_modes", greens}};
        write_json(out / "theory.json", doc);
        return doc;
    });

    write_json(out / "summary.json",
               build_summary(config, info, scorecards, ranking, modes_json, theory_json));
}

void run_theory(const json& config, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    write_json(out / "config.json", config);

    const json& tc = config.at("theory");
    auto seed = config.at("seed").get<std::uint64_t>();
    int workers = config.at("workers").get<int>();
    auto trials = tc.at("trials").get<std::size_t>();
    auto n_max = tc.at("n_max").get<std::size_t>();
    if (n_max == 0) n_max = 17;
    auto sweep = tc.at("mu_sweep").get<std::vector<double>>();

    json verdicts = json::array();
    for (double mu : sweep) {
        CapabilityModel model = capability_from_config(tc);
        model.mu_frac = mu;
        model.epsilon = 1.0 - mu;
        auto report = stage("theory", [&] {
            return validate_green_modes({}, {}, model, trials,
                                        derive_seed(seed, {0x5448454full, static_cast<std::uint64_t>(mu * 1e6)}),
                                        n_max, tc.at("target_capability").get<double>(),
                                        estimator_from_config(tc), workers);
        });
        char name[64];
        std::snprintf(name, sizeof name, "theory_mu%.3f.csv", mu);
        std::ostringstream csv;
        csv << "n,analytic,mc_mean,mc_ci_low,mc_ci_high\n";
        for (std::size_t i = 0; i < report.curve.n_values.size(); ++i)
            csv << report.curve.n_values[i] << ',' << fmt(report.curve.analytic[i]) << ','
                << fmt(report.curve.mc_mean[i]) << ',' << fmt(report.curve.mc_ci_low[i]) << ','
                << fmt(report.curve.mc_ci_high[i]) << '\n';
        write_text(out / name, csv.str());
        verdicts.push_back({{"mu_frac", mu},
                            {"analytic_crossing", report.analytic_crossing},
                            {"mc_crossing", report.mc_crossing},
                            {"crossings_within_one", report.crossings_within_one}});
    }
    write_json(out / "theory_verdicts.json", verdicts);
}

std::string run_report(const std::string& bundle_dir) {
    const fs::path dir(bundle_dir);
    json config = read_json(dir / "config.json");
    json info = read_json(dir / "dataset_info.json");
    json scorecards = read_json(dir / "scorecards.json");
    json ranking = read_json(dir / "ranking.json");
    json modes = read_json(dir / "modes.json");
    json theory = read_json(dir / "theory.json");
    json summary = build_summary(config, info, scorecards, ranking, modes, theory);
    write_json(dir / "summary.json", summary);
    return summary.dump(2) + "\n";
}

} // namespace crs

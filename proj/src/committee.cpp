#include "crs/committee.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "crs/parallel.hpp"
#include "crs/rng.hpp"

namespace crs {

namespace {

double gating_metric(const ModelScorecard& sc, const CommitteePolicy& policy) {
    if (policy.metric == "min_all") return sc.min_score();
    if (policy.metric == "macro_f1") return sc.macro_f1;
    throw Error(ErrorCode::Parameter, "unknown admission metric '" + policy.metric + "'");
}

} // namespace

std::vector<ModelKind> admit(const std::map<ModelKind, ModelScorecard>& scorecards,
                             const CommitteePolicy& policy) {
    if (scorecards.empty()) throw Error(ErrorCode::Parameter, "no scorecards");
    std::vector<ModelKind> admitted;
    double best = -1;
    ModelKind best_kind = scorecards.begin()->first;
    for (const auto& [kind, sc] : scorecards) {
        double metric = gating_metric(sc, policy);
        if (metric > policy.admission_threshold) admitted.push_back(kind);
        if (metric > best) {
            best = metric;
            best_kind = kind;
        }
    }
    if (admitted.empty()) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "no model clears threshold %.3f; best is %s at %.4f",
                      policy.admission_threshold, kind_name(best_kind).c_str(), best);
        throw Error(ErrorCode::Admission, buf);
    }
    return admitted;
}

std::vector<std::string> rank_sensors(const std::vector<std::string>& sensor_ids,
                                      const std::vector<double>& importance, std::size_t k) {
    if (importance.size() != sensor_ids.size())
        throw Error(ErrorCode::Shape, "importance length != sensor count");
    if (k > sensor_ids.size())
        throw Error(ErrorCode::Parameter, "rank depth K exceeds sensor count");
    std::vector<std::size_t> order(sensor_ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // stable sort keeps sensor-id (column) order on importance ties
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return importance[a] > importance[b]; });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(sensor_ids[order[i]]);
    return out;
}

SensorRanking weighted_vote(const std::map<ModelKind, std::vector<std::string>>& per_model_ranks,
                            const std::map<ModelKind, double>& model_f1, std::size_t k) {
    if (per_model_ranks.empty()) throw Error(ErrorCode::Parameter, "no rank lists");
    double weight_sum = 0;
    for (const auto& [kind, ranks] : per_model_ranks) {
        if (ranks.size() > k)
            throw Error(ErrorCode::Parameter, "rank list longer than K");
        auto it = model_f1.find(kind);
        if (it == model_f1.end())
            throw Error(ErrorCode::Parameter, "missing F1 weight for " + kind_name(kind));
        if (it->second < 0 || it->second > 1)
            throw Error(ErrorCode::Parameter, "F1 weight outside [0,1]");
        weight_sum += it->second;
    }
    if (weight_sum <= 0) throw Error(ErrorCode::DegenerateWeights, "all F1 weights are zero");

    SensorRanking result;
    result.per_model_ranks = per_model_ranks;
    result.model_f1 = model_f1;

    // raw score of sensor i: sum over models of ((K+1) - rank) * F1;
    // sensors outside a model's top-K contribute zero
    std::map<std::string, double> raw;
    double total = 0;
    for (const auto& [kind, ranks] : per_model_ranks) {
        double f1 = model_f1.at(kind);
        for (std::size_t pos = 0; pos < ranks.size(); ++pos) {
            double contribution = static_cast<double>(k + 1 - (pos + 1)) * f1;
            raw[ranks[pos]] += contribution;
            total += contribution;
        }
    }
    if (total <= 0) throw Error(ErrorCode::DegenerateWeights, "vote total is zero");
    for (auto& [id, v] : raw) result.weighted_scores[id] = v / total;

    // descending score; ties break on ascending sensor id (the map is
    // already id-sorted, so a stable sort preserves that order)
    std::vector<std::string> order;
    for (const auto& [id, v] : result.weighted_scores) order.push_back(id);
    std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        return result.weighted_scores.at(a) > result.weighted_scores.at(b);
    });
    result.selected = std::move(order);
    return result;
}

CommitteeResult run_committee(const LabeledDataset& ds, const CommitteePolicy& policy,
                              std::uint64_t seed,
                              const std::map<ModelKind, HyperParams>& overrides, int workers) {
    if (policy.rank_depth < 1 || policy.rank_depth > ds.sensor_count())
        throw Error(ErrorCode::Parameter, "rank depth K must lie in [1, sensor count]");
    if (policy.repeats < 1) throw Error(ErrorCode::Parameter, "repeats must be >= 1");

    const std::size_t shots = policy.repeats;
    const std::size_t n_kinds = kAllModelKinds.size();

    struct ShotResult {
        ModelScorecard scorecard;
        std::vector<double> importance;
        bool converged = true;
    };
    std::vector<ShotResult> results(shots * n_kinds);

    // splits are shared within a shot, so build them up front
    std::vector<std::pair<LabeledDataset, LabeledDataset>> splits;
    splits.reserve(shots);
    for (std::size_t shot = 0; shot < shots; ++shot)
        splits.push_back(stratified_split(
            ds, SplitSpec{policy.train_fraction, derive_seed(seed, {0x53484f54ull, shot})}));

    parallel_for(shots * n_kinds, workers, [&](std::size_t task) {
        std::size_t shot = task / n_kinds;
        std::size_t ki = task % n_kinds;
        ModelKind kind = kAllModelKinds[ki];
        auto it = overrides.find(kind);
        HyperParams params = it != overrides.end() ? it->second : HyperParams::defaults(kind);
        auto model = fit_model(kind, params, splits[shot].first,
                               derive_seed(seed, {0x4649545Bull, shot, ki}));
        auto [cm, sc] = evaluate(*model, splits[shot].second);
        results[task] = {sc, model->importance(), model->converged()};
    });

    CommitteeResult out;
    out.sensor_ids = ds.sensor_ids;
    for (std::size_t ki = 0; ki < n_kinds; ++ki) {
        ModelKind kind = kAllModelKinds[ki];
        ModelScorecard mean;
        std::vector<double> imp(ds.sensor_count(), 0.0);
        bool warn = false;
        for (std::size_t shot = 0; shot < shots; ++shot) {
            const auto& r = results[shot * n_kinds + ki];
            mean.accuracy += r.scorecard.accuracy;
            mean.macro_precision += r.scorecard.macro_precision;
            mean.macro_recall += r.scorecard.macro_recall;
            mean.macro_f1 += r.scorecard.macro_f1;
            mean.micro_precision += r.scorecard.micro_precision;
            mean.micro_recall += r.scorecard.micro_recall;
            mean.micro_f1 += r.scorecard.micro_f1;
            for (std::size_t j = 0; j < imp.size(); ++j) imp[j] += r.importance[j];
            warn = warn || !r.converged;
        }
        auto denom = static_cast<double>(shots);
        mean.accuracy /= denom;
        mean.macro_precision /= denom;
        mean.macro_recall /= denom;
        mean.macro_f1 /= denom;
        mean.micro_precision /= denom;
        mean.micro_recall /= denom;
        mean.micro_f1 /= denom;
        for (double& v : imp) v /= denom;
        out.mean_scorecards[kind] = mean;
        out.mean_importance[kind] = std::move(imp);
        out.convergence_warnings[kind] = warn;
    }

    out.admitted = admit(out.mean_scorecards, policy);

    std::map<ModelKind, std::vector<std::string>> ranks;
    std::map<ModelKind, double> f1;
    for (ModelKind kind : out.admitted) {
        ranks[kind] = rank_sensors(ds.sensor_ids, out.mean_importance[kind], policy.rank_depth);
        f1[kind] = out.mean_scorecards[kind].macro_f1;
    }
    out.ranking = weighted_vote(ranks, f1, policy.rank_depth);
    return out;
}

} // namespace crs

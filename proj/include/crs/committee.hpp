#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "crs/dataset.hpp"
#include "crs/metrics.hpp"
#include "crs/model.hpp"

namespace crs {

struct CommitteePolicy {
    double admission_threshold = 0.7;
    // "min_all" gates on the minimum of the six macro/micro scores,
    // "macro_f1" on macro F1 alone.
    std::string metric = "min_all";
    std::size_t rank_depth = 5;   // K
    std::size_t repeats = 5;      // independent train/validate shots averaged
    double train_fraction = 0.8;
};

struct SensorRanking {
    std::map<ModelKind, std::vector<std::string>> per_model_ranks;  // top K each
    std::map<ModelKind, double> model_f1;
    std::map<std::string, double> weighted_scores;  // sums to 1
    std::vector<std::string> selected;              // descending score, id-order ties
};

// Every kind whose gating metric clears the threshold; an empty result
// is an admission error, not an empty committee.
std::vector<ModelKind> admit(const std::map<ModelKind, ModelScorecard>& scorecards,
                             const CommitteePolicy& policy);

// Sensors by importance descending, truncated to K; ties broken by
// sensor-id (dataset column) order.
std::vector<std::string> rank_sensors(const std::vector<std::string>& sensor_ids,
                                      const std::vector<double>& importance,
                                      std::size_t k);

// Rank-score aggregation: sensor i scores ((K+1) - rank) * F1_j summed
// over models, normalized over all sensors and models.
SensorRanking weighted_vote(const std::map<ModelKind, std::vector<std::string>>& per_model_ranks,
                            const std::map<ModelKind, double>& model_f1, std::size_t k);

struct CommitteeResult {
    std::map<ModelKind, ModelScorecard> mean_scorecards;
    std::map<ModelKind, std::vector<double>> mean_importance;
    std::map<ModelKind, bool> convergence_warnings;
    std::vector<ModelKind> admitted;
    SensorRanking ranking;
    std::vector<std::string> sensor_ids;
};

// Full election: `repeats` split/fit/evaluate shots over all eight
// kinds, importance and scorecards averaged per kind, committee
// admitted on the means, rank-weighted vote on the admitted kinds.
CommitteeResult run_committee(const LabeledDataset& ds, const CommitteePolicy& policy,
                              std::uint64_t seed,
                              const std::map<ModelKind, HyperParams>& overrides = {},
                              int workers = 1);

} // namespace crs

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crs/committee.hpp"
#include "crs/dataset.hpp"
#include "crs/metrics.hpp"
#include "crs/model.hpp"

namespace crs {

struct ModeConfig {
    std::string name;                        // "blue" or "green-k"
    std::vector<std::string> active_sensors;
    ModelKind readout_model_kind = ModelKind::XGB;
};

struct ModeScores {
    ModelScorecard mean;
    ModelScorecard stddev;
    std::vector<double> per_repeat_macro_f1;
};

struct ModeReportEntry {
    ModeConfig mode;
    ModeScores scores;
    double f1_reduction_vs_blue = 0;  // blue's own entry is 0
    double energy_savings = 0;        // fraction in [0,1], blue is 0
};

// One blue mode (all sensors) plus one green mode per requested size,
// taking prefixes of ranking.selected.
std::vector<ModeConfig> build_modes(const SensorRanking& ranking,
                                    const std::vector<std::size_t>& sizes,
                                    const std::vector<std::string>& all_sensors,
                                    ModelKind readout_kind = ModelKind::XGB);

// Per repeat: fresh stratified split, project onto active sensors,
// retrain the readout model, score the projected test set.
ModeScores evaluate_mode(const ModeConfig& mode, const LabeledDataset& ds,
                         std::size_t repeats, std::uint64_t seed,
                         const HyperParams& readout_params, double train_fraction = 0.8);

// 1 - active/total under uniform per-sensor power; the optional power
// vector switches to 1 - (active power)/(total power).
double energy_savings(std::size_t active, std::size_t total);
double energy_savings(const std::vector<std::size_t>& active_indices,
                      const std::vector<double>& sensor_power);

double f1_reduction(double blue_f1, double mode_f1);

} // namespace crs

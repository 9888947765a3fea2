#include "crs/modes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "crs/rng.hpp"

namespace crs {

std::vector<ModeConfig> build_modes(const SensorRanking& ranking,
                                    const std::vector<std::size_t>& sizes,
                                    const std::vector<std::string>& all_sensors,
                                    ModelKind readout_kind) {
    std::vector<ModeConfig> modes;
    modes.push_back({"blue", all_sensors, readout_kind});
    for (std::size_t size : sizes) {
        if (size == 0) throw Error(ErrorCode::Parameter, "green mode size must be >= 1");
        if (size > all_sensors.size())
            throw Error(ErrorCode::Parameter, "green mode size exceeds sensor count");
        if (size > ranking.selected.size())
            throw Error(ErrorCode::Parameter, "green mode size exceeds ranked sensor count");
        char name[32];
        std::snprintf(name, sizeof name, "green-%zu", size);
        std::vector<std::string> active(ranking.selected.begin(),
                                        ranking.selected.begin() + static_cast<std::ptrdiff_t>(size));
        modes.push_back({name, std::move(active), readout_kind});
    }
    return modes;
}

ModeScores evaluate_mode(const ModeConfig& mode, const LabeledDataset& ds, std::size_t repeats,
                         std::uint64_t seed, const HyperParams& readout_params,
                         double train_fraction) {
    if (repeats < 1) throw Error(ErrorCode::Parameter, "repeats must be >= 1");
    LabeledDataset projected = project_sensors(ds, mode.active_sensors);

    std::vector<ModelScorecard> cards;
    cards.reserve(repeats);
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        auto [train, test] = stratified_split(
            projected, SplitSpec{train_fraction, derive_seed(seed, {0x4d4f4445ull, rep})});
        auto model = fit_model(mode.readout_model_kind, readout_params, train,
                               derive_seed(seed, {0x524f5554ull, rep}));
        cards.push_back(evaluate(*model, test).second);
    }

    auto field = [](ModelScorecard& sc, int i) -> double& {
        double* fields[] = {&sc.accuracy,        &sc.macro_precision, &sc.macro_recall,
                            &sc.macro_f1,        &sc.micro_precision, &sc.micro_recall,
                            &sc.micro_f1};
        return *fields[i];
    };

    ModeScores out;
    for (int i = 0; i < 7; ++i) {
        double mean = 0;
        for (auto& c : cards) mean += field(c, i);
        mean /= static_cast<double>(cards.size());
        double var = 0;
        for (auto& c : cards) {
            double d = field(c, i) - mean;
            var += d * d;
        }
        var /= static_cast<double>(cards.size());
        field(out.mean, i) = mean;
        field(out.stddev, i) = std::sqrt(var);
    }
    for (auto& c : cards) out.per_repeat_macro_f1.push_back(c.macro_f1);
    return out;
}

double energy_savings(std::size_t active, std::size_t total) {
    if (active < 1 || active > total)
        throw Error(ErrorCode::Parameter, "active sensor count must lie in [1, total]");
    return 1.0 - static_cast<double>(active) / static_cast<double>(total);
}

double energy_savings(const std::vector<std::size_t>& active_indices,
                      const std::vector<double>& sensor_power) {
    if (sensor_power.empty()) throw Error(ErrorCode::Parameter, "empty power vector");
    double total = 0;
    for (double p : sensor_power) {
        if (p < 0) throw Error(ErrorCode::Parameter, "negative sensor power");
        total += p;
    }
    if (total <= 0) throw Error(ErrorCode::Parameter, "total power must be > 0");
    double active = 0;
    for (std::size_t i : active_indices) {
        if (i >= sensor_power.size())
            throw Error(ErrorCode::Parameter, "active sensor index out of range");
        active += sensor_power[i];
    }
    return 1.0 - active / total;
}

double f1_reduction(double blue_f1, double mode_f1) {
    if (blue_f1 < 0 || blue_f1 > 1 || mode_f1 < 0 || mode_f1 > 1)
        throw Error(ErrorCode::Parameter, "F1 scores must lie in [0,1]");
    return blue_f1 - mode_f1;
}

} // namespace crs

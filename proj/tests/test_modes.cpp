#include <cmath>

#include "doctest.h"

#include "crs/error.hpp"
#include "crs/modes.hpp"
#include "crs/synth.hpp"

using namespace crs;

namespace {

SensorRanking fake_ranking(std::vector<std::string> selected) {
    SensorRanking r;
    r.selected = std::move(selected);
    double share = 1.0 / static_cast<double>(r.selected.size());
    for (const auto& id : r.selected) r.weighted_scores[id] = share;
    return r;
}

LabeledDataset planted_dataset(std::uint64_t seed, double noise = 0.02) {
    auto D = planted_sensitivity(8, {0, 1, 2}, 3, seed);
    auto mixtures = enumerate_mixtures(3, 3, 1.0, true);
    return synth_dataset(D, mixtures, 8, noise, seed + 1);
}

HyperParams cheap_xgb() {
    auto p = HyperParams::defaults(ModelKind::XGB);
    p.trees = 25;
    return p;
}

// Sensor 0 responds identically to the first two analytes, so the
// mixtures {B} vs {T} and {B,E} vs {T,E} collide on its readout alone;
// sensors 1 and 2 disambiguate. Sensors 3..7 are dead.
LabeledDataset ambiguous_first_sensor_dataset(std::uint64_t seed) {
    SensitivityMatrix D{Matrix(8, 3), std::vector<std::uint8_t>(24, 0)};
    const double rows[3][3] = {{1.0, 1.0, 0.7}, {0.6, 1.3, 0.9}, {1.2, 0.5, 1.4}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            D.entries(i, j) = rows[i][j];
            D.mask[i * 3 + j] = 1;
        }
    auto mixtures = enumerate_mixtures(3, 3, 1.0, true);
    return synth_dataset(D, mixtures, 8, 0.02, seed);
}

} // namespace

TEST_CASE("build_modes yields blue plus one green per size, prefix rule") {
    auto ranking = fake_ranking({"s4", "s9", "s2", "s7", "s1"});
    std::vector<std::string> all{"s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9"};
    auto modes = build_modes(ranking, {5, 3, 1}, all);
    REQUIRE(modes.size() == 4);
    CHECK(modes[0].name == "blue");
    CHECK(modes[0].active_sensors == all);
    CHECK(modes[1].name == "green-5");
    CHECK(modes[1].active_sensors ==
          std::vector<std::string>{"s4", "s9", "s2", "s7", "s1"});
    CHECK(modes[2].name == "green-3");
    CHECK(modes[2].active_sensors == std::vector<std::string>{"s4", "s9", "s2"});
    CHECK(modes[3].name == "green-1");
    CHECK(modes[3].active_sensors == std::vector<std::string>{"s4"});

    CHECK_THROWS_AS(build_modes(ranking, {0}, all), Error);
    CHECK_THROWS_AS(build_modes(ranking, {10}, all), Error);
}

TEST_CASE("energy savings match the published 17-sensor table") {
    CHECK(energy_savings(5, 17) == doctest::Approx(0.706).epsilon(5e-4));
    CHECK(energy_savings(3, 17) == doctest::Approx(0.824).epsilon(5e-4));
    CHECK(energy_savings(17, 17) == 0.0);
    CHECK_THROWS_AS(energy_savings(0, 17), Error);
    CHECK_THROWS_AS(energy_savings(18, 17), Error);

    // strictly decreasing in the active count, exact rational arithmetic
    for (std::size_t k = 1; k < 17; ++k) {
        CHECK(energy_savings(k, 17) > energy_savings(k + 1, 17));
        CHECK(std::abs(energy_savings(k, 17) - (1.0 - static_cast<double>(k) / 17.0)) < 1e-12);
    }
}

TEST_CASE("power-weighted savings use the supplied vector") {
    std::vector<double> power{4.0, 1.0, 1.0, 2.0};
    // active sensors 1 and 2 burn 2 of 8 units
    CHECK(energy_savings({1, 2}, power) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(energy_savings({0, 1, 2, 3}, power) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(energy_savings({5}, power), Error);
    CHECK_THROWS_AS(energy_savings({0}, std::vector<double>{}), Error);
}

TEST_CASE("f1 reduction is a plain difference, sign preserved") {
    CHECK(f1_reduction(0.90, 0.84) == doctest::Approx(0.06).epsilon(1e-12));
    CHECK(f1_reduction(0.90, 0.77) == doctest::Approx(0.13).epsilon(1e-12));
    CHECK(f1_reduction(0.5, 0.5) == 0.0);
    CHECK(f1_reduction(0.8, 0.9) == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK_THROWS_AS(f1_reduction(1.5, 0.5), Error);
}

TEST_CASE("blue mode on clean planted data scores high") {
    auto ds = planted_dataset(3);
    ModeConfig blue{"blue", ds.sensor_ids, ModelKind::XGB};
    auto scores = evaluate_mode(blue, ds, 3, 17, cheap_xgb());
    CHECK(scores.per_repeat_macro_f1.size() == 3);
    CHECK(scores.mean.macro_f1 > 0.9);
    CHECK(scores.stddev.macro_f1 >= 0.0);
}

TEST_CASE("green mode on the planted set stays close to blue") {
    auto ds = planted_dataset(7);
    ModeConfig blue{"blue", ds.sensor_ids, ModelKind::XGB};
    ModeConfig green{"green-3",
                     {ds.sensor_ids[0], ds.sensor_ids[1], ds.sensor_ids[2]},
                     ModelKind::XGB};
    auto b = evaluate_mode(blue, ds, 3, 5, cheap_xgb());
    auto g = evaluate_mode(green, ds, 3, 5, cheap_xgb());
    CHECK(f1_reduction(b.mean.macro_f1, g.mean.macro_f1) < 0.05);
}

TEST_CASE("a single ambiguous sensor cannot identify eight mixture classes") {
    auto ds = ambiguous_first_sensor_dataset(13);
    ModeConfig one{"green-1", {ds.sensor_ids[0]}, ModelKind::XGB};
    ModeConfig all{"blue", ds.sensor_ids, ModelKind::XGB};
    auto single = evaluate_mode(one, ds, 3, 9, cheap_xgb());
    auto blue = evaluate_mode(all, ds, 3, 9, cheap_xgb());
    // four of the eight classes collide pairwise on sensor 0's readout
    CHECK(single.mean.macro_f1 < 0.85);
    CHECK(blue.mean.macro_f1 > 0.9);
    CHECK(blue.mean.macro_f1 - single.mean.macro_f1 > 0.1);
}

TEST_CASE("inactive columns cannot influence a green mode") {
    auto ds = planted_dataset(19);
    auto perturbed = ds;
    for (std::size_t r = 0; r < perturbed.rows(); ++r)
        perturbed.features(r, 7) += 100.0;  // sensor 8 is inactive below

    ModeConfig green{"green-3",
                     {ds.sensor_ids[0], ds.sensor_ids[1], ds.sensor_ids[2]},
                     ModelKind::XGB};
    auto a = evaluate_mode(green, ds, 2, 23, cheap_xgb());
    auto b = evaluate_mode(green, perturbed, 2, 23, cheap_xgb());
    CHECK(a.mean.macro_f1 == b.mean.macro_f1);
    CHECK(a.per_repeat_macro_f1 == b.per_repeat_macro_f1);
}

TEST_CASE("mode evaluation is deterministic per seed") {
    auto ds = planted_dataset(29);
    ModeConfig blue{"blue", ds.sensor_ids, ModelKind::XGB};
    auto a = evaluate_mode(blue, ds, 2, 31, cheap_xgb());
    auto b = evaluate_mode(blue, ds, 2, 31, cheap_xgb());
    CHECK(a.per_repeat_macro_f1 == b.per_repeat_macro_f1);
    CHECK(a.mean.accuracy == b.mean.accuracy);
}

TEST_CASE("green F1 tends upward with more informative sensors kept active") {
    // sign test over seeds: green-3 (full informative set) vs green-1
    int wins = 0, losses = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto ds = ambiguous_first_sensor_dataset(100 + seed);
        ModeConfig g3{"green-3",
                      {ds.sensor_ids[0], ds.sensor_ids[1], ds.sensor_ids[2]},
                      ModelKind::XGB};
        ModeConfig g1{"green-1", {ds.sensor_ids[0]}, ModelKind::XGB};
        auto a = evaluate_mode(g3, ds, 1, seed, cheap_xgb());
        auto b = evaluate_mode(g1, ds, 1, seed, cheap_xgb());
        if (a.mean.macro_f1 > b.mean.macro_f1) ++wins;
        if (a.mean.macro_f1 < b.mean.macro_f1) ++losses;
    }
    // one-sided binomial bound at 95% for 20 trials
    CHECK(wins >= 15);
    CHECK(losses <= 5);
}

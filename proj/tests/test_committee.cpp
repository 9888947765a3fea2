#include <cmath>

#include "doctest.h"

#include "crs/committee.hpp"
#include "crs/error.hpp"
#include "crs/synth.hpp"

using namespace crs;

namespace {

ModelScorecard card(double v) {
    ModelScorecard sc;
    sc.accuracy = sc.macro_precision = sc.macro_recall = sc.macro_f1 = v;
    sc.micro_precision = sc.micro_recall = sc.micro_f1 = v;
    return sc;
}

LabeledDataset planted_dataset(std::uint64_t seed) {
    auto D = planted_sensitivity(8, {0, 1, 2}, 3, seed);
    auto mixtures = enumerate_mixtures(3, 3, 1.0, true);
    return synth_dataset(D, mixtures, 8, 0.02, seed + 1);
}

std::map<ModelKind, HyperParams> cheap_overrides() {
    std::map<ModelKind, HyperParams> out;
    for (ModelKind kind : kAllModelKinds) {
        auto p = HyperParams::defaults(kind);
        p.trees = 20;
        p.max_iters = 150;
        p.perm_max_rows = 60;
        out[kind] = p;
    }
    return out;
}

} // namespace

TEST_CASE("admission keeps exactly the kinds above the threshold") {
    std::map<ModelKind, ModelScorecard> cards;
    cards[ModelKind::ET] = card(0.95);
    cards[ModelKind::RF] = card(0.93);
    cards[ModelKind::LR] = card(0.55);
    cards[ModelKind::DT] = card(0.70);  // threshold is strict: > not >=

    CommitteePolicy policy;
    policy.admission_threshold = 0.7;
    auto admitted = admit(cards, policy);
    CHECK(admitted == std::vector<ModelKind>{ModelKind::ET, ModelKind::RF});
}

TEST_CASE("min_all gating uses the weakest of the six scores") {
    std::map<ModelKind, ModelScorecard> cards;
    auto sc = card(0.9);
    sc.macro_precision = 0.6;  // drags min below the bar
    cards[ModelKind::RF] = sc;
    cards[ModelKind::ET] = card(0.8);

    CommitteePolicy min_all;
    min_all.admission_threshold = 0.7;
    CHECK(admit(cards, min_all) == std::vector<ModelKind>{ModelKind::ET});

    CommitteePolicy by_f1 = min_all;
    by_f1.metric = "macro_f1";
    CHECK(admit(cards, by_f1) == std::vector<ModelKind>{ModelKind::ET, ModelKind::RF});
}

TEST_CASE("an empty committee is an admission error naming the best score") {
    std::map<ModelKind, ModelScorecard> cards;
    cards[ModelKind::LR] = card(0.4);
    cards[ModelKind::DT] = card(0.55);
    CommitteePolicy policy;
    policy.admission_threshold = 0.9;
    CHECK_THROWS_WITH_AS(admit(cards, policy), doctest::Contains("0.55"), Error);
}

TEST_CASE("rank_sensors sorts by importance with id-order tie break") {
    std::vector<std::string> ids{"a", "b", "c", "d"};
    std::vector<double> imp{0.1, 0.4, 0.4, 0.1};
    CHECK(rank_sensors(ids, imp, 3) == std::vector<std::string>{"b", "c", "a"});
    CHECK(rank_sensors(ids, imp, 4) == std::vector<std::string>{"b", "c", "a", "d"});
    CHECK_THROWS_AS(rank_sensors(ids, imp, 10), Error);
    CHECK_THROWS_AS(rank_sensors(ids, {0.1, 0.9}, 2), Error);
}

TEST_CASE("weighted vote reproduces the worked two-model example") {
    // Two models, K = 5. Model A (F1 0.9) ranks s1..s5; model B (F1 0.8)
    // ranks s2,s1,s6,s4,s5. Hand-computed normalized scores.
    std::map<ModelKind, std::vector<std::string>> ranks;
    ranks[ModelKind::ET] = {"s1", "s2", "s3", "s4", "s5"};
    ranks[ModelKind::RF] = {"s2", "s1", "s6", "s4", "s5"};
    std::map<ModelKind, double> f1{{ModelKind::ET, 0.9}, {ModelKind::RF, 0.8}};

    auto vote = weighted_vote(ranks, f1, 5);
    double total = 0;
    for (const auto& [id, s] : vote.weighted_scores) total += s;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    // raw scores: s1 = 5*0.9 + 4*0.8 = 7.7, s2 = 4*0.9 + 5*0.8 = 7.6,
    // s3 = 2.7, s4 = 2*1.7 = 3.4, s5 = 1.7, s6 = 2.4; raw total 25.5
    CHECK(vote.weighted_scores.at("s1") == doctest::Approx(7.7 / 25.5).epsilon(1e-12));
    CHECK(vote.weighted_scores.at("s2") == doctest::Approx(7.6 / 25.5).epsilon(1e-12));
    CHECK(vote.weighted_scores.at("s6") == doctest::Approx(2.4 / 25.5).epsilon(1e-12));
    CHECK(vote.selected ==
          std::vector<std::string>{"s1", "s2", "s4", "s3", "s6", "s5"});
}

TEST_CASE("three-sensor hand-arithmetic vote oracle") {
    // F1 0.8 and 0.6, K = 3, ranks (s1,s2,s3) and (s2,s1,s3):
    // raw s1 = 3*0.8 + 2*0.6 = 3.6, s2 = 3.4, s3 = 1.4; total 8.4.
    std::map<ModelKind, std::vector<std::string>> ranks;
    ranks[ModelKind::ET] = {"s1", "s2", "s3"};
    ranks[ModelKind::RF] = {"s2", "s1", "s3"};
    std::map<ModelKind, double> f1{{ModelKind::ET, 0.8}, {ModelKind::RF, 0.6}};
    auto vote = weighted_vote(ranks, f1, 3);
    CHECK(vote.weighted_scores.at("s1") == doctest::Approx(0.4286).epsilon(1e-3));
    CHECK(vote.weighted_scores.at("s2") == doctest::Approx(0.4048).epsilon(1e-3));
    CHECK(vote.weighted_scores.at("s3") == doctest::Approx(0.1667).epsilon(1e-3));
    CHECK(vote.selected == std::vector<std::string>{"s1", "s2", "s3"});
}

TEST_CASE("weighted vote breaks score ties by sensor id") {
    std::map<ModelKind, std::vector<std::string>> ranks;
    ranks[ModelKind::ET] = {"z", "a"};
    ranks[ModelKind::RF] = {"a", "z"};
    std::map<ModelKind, double> f1{{ModelKind::ET, 0.5}, {ModelKind::RF, 0.5}};
    auto vote = weighted_vote(ranks, f1, 2);
    CHECK(vote.weighted_scores.at("a") == doctest::Approx(vote.weighted_scores.at("z")));
    CHECK(vote.selected == std::vector<std::string>{"a", "z"});
}

TEST_CASE("weighted vote rejects degenerate inputs") {
    std::map<ModelKind, std::vector<std::string>> ranks;
    std::map<ModelKind, double> f1;
    CHECK_THROWS_AS(weighted_vote(ranks, f1, 5), Error);

    ranks[ModelKind::ET] = {"s1"};
    f1[ModelKind::ET] = 0.0;
    CHECK_THROWS_AS(weighted_vote(ranks, f1, 5), Error);
}

TEST_CASE("the full election finds the planted sensors") {
    auto ds = planted_dataset(11);
    CommitteePolicy policy;
    policy.admission_threshold = 0.5;
    policy.rank_depth = 3;
    policy.repeats = 2;
    auto result = run_committee(ds, policy, 77, cheap_overrides());

    REQUIRE(!result.admitted.empty());
    REQUIRE(result.ranking.selected.size() >= 3);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& id = result.ranking.selected[i];
        bool planted = id == ds.sensor_ids[0] || id == ds.sensor_ids[1] || id == ds.sensor_ids[2];
        CAPTURE(id);
        CHECK(planted);
    }
    double total = 0;
    for (const auto& [id, s] : result.ranking.weighted_scores) total += s;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("election results are identical across worker counts") {
    auto ds = planted_dataset(19);
    CommitteePolicy policy;
    policy.admission_threshold = 0.4;
    policy.rank_depth = 3;
    policy.repeats = 2;
    auto one = run_committee(ds, policy, 5, cheap_overrides(), 1);
    auto four = run_committee(ds, policy, 5, cheap_overrides(), 4);
    CHECK(one.admitted == four.admitted);
    CHECK(one.ranking.selected == four.ranking.selected);
    CHECK(one.ranking.weighted_scores == four.ranking.weighted_scores);
    for (ModelKind kind : kAllModelKinds) {
        CHECK(one.mean_scorecards.at(kind).macro_f1 == four.mean_scorecards.at(kind).macro_f1);
        CHECK(one.mean_importance.at(kind) == four.mean_importance.at(kind));
    }
}

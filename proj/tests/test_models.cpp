#include <cmath>

#include "doctest.h"

#include <nlohmann/json.hpp>

#include "crs/error.hpp"
#include "crs/linear_objective.hpp"
#include "crs/model.hpp"
#include "crs/rng.hpp"
#include "crs/synth.hpp"

using namespace crs;

namespace {

// Small learnable problem: 6 sensors, the first 3 planted, 3 analytes,
// 8 mixture classes, low noise.
LabeledDataset toy_dataset(std::uint64_t seed, std::size_t repeats = 10) {
    auto D = planted_sensitivity(6, {0, 1, 2}, 3, seed);
    auto mixtures = enumerate_mixtures(3, 3, 1.0, true);
    return synth_dataset(D, mixtures, repeats, 0.02, seed + 1);
}

HyperParams quick_params(ModelKind kind) {
    auto p = HyperParams::defaults(kind);
    p.trees = 30;
    p.max_iters = 300;
    return p;
}

double train_accuracy(const Model& model, const LabeledDataset& ds) {
    auto pred = model.predict(ds.features);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == ds.labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

} // namespace

TEST_CASE("every kind fits the toy problem and reports a unit-sum importance") {
    auto ds = toy_dataset(3);
    for (ModelKind kind : kAllModelKinds) {
        CAPTURE(kind_name(kind));
        auto model = fit_model(kind, quick_params(kind), ds, 42);
        CHECK(model->kind() == kind);
        CHECK(model->classes().size() == 8);
        CHECK(model->sensor_ids() == ds.sensor_ids);

        const auto& imp = model->importance();
        REQUIRE(imp.size() == ds.sensor_count());
        double sum = 0;
        for (double v : imp) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

        CHECK(train_accuracy(*model, ds) > 0.6);
    }
}

TEST_CASE("fitting is deterministic per seed") {
    auto ds = toy_dataset(5);
    for (ModelKind kind : kAllModelKinds) {
        CAPTURE(kind_name(kind));
        auto a = fit_model(kind, quick_params(kind), ds, 7);
        auto b = fit_model(kind, quick_params(kind), ds, 7);
        CHECK(a->predict(ds.features) == b->predict(ds.features));
        CHECK(a->importance() == b->importance());
    }
}

TEST_CASE("serialization round-trips predictions for every kind") {
    auto ds = toy_dataset(9, 6);
    for (ModelKind kind : kAllModelKinds) {
        CAPTURE(kind_name(kind));
        auto model = fit_model(kind, quick_params(kind), ds, 11);
        auto doc = model->to_json();
        auto back = model_from_json(doc);
        CHECK(back->kind() == kind);
        CHECK(back->predict(ds.features) == model->predict(ds.features));
        CHECK(back->importance().size() == model->importance().size());
        for (std::size_t i = 0; i < model->importance().size(); ++i)
            CHECK(back->importance()[i] == doctest::Approx(model->importance()[i]).epsilon(1e-12));
    }
}

TEST_CASE("elastic net with zero l1 matches plain logistic regression") {
    auto ds = toy_dataset(13);
    auto p = quick_params(ModelKind::LR);
    auto pe = quick_params(ModelKind::EN);
    pe.l1 = 0.0;
    pe.l2 = p.l2;
    auto lr = fit_model(ModelKind::LR, p, ds, 21);
    auto en = fit_model(ModelKind::EN, pe, ds, 21);
    CHECK(lr->predict(ds.features) == en->predict(ds.features));
}

TEST_CASE("single-tree forest without resampling equals the plain decision tree") {
    auto ds = toy_dataset(17);
    auto pt = quick_params(ModelKind::DT);
    auto pf = quick_params(ModelKind::RF);
    pf.trees = 1;
    pf.bootstrap = false;
    pf.feature_subsample = static_cast<int>(ds.sensor_count());
    auto dt = fit_model(ModelKind::DT, pt, ds, 2);
    auto rf = fit_model(ModelKind::RF, pf, ds, 2);
    CHECK(dt->predict(ds.features) == rf->predict(ds.features));
}

TEST_CASE("boosting training loss never increases") {
    auto ds = toy_dataset(23);
    auto p = quick_params(ModelKind::XGB);
    p.trees = 25;
    auto model = fit_model(ModelKind::XGB, p, ds, 5);
    auto loss = model->to_json().at("training_loss").get<std::vector<double>>();
    REQUIRE(loss.size() == 26);
    for (std::size_t i = 1; i < loss.size(); ++i) CHECK(loss[i] <= loss[i - 1] + 1e-9);
    CHECK(loss.back() < loss.front());
}

TEST_CASE("analytic gradients agree with central differences") {
    Rng rng(99);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix X(12, 4);
    std::vector<int> y;
    for (std::size_t i = 0; i < 12; ++i) {
        for (std::size_t j = 0; j < 4; ++j) X(i, j) = gauss(rng);
        y.push_back(i % 2 == 0 ? 1 : -1);
    }
    std::vector<double> w{0.3, -0.7, 0.15, 0.0};
    double b = 0.2;
    const double h = 1e-6;

    auto check_grad = [&](auto objective) {
        auto vg = objective(w, b);
        for (std::size_t j = 0; j < w.size(); ++j) {
            auto wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            double fd = (objective(wp, b).value - objective(wm, b).value) / (2 * h);
            CHECK(vg.grad_w[j] == doctest::Approx(fd).epsilon(1e-4));
        }
        double fd_b = (objective(w, b + h).value - objective(w, b - h).value) / (2 * h);
        CHECK(vg.grad_b == doctest::Approx(fd_b).epsilon(1e-4));
    };

    check_grad([&](const std::vector<double>& ww, double bb) {
        return linear::logistic_objective(X, y, ww, bb, 0.01);
    });
    // subgradient check away from w = 0 entries only
    std::vector<double> w_nz{0.3, -0.7, 0.15, 0.4};
    auto saved = w;
    w = w_nz;
    check_grad([&](const std::vector<double>& ww, double bb) {
        return linear::elastic_net_objective(X, y, ww, bb, 0.05, 0.01);
    });
    check_grad([&](const std::vector<double>& ww, double bb) {
        return linear::hinge_objective(X, y, ww, bb, 0.01, 1.0);
    });
    w = saved;
}

TEST_CASE("evaluate agrees with the separate confusion and score calls") {
    auto ds = toy_dataset(31);
    auto model = fit_model(ModelKind::DT, quick_params(ModelKind::DT), ds, 1);
    auto [cm, sc] = evaluate(*model, ds);
    auto direct = score(confusion(ds.labels, model->predict(ds.features)));
    CHECK(sc.macro_f1 == direct.macro_f1);
    CHECK(sc.accuracy == direct.accuracy);
    CHECK(cm.size() == 8);
}

TEST_CASE("permutation importance prefers the planted sensors") {
    auto ds = toy_dataset(37, 12);
    auto model = fit_model(ModelKind::RF, quick_params(ModelKind::RF), ds, 3);
    auto imp = permutation_importance(*model, ds, 5, 4);
    REQUIRE(imp.size() == 6);
    double sum = 0;
    for (double v : imp) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    double planted = imp[0] + imp[1] + imp[2];
    CHECK(planted > 0.8);
    CHECK(permutation_importance(*model, ds, 5, 4) == imp);
}

TEST_CASE("degenerate training data is rejected") {
    LabeledDataset empty;
    empty.sensor_ids = {"s1"};
    empty.features = Matrix(0, 1);
    CHECK_THROWS_AS(fit_model(ModelKind::DT, HyperParams::defaults(ModelKind::DT), empty, 1),
                    Error);

    auto ds = toy_dataset(41, 2);
    LabeledDataset one_class;
    one_class.sensor_ids = ds.sensor_ids;
    one_class.features = Matrix(4, ds.sensor_count());
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < ds.sensor_count(); ++j)
            one_class.features(i, j) = ds.features(i, j);
        one_class.labels.push_back(MixtureLabel::parse("B"));
    }
    CHECK_THROWS_AS(
        fit_model(ModelKind::LR, HyperParams::defaults(ModelKind::LR), one_class, 1), Error);
}

TEST_CASE("hyperparameter validation catches out-of-range values") {
    auto p = HyperParams::defaults(ModelKind::RF);
    p.trees = 0;
    CHECK_THROWS_AS(p.validate(ModelKind::RF), Error);

    auto px = HyperParams::defaults(ModelKind::XGB);
    px.learning_rate = 0.0;
    CHECK_THROWS_AS(px.validate(ModelKind::XGB), Error);

    auto ps = HyperParams::defaults(ModelKind::RbfSVC);
    ps.svm_c = -1.0;
    CHECK_THROWS_AS(ps.validate(ModelKind::RbfSVC), Error);

    auto pe = HyperParams::defaults(ModelKind::EN);
    pe.l1 = -0.5;
    CHECK_THROWS_AS(pe.validate(ModelKind::EN), Error);
}

TEST_CASE("kind names round-trip") {
    for (ModelKind kind : kAllModelKinds) CHECK(kind_from_name(kind_name(kind)) == kind);
    CHECK_THROWS_AS(kind_from_name("GBM"), Error);
}

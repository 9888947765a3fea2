#include "crs/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "crs/rng.hpp"
#include "models_internal.hpp"

namespace crs {

std::string kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::LR: return "LR";
        case ModelKind::EN: return "EN";
        case ModelKind::LSVC: return "L-SVC";
        case ModelKind::RbfSVC: return "RBF-SVC";
        case ModelKind::DT: return "DT";
        case ModelKind::ET: return "ET";
        case ModelKind::RF: return "RF";
        case ModelKind::XGB: return "XGB";
    }
    throw Error(ErrorCode::Parameter, "unknown model kind");
}

ModelKind kind_from_name(const std::string& name) {
    for (ModelKind k : kAllModelKinds)
        if (kind_name(k) == name) return k;
    throw Error(ErrorCode::Parameter, "unknown model kind '" + name + "'");
}

HyperParams HyperParams::defaults(ModelKind kind) {
    HyperParams p;
    switch (kind) {
        case ModelKind::LR:
        case ModelKind::EN:
            p.l2 = 1e-4;
            break;
        case ModelKind::LSVC:
            p.l2 = 1e-2;
            break;
        case ModelKind::RbfSVC:
            p.svm_c = 10.0;
            break;
        default:
            break;
    }
    if (kind == ModelKind::EN) p.l1 = 1e-4;
    return p;
}

void HyperParams::validate(ModelKind kind) const {
    if (trees < 1) throw Error(ErrorCode::Parameter, "trees must be >= 1");
    if (max_depth < 0) throw Error(ErrorCode::Parameter, "max_depth must be >= 0");
    if (!(learning_rate > 0 && learning_rate <= 1))
        throw Error(ErrorCode::Parameter, "learning_rate must lie in (0,1]");
    if (max_iters < 1) throw Error(ErrorCode::Parameter, "max_iters must be >= 1");
    if (l1 < 0 || l2 < 0) throw Error(ErrorCode::Parameter, "regularization must be >= 0");
    if (svm_c <= 0) throw Error(ErrorCode::Parameter, "svm_c must be > 0");
    if (rbf_gamma < 0) throw Error(ErrorCode::Parameter, "rbf_gamma must be >= 0");
    if (xgb_l2 < 0) throw Error(ErrorCode::Parameter, "xgb_l2 must be >= 0");
    if (xgb_min_gain < 0) throw Error(ErrorCode::Parameter, "xgb_min_gain must be >= 0");
    if (perm_repeats < 1) throw Error(ErrorCode::Parameter, "perm_repeats must be >= 1");
    if (perm_max_rows < 2) throw Error(ErrorCode::Parameter, "perm_max_rows must be >= 2");
    if (kind == ModelKind::RF && feature_subsample == 0)
        throw Error(ErrorCode::Parameter, "feature_subsample must be -1 or >= 1");
}

std::unique_ptr<Model> fit_model(ModelKind kind, const HyperParams& params,
                                 const LabeledDataset& train, std::uint64_t seed) {
    params.validate(kind);
    train.validate();
    if (train.rows() == 0) throw Error(ErrorCode::DegenerateData, "empty training set");
    std::set<MixtureLabel> distinct(train.labels.begin(), train.labels.end());
    if (distinct.size() < 2)
        throw Error(ErrorCode::DegenerateData, "training set has a single class");

    switch (kind) {
        case ModelKind::LR:
        case ModelKind::EN:
        case ModelKind::LSVC:
            return detail::fit_linear(kind, params, train, seed);
        case ModelKind::RbfSVC:
            return detail::fit_rbf_svc(params, train, seed);
        case ModelKind::DT:
        case ModelKind::ET:
        case ModelKind::RF:
            return detail::fit_tree_ensemble(kind, params, train, seed);
        case ModelKind::XGB:
            return detail::fit_xgb(params, train, seed);
    }
    throw Error(ErrorCode::Parameter, "unknown model kind");
}

std::unique_ptr<Model> model_from_json(const nlohmann::json& doc) {
    if (doc.value("format_version", 0) != 1)
        throw Error(ErrorCode::Parse, "unsupported model format version");
    ModelKind kind = kind_from_name(doc.at("kind").get<std::string>());
    switch (kind) {
        case ModelKind::LR:
        case ModelKind::EN:
        case ModelKind::LSVC:
            return detail::linear_from_json(doc);
        case ModelKind::RbfSVC:
            return detail::rbf_svc_from_json(doc);
        case ModelKind::DT:
        case ModelKind::ET:
        case ModelKind::RF:
            return detail::tree_ensemble_from_json(doc);
        case ModelKind::XGB:
            return detail::xgb_from_json(doc);
    }
    throw Error(ErrorCode::Parse, "unknown model kind in document");
}

std::pair<ConfusionMatrix, ModelScorecard> evaluate(const Model& model,
                                                    const LabeledDataset& test) {
    if (test.rows() == 0) throw Error(ErrorCode::Shape, "empty test set");
    auto pred = model.predict(test.features);
    auto cm = confusion(test.labels, pred);
    return {cm, score(cm)};
}

std::vector<double> permutation_importance(const Model& model, const LabeledDataset& data,
                                           std::size_t repeats, std::uint64_t seed) {
    if (repeats < 1) throw Error(ErrorCode::Parameter, "repeats must be >= 1");
    const std::size_t n = data.sensor_count();

    double baseline = score(confusion(data.labels, model.predict(data.features))).macro_f1;
    std::vector<double> drops(n, 0.0);
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        for (std::size_t col = 0; col < n; ++col) {
            Matrix shuffled = data.features;
            std::vector<double> column(shuffled.rows());
            for (std::size_t r = 0; r < shuffled.rows(); ++r) column[r] = shuffled(r, col);
            Rng rng(derive_seed(seed, {0x53485546ull, rep, col}));
            std::shuffle(column.begin(), column.end(), rng);
            for (std::size_t r = 0; r < shuffled.rows(); ++r) shuffled(r, col) = column[r];
            double f1 = score(confusion(data.labels, model.predict(shuffled))).macro_f1;
            drops[col] += baseline - f1;
        }
    }

    double total = 0;
    for (double& d : drops) {
        d = std::max(0.0, d / static_cast<double>(repeats));
        total += d;
    }
    if (total > 0)
        for (double& d : drops) d /= total;
    else
        drops.assign(n, 1.0 / static_cast<double>(n));
    return drops;
}

namespace detail {

ClassIndex build_class_index(const std::vector<MixtureLabel>& labels) {
    std::set<MixtureLabel> distinct(labels.begin(), labels.end());
    ClassIndex ci;
    ci.classes.assign(distinct.begin(), distinct.end());
    std::map<MixtureLabel, int> index;
    for (std::size_t i = 0; i < ci.classes.size(); ++i)
        index[ci.classes[i]] = static_cast<int>(i);
    ci.y.reserve(labels.size());
    for (const auto& l : labels) ci.y.push_back(index[l]);
    return ci;
}

void Standardizer::fit(const Matrix& X) {
    const std::size_t n = X.cols();
    mean.assign(n, 0.0);
    sd.assign(n, 1.0);
    if (X.rows() == 0) return;
    for (std::size_t r = 0; r < X.rows(); ++r)
        for (std::size_t c = 0; c < n; ++c) mean[c] += X(r, c);
    for (double& m : mean) m /= static_cast<double>(X.rows());
    std::vector<double> var(n, 0.0);
    for (std::size_t r = 0; r < X.rows(); ++r)
        for (std::size_t c = 0; c < n; ++c) {
            double d = X(r, c) - mean[c];
            var[c] += d * d;
        }
    for (std::size_t c = 0; c < n; ++c) {
        double v = var[c] / static_cast<double>(X.rows());
        sd[c] = v > 1e-24 ? std::sqrt(v) : 1.0;
    }
}

Matrix Standardizer::apply(const Matrix& X) const {
    if (X.cols() != mean.size()) throw Error(ErrorCode::Shape, "standardizer width mismatch");
    Matrix Z(X.rows(), X.cols());
    for (std::size_t r = 0; r < X.rows(); ++r)
        for (std::size_t c = 0; c < X.cols(); ++c) Z(r, c) = (X(r, c) - mean[c]) / sd[c];
    return Z;
}

nlohmann::json Standardizer::to_json() const {
    return {{"mean", mean}, {"sd", sd}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
    Standardizer st;
    st.mean = j.at("mean").get<std::vector<double>>();
    st.sd = j.at("sd").get<std::vector<double>>();
    return st;
}

} // namespace detail

} // namespace crs

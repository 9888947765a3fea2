#include <algorithm>
#include <cmath>

#include "crs/linear_objective.hpp"
#include "crs/rng.hpp"
#include "models_internal.hpp"

namespace crs::linear {

namespace {

double dot_row(std::span<const double> row, const std::vector<double>& w) {
    double s = 0;
    for (std::size_t j = 0; j < w.size(); ++j) s += row[j] * w[j];
    return s;
}

} // namespace

ValueGrad logistic_objective(const Matrix& X, const std::vector<int>& y,
                             const std::vector<double>& w, double b, double l2) {
    const auto n = static_cast<double>(X.rows());
    ValueGrad out;
    out.grad_w.assign(w.size(), 0.0);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double margin = static_cast<double>(y[i]) * (dot_row(X.row(i), w) + b);
        // log(1+exp(-m)) computed stably for either sign of m
        out.value += margin > 0 ? std::log1p(std::exp(-margin))
                                : -margin + std::log1p(std::exp(margin));
        double coeff = -static_cast<double>(y[i]) / (1.0 + std::exp(margin));
        auto row = X.row(i);
        for (std::size_t j = 0; j < w.size(); ++j) out.grad_w[j] += coeff * row[j];
        out.grad_b += coeff;
    }
    out.value /= n;
    out.grad_b /= n;
    for (std::size_t j = 0; j < w.size(); ++j) {
        out.grad_w[j] = out.grad_w[j] / n + l2 * w[j];
        out.value += 0.5 * l2 * w[j] * w[j];
    }
    return out;
}

ValueGrad elastic_net_objective(const Matrix& X, const std::vector<int>& y,
                                const std::vector<double>& w, double b, double l1, double l2) {
    ValueGrad out = logistic_objective(X, y, w, b, l2);
    for (std::size_t j = 0; j < w.size(); ++j) {
        out.value += l1 * std::abs(w[j]);
        if (w[j] > 0)
            out.grad_w[j] += l1;
        else if (w[j] < 0)
            out.grad_w[j] -= l1;
    }
    return out;
}

ValueGrad hinge_objective(const Matrix& X, const std::vector<int>& y,
                          const std::vector<double>& w, double b, double l2, double c) {
    const auto n = static_cast<double>(X.rows());
    ValueGrad out;
    out.grad_w.assign(w.size(), 0.0);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double margin = static_cast<double>(y[i]) * (dot_row(X.row(i), w) + b);
        if (margin < 1.0) {
            out.value += (1.0 - margin) * c;
            double coeff = -c * static_cast<double>(y[i]);
            auto row = X.row(i);
            for (std::size_t j = 0; j < w.size(); ++j) out.grad_w[j] += coeff * row[j];
            out.grad_b += coeff;
        }
    }
    out.value /= n;
    out.grad_b /= n;
    for (std::size_t j = 0; j < w.size(); ++j) {
        out.grad_w[j] = out.grad_w[j] / n + l2 * w[j];
        out.value += 0.5 * l2 * w[j] * w[j];
    }
    return out;
}

} // namespace crs::linear

namespace crs::detail {

namespace {

using linear::ValueGrad;

class LinearModel final : public Model {
public:
    LinearModel(ModelKind kind, std::vector<MixtureLabel> classes,
                std::vector<std::string> sensor_ids, Standardizer std_izer, Matrix weights,
                std::vector<double> biases, bool converged) {
        kind_ = kind;
        classes_ = std::move(classes);
        sensor_ids_ = std::move(sensor_ids);
        standardizer_ = std::move(std_izer);
        weights_ = std::move(weights);
        biases_ = std::move(biases);
        converged_ = converged;
        compute_importance();
    }

    std::vector<MixtureLabel> predict(const Matrix& features) const override {
        if (features.cols() != sensor_ids_.size())
            throw Error(ErrorCode::Shape, "feature width does not match model");
        Matrix Z = standardizer_.apply(features);
        std::vector<MixtureLabel> out;
        out.reserve(Z.rows());
        for (std::size_t i = 0; i < Z.rows(); ++i) {
            auto row = Z.row(i);
            std::size_t best = 0;
            double best_score = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < classes_.size(); ++k) {
                double s = biases_[k];
                for (std::size_t j = 0; j < row.size(); ++j) s += weights_(k, j) * row[j];
                if (s > best_score) {
                    best_score = s;
                    best = k;
                }
            }
            out.push_back(classes_[best]);
        }
        return out;
    }

    nlohmann::json to_json() const override {
        nlohmann::json j;
        j["format_version"] = 1;
        j["kind"] = kind_name(kind_);
        std::vector<std::string> cls;
        for (const auto& c : classes_) cls.push_back(c.canonical());
        j["classes"] = cls;
        j["sensor_ids"] = sensor_ids_;
        j["standardizer"] = standardizer_.to_json();
        j["weights"] = weights_.data();
        j["biases"] = biases_;
        j["converged"] = converged_;
        return j;
    }

private:
    void compute_importance() {
        // mean |coefficient| across one-vs-rest classes, on standardized
        // features, normalized to sum 1
        const std::size_t n = sensor_ids_.size();
        importance_.assign(n, 0.0);
        for (std::size_t k = 0; k < classes_.size(); ++k)
            for (std::size_t j = 0; j < n; ++j) importance_[j] += std::abs(weights_(k, j));
        double total = 0;
        for (double v : importance_) total += v;
        if (total > 0)
            for (double& v : importance_) v /= total;
        else
            importance_.assign(n, 1.0 / static_cast<double>(n));
    }

    Standardizer standardizer_;
    Matrix weights_;  // classes x sensors
    std::vector<double> biases_;
};

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

} // namespace

std::unique_ptr<Model> fit_linear(ModelKind kind, const HyperParams& params,
                                  const LabeledDataset& train, std::uint64_t /*seed*/) {
    auto ci = build_class_index(train.labels);
    Standardizer st;
    st.fit(train.features);
    Matrix Z = st.apply(train.features);
    const std::size_t n_feat = Z.cols();
    const std::size_t n_classes = ci.classes.size();

    double mean_sq_norm = 0;
    for (std::size_t i = 0; i < Z.rows(); ++i)
        for (double v : Z.row(i)) mean_sq_norm += v * v;
    mean_sq_norm /= static_cast<double>(Z.rows());

    const double l1 = kind == ModelKind::EN ? params.l1 : 0.0;
    const double l2 = params.l2;
    const bool hinge = kind == ModelKind::LSVC;
    // Lipschitz-style step size: logistic curvature is at most 1/4 per row.
    const double base_step =
        hinge ? 1.0 / (params.svm_c * std::sqrt(mean_sq_norm + 1.0) + l2 + 1.0)
              : 1.0 / (0.25 * (mean_sq_norm + 1.0) + l2);

    Matrix weights(n_classes, n_feat);
    std::vector<double> biases(n_classes, 0.0);
    bool converged = true;

    for (std::size_t k = 0; k < n_classes; ++k) {
        std::vector<int> y(Z.rows());
        for (std::size_t i = 0; i < Z.rows(); ++i)
            y[i] = ci.y[i] == static_cast<int>(k) ? 1 : -1;

        std::vector<double> w(n_feat, 0.0);
        double b = 0.0;
        double prev_value = std::numeric_limits<double>::infinity();
        double last_change = std::numeric_limits<double>::infinity();
        for (int it = 0; it < params.max_iters; ++it) {
            ValueGrad vg = hinge ? linear::hinge_objective(Z, y, w, b, l2, params.svm_c)
                                 : linear::logistic_objective(Z, y, w, b, l2);
            double step = hinge ? base_step / std::sqrt(static_cast<double>(it + 1)) : base_step;
            for (std::size_t j = 0; j < n_feat; ++j) {
                double next = w[j] - step * vg.grad_w[j];
                w[j] = l1 > 0 ? soft_threshold(next, step * l1) : next;
            }
            b -= step * vg.grad_b;
            last_change = std::abs(prev_value - vg.value) / std::max(1.0, std::abs(vg.value));
            prev_value = vg.value;
        }
        if (last_change > 1e-5) converged = false;  // still moving at the iteration cap
        for (std::size_t j = 0; j < n_feat; ++j) weights(k, j) = w[j];
        biases[k] = b;
    }

    return std::make_unique<LinearModel>(kind, std::move(ci.classes), train.sensor_ids,
                                         std::move(st), std::move(weights), std::move(biases),
                                         converged);
}

std::unique_ptr<Model> linear_from_json(const nlohmann::json& j) {
    std::vector<MixtureLabel> classes;
    for (const auto& s : j.at("classes")) classes.push_back(MixtureLabel::parse(s.get<std::string>()));
    auto sensor_ids = j.at("sensor_ids").get<std::vector<std::string>>();
    auto st = Standardizer::from_json(j.at("standardizer"));
    Matrix weights(classes.size(), sensor_ids.size());
    weights.data() = j.at("weights").get<std::vector<double>>();
    auto biases = j.at("biases").get<std::vector<double>>();
    return std::make_unique<LinearModel>(kind_from_name(j.at("kind").get<std::string>()),
                                         std::move(classes), std::move(sensor_ids), std::move(st),
                                         std::move(weights), std::move(biases),
                                         j.value("converged", true));
}

} // namespace crs::detail

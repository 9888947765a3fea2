#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "crs/rng.hpp"
#include "models_internal.hpp"

namespace crs::detail {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

// Median pairwise distance over an evenly spaced row subsample; the
// kernel width heuristic the defaults document.
double median_heuristic_gamma(const Matrix& Z) {
    const std::size_t cap = 200;
    std::vector<std::size_t> rows;
    std::size_t stride = std::max<std::size_t>(1, Z.rows() / cap);
    for (std::size_t r = 0; r < Z.rows(); r += stride) rows.push_back(r);
    std::vector<double> dists;
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = a + 1; b < rows.size(); ++b)
            dists.push_back(std::sqrt(sq_dist(Z.row(rows[a]), Z.row(rows[b]))));
    if (dists.empty()) return 1.0;
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2),
                     dists.end());
    double med = dists[dists.size() / 2];
    return 1.0 / (2.0 * med * med + 1e-12);
}

class RbfSvcModel final : public Model {
public:
    RbfSvcModel(std::vector<MixtureLabel> classes, std::vector<std::string> sensor_ids,
                Standardizer st, double gamma, Matrix support_vectors,
                std::vector<std::vector<std::pair<int, double>>> class_weights, bool converged) {
        kind_ = ModelKind::RbfSVC;
        classes_ = std::move(classes);
        sensor_ids_ = std::move(sensor_ids);
        standardizer_ = std::move(st);
        gamma_ = gamma;
        support_vectors_ = std::move(support_vectors);
        class_weights_ = std::move(class_weights);
        converged_ = converged;
        importance_.assign(sensor_ids_.size(), 0.0);  // filled in by fit
    }

    void set_importance(std::vector<double> imp) { importance_ = std::move(imp); }

    std::vector<MixtureLabel> predict(const Matrix& features) const override {
        if (features.cols() != sensor_ids_.size())
            throw Error(ErrorCode::Shape, "feature width does not match model");
        Matrix Z = standardizer_.apply(features);
        std::vector<MixtureLabel> out;
        out.reserve(Z.rows());
        std::vector<double> k_row(support_vectors_.rows());
        for (std::size_t i = 0; i < Z.rows(); ++i) {
            for (std::size_t s = 0; s < support_vectors_.rows(); ++s)
                k_row[s] = std::exp(-gamma_ * sq_dist(Z.row(i), support_vectors_.row(s)));
            std::size_t best = 0;
            double best_score = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < classes_.size(); ++k) {
                double f = 0;
                for (const auto& [sv, weight] : class_weights_[k])
                    f += weight * k_row[static_cast<std::size_t>(sv)];
                if (f > best_score) {
                    best_score = f;
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
        j["gamma"] = gamma_;
        j["support_vector_rows"] = support_vectors_.rows();
        j["support_vectors"] = support_vectors_.data();
        nlohmann::json weights = nlohmann::json::array();
        for (const auto& cw : class_weights_) {
            nlohmann::json pairs = nlohmann::json::array();
            for (const auto& [sv, weight] : cw) pairs.push_back({sv, weight});
            weights.push_back(std::move(pairs));
        }
        j["class_weights"] = std::move(weights);
        j["importance"] = importance_;
        j["converged"] = converged_;
        return j;
    }

private:
    Standardizer standardizer_;
    double gamma_ = 1.0;
    Matrix support_vectors_;  // standardized feature rows
    std::vector<std::vector<std::pair<int, double>>> class_weights_;  // alpha_i * y_i
};

} // namespace

std::unique_ptr<Model> fit_rbf_svc(const HyperParams& params, const LabeledDataset& train,
                                   std::uint64_t seed) {
    auto ci = build_class_index(train.labels);
    Standardizer st;
    st.fit(train.features);
    Matrix Z = st.apply(train.features);
    const std::size_t n = Z.rows();
    const std::size_t n_classes = ci.classes.size();

    double gamma = params.rbf_gamma > 0 ? params.rbf_gamma : median_heuristic_gamma(Z);

    // full kernel matrix; desk-scale row counts keep this small
    Matrix K(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        K(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = std::exp(-gamma * sq_dist(Z.row(i), Z.row(j)));
            K(i, j) = v;
            K(j, i) = v;
        }
    }

    const double C = params.svm_c;
    const int max_epochs = std::min(params.max_iters, 100);
    bool converged = true;

    std::vector<std::vector<double>> alphas(n_classes, std::vector<double>(n, 0.0));
    for (std::size_t k = 0; k < n_classes; ++k) {
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = ci.y[i] == static_cast<int>(k) ? 1.0 : -1.0;
        auto& alpha = alphas[k];
        std::vector<double> f(n, 0.0);  // f_i = sum_j alpha_j y_j K_ij

        double max_violation = 0;
        for (int epoch = 0; epoch < max_epochs; ++epoch) {
            max_violation = 0;
            for (std::size_t i = 0; i < n; ++i) {
                double grad = y[i] * f[i] - 1.0;
                double pg = grad;  // projected gradient at the box
                if (alpha[i] <= 0.0) pg = std::min(grad, 0.0);
                if (alpha[i] >= C) pg = std::max(grad, 0.0);
                max_violation = std::max(max_violation, std::abs(pg));
                if (pg == 0.0) continue;
                double next = std::clamp(alpha[i] - grad / K(i, i), 0.0, C);
                double delta = (next - alpha[i]) * y[i];
                if (delta == 0.0) continue;
                alpha[i] = next;
                for (std::size_t j = 0; j < n; ++j) f[j] += delta * K(i, j);
            }
            if (max_violation < 1e-3) break;
        }
        if (max_violation >= 1e-3) converged = false;
    }

    // rows that support at least one class
    std::vector<int> sv_index(n, -1);
    std::vector<std::size_t> sv_rows;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n_classes; ++k)
            if (alphas[k][i] > 1e-12) {
                sv_index[i] = static_cast<int>(sv_rows.size());
                sv_rows.push_back(i);
                break;
            }

    std::vector<std::vector<std::pair<int, double>>> class_weights(n_classes);
    for (std::size_t k = 0; k < n_classes; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (alphas[k][i] > 1e-12) {
                double yk = ci.y[i] == static_cast<int>(k) ? 1.0 : -1.0;
                class_weights[k].emplace_back(sv_index[i], alphas[k][i] * yk);
            }

    auto model = std::make_unique<RbfSvcModel>(std::move(ci.classes), train.sensor_ids,
                                               std::move(st), gamma, Z.select_rows(sv_rows),
                                               std::move(class_weights), converged);

    // kernel models expose no native importance; use a capped-row
    // permutation importance on the training data
    LabeledDataset perm_data = train;
    if (train.rows() > static_cast<std::size_t>(params.perm_max_rows)) {
        std::vector<std::size_t> rows;
        std::size_t stride = train.rows() / static_cast<std::size_t>(params.perm_max_rows) + 1;
        for (std::size_t r = 0; r < train.rows(); r += stride) rows.push_back(r);
        perm_data = take_rows(train, rows);
    }
    model->set_importance(permutation_importance(
        *model, perm_data, static_cast<std::size_t>(params.perm_repeats),
        derive_seed(seed, {0x5045524dull})));
    return model;
}

std::unique_ptr<Model> rbf_svc_from_json(const nlohmann::json& j) {
    std::vector<MixtureLabel> classes;
    for (const auto& s : j.at("classes")) classes.push_back(MixtureLabel::parse(s.get<std::string>()));
    auto sensor_ids = j.at("sensor_ids").get<std::vector<std::string>>();
    auto st = Standardizer::from_json(j.at("standardizer"));
    auto sv_rows = j.at("support_vector_rows").get<std::size_t>();
    Matrix sv(sv_rows, sensor_ids.size());
    sv.data() = j.at("support_vectors").get<std::vector<double>>();
    std::vector<std::vector<std::pair<int, double>>> class_weights;
    for (const auto& cw : j.at("class_weights")) {
        std::vector<std::pair<int, double>> pairs;
        for (const auto& p : cw) pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<double>());
        class_weights.push_back(std::move(pairs));
    }
    auto model = std::make_unique<RbfSvcModel>(std::move(classes), std::move(sensor_ids),
                                               std::move(st), j.at("gamma").get<double>(),
                                               std::move(sv), std::move(class_weights),
                                               j.value("converged", true));
    model->set_importance(j.at("importance").get<std::vector<double>>());
    return model;
}

} // namespace crs::detail

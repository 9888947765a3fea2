#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "crs/dataset.hpp"
#include "crs/matrix.hpp"
#include "crs/metrics.hpp"

#include <nlohmann/json_fwd.hpp>

namespace crs {

enum class ModelKind { LR, EN, LSVC, RbfSVC, DT, ET, RF, XGB };

inline constexpr std::array<ModelKind, 8> kAllModelKinds{
    ModelKind::LR,  ModelKind::EN, ModelKind::LSVC, ModelKind::RbfSVC,
    ModelKind::DT,  ModelKind::ET, ModelKind::RF,   ModelKind::XGB};

std::string kind_name(ModelKind kind);
ModelKind kind_from_name(const std::string& name);

// One flat bag of hyperparameters; each kind reads the fields relevant
// to it. Validated against per-kind ranges before training.
struct HyperParams {
    int trees = 100;              // ET/RF/XGB rounds
    int max_depth = 6;            // tree kinds; 0 = unbounded
    double learning_rate = 0.3;   // XGB shrinkage
    double xgb_l2 = 1.0;          // XGB leaf regularization
    double xgb_min_gain = 0.0;    // XGB split gain floor
    int max_iters = 200;          // linear/kernel solvers
    double l1 = 0.0;              // EN lasso strength
    double l2 = 1e-4;             // linear ridge strength
    double svm_c = 1.0;           // hinge/dual box constraint
    double rbf_gamma = 0.0;       // 0 = median pairwise distance heuristic
    int feature_subsample = -1;   // RF features per split; -1 = sqrt(n)
    bool bootstrap = true;        // RF row resampling
    int perm_repeats = 3;         // RBF-SVC permutation importance repeats
    int perm_max_rows = 100;      // row cap for permutation importance at fit time

    static HyperParams defaults(ModelKind kind);
    void validate(ModelKind kind) const;
};

// A fitted classifier: predict + per-sensor importance behind one
// contract. importance() has one entry per sensor, is nonnegative and
// sums to 1.
class Model {
public:
    virtual ~Model() = default;

    ModelKind kind() const { return kind_; }
    const std::vector<MixtureLabel>& classes() const { return classes_; }
    const std::vector<std::string>& sensor_ids() const { return sensor_ids_; }
    const std::vector<double>& importance() const { return importance_; }
    bool converged() const { return converged_; }

    virtual std::vector<MixtureLabel> predict(const Matrix& features) const = 0;
    virtual nlohmann::json to_json() const = 0;

protected:
    ModelKind kind_ = ModelKind::DT;
    std::vector<MixtureLabel> classes_;
    std::vector<std::string> sensor_ids_;
    std::vector<double> importance_;
    bool converged_ = true;
};

std::unique_ptr<Model> fit_model(ModelKind kind, const HyperParams& params,
                                 const LabeledDataset& train, std::uint64_t seed);

std::unique_ptr<Model> model_from_json(const nlohmann::json& doc);

// predict + confusion + score in one call.
std::pair<ConfusionMatrix, ModelScorecard> evaluate(const Model& model,
                                                    const LabeledDataset& test);

// Model-agnostic importance: mean macro-F1 drop when column i is
// shuffled, floored at 0 and normalized to sum 1 (uniform when every
// column is inert).
std::vector<double> permutation_importance(const Model& model, const LabeledDataset& data,
                                           std::size_t repeats, std::uint64_t seed);

} // namespace crs

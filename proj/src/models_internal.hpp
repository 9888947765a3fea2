#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "crs/dataset.hpp"
#include "crs/matrix.hpp"
#include "crs/model.hpp"

namespace crs::detail {

// Sorted unique classes plus per-row class indices.
struct ClassIndex {
    std::vector<MixtureLabel> classes;
    std::vector<int> y;
};

ClassIndex build_class_index(const std::vector<MixtureLabel>& labels);

// Per-column z-scoring fitted on the training set only.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> sd;  // constant columns keep sd = 1

    void fit(const Matrix& X);
    Matrix apply(const Matrix& X) const;
    nlohmann::json to_json() const;
    static Standardizer from_json(const nlohmann::json& j);
};

std::unique_ptr<Model> fit_linear(ModelKind kind, const HyperParams& params,
                                  const LabeledDataset& train, std::uint64_t seed);
std::unique_ptr<Model> linear_from_json(const nlohmann::json& j);

std::unique_ptr<Model> fit_tree_ensemble(ModelKind kind, const HyperParams& params,
                                         const LabeledDataset& train, std::uint64_t seed);
std::unique_ptr<Model> tree_ensemble_from_json(const nlohmann::json& j);

std::unique_ptr<Model> fit_rbf_svc(const HyperParams& params, const LabeledDataset& train,
                                   std::uint64_t seed);
std::unique_ptr<Model> rbf_svc_from_json(const nlohmann::json& j);

std::unique_ptr<Model> fit_xgb(const HyperParams& params, const LabeledDataset& train,
                               std::uint64_t seed);
std::unique_ptr<Model> xgb_from_json(const nlohmann::json& j);

} // namespace crs::detail

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "crs/rng.hpp"
#include "models_internal.hpp"

namespace crs::detail {

namespace {

struct RegNode {
    int feature = -1;  // -1: leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    double value = 0;  // leaf weight, shrinkage already applied
};

struct RegTree {
    std::vector<RegNode> nodes;

    double predict(std::span<const double> row) const {
        int i = 0;
        while (nodes[i].feature >= 0)
            i = row[static_cast<std::size_t>(nodes[i].feature)] < nodes[i].threshold
                    ? nodes[i].left
                    : nodes[i].right;
        return nodes[i].value;
    }
};

// Second-order greedy builder on gradient/hessian sums.
class RegTreeBuilder {
public:
    RegTreeBuilder(const Matrix& X, const std::vector<double>& grad,
                   const std::vector<double>& hess, double lambda, double min_gain,
                   double shrinkage, int max_depth, std::vector<double>& gain_accum)
        : X_(X), grad_(grad), hess_(hess), lambda_(lambda), min_gain_(min_gain),
          shrinkage_(shrinkage), max_depth_(max_depth), gain_accum_(gain_accum) {}

    RegTree build() {
        std::vector<std::size_t> rows(X_.rows());
        std::iota(rows.begin(), rows.end(), 0);
        RegTree tree;
        grow(tree, std::move(rows), 0);
        return tree;
    }

private:
    static double leaf_objective(double g, double h, double lambda) {
        return g * g / (h + lambda);
    }

    int grow(RegTree& tree, std::vector<std::size_t> rows, int depth) {
        double G = 0, H = 0;
        for (std::size_t r : rows) {
            G += grad_[r];
            H += hess_[r];
        }
        int node = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        int best_feature = -1;
        double best_threshold = 0, best_gain = min_gain_;
        if ((max_depth_ <= 0 || depth < max_depth_) && rows.size() >= 2) {
            double parent = leaf_objective(G, H, lambda_);
            for (std::size_t f = 0; f < X_.cols(); ++f) {
                std::vector<std::pair<double, std::size_t>> vals;
                vals.reserve(rows.size());
                for (std::size_t r : rows) vals.emplace_back(X_(r, f), r);
                std::sort(vals.begin(), vals.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
                double GL = 0, HL = 0;
                for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                    GL += grad_[vals[i].second];
                    HL += hess_[vals[i].second];
                    if (vals[i].first == vals[i + 1].first) continue;
                    double gain = 0.5 * (leaf_objective(GL, HL, lambda_) +
                                         leaf_objective(G - GL, H - HL, lambda_) - parent);
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_feature = static_cast<int>(f);
                        best_threshold = vals[i].first + 0.5 * (vals[i + 1].first - vals[i].first);
                    }
                }
            }
        }

        if (best_feature < 0) {
            tree.nodes[static_cast<std::size_t>(node)].value = -shrinkage_ * G / (H + lambda_);
            return node;
        }
        gain_accum_[static_cast<std::size_t>(best_feature)] += best_gain;

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows)
            (X_(r, static_cast<std::size_t>(best_feature)) < best_threshold ? left_rows
                                                                            : right_rows)
                .push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        int left = grow(tree, std::move(left_rows), depth + 1);
        int right = grow(tree, std::move(right_rows), depth + 1);
        auto& n = tree.nodes[static_cast<std::size_t>(node)];
        n.feature = best_feature;
        n.threshold = best_threshold;
        n.left = left;
        n.right = right;
        return node;
    }

    const Matrix& X_;
    const std::vector<double>& grad_;
    const std::vector<double>& hess_;
    double lambda_, min_gain_, shrinkage_;
    int max_depth_;
    std::vector<double>& gain_accum_;
};

class XgbModel final : public Model {
public:
    XgbModel(std::vector<MixtureLabel> classes, std::vector<std::string> sensor_ids,
             std::vector<std::vector<RegTree>> rounds, std::vector<double> importance,
             std::vector<double> training_loss) {
        kind_ = ModelKind::XGB;
        classes_ = std::move(classes);
        sensor_ids_ = std::move(sensor_ids);
        rounds_ = std::move(rounds);
        importance_ = std::move(importance);
        training_loss_ = std::move(training_loss);
    }

    std::vector<MixtureLabel> predict(const Matrix& features) const override {
        if (features.cols() != sensor_ids_.size())
            throw Error(ErrorCode::Shape, "feature width does not match model");
        std::vector<MixtureLabel> out;
        out.reserve(features.rows());
        std::vector<double> scores(classes_.size());
        for (std::size_t i = 0; i < features.rows(); ++i) {
            std::fill(scores.begin(), scores.end(), 0.0);
            for (const auto& round : rounds_)
                for (std::size_t k = 0; k < round.size(); ++k)
                    scores[k] += round[k].predict(features.row(i));
            std::size_t best = 0;
            for (std::size_t k = 1; k < scores.size(); ++k)
                if (scores[k] > scores[best]) best = k;
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
        j["importance"] = importance_;
        j["training_loss"] = training_loss_;
        nlohmann::json rounds = nlohmann::json::array();
        for (const auto& round : rounds_) {
            nlohmann::json trees = nlohmann::json::array();
            for (const auto& t : round) {
                nlohmann::json nodes = nlohmann::json::array();
                for (const auto& n : t.nodes)
                    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
                trees.push_back(std::move(nodes));
            }
            rounds.push_back(std::move(trees));
        }
        j["rounds"] = std::move(rounds);
        return j;
    }

private:
    std::vector<std::vector<RegTree>> rounds_;  // rounds x classes
    std::vector<double> training_loss_;         // softmax CE per round boundary
};

} // namespace

std::unique_ptr<Model> fit_xgb(const HyperParams& params, const LabeledDataset& train,
                               std::uint64_t /*seed*/) {
    auto ci = build_class_index(train.labels);
    const std::size_t n_rows = train.rows();
    const std::size_t n_classes = ci.classes.size();
    const std::size_t n_feat = train.sensor_count();

    Matrix scores(n_rows, n_classes, 0.0);
    Matrix probs(n_rows, n_classes, 0.0);
    std::vector<double> importance(n_feat, 0.0);
    std::vector<double> loss_curve;
    std::vector<std::vector<RegTree>> rounds;

    auto softmax_and_loss = [&] {
        double loss = 0;
        for (std::size_t i = 0; i < n_rows; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < n_classes; ++k) mx = std::max(mx, scores(i, k));
            double z = 0;
            for (std::size_t k = 0; k < n_classes; ++k) {
                probs(i, k) = std::exp(scores(i, k) - mx);
                z += probs(i, k);
            }
            for (std::size_t k = 0; k < n_classes; ++k) probs(i, k) /= z;
            loss -= std::log(std::max(probs(i, static_cast<std::size_t>(ci.y[i])), 1e-300));
        }
        return loss / static_cast<double>(n_rows);
    };

    std::vector<double> grad(n_rows), hess(n_rows);
    for (int round = 0; round < params.trees; ++round) {
        loss_curve.push_back(softmax_and_loss());
        std::vector<RegTree> round_trees;
        round_trees.reserve(n_classes);
        for (std::size_t k = 0; k < n_classes; ++k) {
            for (std::size_t i = 0; i < n_rows; ++i) {
                double p = probs(i, k);
                double yk = ci.y[i] == static_cast<int>(k) ? 1.0 : 0.0;
                grad[i] = p - yk;
                hess[i] = std::max(p * (1.0 - p), 1e-12);
            }
            RegTreeBuilder builder(train.features, grad, hess, params.xgb_l2,
                                   params.xgb_min_gain, params.learning_rate, params.max_depth,
                                   importance);
            RegTree tree = builder.build();
            for (std::size_t i = 0; i < n_rows; ++i)
                scores(i, k) += tree.predict(train.features.row(i));
            round_trees.push_back(std::move(tree));
        }
        rounds.push_back(std::move(round_trees));
    }
    loss_curve.push_back(softmax_and_loss());

    double total = 0;
    for (double v : importance) total += v;
    if (total > 0)
        for (double& v : importance) v /= total;
    else
        importance.assign(n_feat, 1.0 / static_cast<double>(n_feat));

    return std::make_unique<XgbModel>(std::move(ci.classes), train.sensor_ids, std::move(rounds),
                                      std::move(importance), std::move(loss_curve));
}

std::unique_ptr<Model> xgb_from_json(const nlohmann::json& j) {
    std::vector<MixtureLabel> classes;
    for (const auto& s : j.at("classes")) classes.push_back(MixtureLabel::parse(s.get<std::string>()));
    std::vector<std::vector<RegTree>> rounds;
    for (const auto& rj : j.at("rounds")) {
        std::vector<RegTree> round;
        for (const auto& tj : rj) {
            RegTree t;
            for (const auto& nj : tj) {
                RegNode n;
                n.feature = nj.at(0).get<int>();
                n.threshold = nj.at(1).get<double>();
                n.left = nj.at(2).get<int>();
                n.right = nj.at(3).get<int>();
                n.value = nj.at(4).get<double>();
                t.nodes.push_back(n);
            }
            round.push_back(std::move(t));
        }
        rounds.push_back(std::move(round));
    }
    return std::make_unique<XgbModel>(std::move(classes),
                                      j.at("sensor_ids").get<std::vector<std::string>>(),
                                      std::move(rounds),
                                      j.at("importance").get<std::vector<double>>(),
                                      j.value("training_loss", std::vector<double>{}));
}

} // namespace crs::detail

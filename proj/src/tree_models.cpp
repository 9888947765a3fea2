#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "crs/rng.hpp"
#include "models_internal.hpp"

namespace crs::detail {

namespace {

struct TreeNode {
    int feature = -1;  // -1: leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    int label = -1;  // class index at leaves
};

struct Tree {
    std::vector<TreeNode> nodes;

    int predict(std::span<const double> row) const {
        int i = 0;
        while (nodes[i].feature >= 0)
            i = row[static_cast<std::size_t>(nodes[i].feature)] < nodes[i].threshold
                    ? nodes[i].left
                    : nodes[i].right;
        return nodes[i].label;
    }
};

double gini(const std::vector<std::int64_t>& counts, std::int64_t total) {
    if (total == 0) return 0;
    double g = 1.0;
    for (auto c : counts) {
        double p = static_cast<double>(c) / static_cast<double>(total);
        g -= p * p;
    }
    return g;
}

int majority(const std::vector<std::int64_t>& counts) {
    int best = 0;
    for (std::size_t k = 1; k < counts.size(); ++k)
        if (counts[k] > counts[best]) best = static_cast<int>(k);
    return best;
}

struct BuildConfig {
    int max_depth = 0;  // 0 = unbounded
    bool randomized_thresholds = false;
    int features_per_split = 0;  // 0 = all
};

struct SplitChoice {
    int feature = -1;
    double threshold = 0;
    double gain = 0;  // absolute impurity decrease, count-weighted
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, const std::vector<int>& y, int n_classes, BuildConfig cfg,
                Rng* rng, std::vector<double>& importance)
        : X_(X), y_(y), n_classes_(n_classes), cfg_(cfg), rng_(rng), importance_(importance) {}

    Tree build(std::vector<std::size_t> rows) {
        Tree tree;
        grow(tree, std::move(rows), 0);
        return tree;
    }

private:
    int grow(Tree& tree, std::vector<std::size_t> rows, int depth) {
        std::vector<std::int64_t> counts(static_cast<std::size_t>(n_classes_), 0);
        for (std::size_t r : rows) ++counts[static_cast<std::size_t>(y_[r])];
        auto total = static_cast<std::int64_t>(rows.size());
        double node_gini = gini(counts, total);

        int node = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        bool pure = std::count(counts.begin(), counts.end(), 0) >=
                    static_cast<std::int64_t>(counts.size()) - 1;
        if (pure || rows.size() < 2 || (cfg_.max_depth > 0 && depth >= cfg_.max_depth)) {
            tree.nodes[static_cast<std::size_t>(node)].label = majority(counts);
            return node;
        }

        SplitChoice split = find_split(rows, counts, node_gini);
        if (split.feature < 0 || split.gain <= 0) {
            tree.nodes[static_cast<std::size_t>(node)].label = majority(counts);
            return node;
        }

        importance_[static_cast<std::size_t>(split.feature)] += split.gain;

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows)
            (X_(r, static_cast<std::size_t>(split.feature)) < split.threshold ? left_rows
                                                                              : right_rows)
                .push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        int left = grow(tree, std::move(left_rows), depth + 1);
        int right = grow(tree, std::move(right_rows), depth + 1);
        auto& n = tree.nodes[static_cast<std::size_t>(node)];
        n.feature = split.feature;
        n.threshold = split.threshold;
        n.left = left;
        n.right = right;
        return node;
    }

    std::vector<int> candidate_features() {
        auto n = static_cast<int>(X_.cols());
        std::vector<int> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        if (cfg_.features_per_split <= 0 || cfg_.features_per_split >= n || rng_ == nullptr)
            return all;
        // partial Fisher-Yates, then ascending order so tie-breaking by
        // lowest feature index is independent of the draw order
        for (int i = 0; i < cfg_.features_per_split; ++i) {
            std::uniform_int_distribution<int> pick(i, n - 1);
            std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(*rng_))]);
        }
        all.resize(static_cast<std::size_t>(cfg_.features_per_split));
        std::sort(all.begin(), all.end());
        return all;
    }

    SplitChoice find_split(const std::vector<std::size_t>& rows,
                           const std::vector<std::int64_t>& counts, double node_gini) {
        SplitChoice best;
        auto total = static_cast<std::int64_t>(rows.size());
        double parent_score = node_gini * static_cast<double>(total);

        for (int f : candidate_features()) {
            if (cfg_.randomized_thresholds) {
                double lo = std::numeric_limits<double>::infinity();
                double hi = -std::numeric_limits<double>::infinity();
                for (std::size_t r : rows) {
                    double v = X_(r, static_cast<std::size_t>(f));
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                // one draw per candidate feature keeps the stream aligned
                std::uniform_real_distribution<double> unit(0.0, 1.0);
                double u = unit(*rng_);
                if (!(hi > lo)) continue;
                double threshold = lo + u * (hi - lo);
                if (!(threshold > lo)) continue;

                std::vector<std::int64_t> lc(counts.size(), 0);
                std::int64_t ln = 0;
                for (std::size_t r : rows)
                    if (X_(r, static_cast<std::size_t>(f)) < threshold) {
                        ++lc[static_cast<std::size_t>(y_[r])];
                        ++ln;
                    }
                std::vector<std::int64_t> rc(counts.size());
                for (std::size_t k = 0; k < counts.size(); ++k) rc[k] = counts[k] - lc[k];
                std::int64_t rn = total - ln;
                if (ln == 0 || rn == 0) continue;
                double gain = parent_score - gini(lc, ln) * static_cast<double>(ln) -
                              gini(rc, rn) * static_cast<double>(rn);
                if (gain > best.gain) best = {f, threshold, gain};
            } else {
                exact_split(rows, counts, parent_score, f, best);
            }
        }
        return best;
    }

    void exact_split(const std::vector<std::size_t>& rows,
                     const std::vector<std::int64_t>& counts, double parent_score, int f,
                     SplitChoice& best) {
        std::vector<std::pair<double, int>> vals;
        vals.reserve(rows.size());
        for (std::size_t r : rows) vals.emplace_back(X_(r, static_cast<std::size_t>(f)), y_[r]);
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::vector<std::int64_t> lc(counts.size(), 0);
        auto total = static_cast<std::int64_t>(rows.size());
        std::int64_t ln = 0;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            ++lc[static_cast<std::size_t>(vals[i].second)];
            ++ln;
            if (vals[i].first == vals[i + 1].first) continue;
            std::vector<std::int64_t> rc(counts.size());
            for (std::size_t k = 0; k < counts.size(); ++k) rc[k] = counts[k] - lc[k];
            std::int64_t rn = total - ln;
            double gain = parent_score - gini(lc, ln) * static_cast<double>(ln) -
                          gini(rc, rn) * static_cast<double>(rn);
            if (gain > best.gain) {
                double threshold = vals[i].first + 0.5 * (vals[i + 1].first - vals[i].first);
                best = {f, threshold, gain};
            }
        }
    }

    const Matrix& X_;
    const std::vector<int>& y_;
    int n_classes_;
    BuildConfig cfg_;
    Rng* rng_;
    std::vector<double>& importance_;
};

class TreeEnsembleModel final : public Model {
public:
    TreeEnsembleModel(ModelKind kind, std::vector<MixtureLabel> classes,
                      std::vector<std::string> sensor_ids, std::vector<Tree> trees,
                      std::vector<double> importance) {
        kind_ = kind;
        classes_ = std::move(classes);
        sensor_ids_ = std::move(sensor_ids);
        trees_ = std::move(trees);
        importance_ = std::move(importance);
    }

    std::vector<MixtureLabel> predict(const Matrix& features) const override {
        if (features.cols() != sensor_ids_.size())
            throw Error(ErrorCode::Shape, "feature width does not match model");
        std::vector<MixtureLabel> out;
        out.reserve(features.rows());
        std::vector<int> votes(classes_.size());
        for (std::size_t i = 0; i < features.rows(); ++i) {
            std::fill(votes.begin(), votes.end(), 0);
            for (const auto& t : trees_) ++votes[static_cast<std::size_t>(t.predict(features.row(i)))];
            int best = 0;
            for (std::size_t k = 1; k < votes.size(); ++k)
                if (votes[k] > votes[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
            out.push_back(classes_[static_cast<std::size_t>(best)]);
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
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& t : trees_) {
            nlohmann::json nodes = nlohmann::json::array();
            for (const auto& n : t.nodes)
                nodes.push_back({n.feature, n.threshold, n.left, n.right, n.label});
            trees.push_back(std::move(nodes));
        }
        j["trees"] = std::move(trees);
        return j;
    }

private:
    std::vector<Tree> trees_;
};

void normalize_importance(std::vector<double>& imp) {
    double total = 0;
    for (double v : imp) total += v;
    if (total > 0)
        for (double& v : imp) v /= total;
    else
        imp.assign(imp.size(), 1.0 / static_cast<double>(imp.size()));
}

} // namespace

std::unique_ptr<Model> fit_tree_ensemble(ModelKind kind, const HyperParams& params,
                                         const LabeledDataset& train, std::uint64_t seed) {
    auto ci = build_class_index(train.labels);
    const std::size_t n_rows = train.rows();
    const std::size_t n_feat = train.sensor_count();

    int subsample = params.feature_subsample;
    if (subsample < 0)
        subsample = static_cast<int>(
            std::max(1.0, std::round(std::sqrt(static_cast<double>(n_feat)))));

    BuildConfig cfg;
    cfg.max_depth = params.max_depth;
    std::size_t n_trees = 1;
    bool bootstrap = false;
    switch (kind) {
        case ModelKind::DT:
            cfg.features_per_split = 0;
            break;
        case ModelKind::ET:
            cfg.randomized_thresholds = true;
            cfg.features_per_split = subsample;
            n_trees = static_cast<std::size_t>(params.trees);
            break;
        case ModelKind::RF:
            cfg.features_per_split = subsample;
            n_trees = static_cast<std::size_t>(params.trees);
            bootstrap = params.bootstrap;
            break;
        default:
            throw Error(ErrorCode::Parameter, "not a tree-ensemble kind");
    }

    std::vector<double> importance(n_feat, 0.0);
    std::vector<Tree> trees;
    trees.reserve(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        Rng rng(derive_seed(seed, {0x54524545ull, t}));
        std::vector<std::size_t> rows(n_rows);
        if (bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, n_rows - 1);
            for (auto& r : rows) r = pick(rng);
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        TreeBuilder builder(train.features, ci.y, static_cast<int>(ci.classes.size()), cfg,
                            kind == ModelKind::DT ? nullptr : &rng, importance);
        trees.push_back(builder.build(std::move(rows)));
    }
    normalize_importance(importance);

    return std::make_unique<TreeEnsembleModel>(kind, std::move(ci.classes), train.sensor_ids,
                                               std::move(trees), std::move(importance));
}

std::unique_ptr<Model> tree_ensemble_from_json(const nlohmann::json& j) {
    std::vector<MixtureLabel> classes;
    for (const auto& s : j.at("classes")) classes.push_back(MixtureLabel::parse(s.get<std::string>()));
    std::vector<Tree> trees;
    for (const auto& tj : j.at("trees")) {
        Tree t;
        for (const auto& nj : tj) {
            TreeNode n;
            n.feature = nj.at(0).get<int>();
            n.threshold = nj.at(1).get<double>();
            n.left = nj.at(2).get<int>();
            n.right = nj.at(3).get<int>();
            n.label = nj.at(4).get<int>();
            t.nodes.push_back(n);
        }
        trees.push_back(std::move(t));
    }
    return std::make_unique<TreeEnsembleModel>(
        kind_from_name(j.at("kind").get<std::string>()), std::move(classes),
        j.at("sensor_ids").get<std::vector<std::string>>(), std::move(trees),
        j.at("importance").get<std::vector<double>>());
}

} // namespace crs::detail

#include "crs/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "crs/error.hpp"

namespace crs {

double ModelScorecard::min_score() const {
    double m = macro_precision;
    for (double v : {macro_recall, macro_f1, micro_precision, micro_recall, micro_f1})
        m = std::min(m, v);
    return m;
}

ConfusionMatrix confusion(const std::vector<MixtureLabel>& truth,
                          const std::vector<MixtureLabel>& pred) {
    if (truth.size() != pred.size())
        throw Error(ErrorCode::Shape, "truth and prediction lengths differ");
    if (truth.empty()) throw Error(ErrorCode::Shape, "empty evaluation");

    std::set<MixtureLabel> all(truth.begin(), truth.end());
    all.insert(pred.begin(), pred.end());

    ConfusionMatrix cm;
    cm.classes.assign(all.begin(), all.end());
    std::map<MixtureLabel, std::size_t> index;
    for (std::size_t i = 0; i < cm.classes.size(); ++i) index[cm.classes[i]] = i;

    const std::size_t c = cm.classes.size();
    cm.counts.assign(c, std::vector<std::int64_t>(c, 0));
    for (std::size_t i = 0; i < truth.size(); ++i)
        ++cm.counts[index[truth[i]]][index[pred[i]]];

    cm.row_normalized = Matrix(c, c);
    for (std::size_t r = 0; r < c; ++r) {
        std::int64_t total = 0;
        for (auto v : cm.counts[r]) total += v;
        if (total == 0) continue;  // class present only in predictions
        for (std::size_t j = 0; j < c; ++j)
            cm.row_normalized(r, j) =
                static_cast<double>(cm.counts[r][j]) / static_cast<double>(total);
    }
    return cm;
}

ModelScorecard score(const ConfusionMatrix& cm) {
    const std::size_t c = cm.size();
    if (c == 0) throw Error(ErrorCode::Shape, "empty confusion matrix");

    std::int64_t total = 0, correct = 0;
    std::int64_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
    double macro_p = 0, macro_r = 0, macro_f = 0;

    for (std::size_t k = 0; k < c; ++k) {
        std::int64_t tp = cm.counts[k][k], fp = 0, fn = 0;
        for (std::size_t j = 0; j < c; ++j) {
            if (j == k) continue;
            fp += cm.counts[j][k];
            fn += cm.counts[k][j];
        }
        double p = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        double r = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        double f = (p + r > 0) ? 2 * p * r / (p + r) : 0.0;
        macro_p += p;
        macro_r += r;
        macro_f += f;
        tp_sum += tp;
        fp_sum += fp;
        fn_sum += fn;
        correct += tp;
        for (std::size_t j = 0; j < c; ++j) total += cm.counts[k][j];
    }

    ModelScorecard sc;
    sc.accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    sc.macro_precision = macro_p / static_cast<double>(c);
    sc.macro_recall = macro_r / static_cast<double>(c);
    sc.macro_f1 = macro_f / static_cast<double>(c);
    sc.micro_precision =
        (tp_sum + fp_sum) ? static_cast<double>(tp_sum) / static_cast<double>(tp_sum + fp_sum) : 0.0;
    sc.micro_recall =
        (tp_sum + fn_sum) ? static_cast<double>(tp_sum) / static_cast<double>(tp_sum + fn_sum) : 0.0;
    sc.micro_f1 = (sc.micro_precision + sc.micro_recall > 0)
                      ? 2 * sc.micro_precision * sc.micro_recall /
                            (sc.micro_precision + sc.micro_recall)
                      : 0.0;
    return sc;
}

} // namespace crs

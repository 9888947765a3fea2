#pragma once

#include <cstdint>
#include <vector>

#include "crs/label.hpp"
#include "crs/matrix.hpp"

namespace crs {

struct ConfusionMatrix {
    std::vector<MixtureLabel> classes;          // sorted union of truth and pred
    std::vector<std::vector<std::int64_t>> counts;  // row = true, col = predicted
    Matrix row_normalized;                      // rows sum to 1, or all-zero for absent class

    std::size_t size() const { return classes.size(); }
};

struct ModelScorecard {
    double accuracy = 0;
    double macro_precision = 0;
    double macro_recall = 0;
    double macro_f1 = 0;
    double micro_precision = 0;
    double micro_recall = 0;
    double micro_f1 = 0;

    // Minimum over the six macro/micro scores; the committee's default
    // admission gate.
    double min_score() const;
};

ConfusionMatrix confusion(const std::vector<MixtureLabel>& truth,
                          const std::vector<MixtureLabel>& pred);

// Per-class precision/recall with 0/0 = 0; macro is the unweighted
// class mean, micro comes from pooled counts.
ModelScorecard score(const ConfusionMatrix& cm);

} // namespace crs

#pragma once

#include <vector>

#include "crs/matrix.hpp"

// Training objectives for the linear kinds, with analytic gradients.
// Kept in the public surface so gradient checks can exercise exactly
// the functions the trainers minimize. Binary labels are -1/+1.

namespace crs::linear {

struct ValueGrad {
    double value = 0;
    std::vector<double> grad_w;
    double grad_b = 0;
};

// mean log(1 + exp(-y f)) + 0.5 * l2 * ||w||^2, f = w.x + b
ValueGrad logistic_objective(const Matrix& X, const std::vector<int>& y,
                             const std::vector<double>& w, double b, double l2);

// logistic + l1 * ||w||_1 (subgradient sign(w), 0 at 0) + 0.5 * l2 * ||w||^2
ValueGrad elastic_net_objective(const Matrix& X, const std::vector<int>& y,
                                const std::vector<double>& w, double b, double l1, double l2);

// 0.5 * l2 * ||w||^2 + C * mean max(0, 1 - y f)
ValueGrad hinge_objective(const Matrix& X, const std::vector<int>& y,
                          const std::vector<double>& w, double b, double l2, double c);

} // namespace crs::linear

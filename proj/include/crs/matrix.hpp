#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "crs/error.hpp"

namespace crs {

// Dense row-major matrix of doubles. Small enough for this project;
// no view machinery, copies are explicit and cheap at desk scale.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool operator==(const Matrix&) const = default;

    // Copies the listed columns, in order, into a new matrix.
    Matrix select_columns(const std::vector<std::size_t>& cols) const {
        Matrix out(rows_, cols.size());
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = 0; k < cols.size(); ++k) {
                if (cols[k] >= cols_)
                    throw Error(ErrorCode::Shape, "column index out of range");
                out(r, k) = (*this)(r, cols[k]);
            }
        return out;
    }

    Matrix select_rows(const std::vector<std::size_t>& rows) const {
        Matrix out(rows.size(), cols_);
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (rows[k] >= rows_)
                throw Error(ErrorCode::Shape, "row index out of range");
            for (std::size_t c = 0; c < cols_; ++c)
                out(k, c) = (*this)(rows[k], c);
        }
        return out;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace crs

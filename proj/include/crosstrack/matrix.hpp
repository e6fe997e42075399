#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace crosstrack {

/// Dense row-major matrix of doubles. The only permitted non-finite value is
/// -infinity, used as the masking sentinel by the softmax/assignment layers.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> init);

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool empty() const { return rows == 0 || cols == 0; }
    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }
};

/// Dense row-major rank-3 tensor (d0 x d1 x d2).
struct Tensor3 {
    std::size_t d0 = 0;
    std::size_t d1 = 0;
    std::size_t d2 = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(std::size_t a, std::size_t b, std::size_t c, double fill = 0.0)
        : d0(a), d1(b), d2(c), data(a * b * c, fill) {}

    double& at(std::size_t i, std::size_t j, std::size_t k) {
        return data[(i * d1 + j) * d2 + k];
    }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return data[(i * d1 + j) * d2 + k];
    }

    bool empty() const { return d0 == 0 || d1 == 0 || d2 == 0; }
    bool same_shape(const Tensor3& other) const {
        return d0 == other.d0 && d1 == other.d1 && d2 == other.d2;
    }
};

/// Numerically stable softmax over each row (max subtraction). -inf inputs
/// map to exactly 0; a row of all -inf throws ("fully masked row").
Matrix softmax_rows(const Matrix& m);

/// Softmax over each column; same masking rules as softmax_rows.
Matrix softmax_cols(const Matrix& m);

Matrix hadamard(const Matrix& a, const Matrix& b);
Tensor3 hadamard(const Tensor3& a, const Tensor3& b);

Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);

} // namespace crosstrack

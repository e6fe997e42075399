#include "crosstrack/matrix.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace crosstrack {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_value(double v) {
    if (std::isnan(v) || (std::isinf(v) && v > 0)) {
        throw std::invalid_argument("matrix values must be finite or -inf");
    }
}

} // namespace

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> init) {
    Matrix m;
    m.rows = init.size();
    m.cols = m.rows ? init.begin()->size() : 0;
    m.data.reserve(m.rows * m.cols);
    for (const auto& row : init) {
        if (row.size() != m.cols) {
            throw std::invalid_argument("ragged initializer");
        }
        m.data.insert(m.data.end(), row.begin(), row.end());
    }
    return m;
}

Matrix softmax_rows(const Matrix& m) {
    if (m.empty()) return Matrix(m.rows, m.cols);
    Matrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double mx = kNegInf;
        for (std::size_t j = 0; j < m.cols; ++j) {
            const double v = m.at(i, j);
            check_value(v);
            if (v > mx) mx = v;
        }
        if (mx == kNegInf) {
            throw std::invalid_argument("fully masked row");
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) {
            const double e = std::exp(m.at(i, j) - mx); // exp(-inf) == 0 exactly
            out.at(i, j) = e;
            sum += e;
        }
        for (std::size_t j = 0; j < m.cols; ++j) {
            out.at(i, j) /= sum;
        }
    }
    return out;
}

Matrix softmax_cols(const Matrix& m) {
    if (m.empty()) return Matrix(m.rows, m.cols);
    Matrix out(m.rows, m.cols);
    for (std::size_t j = 0; j < m.cols; ++j) {
        double mx = kNegInf;
        for (std::size_t i = 0; i < m.rows; ++i) {
            const double v = m.at(i, j);
            check_value(v);
            if (v > mx) mx = v;
        }
        if (mx == kNegInf) {
            throw std::invalid_argument("fully masked column");
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < m.rows; ++i) {
            const double e = std::exp(m.at(i, j) - mx);
            out.at(i, j) = e;
            sum += e;
        }
        for (std::size_t i = 0; i < m.rows; ++i) {
            out.at(i, j) /= sum;
        }
    }
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("hadamard: shape mismatch");
    }
    Matrix out(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        out.data[i] = a.data[i] * b.data[i];
    }
    return out;
}

Tensor3 hadamard(const Tensor3& a, const Tensor3& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("hadamard: shape mismatch");
    }
    Tensor3 out(a.d0, a.d1, a.d2);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        out.data[i] = a.data[i] * b.data[i];
    }
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw std::invalid_argument("matmul: dimension mismatch");
    }
    Matrix out(a.rows, b.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double av = a.at(i, k);
            for (std::size_t j = 0; j < b.cols; ++j) {
                out.at(i, j) += av * b.at(k, j);
            }
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            out.at(j, i) = m.at(i, j);
        }
    }
    return out;
}

} // namespace crosstrack

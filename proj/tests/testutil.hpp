#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "crosstrack/matrix.hpp"
#include "crosstrack/rng.hpp"

namespace testutil {

using crosstrack::Matrix;
using crosstrack::Rng;

inline bool approx(double a, double b, double tol = 1e-9) {
    return std::abs(a - b) <= tol;
}

inline bool approx_rel(double a, double b, double tol) {
    const double scale = std::max({std::abs(a), std::abs(b), 1.0});
    return std::abs(a - b) <= tol * scale;
}

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = scale * crosstrack::gaussian(rng);
    return m;
}

// O(n^3) triple-loop product, the matmul oracle.
inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows, b.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < b.cols; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) {
                acc += a.at(i, k) * b.at(k, j);
            }
            out.at(i, j) = acc;
        }
    }
    return out;
}

struct BruteForceResult {
    std::vector<std::optional<std::size_t>> match; // per column: row
    double objective = 0.0;
    bool unique = true; // no other permutation ties the optimum
};

// Factorial enumeration oracle for the linear assignment problem. Assigns
// min(rows, cols) pairs; maximization.
inline BruteForceResult brute_force_assignment(const Matrix& scores) {
    const std::size_t rows = scores.rows, cols = scores.cols;
    BruteForceResult best;
    best.match.assign(cols, std::nullopt);
    best.objective = -std::numeric_limits<double>::infinity();

    if (rows >= cols) {
        // Distinct row per column: enumerate ordered row selections by
        // permuting all rows and reading the first `cols` entries; the
        // tail reverse skips permutations differing only in unused rows.
        std::vector<std::size_t> perm(rows);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            double obj = 0.0;
            for (std::size_t j = 0; j < cols; ++j) obj += scores.at(perm[j], j);
            if (obj > best.objective + 1e-15) {
                best.objective = obj;
                for (std::size_t j = 0; j < cols; ++j) best.match[j] = perm[j];
                best.unique = true;
            } else if (std::abs(obj - best.objective) <= 1e-15) {
                bool same = true;
                for (std::size_t j = 0; j < cols && same; ++j) {
                    same = best.match[j] && *best.match[j] == perm[j];
                }
                if (!same) best.unique = false;
            }
            // skip permutations that only reorder the unused tail
            std::reverse(perm.begin() + static_cast<std::ptrdiff_t>(cols), perm.end());
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        // choose a distinct column for every row: permute columns
        std::vector<std::size_t> perm(cols);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            double obj = 0.0;
            for (std::size_t i = 0; i < rows; ++i) obj += scores.at(i, perm[i]);
            if (obj > best.objective + 1e-15) {
                best.objective = obj;
                std::fill(best.match.begin(), best.match.end(), std::nullopt);
                for (std::size_t i = 0; i < rows; ++i) best.match[perm[i]] = i;
                best.unique = true;
            } else if (std::abs(obj - best.objective) <= 1e-15) {
                bool same = true;
                for (std::size_t i = 0; i < rows && same; ++i) {
                    same = best.match[perm[i]] && *best.match[perm[i]] == i;
                }
                if (!same) best.unique = false;
            }
            std::reverse(perm.begin() + static_cast<std::ptrdiff_t>(rows), perm.end());
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return best;
}

} // namespace testutil

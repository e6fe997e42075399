#include <doctest.h>

#include <cmath>
#include <limits>

#include "crosstrack/matrix.hpp"
#include "testutil.hpp"

using namespace crosstrack;
using testutil::approx;

namespace {
const double kNegInf = -std::numeric_limits<double>::infinity();
}

TEST_CASE("softmax_rows uniform and masked cases") {
    const Matrix uniform = softmax_rows(Matrix::from_rows({{0, 0}, {0, 0}}));
    for (double v : uniform.data) CHECK(approx(v, 0.5));

    const Matrix masked = softmax_rows(Matrix::from_rows({{0, kNegInf}}));
    CHECK(masked.at(0, 0) == 1.0);
    CHECK(masked.at(0, 1) == 0.0);
}

TEST_CASE("softmax_rows matches exp-normalize oracle on [1,2,3]") {
    // exp(1..3) / sum, evaluated independently
    const Matrix s = softmax_rows(Matrix::from_rows({{1, 2, 3}}));
    CHECK(approx(s.at(0, 0), 0.09003057317038046, 1e-5));
    CHECK(approx(s.at(0, 1), 0.24472847105479767, 1e-5));
    CHECK(approx(s.at(0, 2), 0.66524095577482190, 1e-5));
}

TEST_CASE("softmax errors") {
    CHECK(softmax_rows(Matrix()).empty());
    CHECK(softmax_cols(Matrix()).empty());
    CHECK_THROWS_WITH_AS(softmax_rows(Matrix::from_rows({{kNegInf, kNegInf}})),
                         "fully masked row", std::invalid_argument);
    CHECK_THROWS_AS(softmax_cols(Matrix::from_rows({{kNegInf}, {kNegInf}})),
                    std::invalid_argument);
    CHECK_THROWS_AS(softmax_rows(Matrix::from_rows({{std::nan("")}})), std::invalid_argument);
}

TEST_CASE("softmax_cols column cases") {
    const Matrix s = softmax_cols(Matrix::from_rows({{0}, {0}}));
    CHECK(approx(s.at(0, 0), 0.5));
    CHECK(approx(s.at(1, 0), 0.5));

    const Matrix c = softmax_cols(Matrix::from_rows({{1}, {2}, {3}}));
    CHECK(approx(c.at(0, 0), 0.09003057317038046, 1e-5));
    CHECK(approx(c.at(1, 0), 0.24472847105479767, 1e-5));
    CHECK(approx(c.at(2, 0), 0.66524095577482190, 1e-5));
}

TEST_CASE("softmax_cols is softmax_rows of the transpose") {
    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
        const Matrix m = testutil::random_matrix(rng, 1 + t % 5, 1 + (t * 3) % 6, 2.0);
        const Matrix direct = softmax_cols(m);
        const Matrix via = transpose(softmax_rows(transpose(m)));
        REQUIRE(direct.same_shape(via));
        for (std::size_t i = 0; i < direct.data.size(); ++i) {
            CHECK(approx(direct.data[i], via.data[i], 1e-12));
        }
    }
}

TEST_CASE("softmax distributions and shift invariance") {
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
        const std::size_t rows = 1 + crosstrack::uniform_index(rng, 6);
        const std::size_t cols = 1 + crosstrack::uniform_index(rng, 6);
        const Matrix m = testutil::random_matrix(rng, rows, cols, 3.0);
        const Matrix s = softmax_rows(m);
        for (std::size_t i = 0; i < rows; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < cols; ++j) {
                CHECK(s.at(i, j) >= 0.0);
                CHECK(s.at(i, j) <= 1.0);
                sum += s.at(i, j);
            }
            CHECK(approx(sum, 1.0, 1e-9));
        }

        const double shift = crosstrack::uniform(rng, -50.0, 50.0);
        Matrix shifted = m;
        for (double& v : shifted.data) v += shift;
        const Matrix s2 = softmax_rows(shifted);
        for (std::size_t i = 0; i < s.data.size(); ++i) {
            CHECK(approx(s.data[i], s2.data[i], 1e-9));
        }
    }
}

TEST_CASE("hadamard basics") {
    const Matrix a = Matrix::from_rows({{1, 2}});
    const Matrix b = Matrix::from_rows({{3, 4}});
    const Matrix p = hadamard(a, b);
    CHECK(p.at(0, 0) == 3.0);
    CHECK(p.at(0, 1) == 8.0);

    Rng rng(3);
    const Matrix m = testutil::random_matrix(rng, 4, 3);
    const Matrix ones(4, 3, 1.0), zeros(4, 3, 0.0);
    CHECK(hadamard(m, ones).data == m.data);
    CHECK(hadamard(m, zeros).data == zeros.data);
    // commutative, bit-exact
    CHECK(hadamard(m, ones).data == hadamard(ones, m).data);

    CHECK_THROWS_AS(hadamard(Matrix(2, 2), Matrix(2, 3)), std::invalid_argument);
    CHECK_THROWS_AS(hadamard(Tensor3(1, 2, 3), Tensor3(3, 2, 1)), std::invalid_argument);
}

TEST_CASE("hadamard on tensors") {
    Tensor3 a(2, 2, 2, 2.0), b(2, 2, 2, 0.5);
    const Tensor3 p = hadamard(a, b);
    for (double v : p.data) CHECK(v == 1.0);
}

TEST_CASE("matmul identity and small product") {
    const Matrix id = Matrix::from_rows({{1, 0}, {0, 1}});
    Rng rng(5);
    const Matrix m = testutil::random_matrix(rng, 2, 2);
    CHECK(matmul(id, m).data == m.data);

    const Matrix p = matmul(Matrix::from_rows({{1, 2}}), Matrix::from_rows({{3}, {4}}));
    CHECK(p.rows == 1);
    CHECK(p.cols == 1);
    CHECK(p.at(0, 0) == 11.0);

    CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), std::invalid_argument);
}

TEST_CASE("matmul agrees with the naive triple loop") {
    Rng rng(13);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + crosstrack::uniform_index(rng, 16);
        const std::size_t k = 1 + crosstrack::uniform_index(rng, 16);
        const std::size_t m = 1 + crosstrack::uniform_index(rng, 16);
        const Matrix a = testutil::random_matrix(rng, n, k, 2.0);
        const Matrix b = testutil::random_matrix(rng, k, m, 2.0);
        const Matrix fast = matmul(a, b);
        const Matrix slow = testutil::naive_matmul(a, b);
        for (std::size_t i = 0; i < fast.data.size(); ++i) {
            CHECK(testutil::approx_rel(fast.data[i], slow.data[i], 1e-12));
        }
    }
}

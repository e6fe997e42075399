#include "crosstrack/assignment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "crosstrack/rng.hpp"

namespace crosstrack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

AffinityMatrix cross_softmax(const Matrix& r) {
    if (r.empty()) return AffinityMatrix{Matrix(r.rows, r.cols)};
    return AffinityMatrix{hadamard(softmax_cols(r), softmax_rows(r))};
}

Matrix dan_fuse(const Matrix& r) {
    if (r.empty()) return Matrix(r.rows, r.cols);
    Matrix cols = softmax_cols(r);
    const Matrix rows = softmax_rows(r);
    for (std::size_t i = 0; i < cols.data.size(); ++i) {
        cols.data[i] = std::max(cols.data[i], rows.data[i]);
    }
    return cols;
}

namespace {

// Jonker-Volgenant shortest augmenting path on an n x m cost matrix with
// n <= m, minimizing. Returns row index per column (-1 = unmatched).
std::vector<int> solve_lap_min(const Matrix& cost) {
    const int n = static_cast<int>(cost.rows);
    const int m = static_cast<int>(cost.cols);
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0); // p[j]: row matched to column j (1-based)
    std::vector<double> minv(m + 1);
    std::vector<char> used(m + 1);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost.at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> row_of_col(m, -1);
    for (int j = 1; j <= m; ++j) {
        if (p[j] > 0) row_of_col[j - 1] = p[j] - 1;
    }
    return row_of_col;
}

} // namespace

AssignmentResult hungarian(const Matrix& scores, bool maximize) {
    AssignmentResult result;
    if (scores.empty()) {
        result.match.assign(scores.cols, std::nullopt);
        return result;
    }
    for (double v : scores.data) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("hungarian: matrix must be finite");
        }
    }

    const bool transposed = scores.rows > scores.cols;
    Matrix cost = transposed ? transpose(scores) : scores;
    if (maximize) {
        for (double& v : cost.data) v = -v;
    }

    const std::vector<int> row_of_col = solve_lap_min(cost);

    result.match.assign(scores.cols, std::nullopt);
    if (!transposed) {
        for (std::size_t j = 0; j < row_of_col.size(); ++j) {
            if (row_of_col[j] >= 0) {
                result.match[j] = static_cast<std::size_t>(row_of_col[j]);
            }
        }
    } else {
        // Solved on the transpose: columns there are original rows.
        for (std::size_t j = 0; j < row_of_col.size(); ++j) {
            if (row_of_col[j] >= 0) {
                result.match[row_of_col[j]] = j;
            }
        }
    }

    for (std::size_t j = 0; j < result.match.size(); ++j) {
        if (result.match[j]) {
            result.objective += scores.at(*result.match[j], j);
        }
    }
    result.is_one_to_one = true;
    return result;
}

AssignmentResult extract_matching(const AffinityMatrix& a, double threshold) {
    if (threshold < 0.0 || threshold >= 1.0) {
        throw std::invalid_argument("extract_matching: threshold must be in [0,1)");
    }
    const Matrix& m = a.inner;
    AssignmentResult result;
    result.match.assign(m.cols, std::nullopt);
    if (m.empty()) return result;

    // Raw per-column candidates above threshold.
    std::vector<std::optional<std::size_t>> pick(m.cols);
    for (std::size_t j = 0; j < m.cols; ++j) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < m.rows; ++i) {
            if (m.at(i, j) > m.at(best, j)) best = i;
        }
        if (m.at(best, j) > threshold) pick[j] = best;
    }

    // Greedy resolution by descending affinity; a row loses all but its
    // strongest claiming column.
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < m.cols; ++j) {
        if (pick[j]) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t ja, std::size_t jb) {
        return m.at(*pick[ja], ja) > m.at(*pick[jb], jb);
    });

    std::vector<char> row_taken(m.rows, 0);
    for (std::size_t j : order) {
        const std::size_t i = *pick[j];
        if (row_taken[i]) {
            result.had_conflicts = true;
            continue;
        }
        row_taken[i] = 1;
        result.match[j] = i;
        result.objective += m.at(i, j);
    }
    result.is_one_to_one = true;
    return result;
}

Matrix cross_softmax_grad(const Matrix& r, const Matrix& da) {
    if (!r.same_shape(da)) {
        throw std::invalid_argument("cross_softmax_grad: shape mismatch");
    }
    if (r.empty()) return Matrix(r.rows, r.cols);
    const Matrix cols = softmax_cols(r);
    const Matrix rows = softmax_rows(r);

    Matrix dr(r.rows, r.cols, 0.0);

    // Row-softmax branch: upstream gradient on rows is da (*) cols.
    for (std::size_t i = 0; i < r.rows; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < r.cols; ++j) {
            dot += da.at(i, j) * cols.at(i, j) * rows.at(i, j);
        }
        for (std::size_t j = 0; j < r.cols; ++j) {
            dr.at(i, j) += rows.at(i, j) * (da.at(i, j) * cols.at(i, j) - dot);
        }
    }

    // Column-softmax branch: upstream gradient on cols is da (*) rows.
    for (std::size_t j = 0; j < r.cols; ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < r.rows; ++i) {
            dot += da.at(i, j) * rows.at(i, j) * cols.at(i, j);
        }
        for (std::size_t i = 0; i < r.rows; ++i) {
            dr.at(i, j) += cols.at(i, j) * (da.at(i, j) * rows.at(i, j) - dot);
        }
    }
    return dr;
}

namespace {

constexpr double kBenchPlanted = 20.0;
constexpr double kBenchContested = 10.0;
constexpr double kBenchThreshold = 0.3;

// Tracking-style score map: planted assignment plus contested columns where
// one row holds a strong claim on two columns.
Matrix make_bench_map(Rng& rng, std::size_t n) {
    Matrix r(n, n);
    for (double& v : r.data) v = gaussian(rng);

    std::vector<std::size_t> perm(n); // perm[j] = planted row of column j
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(rng, perm);
    for (std::size_t j = 0; j < n; ++j) {
        r.at(perm[j], j) += kBenchPlanted;
    }

    std::size_t ndup = std::max<std::size_t>(1, n / 20);
    if (2 * ndup > n) ndup = n / 2;
    if (ndup > 0) {
        std::vector<std::size_t> sel(n);
        std::iota(sel.begin(), sel.end(), 0);
        shuffle(rng, sel);
        std::vector<std::size_t> col_of_row(n);
        for (std::size_t j = 0; j < n; ++j) col_of_row[perm[j]] = j;
        for (std::size_t k = 0; k < ndup; ++k) {
            const std::size_t dup = sel[k];
            const std::size_t victim = sel[ndup + k];
            const std::size_t jv = col_of_row[victim];
            r.at(victim, jv) -= kBenchPlanted;     // victim row loses its match
            r.at(dup, jv) += kBenchContested;      // dup row contests jv too
        }
    }
    return r;
}

// A conflict-free extraction is optimal when every kept pair also appears
// in the exact optimum of the decision matrix it was extracted from.
bool matches_optimum(const AssignmentResult& extracted, const Matrix& decision) {
    const AssignmentResult exact = hungarian(decision, /*maximize=*/true);
    for (std::size_t j = 0; j < extracted.match.size(); ++j) {
        if (extracted.match[j] && exact.match[j] != extracted.match[j]) {
            return false;
        }
    }
    return true;
}

} // namespace

BenchReport bench_assignment(std::size_t n, std::size_t trials, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("bench_assignment: n must be >= 2");
    if (trials < 1) throw std::invalid_argument("bench_assignment: trials must be >= 1");

    using clock = std::chrono::steady_clock;
    auto elapsed_us = [](clock::time_point from) {
        return std::chrono::duration<double, std::micro>(clock::now() - from).count();
    };

    Rng rng(seed);
    BenchReport report;
    report.n = n;
    report.trials = trials;
    report.methods = {
        {"max_fusion", 0, 0, 0},
        {"max_fusion_hungarian", 0, 0, 0},
        {"cross_softmax", 0, 0, 0},
    };
    BenchMethodStats& fusion = report.methods[0];
    BenchMethodStats& fusion_h = report.methods[1];
    BenchMethodStats& xsm = report.methods[2];
    double hungarian_us = 0.0;

    for (std::size_t t = 0; t < trials; ++t) {
        const Matrix r = make_bench_map(rng, n);

        // Max-fusion argmax. Timing covers fuse + extraction; the optimum
        // comparison runs outside the timed region.
        auto t0 = clock::now();
        const Matrix fused = dan_fuse(r);
        const AssignmentResult fm = extract_matching(AffinityMatrix{fused}, kBenchThreshold);
        fusion.mean_latency_us += elapsed_us(t0);
        if (!fm.had_conflicts) {
            fusion.validity_rate += 1.0;
            fusion.optimality_rate += matches_optimum(fm, fused);
        }

        // Max-fusion + exact solver. Its output is one-to-one and is its
        // own optimum by construction.
        t0 = clock::now();
        const Matrix fused2 = dan_fuse(r);
        const auto t_solve = clock::now();
        const AssignmentResult hm = hungarian(fused2, /*maximize=*/true);
        const double solve_us = elapsed_us(t_solve);
        fusion_h.mean_latency_us += elapsed_us(t0);
        hungarian_us += solve_us;
        (void)hm;
        fusion_h.validity_rate += 1.0;
        fusion_h.optimality_rate += 1.0;

        // Cross-softmax argmax.
        t0 = clock::now();
        const AffinityMatrix a = cross_softmax(r);
        const AssignmentResult xm = extract_matching(a, kBenchThreshold);
        xsm.mean_latency_us += elapsed_us(t0);
        if (!xm.had_conflicts) {
            xsm.validity_rate += 1.0;
            xsm.optimality_rate += matches_optimum(xm, a.inner);
        }
    }

    const double inv = 1.0 / static_cast<double>(trials);
    for (BenchMethodStats& m : report.methods) {
        m.validity_rate *= inv;
        m.optimality_rate *= inv;
        m.mean_latency_us *= inv;
    }
    report.mean_hungarian_solve_us = hungarian_us * inv;
    return report;
}

std::string bench_report_csv(const BenchReport& report) {
    std::ostringstream os;
    os << "method,n,trials,validity_rate,optimality_rate,mean_latency_us\n";
    os.precision(6);
    os << std::fixed;
    for (const BenchMethodStats& m : report.methods) {
        os << m.method << ',' << report.n << ',' << report.trials << ','
           << m.validity_rate << ',' << m.optimality_rate << ','
           << m.mean_latency_us << '\n';
    }
    return os.str();
}

void write_bench_csv(const BenchReport& report, const std::filesystem::path& path) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << bench_report_csv(report);
    }
    std::filesystem::rename(tmp, path);
}

} // namespace crosstrack

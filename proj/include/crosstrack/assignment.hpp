#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crosstrack/matrix.hpp"

namespace crosstrack {

/// Instance-tracklet affinity matrix A produced by the cross-softmax.
/// Rows index instances at t, columns index tracklets at t-tau.
/// Entries lie in [0,1) and are exactly 0 wherever the score map was masked.
struct AffinityMatrix {
    Matrix inner;

    std::size_t rows() const { return inner.rows; }
    std::size_t cols() const { return inner.cols; }
    bool empty() const { return inner.empty(); }
};

/// One-to-one matching: match[j] is the row assigned to column j.
struct AssignmentResult {
    std::vector<std::optional<std::size_t>> match;
    bool is_one_to_one = true;
    double objective = 0.0;
    /// True when the raw per-column argmax picks collided before conflict
    /// resolution (always false for the exact solver).
    bool had_conflicts = false;
};

/// Cross-softmax phi: A = softmax_cols(r) (elementwise*) softmax_rows(r).
/// Empty input yields an empty affinity; a fully masked row or column throws.
AffinityMatrix cross_softmax(const Matrix& r);

/// Max-fusion baseline: elementwise max of column- and row-softmax of r.
Matrix dan_fuse(const Matrix& r);

/// Exact linear assignment via shortest augmenting paths, O(n^3).
/// Rectangular inputs assign min(rows, cols) pairs; entries must be finite.
AssignmentResult hungarian(const Matrix& scores, bool maximize);

/// Matching extraction from an affinity matrix: per-column argmax, kept when
/// strictly above threshold. Columns whose picks collide on one row are
/// resolved greedily by descending affinity; losers stay unmatched.
AssignmentResult extract_matching(const AffinityMatrix& a, double threshold);

/// Reverse-mode gradient of cross_softmax: given dL/dA, returns dL/dr.
Matrix cross_softmax_grad(const Matrix& r, const Matrix& da);

struct BenchMethodStats {
    std::string method;
    double validity_rate = 0.0;
    double optimality_rate = 0.0;
    double mean_latency_us = 0.0;
};

struct BenchReport {
    std::size_t n = 0;
    std::size_t trials = 0;
    std::vector<BenchMethodStats> methods; // max_fusion, max_fusion_hungarian, cross_softmax
    /// Mean time of the exact solver alone on the fused map (the solve inside
    /// the max_fusion_hungarian method), for latency-ratio comparisons.
    double mean_hungarian_solve_us = 0.0;
};

/// Linear-assignment benchmark. Each trial draws an n x n tracking-style
/// score map (unit normal noise, a planted assignment at strength 20, and
/// max(1, n/20) contested columns claimed at strength 10 by a row that
/// already owns another column) and runs three methods:
///   max_fusion           argmax extraction from dan_fuse(r)
///   max_fusion_hungarian exact solve on dan_fuse(r)
///   cross_softmax        argmax extraction from cross_softmax(r)
/// Validity: extraction picks are injective before conflict resolution.
/// Optimality: valid and every kept pair lies in the exact optimum of the
/// method's own decision matrix. Deterministic under the seed; trials run
/// on a single thread and are timed individually.
BenchReport bench_assignment(std::size_t n, std::size_t trials, std::uint64_t seed);

/// CSV with header: method,n,trials,validity_rate,optimality_rate,mean_latency_us
std::string bench_report_csv(const BenchReport& report);
void write_bench_csv(const BenchReport& report, const std::filesystem::path& path);

} // namespace crosstrack

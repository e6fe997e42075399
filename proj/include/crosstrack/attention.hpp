#pragma once

#include <cstddef>
#include <vector>

#include "crosstrack/assignment.hpp"
#include "crosstrack/bbox.hpp"
#include "crosstrack/matrix.hpp"
#include "crosstrack/weights.hpp"

namespace crosstrack {

inline constexpr std::size_t kMaxInstances = 300;

/// Dense D x H x W feature map.
struct TokenMap {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    Tensor3 data; // D x H x W

    TokenMap() = default;
    TokenMap(std::size_t d, std::size_t h, std::size_t w)
        : channels(d), height(h), width(w), data(d, h, w) {}

    double& at(std::size_t c, std::size_t y, std::size_t x) { return data.at(c, y, x); }
    double at(std::size_t c, std::size_t y, std::size_t x) const { return data.at(c, y, x); }
};

struct GridPos {
    std::size_t x = 0;
    std::size_t y = 0;
    bool operator==(const GridPos&) const = default;
};

/// Clipped per-instance tokens: row i is the channel vector gathered at
/// positions[i] of the source map.
struct TokenSet {
    std::size_t dim = 0;
    Matrix rows; // n x D
    std::vector<GridPos> positions;

    std::size_t size() const { return rows.rows; }
};

/// Adds the fixed 2-D sinusoidal position code to every cell. The first D/2
/// channels encode x, the rest encode y, both on the standard frequency
/// ladder. D must be even.
TokenMap positional_encode(const TokenMap& m);

/// The position code vector alone, for one cell.
std::vector<double> positional_code(std::size_t channels, std::size_t x, std::size_t y);

struct QkvMaps {
    TokenMap q, k, v;
};

/// Per-cell linear projections. q is computed from the position-encoded
/// current map, k from the position-encoded previous map, and v from the
/// raw previous map.
QkvMaps project_qkv(const TokenMap& x_plus_t, const TokenMap& x_plus_prev,
                    const TokenMap& x_prev, const PipelineWeights& w);

/// Grid cell of a box center: center / stride, rounded half up, clamped to
/// the map bounds.
GridPos box_cell(const BBox& box, double stride, std::size_t width, std::size_t height);

/// Gathers the channel vector at each box center. Centers are divided by
/// stride, rounded half-up and clamped to the map bounds; duplicate cells
/// are kept. Throws "instance cap exceeded" past max_instances.
TokenSet clip_features(const TokenMap& m, const std::vector<BBox>& boxes,
                       std::size_t max_instances = kMaxInstances, double stride = 1.0);

/// All-pairs merged features: out[i][j][:] = q.rows[i][:] * k.rows[j][:].
Tensor3 extend_pairwise(const TokenSet& q, const TokenSet& k);

/// Pair scorer: r_ij = conv2^T relu(bn(conv1^T merged[i][j] + b1)) + b2.
Matrix micro_cnn(const Tensor3& merged, const PipelineWeights& w);

/// Affinity-weighted value mix: F = A * v.rows, shape N_t x D.
Matrix attention_refine(const AffinityMatrix& a, const TokenSet& v);

/// Scatters f * w_p rows back into a zero map at the recorded positions
/// (duplicate cells accumulate) and adds x_t.
TokenMap scatter_residual(const Matrix& f, const std::vector<GridPos>& positions,
                          const PipelineWeights& w, const TokenMap& x_t);

struct ForwardResult {
    AffinityMatrix affinity;
    TokenMap refined;
};

/// Full association pass: pe -> q/k/v -> clip -> extend -> pair scores
/// (-inf mask applied if given) -> cross-softmax -> value mix -> scatter
/// residual. Projections are evaluated only at the clipped cells, which is
/// exactly equivalent to projecting the full maps first.
ForwardResult forward(const TokenMap& x_t, const TokenMap& x_prev,
                      const std::vector<BBox>& boxes_t, const std::vector<BBox>& boxes_prev,
                      const PipelineWeights& w, const Matrix* mask = nullptr,
                      double stride = 1.0, std::size_t max_instances = kMaxInstances);

} // namespace crosstrack

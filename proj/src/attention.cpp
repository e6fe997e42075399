#include "crosstrack/attention.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace crosstrack {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t center_to_cell(double coord, double stride, std::size_t limit) {
    const double scaled = coord / stride;
    double cell = std::floor(scaled + 0.5); // round half up
    if (cell < 0.0) cell = 0.0;
    const auto idx = static_cast<std::size_t>(cell);
    return idx >= limit ? limit - 1 : idx;
}

// Row vector times matrix: out[d] = sum_e vec[e] * w[e][d].
void project_row(const std::vector<double>& vec, const Matrix& w, double* out) {
    for (std::size_t d = 0; d < w.cols; ++d) {
        double acc = 0.0;
        for (std::size_t e = 0; e < w.rows; ++e) {
            acc += vec[e] * w.at(e, d);
        }
        out[d] = acc;
    }
}

} // namespace

std::vector<double> positional_code(std::size_t channels, std::size_t x, std::size_t y) {
    if (channels % 2 != 0) {
        throw std::invalid_argument("positional encoding requires even channel count");
    }
    const std::size_t half = channels / 2;
    std::vector<double> code(channels);
    auto fill = [half](double coord, double* dst) {
        for (std::size_t c = 0; c < half; ++c) {
            const std::size_t freq = c / 2;
            const double denom =
                std::pow(10000.0, 2.0 * static_cast<double>(freq) / static_cast<double>(half));
            const double angle = coord / denom;
            dst[c] = (c % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    };
    fill(static_cast<double>(x), code.data());
    fill(static_cast<double>(y), code.data() + half);
    return code;
}

TokenMap positional_encode(const TokenMap& m) {
    if (m.channels % 2 != 0) {
        throw std::invalid_argument("positional encoding requires even channel count");
    }
    TokenMap out = m;
    for (std::size_t y = 0; y < m.height; ++y) {
        for (std::size_t x = 0; x < m.width; ++x) {
            const std::vector<double> code = positional_code(m.channels, x, y);
            for (std::size_t c = 0; c < m.channels; ++c) {
                out.at(c, y, x) = m.at(c, y, x) + code[c];
            }
        }
    }
    return out;
}

QkvMaps project_qkv(const TokenMap& x_plus_t, const TokenMap& x_plus_prev,
                    const TokenMap& x_prev, const PipelineWeights& w) {
    const auto same_shape = [&](const TokenMap& a, const TokenMap& b) {
        return a.channels == b.channels && a.height == b.height && a.width == b.width;
    };
    if (!same_shape(x_plus_t, x_plus_prev) || !same_shape(x_plus_t, x_prev)) {
        throw std::invalid_argument("project_qkv: map shape mismatch");
    }
    if (x_plus_t.channels != w.dim) {
        throw std::invalid_argument("project_qkv: channel count does not match weights");
    }

    const std::size_t d = w.dim;
    auto apply = [d](const TokenMap& src, const Matrix& proj) {
        TokenMap out(src.channels, src.height, src.width);
        std::vector<double> vec(d), res(d);
        for (std::size_t y = 0; y < src.height; ++y) {
            for (std::size_t x = 0; x < src.width; ++x) {
                for (std::size_t c = 0; c < d; ++c) vec[c] = src.at(c, y, x);
                project_row(vec, proj, res.data());
                for (std::size_t c = 0; c < d; ++c) out.at(c, y, x) = res[c];
            }
        }
        return out;
    };
    return QkvMaps{apply(x_plus_t, w.w_q), apply(x_plus_prev, w.w_k), apply(x_prev, w.w_v)};
}

GridPos box_cell(const BBox& box, double stride, std::size_t width, std::size_t height) {
    return GridPos{center_to_cell(box.cx, stride, width),
                   center_to_cell(box.cy, stride, height)};
}

TokenSet clip_features(const TokenMap& m, const std::vector<BBox>& boxes,
                       std::size_t max_instances, double stride) {
    if (boxes.size() > max_instances) {
        throw std::invalid_argument("instance cap exceeded");
    }
    TokenSet set;
    set.dim = m.channels;
    set.rows = Matrix(boxes.size(), m.channels);
    set.positions.reserve(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const GridPos pos = box_cell(boxes[i], stride, m.width, m.height);
        set.positions.push_back(pos);
        for (std::size_t c = 0; c < m.channels; ++c) {
            set.rows.at(i, c) = m.at(c, pos.y, pos.x);
        }
    }
    return set;
}

Tensor3 extend_pairwise(const TokenSet& q, const TokenSet& k) {
    if (q.dim != k.dim) {
        throw std::invalid_argument("extend_pairwise: dimension mismatch");
    }
    Tensor3 out(q.size(), k.size(), q.dim);
    for (std::size_t i = 0; i < q.size(); ++i) {
        for (std::size_t j = 0; j < k.size(); ++j) {
            for (std::size_t c = 0; c < q.dim; ++c) {
                out.at(i, j, c) = q.rows.at(i, c) * k.rows.at(j, c);
            }
        }
    }
    return out;
}

Matrix micro_cnn(const Tensor3& merged, const PipelineWeights& w) {
    if (merged.d2 != w.dim) {
        throw std::invalid_argument("micro_cnn: pair feature dimension mismatch");
    }
    for (double v : w.bn.var) {
        if (v <= 0.0) throw std::invalid_argument("micro_cnn: bn variance must be positive");
    }
    Matrix r(merged.d0, merged.d1);
    std::vector<double> hidden(w.hidden);
    for (std::size_t i = 0; i < merged.d0; ++i) {
        for (std::size_t j = 0; j < merged.d1; ++j) {
            for (std::size_t h = 0; h < w.hidden; ++h) {
                double acc = w.conv1_bias[h];
                for (std::size_t c = 0; c < w.dim; ++c) {
                    acc += merged.at(i, j, c) * w.conv1.at(c, h);
                }
                const double normed =
                    w.bn.scale[h] * (acc - w.bn.mean[h]) / std::sqrt(w.bn.var[h]) +
                    w.bn.shift[h];
                hidden[h] = normed > 0.0 ? normed : 0.0;
            }
            double score = w.conv2_bias[0];
            for (std::size_t h = 0; h < w.hidden; ++h) {
                score += hidden[h] * w.conv2.at(h, 0);
            }
            r.at(i, j) = score;
        }
    }
    return r;
}

Matrix attention_refine(const AffinityMatrix& a, const TokenSet& v) {
    if (a.cols() != v.size()) {
        throw std::invalid_argument("attention_refine: dimension mismatch");
    }
    return matmul(a.inner, v.rows);
}

TokenMap scatter_residual(const Matrix& f, const std::vector<GridPos>& positions,
                          const PipelineWeights& w, const TokenMap& x_t) {
    if (f.rows != positions.size()) {
        throw std::invalid_argument("scatter_residual: row/position count mismatch");
    }
    if (f.rows > 0 && f.cols != w.dim) {
        throw std::invalid_argument("scatter_residual: feature dimension mismatch");
    }
    TokenMap out = x_t;
    if (f.rows == 0) return out;
    const Matrix g = matmul(f, w.w_p);
    for (std::size_t i = 0; i < g.rows; ++i) {
        const GridPos& pos = positions[i];
        if (pos.x >= x_t.width || pos.y >= x_t.height) {
            throw std::invalid_argument("scatter_residual: position out of bounds");
        }
        for (std::size_t c = 0; c < g.cols; ++c) {
            out.at(c, pos.y, pos.x) += g.at(i, c);
        }
    }
    return out;
}

ForwardResult forward(const TokenMap& x_t, const TokenMap& x_prev,
                      const std::vector<BBox>& boxes_t, const std::vector<BBox>& boxes_prev,
                      const PipelineWeights& w, const Matrix* mask,
                      double stride, std::size_t max_instances) {
    if (x_t.channels != w.dim || x_prev.channels != w.dim) {
        throw std::invalid_argument("forward: channel count does not match weights");
    }
    if (mask && (mask->rows != boxes_t.size() || mask->cols != boxes_prev.size())) {
        throw std::invalid_argument("forward: mask shape mismatch");
    }

    // Gather raw tokens, then apply pe + projection per clipped cell. This is
    // bit-identical to projecting the full maps and clipping afterwards.
    const TokenSet raw_t = clip_features(x_t, boxes_t, max_instances, stride);
    const TokenSet raw_prev = clip_features(x_prev, boxes_prev, max_instances, stride);

    const std::size_t d = w.dim;
    auto project_set = [d](const TokenSet& src, const Matrix& proj, bool add_pe) {
        TokenSet out;
        out.dim = d;
        out.positions = src.positions;
        out.rows = Matrix(src.size(), d);
        std::vector<double> vec(d);
        for (std::size_t i = 0; i < src.size(); ++i) {
            for (std::size_t c = 0; c < d; ++c) vec[c] = src.rows.at(i, c);
            if (add_pe) {
                const std::vector<double> code =
                    positional_code(d, src.positions[i].x, src.positions[i].y);
                for (std::size_t c = 0; c < d; ++c) vec[c] += code[c];
            }
            project_row(vec, proj, &out.rows.at(i, 0));
        }
        return out;
    };

    const TokenSet q = project_set(raw_t, w.w_q, true);
    const TokenSet k = project_set(raw_prev, w.w_k, true);
    const TokenSet v = project_set(raw_prev, w.w_v, false);

    Matrix r = micro_cnn(extend_pairwise(q, k), w);
    if (mask) {
        for (std::size_t i = 0; i < r.rows; ++i) {
            for (std::size_t j = 0; j < r.cols; ++j) {
                const double mv = mask->at(i, j);
                if (mv == kNegInf) {
                    r.at(i, j) = kNegInf;
                } else if (mv != 0.0) {
                    throw std::invalid_argument("forward: mask entries must be 0 or -inf");
                }
            }
        }
    }

    ForwardResult result;
    result.affinity = cross_softmax(r);
    const Matrix mixed = attention_refine(result.affinity, v);
    result.refined = scatter_residual(mixed, q.positions, w, x_t);
    return result;
}

} // namespace crosstrack

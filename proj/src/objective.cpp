#include "crosstrack/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crosstrack {

namespace {

constexpr double kClamp = 1e-12;

double clamp01(double v) {
    return std::clamp(v, kClamp, 1.0 - kClamp);
}

std::size_t count_positives(const AffinityTarget& target) {
    std::size_t n_pos = 0;
    for (double v : target.y.data) {
        if (v == 1.0) ++n_pos;
    }
    return n_pos;
}

} // namespace

void AffinityTarget::validate() const {
    std::vector<char> row_has(y.rows, 0), col_has(y.cols, 0);
    for (std::size_t i = 0; i < y.rows; ++i) {
        for (std::size_t j = 0; j < y.cols; ++j) {
            const double v = y.at(i, j);
            if (v != 0.0 && v != 1.0) {
                throw std::invalid_argument("affinity target entries must be 0 or 1");
            }
            if (v == 1.0) {
                if (row_has[i] || col_has[j]) {
                    throw std::invalid_argument(
                        "affinity target must have at most one positive per row and column");
                }
                row_has[i] = col_has[j] = 1;
            }
        }
    }
}

double fast_focal(const AffinityMatrix& a, const AffinityTarget& target) {
    if (!a.inner.same_shape(target.y)) {
        throw std::invalid_argument("fast_focal: shape mismatch");
    }
    target.validate();
    const std::size_t n_pos = count_positives(target);
    if (n_pos == 0) throw std::invalid_argument("fast_focal: target has no positives");

    double loss = 0.0;
    for (std::size_t i = 0; i < a.inner.data.size(); ++i) {
        const double p = clamp01(a.inner.data[i]);
        if (target.y.data[i] == 1.0) {
            loss += (1.0 - p) * (1.0 - p) * std::log(p);
        } else {
            loss += p * p * std::log(1.0 - p);
        }
    }
    return -loss / static_cast<double>(n_pos);
}

Matrix fast_focal_grad(const AffinityMatrix& a, const AffinityTarget& target) {
    if (!a.inner.same_shape(target.y)) {
        throw std::invalid_argument("fast_focal_grad: shape mismatch");
    }
    target.validate();
    const std::size_t n_pos = count_positives(target);
    if (n_pos == 0) throw std::invalid_argument("fast_focal_grad: target has no positives");

    Matrix grad(a.inner.rows, a.inner.cols, 0.0);
    const double inv = 1.0 / static_cast<double>(n_pos);
    for (std::size_t i = 0; i < a.inner.data.size(); ++i) {
        const double raw = a.inner.data[i];
        if (raw < kClamp || raw > 1.0 - kClamp) continue; // clamped: flat
        if (target.y.data[i] == 1.0) {
            grad.data[i] = -inv * (-2.0 * (1.0 - raw) * std::log(raw) +
                                   (1.0 - raw) * (1.0 - raw) / raw);
        } else {
            grad.data[i] = -inv * (2.0 * raw * std::log(1.0 - raw) -
                                   raw * raw / (1.0 - raw));
        }
    }
    return grad;
}

double total_loss(double l_det_prev, double l_det_t, double l_det_refined,
                  double l_trk, const LossWeights& w) {
    if (!std::isfinite(l_det_prev) || !std::isfinite(l_det_t) ||
        !std::isfinite(l_det_refined) || !std::isfinite(l_trk)) {
        throw std::invalid_argument("total_loss: components must be finite");
    }
    return w.lambda_prev * l_det_prev + w.lambda_t * l_det_t +
           w.lambda_t * l_det_refined + std::exp(-w.epsilon_trk) * l_trk +
           w.epsilon_trk;
}

} // namespace crosstrack

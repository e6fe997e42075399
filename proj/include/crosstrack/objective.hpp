#pragma once

#include "crosstrack/assignment.hpp"
#include "crosstrack/matrix.hpp"

namespace crosstrack {

struct LossWeights {
    double lambda_prev = 0.5;  // weight of the previous-frame detection loss
    double lambda_t = 0.25;    // weight of the current and refined detection losses
    double epsilon_trk = 0.0;  // trainable balance coefficient
};

/// Binary supervision for the affinity matrix: at most one positive per row
/// and per column.
struct AffinityTarget {
    Matrix y;

    void validate() const; // throws on non-binary entries or duplicate positives
};

/// Focal penalty on the affinity matrix, normalized by the positive count.
/// Entries are clamped to [1e-12, 1 - 1e-12] before the logs.
double fast_focal(const AffinityMatrix& a, const AffinityTarget& target);

/// Analytic dL/dA of fast_focal (zero outside the clamp range).
Matrix fast_focal_grad(const AffinityMatrix& a, const AffinityTarget& target);

/// lambda_prev * l_det_prev + lambda_t * (l_det_t + l_det_refined)
///   + exp(-eps) * l_trk + eps
double total_loss(double l_det_prev, double l_det_t, double l_det_refined,
                  double l_trk, const LossWeights& w);

} // namespace crosstrack

#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "crosstrack/matrix.hpp"

namespace crosstrack {

/// Inference-mode batch normalization parameters, one entry per channel.
struct BatchNorm {
    std::vector<double> scale;
    std::vector<double> shift;
    std::vector<double> mean;
    std::vector<double> var;
};

/// All learnable parameters of the association pipeline.
///
/// Tokens are row vectors. The D x D projections w_q/w_k/w_v/w_p apply from
/// the right (rows index input channels, columns output channels); conv1
/// (D x C_h) and conv2 (C_h x 1) likewise. Matrices are row-major in memory
/// and in the weight file.
struct PipelineWeights {
    std::size_t dim = 0;    // D
    std::size_t hidden = 0; // C_h
    Matrix w_q, w_k, w_v;
    Matrix conv1;
    std::vector<double> conv1_bias;
    BatchNorm bn;
    Matrix conv2;
    std::vector<double> conv2_bias;
    Matrix w_p;

    /// Throws std::invalid_argument on any shape inconsistency or bn var <= 0.
    void validate() const;
};

/// JSON weight file, keys: D, C_h, W_q, W_k, W_v, conv1, conv1_bias,
/// bn_scale, bn_shift, bn_mean, bn_var, conv2, conv2_bias, W_p.
PipelineWeights load_weights(const std::filesystem::path& path);
void save_weights(const PipelineWeights& w, const std::filesystem::path& path);

/// Untrained dot-product pipeline: identity projections, a single-channel
/// pair scorer computing (q . k) / sqrt(D), and w_p = 0.5 * I.
PipelineWeights default_weights(std::size_t dim);

} // namespace crosstrack

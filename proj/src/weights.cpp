#include "crosstrack/weights.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace crosstrack {

namespace {

using nlohmann::json;

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("weights: " + what);
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m.at(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& name) {
    require(j.is_array(), name + " must be a nested array");
    Matrix m;
    m.rows = j.size();
    m.cols = m.rows ? j[0].size() : 0;
    m.data.reserve(m.rows * m.cols);
    for (const auto& row : j) {
        require(row.is_array() && row.size() == m.cols, name + " is ragged");
        for (const auto& v : row) {
            require(v.is_number(), name + " has a non-numeric entry");
            m.data.push_back(v.get<double>());
        }
    }
    return m;
}

std::vector<double> vector_from_json(const json& j, const std::string& name) {
    require(j.is_array(), name + " must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        require(v.is_number(), name + " has a non-numeric entry");
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace

void PipelineWeights::validate() const {
    require(dim > 0, "D must be positive");
    require(hidden > 0, "C_h must be positive");
    auto square = [&](const Matrix& m, const char* name) {
        require(m.rows == dim && m.cols == dim,
                std::string(name) + " must be D x D");
    };
    square(w_q, "W_q");
    square(w_k, "W_k");
    square(w_v, "W_v");
    square(w_p, "W_p");
    require(conv1.rows == dim && conv1.cols == hidden, "conv1 must be D x C_h");
    require(conv1_bias.size() == hidden, "conv1_bias must have C_h entries");
    require(bn.scale.size() == hidden && bn.shift.size() == hidden &&
                bn.mean.size() == hidden && bn.var.size() == hidden,
            "bn arrays must have C_h entries");
    for (double v : bn.var) {
        require(v > 0.0, "bn variance must be positive");
    }
    require(conv2.rows == hidden && conv2.cols == 1, "conv2 must be C_h x 1");
    require(conv2_bias.size() == 1, "conv2_bias must have 1 entry");
}

PipelineWeights load_weights(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open weight file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("weight file " + path.string() + ": " + e.what());
    }

    PipelineWeights w;
    require(j.contains("D") && j["D"].is_number_unsigned(), "missing integer D");
    require(j.contains("C_h") && j["C_h"].is_number_unsigned(), "missing integer C_h");
    w.dim = j["D"].get<std::size_t>();
    w.hidden = j["C_h"].get<std::size_t>();
    auto field = [&](const char* name) -> const json& {
        require(j.contains(name), std::string("missing field ") + name);
        return j.at(name);
    };
    w.w_q = matrix_from_json(field("W_q"), "W_q");
    w.w_k = matrix_from_json(field("W_k"), "W_k");
    w.w_v = matrix_from_json(field("W_v"), "W_v");
    w.conv1 = matrix_from_json(field("conv1"), "conv1");
    w.conv1_bias = vector_from_json(field("conv1_bias"), "conv1_bias");
    w.bn.scale = vector_from_json(field("bn_scale"), "bn_scale");
    w.bn.shift = vector_from_json(field("bn_shift"), "bn_shift");
    w.bn.mean = vector_from_json(field("bn_mean"), "bn_mean");
    w.bn.var = vector_from_json(field("bn_var"), "bn_var");
    w.conv2 = matrix_from_json(field("conv2"), "conv2");
    w.conv2_bias = vector_from_json(field("conv2_bias"), "conv2_bias");
    w.w_p = matrix_from_json(field("W_p"), "W_p");
    w.validate();
    return w;
}

void save_weights(const PipelineWeights& w, const std::filesystem::path& path) {
    w.validate();
    json j;
    j["D"] = w.dim;
    j["C_h"] = w.hidden;
    j["W_q"] = matrix_to_json(w.w_q);
    j["W_k"] = matrix_to_json(w.w_k);
    j["W_v"] = matrix_to_json(w.w_v);
    j["conv1"] = matrix_to_json(w.conv1);
    j["conv1_bias"] = w.conv1_bias;
    j["bn_scale"] = w.bn.scale;
    j["bn_shift"] = w.bn.shift;
    j["bn_mean"] = w.bn.mean;
    j["bn_var"] = w.bn.var;
    j["conv2"] = matrix_to_json(w.conv2);
    j["conv2_bias"] = w.conv2_bias;
    j["W_p"] = matrix_to_json(w.w_p);

    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << j.dump(1) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

PipelineWeights default_weights(std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("default_weights: dim must be positive");
    PipelineWeights w;
    w.dim = dim;
    w.hidden = 1;
    auto identity = [dim](double scale) {
        Matrix m(dim, dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = scale;
        return m;
    };
    w.w_q = identity(1.0);
    w.w_k = identity(1.0);
    w.w_v = identity(1.0);
    w.conv1 = Matrix(dim, 1, 1.0); // sums the merged pair feature: q . k
    w.conv1_bias = {0.0};
    w.bn.scale = {1.0};
    w.bn.shift = {0.0};
    w.bn.mean = {0.0};
    w.bn.var = {1.0};
    w.conv2 = Matrix(1, 1, 1.0 / std::sqrt(static_cast<double>(dim)));
    w.conv2_bias = {0.0};
    w.w_p = identity(0.5); // keeps memory-shared token norms bounded
    return w;
}

} // namespace crosstrack

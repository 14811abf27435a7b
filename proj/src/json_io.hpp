#pragma once

// Internal JSON helpers shared by the model serializers. Not installed.

#include <json.hpp>

#include "sepspec/error.hpp"
#include "sepspec/matrix.hpp"
#include "sepspec/mlp.hpp"

namespace sepspec::detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw DataError("model file: matrix is not an array");
    const std::size_t rows = j.size();
    if (rows == 0) return Matrix();
    const std::size_t cols = j[0].size();
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (j[r].size() != cols) throw DataError("model file: ragged matrix");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

// Linear-stack weights and biases, one object per layer.
inline nlohmann::json layers_to_json(const Mlp& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < net.layers(); ++l) {
        layers.push_back(
            nlohmann::json{{"w", matrix_to_json(net.weights[l])}, {"b", net.biases[l]}});
    }
    return layers;
}

// Fills the weights of an already-shaped net; validates every shape.
inline void layers_from_json(const nlohmann::json& layers, Mlp& net) {
    if (layers.size() != net.layers()) throw DataError("model file: layer count mismatch");
    for (std::size_t l = 0; l < net.layers(); ++l) {
        Matrix w = matrix_from_json(layers[l].at("w"));
        if (w.rows() != net.weights[l].rows() || w.cols() != net.weights[l].cols()) {
            throw DataError("model file: layer shape mismatch");
        }
        net.weights[l] = std::move(w);
        net.biases[l] = layers[l].at("b").get<std::vector<double>>();
        if (net.biases[l].size() != net.dims[l + 1]) {
            throw DataError("model file: bias shape mismatch");
        }
    }
}

}  // namespace sepspec::detail

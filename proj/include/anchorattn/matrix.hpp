#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace anchorattn {

/// Dense row-major 2-D float matrix. Houses Q, K, V, score maps and outputs.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;  // rows * cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, float fill = 0.0f)
        : rows(r), cols(c), data(r * c, fill) {}

    float& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    float at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<const float> row(std::size_t i) const {
        return {data.data() + i * cols, cols};
    }
    std::span<float> row(std::size_t i) {
        return {data.data() + i * cols, cols};
    }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }

    /// True when every entry is finite (no NaN/Inf).
    bool all_finite() const;
};

/// Per-head (Q, K, V) triple with sequence length n and head dimension d.
struct HeadWorkload {
    Matrix q;  // n x d
    Matrix k;  // n x d
    Matrix v;  // n x d
    std::size_t n = 0;
    std::size_t d = 0;

    /// Builds a workload from three n x d matrices, validating shapes.
    /// Throws std::invalid_argument on mismatched or empty shapes.
    static HeadWorkload create(Matrix q, Matrix k, Matrix v);
};

/// Blocking and threshold parameters for the sparse pipeline.
/// Defaults: query/key block 128, step 16, theta 12.
struct BlockConfig {
    std::size_t b_q = 128;   // query block size in tokens
    std::size_t b_kv = 128;  // key/value block size in tokens
    std::size_t step = 1;    // query-group width in blocks
    double theta = 12.0;     // logit-difference threshold

    /// Throws std::invalid_argument unless b_q, b_kv, step >= 1 and one of
    /// b_q, b_kv divides the other.
    void validate() const;
};

/// Mean-pools consecutive row groups of `block` rows. The final partial
/// group, if any, is averaged over its actual length.
/// Output has ceil(rows / block) rows and the same column count.
Matrix avgpool_rows(const Matrix& m, std::size_t block);

/// avgpool_rows for a 1-D sequence of values.
std::vector<double> avgpool_vector(std::span<const double> v, std::size_t block);

}  // namespace anchorattn

#include "anchorattn/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace anchorattn {

bool Matrix::all_finite() const {
    for (float x : data) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

HeadWorkload HeadWorkload::create(Matrix q, Matrix k, Matrix v) {
    if (q.rows == 0 || q.cols == 0) {
        throw std::invalid_argument("HeadWorkload: n and d must be >= 1");
    }
    if (!q.same_shape(k) || !q.same_shape(v)) {
        throw std::invalid_argument("HeadWorkload: q, k, v must share shape (n, d)");
    }
    HeadWorkload w;
    w.n = q.rows;
    w.d = q.cols;
    w.q = std::move(q);
    w.k = std::move(k);
    w.v = std::move(v);
    return w;
}

void BlockConfig::validate() const {
    if (b_q == 0 || b_kv == 0 || step == 0) {
        throw std::invalid_argument("BlockConfig: b_q, b_kv, step must be >= 1");
    }
    if (b_q % b_kv != 0 && b_kv % b_q != 0) {
        throw std::invalid_argument(
            "BlockConfig: one of b_q, b_kv must divide the other");
    }
    if (!std::isfinite(theta)) {
        throw std::invalid_argument("BlockConfig: theta must be finite");
    }
}

Matrix avgpool_rows(const Matrix& m, std::size_t block) {
    if (block == 0) throw std::invalid_argument("avgpool_rows: block must be >= 1");
    if (m.rows == 0) throw std::invalid_argument("avgpool_rows: empty matrix");

    const std::size_t out_rows = (m.rows + block - 1) / block;
    Matrix out(out_rows, m.cols);
    std::vector<double> sums(m.cols);
    for (std::size_t g = 0; g < out_rows; ++g) {
        const std::size_t begin = g * block;
        const std::size_t end = std::min(begin + block, m.rows);
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t i = begin; i < end; ++i) {
            const float* row = m.data.data() + i * m.cols;
            for (std::size_t j = 0; j < m.cols; ++j) sums[j] += row[j];
        }
        const double inv = 1.0 / static_cast<double>(end - begin);
        for (std::size_t j = 0; j < m.cols; ++j) {
            out.at(g, j) = static_cast<float>(sums[j] * inv);
        }
    }
    return out;
}

std::vector<double> avgpool_vector(std::span<const double> v, std::size_t block) {
    if (block == 0) throw std::invalid_argument("avgpool_vector: block must be >= 1");
    if (v.empty()) throw std::invalid_argument("avgpool_vector: empty vector");

    const std::size_t out_len = (v.size() + block - 1) / block;
    std::vector<double> out(out_len);
    for (std::size_t g = 0; g < out_len; ++g) {
        const std::size_t begin = g * block;
        const std::size_t end = std::min(begin + block, v.size());
        double sum = 0.0;
        for (std::size_t i = begin; i < end; ++i) sum += v[i];
        out[g] = sum / static_cast<double>(end - begin);
    }
    return out;
}

}  // namespace anchorattn

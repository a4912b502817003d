#include "anchorattn/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace anchorattn {

namespace {

double dot_scaled(std::span<const float> a, std::span<const float> b, double inv_sqrt_d) {
    double sum = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        sum += static_cast<double>(a[t]) * static_cast<double>(b[t]);
    }
    return sum * inv_sqrt_d;
}

}  // namespace

Matrix dense_scores(const Matrix& q, const Matrix& k) {
    if (q.cols != k.cols) {
        throw std::invalid_argument("dense_scores: q and k must share the head dim");
    }
    const std::size_t n = q.rows;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.cols));
    Matrix s(n, k.rows, -std::numeric_limits<float>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i && j < k.rows; ++j) {
            s.at(i, j) = static_cast<float>(dot_scaled(q.row(i), k.row(j), inv_sqrt_d));
        }
    }
    return s;
}

Matrix dense_probs(const Matrix& q, const Matrix& k) {
    if (q.cols != k.cols) {
        throw std::invalid_argument("dense_probs: q and k must share the head dim");
    }
    const std::size_t n = q.rows;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.cols));
    Matrix p(n, k.rows, 0.0f);
    std::vector<double> logits;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t width = std::min(i + 1, k.rows);
        logits.resize(width);
        double row_max = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < width; ++j) {
            logits[j] = dot_scaled(q.row(i), k.row(j), inv_sqrt_d);
            row_max = std::max(row_max, logits[j]);
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
            logits[j] = std::exp(logits[j] - row_max);
            denom += logits[j];
        }
        for (std::size_t j = 0; j < width; ++j) {
            p.at(i, j) = static_cast<float>(logits[j] / denom);
        }
    }
    return p;
}

AttentionOutput dense_attention(const HeadWorkload& w) {
    const std::size_t n = w.n;
    const std::size_t d = w.d;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    AttentionOutput out;
    out.o = Matrix(n, d);
    std::vector<double> logits;
    std::vector<double> acc(d);
    for (std::size_t i = 0; i < n; ++i) {
        logits.resize(i + 1);
        double row_max = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j <= i; ++j) {
            logits[j] = dot_scaled(w.q.row(i), w.k.row(j), inv_sqrt_d);
            row_max = std::max(row_max, logits[j]);
        }
        double denom = 0.0;
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t j = 0; j <= i; ++j) {
            const double p = std::exp(logits[j] - row_max);
            denom += p;
            const auto v_row = w.v.row(j);
            for (std::size_t t = 0; t < d; ++t) acc[t] += p * v_row[t];
        }
        for (std::size_t t = 0; t < d; ++t) {
            out.o.at(i, t) = static_cast<float>(acc[t] / denom);
        }
    }
    return out;
}

AttentionOutput masked_attention(const HeadWorkload& w, const SelectionMask& mask) {
    if (mask.n != w.n) {
        throw std::invalid_argument("masked_attention: mask length mismatch");
    }
    const std::size_t d = w.d;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    AttentionOutput out;
    out.o = Matrix(w.n, d);
    std::vector<double> logits;
    std::vector<double> acc(d);
    for (std::size_t i = 0; i < w.n; ++i) {
        const auto& selected = mask.rows[i];
        if (selected.empty()) {
            throw std::invalid_argument("masked_attention: row " + std::to_string(i) +
                                        " has no selected positions");
        }
        logits.resize(selected.size());
        double row_max = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < selected.size(); ++s) {
            const std::uint32_t j = selected[s];
            if (j > i) {
                throw std::invalid_argument("masked_attention: non-causal index in row " +
                                            std::to_string(i));
            }
            logits[s] = dot_scaled(w.q.row(i), w.k.row(j), inv_sqrt_d);
            row_max = std::max(row_max, logits[s]);
        }
        double denom = 0.0;
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t s = 0; s < selected.size(); ++s) {
            const double p = std::exp(logits[s] - row_max);
            denom += p;
            const auto v_row = w.v.row(selected[s]);
            for (std::size_t t = 0; t < d; ++t) acc[t] += p * v_row[t];
        }
        for (std::size_t t = 0; t < d; ++t) {
            out.o.at(i, t) = static_cast<float>(acc[t] / denom);
        }
    }
    return out;
}

}  // namespace anchorattn

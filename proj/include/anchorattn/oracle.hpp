#pragma once

#include "anchorattn/matrix.hpp"
#include "anchorattn/selection_mask.hpp"

namespace anchorattn {

/// Output of an attention computation, one row per query row.
struct AttentionOutput {
    Matrix o;  // n x d
};

/// Scaled causal score map: S[i][j] = dot(q_i, k_j) / sqrt(d) for j <= i,
/// -inf above the diagonal. q and k must share the column count.
Matrix dense_scores(const Matrix& q, const Matrix& k);

/// Row-wise softmax of dense_scores over the causal prefix; zero above the
/// diagonal. Every row sums to 1.
Matrix dense_probs(const Matrix& q, const Matrix& k);

/// Ground-truth dense causal attention, computed with row-max subtraction.
AttentionOutput dense_attention(const HeadWorkload& w);

/// Attention restricted to the selected positions of `mask`: row-wise
/// softmax over the selection, then the weighted sum of the selected V rows.
/// Throws std::invalid_argument naming the row if some row selects nothing.
AttentionOutput masked_attention(const HeadWorkload& w, const SelectionMask& mask);

}  // namespace anchorattn

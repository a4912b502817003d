#pragma once

#include <cstddef>

#include "anchorattn/matrix.hpp"
#include "anchorattn/selection_mask.hpp"

namespace anchorattn {

/// Selection tile shape: block granularity is (b, b), stripe granularity is
/// (b, 1).
struct Granularity {
    std::size_t row_span = 1;
    std::size_t col_span = 1;
};

/// Tile-sums of a causal probability map over (row_span x col_span) tiles.
/// Tiles straddling the causal boundary sum only their causal entries.
Matrix pooled_score_map(const Matrix& p, Granularity g);

/// Per pooled row, selects the k highest-scoring causal tiles (ties broken by
/// lower column index), expanded back to a token-level mask. k larger than
/// the available tiles selects everything.
SelectionMask select_topk(const Matrix& p, std::size_t k, Granularity g);

/// Per pooled row, selects tiles in descending score order until the
/// cumulative mass reaches gamma times the row mass (smallest such prefix).
SelectionMask select_topcdf(const Matrix& p, double gamma, Granularity g);

/// Difference-aware selection on a scaled score map: tiles are averaged over
/// their causal entries and kept iff (row max - tile score) <= theta.
SelectionMask select_diff_aware(const Matrix& s, double theta, Granularity g);

/// Initial-plus-local-window mask: row i selects j < init_tokens and
/// j > i - local_tokens, causally clamped.
SelectionMask streaming_mask(std::size_t n, std::size_t init_tokens,
                             std::size_t local_tokens);

}  // namespace anchorattn

#pragma once

#include <cstddef>
#include <vector>

#include "anchorattn/matrix.hpp"
#include "anchorattn/oracle.hpp"
#include "anchorattn/selection_mask.hpp"

namespace anchorattn {

/// Running online-softmax state over the anchor region (initial block plus
/// the step-aligned local window), one entry per query row.
struct AnchorState {
    std::size_t n = 0;
    std::size_t d = 0;
    BlockConfig cfg;
    std::vector<double> m;    // running max logits, the per-row anchor
    std::vector<double> l;    // softmax normalizers, always > 0
    std::vector<double> acc;  // n x d weighted value accumulators
};

/// KV blocks covered by the anchor pass for query block `q_block`
/// (0-indexed): the initial block plus the group-aligned local window up to
/// the diagonal, clamped to existing blocks.
std::vector<std::size_t> anchor_region(std::size_t q_block, const BlockConfig& cfg,
                                       std::size_t n);

/// First key token of the local window for query group `group`. Rows of the
/// group are covered on [0, b_kv) and [window_start_token, i] of the causal
/// domain.
std::size_t window_start_token(std::size_t group, const BlockConfig& cfg,
                               std::size_t n);

/// Online-softmax pass over exactly the anchor region intersected with the
/// causal domain. Diagonal blocks apply the causal mask elementwise.
AnchorState compute_anchor(const HeadWorkload& w, const BlockConfig& cfg);

/// Anchor-covered positions as a SelectionMask (for oracle comparisons).
SelectionMask anchor_mask(std::size_t n, const BlockConfig& cfg);

/// Covered causal position count, equal to anchor_mask(n, cfg).total_selected().
std::size_t anchor_covered_count(std::size_t n, const BlockConfig& cfg);

/// Finalizes the state: row i of the result is acc[i] / l[i].
AttentionOutput finalize_anchor(const AnchorState& state);

}  // namespace anchorattn

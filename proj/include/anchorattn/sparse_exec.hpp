#pragma once

#include <cstddef>
#include <cstdint>

#include "anchorattn/anchor_pass.hpp"
#include "anchorattn/stripe_identify.hpp"

namespace anchorattn {

/// Work accounting for one sparse run.
struct RunStats {
    std::size_t computed_positions = 0;  // anchor region + folded stripes
    std::size_t causal_positions = 0;    // n(n+1)/2
    double sparsity = 0.0;               // 1 - computed / causal
    double recall = 0.0;                 // filled by the harness when oracle
                                         // probabilities are available
};

struct SparseResult {
    AttentionOutput out;
    RunStats stats;
};

/// Execution knobs with no semantic effect: stripe indices may be folded in
/// any chunking and order.
struct FoldPlan {
    std::size_t index_chunk = 64;   // indices gathered per merge step
    std::uint64_t shuffle_seed = 0; // 0 keeps the natural sorted order
};

/// Resumes the online softmax from `state` and folds in every stripe index of
/// the row's group with j <= i, skipping indices already covered by the
/// anchor region. Output row i is acc/l after the fold.
SparseResult sparse_attention(const HeadWorkload& w, const AnchorState& state,
                              const StripeIndex& idx, const BlockConfig& cfg,
                              const FoldPlan& plan = {});

/// Full pipeline: compute_anchor -> identify_stripes -> sparse_attention.
/// With zero_anchor the identification compares against a zero anchor while
/// the anchor region is still computed and reused.
SparseResult anchor_attention(const HeadWorkload& w, const BlockConfig& cfg,
                              bool zero_anchor = false);

/// Anchor-covered positions united with the selected stripes, as a mask for
/// oracle comparisons; sparse_attention equals masked_attention on it.
SelectionMask union_mask(const StripeIndex& idx, const BlockConfig& cfg,
                         std::size_t n);

}  // namespace anchorattn

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "anchorattn/anchor_pass.hpp"
#include "anchorattn/matrix.hpp"

namespace anchorattn {

/// Discrete stripe coordinates for the middle region, one sorted index list
/// per query group (a group spans step * b_q query rows).
struct StripeIndex {
    std::size_t n = 0;
    BlockConfig cfg;
    /// Selected key-token indices per group, sorted ascending, unique, all in
    /// [b_kv, middle_end(g)).
    std::vector<std::vector<std::uint32_t>> groups;

    std::size_t group_count() const { return groups.size(); }
    std::size_t f_c(std::size_t g) const { return groups[g].size(); }
    std::size_t total_selected() const;
    bool empty() const;
};

/// Number of query groups for a sequence of length n.
std::size_t group_count(std::size_t n, const BlockConfig& cfg);

/// Exclusive upper key-token bound of the searchable middle region of
/// `group`: the group's window start, so the middle region sits strictly
/// between the initial block and the local window. The searchable region is
/// [b_kv, middle_end_token); empty when middle_end_token <= b_kv.
std::size_t middle_end_token(std::size_t group, const BlockConfig& cfg,
                             std::size_t n);

/// One pooled anchor value per query group: the mean of state.m over the
/// group's step * b_q rows (final group clamped at n).
std::vector<double> pooled_anchor(const AnchorState& state, const BlockConfig& cfg);

/// Difference-aware stripe selection: key token j of group g's middle region
/// is selected iff anchor_per_group[g] - dot(pooled_q_g, k_j)/sqrt(d) <= theta.
/// Ties at exactly theta are included.
StripeIndex identify_stripes(const HeadWorkload& w, const AnchorState& state,
                             const BlockConfig& cfg);

/// Ablation arm: identical search with the pooled anchor replaced by zero.
StripeIndex identify_stripes_zero_anchor(const HeadWorkload& w,
                                         const BlockConfig& cfg);

}  // namespace anchorattn

#pragma once

#include <algorithm>
#include <cstddef>

#include "anchorattn/matrix.hpp"

namespace anchorattn::detail {

// Blocked-domain index arithmetic shared by the anchor pass, the stripe
// search and the sparse fold. Everything is 0-indexed and token-based;
// kv blocks are [b * b_kv, min((b+1) * b_kv, n)).
//
// Per query group g the causal domain of a row i splits into exactly three
// disjoint ranges:
//   initial block   [0, min(b_kv, i+1))
//   middle region   [b_kv, middle_end(g))          -- searched for stripes
//   local window    [window_start(g), i+1)         -- anchor-covered
// with middle_end(g) == window_start(g), so the three tile the causal row
// with no overlap and no gap.

inline std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

inline std::size_t query_block_count(std::size_t n, const BlockConfig& cfg) {
    return ceil_div(n, cfg.b_q);
}

inline std::size_t kv_block_count(std::size_t n, const BlockConfig& cfg) {
    return ceil_div(n, cfg.b_kv);
}

inline std::size_t group_of_query_block(std::size_t q_block, const BlockConfig& cfg) {
    return q_block / cfg.step;
}

inline std::size_t group_count(std::size_t n, const BlockConfig& cfg) {
    return ceil_div(query_block_count(n, cfg), cfg.step);
}

inline std::size_t group_row_begin(std::size_t group, const BlockConfig& cfg) {
    return group * cfg.step * cfg.b_q;
}

inline std::size_t group_row_end(std::size_t group, const BlockConfig& cfg,
                                 std::size_t n) {
    return std::min(group_row_begin(group + 1, cfg), n);
}

inline std::size_t group_of_row(std::size_t row, const BlockConfig& cfg) {
    return row / (cfg.step * cfg.b_q);
}

// First kv block of the group's local window. Never block 0: the initial
// block is not double-counted.
inline std::size_t window_start_block(std::size_t group, const BlockConfig& cfg) {
    const std::size_t row_begin = group_row_begin(group, cfg);
    if (row_begin < cfg.b_kv * 2) return 1;
    return row_begin / cfg.b_kv - 1;
}

inline std::size_t window_start_token(std::size_t group, const BlockConfig& cfg,
                                      std::size_t n) {
    return std::min(window_start_block(group, cfg) * cfg.b_kv, n);
}

inline std::size_t middle_end_token(std::size_t group, const BlockConfig& cfg,
                                    std::size_t n) {
    return std::max(detail::window_start_token(group, cfg, n), std::min(cfg.b_kv, n));
}

// True when the anchor pass computes (row, key). Assumes key <= row.
inline bool anchor_covered(std::size_t row, std::size_t key, const BlockConfig& cfg,
                           std::size_t n) {
    if (key < cfg.b_kv) return true;
    return key >= detail::window_start_token(group_of_row(row, cfg), cfg, n);
}

// Covered causal positions of one row: the initial block plus the window.
inline std::size_t covered_count_for_row(std::size_t row, const BlockConfig& cfg,
                                         std::size_t n) {
    const std::size_t init = std::min(cfg.b_kv, row + 1);
    const std::size_t wstart = detail::window_start_token(group_of_row(row, cfg), cfg, n);
    const std::size_t window = row + 1 > wstart ? row + 1 - wstart : 0;
    return init + window;  // wstart >= b_kv, so the ranges are disjoint
}

}  // namespace anchorattn::detail

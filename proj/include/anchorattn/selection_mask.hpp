#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace anchorattn {

/// Boolean causal-domain membership structure: per query row, a sorted,
/// duplicate-free list of selected key indices restricted to j <= i.
struct SelectionMask {
    std::size_t n = 0;
    std::vector<std::vector<std::uint32_t>> rows;

    SelectionMask() = default;
    explicit SelectionMask(std::size_t n_) : n(n_), rows(n_) {}

    /// Full causal mask: row i selects 0..i.
    static SelectionMask full_causal(std::size_t n);

    /// Mask with no selected positions.
    static SelectionMask empty(std::size_t n) { return SelectionMask(n); }

    /// Total selected positions across all rows.
    std::size_t total_selected() const;

    /// Causal position count n(n+1)/2.
    std::size_t causal_positions() const { return n * (n + 1) / 2; }

    bool contains(std::size_t i, std::uint32_t j) const;

    /// Sorts and deduplicates every row; drops non-causal indices.
    void normalize();

    /// True when every row is sorted, unique and causal.
    bool valid() const;

    /// True when every selected position of this mask is selected in `other`.
    bool subset_of(const SelectionMask& other) const;
};

/// Union of two masks over the same n.
SelectionMask mask_union(const SelectionMask& a, const SelectionMask& b);

}  // namespace anchorattn

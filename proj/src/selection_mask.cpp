#include "anchorattn/selection_mask.hpp"

#include <algorithm>
#include <numeric>

namespace anchorattn {

SelectionMask SelectionMask::full_causal(std::size_t n) {
    SelectionMask m(n);
    for (std::size_t i = 0; i < n; ++i) {
        m.rows[i].resize(i + 1);
        std::iota(m.rows[i].begin(), m.rows[i].end(), 0u);
    }
    return m;
}

std::size_t SelectionMask::total_selected() const {
    std::size_t total = 0;
    for (const auto& row : rows) total += row.size();
    return total;
}

bool SelectionMask::contains(std::size_t i, std::uint32_t j) const {
    const auto& row = rows[i];
    return std::binary_search(row.begin(), row.end(), j);
}

void SelectionMask::normalize() {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& row = rows[i];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        while (!row.empty() && row.back() > i) row.pop_back();
    }
}

bool SelectionMask::valid() const {
    if (rows.size() != n) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = rows[i];
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (row[k] > i) return false;
            if (k > 0 && row[k] <= row[k - 1]) return false;
        }
    }
    return true;
}

bool SelectionMask::subset_of(const SelectionMask& other) const {
    if (n != other.n) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::includes(other.rows[i].begin(), other.rows[i].end(),
                           rows[i].begin(), rows[i].end())) {
            return false;
        }
    }
    return true;
}

SelectionMask mask_union(const SelectionMask& a, const SelectionMask& b) {
    SelectionMask out(a.n);
    for (std::size_t i = 0; i < a.n; ++i) {
        out.rows[i].resize(a.rows[i].size() + b.rows[i].size());
        auto end = std::set_union(a.rows[i].begin(), a.rows[i].end(),
                                  b.rows[i].begin(), b.rows[i].end(),
                                  out.rows[i].begin());
        out.rows[i].erase(end, out.rows[i].end());
    }
    return out;
}

}  // namespace anchorattn

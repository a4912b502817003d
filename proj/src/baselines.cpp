#include "anchorattn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace anchorattn {

namespace {

void check_granularity(Granularity g) {
    if (g.row_span == 0 || g.col_span == 0) {
        throw std::invalid_argument("Granularity spans must be >= 1");
    }
}

void check_square_causal(const Matrix& p) {
    if (p.rows != p.cols) {
        throw std::invalid_argument("expected a square causal map");
    }
}

struct TileRange {
    std::size_t row_begin, row_end;  // token rows of pooled row R
    std::size_t col_begin, col_end;  // token cols of tile C
};

TileRange tile_range(std::size_t n, Granularity g, std::size_t R, std::size_t C) {
    return {R * g.row_span, std::min((R + 1) * g.row_span, n),
            C * g.col_span, std::min((C + 1) * g.col_span, n)};
}

// Adds every causal position of the tile to the mask rows.
void expand_tile(SelectionMask& mask, const TileRange& t) {
    for (std::size_t i = t.row_begin; i < t.row_end; ++i) {
        const std::size_t col_end = std::min(t.col_end, i + 1);
        for (std::size_t j = t.col_begin; j < col_end; ++j) {
            mask.rows[i].push_back(static_cast<std::uint32_t>(j));
        }
    }
}

// (score, col) pairs in selection order: score descending, lower col first.
std::vector<std::pair<double, std::size_t>> ranked_tiles(
    const Matrix& pooled, std::size_t R, std::size_t causal_tiles) {
    std::vector<std::pair<double, std::size_t>> tiles(causal_tiles);
    for (std::size_t C = 0; C < causal_tiles; ++C) {
        tiles[C] = {static_cast<double>(pooled.at(R, C)), C};
    }
    std::stable_sort(tiles.begin(), tiles.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    return tiles;
}

}  // namespace

Matrix pooled_score_map(const Matrix& p, Granularity g) {
    check_granularity(g);
    check_square_causal(p);
    const std::size_t n = p.rows;
    const std::size_t out_rows = (n + g.row_span - 1) / g.row_span;
    const std::size_t out_cols = (n + g.col_span - 1) / g.col_span;
    Matrix out(out_rows, out_cols);
    for (std::size_t R = 0; R < out_rows; ++R) {
        for (std::size_t C = 0; C < out_cols; ++C) {
            const TileRange t = tile_range(n, g, R, C);
            double sum = 0.0;
            for (std::size_t i = t.row_begin; i < t.row_end; ++i) {
                const std::size_t col_end = std::min(t.col_end, i + 1);
                for (std::size_t j = t.col_begin; j < col_end; ++j) {
                    sum += p.at(i, j);
                }
            }
            out.at(R, C) = static_cast<float>(sum);
        }
    }
    return out;
}

SelectionMask select_topk(const Matrix& p, std::size_t k, Granularity g) {
    check_granularity(g);
    check_square_causal(p);
    if (k == 0) throw std::invalid_argument("select_topk: k must be >= 1");
    const std::size_t n = p.rows;
    const Matrix pooled = pooled_score_map(p, g);
    SelectionMask mask(n);
    for (std::size_t R = 0; R < pooled.rows; ++R) {
        // Causal tiles of this pooled row: col_begin < row_end.
        const std::size_t row_end = std::min((R + 1) * g.row_span, n);
        const std::size_t causal_tiles = (row_end + g.col_span - 1) / g.col_span;
        const auto tiles = ranked_tiles(pooled, R, causal_tiles);
        const std::size_t take = std::min(k, tiles.size());
        for (std::size_t t = 0; t < take; ++t) {
            expand_tile(mask, tile_range(n, g, R, tiles[t].second));
        }
    }
    mask.normalize();
    return mask;
}

SelectionMask select_topcdf(const Matrix& p, double gamma, Granularity g) {
    check_granularity(g);
    check_square_causal(p);
    if (!(gamma > 0.0) || gamma > 1.0) {
        throw std::invalid_argument("select_topcdf: gamma must be in (0, 1]");
    }
    const std::size_t n = p.rows;
    const Matrix pooled = pooled_score_map(p, g);
    SelectionMask mask(n);
    for (std::size_t R = 0; R < pooled.rows; ++R) {
        const std::size_t row_end = std::min((R + 1) * g.row_span, n);
        const std::size_t causal_tiles = (row_end + g.col_span - 1) / g.col_span;
        const auto tiles = ranked_tiles(pooled, R, causal_tiles);
        // Row mass summed in selection order, so the full prefix always
        // reaches gamma * mass even for gamma == 1.
        double row_mass = 0.0;
        for (const auto& t : tiles) row_mass += t.first;
        const double target = gamma * row_mass;
        double cum = 0.0;
        for (std::size_t t = 0; t < tiles.size(); ++t) {
            cum += tiles[t].first;
            expand_tile(mask, tile_range(n, g, R, tiles[t].second));
            if (cum >= target) break;
        }
    }
    mask.normalize();
    return mask;
}

SelectionMask select_diff_aware(const Matrix& s, double theta, Granularity g) {
    check_granularity(g);
    check_square_causal(s);
    const std::size_t n = s.rows;
    const std::size_t out_rows = (n + g.row_span - 1) / g.row_span;
    SelectionMask mask(n);
    std::vector<double> means;
    for (std::size_t R = 0; R < out_rows; ++R) {
        const std::size_t row_end = std::min((R + 1) * g.row_span, n);
        const std::size_t causal_tiles = (row_end + g.col_span - 1) / g.col_span;
        means.assign(causal_tiles, 0.0);
        double row_max = -std::numeric_limits<double>::infinity();
        for (std::size_t C = 0; C < causal_tiles; ++C) {
            const TileRange t = tile_range(n, g, R, C);
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t i = t.row_begin; i < t.row_end; ++i) {
                const std::size_t col_end = std::min(t.col_end, i + 1);
                for (std::size_t j = t.col_begin; j < col_end; ++j) {
                    sum += s.at(i, j);
                    ++count;
                }
            }
            means[C] = sum / static_cast<double>(count);
            row_max = std::max(row_max, means[C]);
        }
        for (std::size_t C = 0; C < causal_tiles; ++C) {
            if (row_max - means[C] <= theta) {
                expand_tile(mask, tile_range(n, g, R, C));
            }
        }
    }
    mask.normalize();
    return mask;
}

SelectionMask streaming_mask(std::size_t n, std::size_t init_tokens,
                             std::size_t local_tokens) {
    if (local_tokens == 0) {
        throw std::invalid_argument("streaming_mask: local_tokens must be >= 1");
    }
    SelectionMask mask(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t init_end = std::min(init_tokens, i + 1);
        const std::size_t local_begin =
            std::max(init_end, i + 1 > local_tokens ? i + 1 - local_tokens : 0);
        auto& row = mask.rows[i];
        for (std::size_t j = 0; j < init_end; ++j) row.push_back(static_cast<std::uint32_t>(j));
        for (std::size_t j = local_begin; j <= i; ++j) row.push_back(static_cast<std::uint32_t>(j));
    }
    return mask;
}

}  // namespace anchorattn

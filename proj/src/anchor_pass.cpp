#include "anchorattn/anchor_pass.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "detail/geometry.hpp"

namespace anchorattn {

std::vector<std::size_t> anchor_region(std::size_t q_block, const BlockConfig& cfg,
                                       std::size_t n) {
    cfg.validate();
    const std::size_t t_m = detail::query_block_count(n, cfg);
    if (q_block >= t_m) {
        throw std::invalid_argument("anchor_region: query block out of range");
    }
    const std::size_t t_n = detail::kv_block_count(n, cfg);
    const std::size_t group = detail::group_of_query_block(q_block, cfg);
    const std::size_t last_row = std::min((q_block + 1) * cfg.b_q, n) - 1;
    const std::size_t diag_block = last_row / cfg.b_kv;

    std::vector<std::size_t> blocks = {0};
    for (std::size_t b = detail::window_start_block(group, cfg);
         b <= diag_block && b < t_n; ++b) {
        blocks.push_back(b);
    }
    return blocks;
}

std::size_t window_start_token(std::size_t group, const BlockConfig& cfg,
                               std::size_t n) {
    return detail::window_start_token(group, cfg, n);
}

AnchorState compute_anchor(const HeadWorkload& w, const BlockConfig& cfg) {
    cfg.validate();
    const std::size_t n = w.n;
    const std::size_t d = w.d;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

    AnchorState state;
    state.n = n;
    state.d = d;
    state.cfg = cfg;
    state.m.assign(n, -std::numeric_limits<double>::infinity());
    state.l.assign(n, 0.0);
    state.acc.assign(n * d, 0.0);

    const std::size_t t_m = detail::query_block_count(n, cfg);
    std::vector<double> qk(cfg.b_kv);
    for (std::size_t qb = 0; qb < t_m; ++qb) {
        const std::size_t row_begin = qb * cfg.b_q;
        const std::size_t row_end = std::min(row_begin + cfg.b_q, n);
        for (std::size_t kvb : anchor_region(qb, cfg, n)) {
            const std::size_t key_begin = kvb * cfg.b_kv;
            const std::size_t key_end = std::min(key_begin + cfg.b_kv, n);
            for (std::size_t i = row_begin; i < row_end; ++i) {
                // Diagonal blocks take only the causal prefix of the block.
                const std::size_t causal_end = std::min(key_end, i + 1);
                if (key_begin >= causal_end) continue;
                const auto q_row = w.q.row(i);

                double block_max = -std::numeric_limits<double>::infinity();
                for (std::size_t j = key_begin; j < causal_end; ++j) {
                    double sum = 0.0;
                    const auto k_row = w.k.row(j);
                    for (std::size_t t = 0; t < d; ++t) {
                        sum += static_cast<double>(q_row[t]) * static_cast<double>(k_row[t]);
                    }
                    qk[j - key_begin] = sum * inv_sqrt_d;
                    block_max = std::max(block_max, qk[j - key_begin]);
                }

                const double m_new = std::max(state.m[i], block_max);
                const double alpha =
                    std::isinf(state.m[i]) ? 0.0 : std::exp(state.m[i] - m_new);
                double l_block = 0.0;
                double* acc_row = state.acc.data() + i * d;
                for (std::size_t t = 0; t < d; ++t) acc_row[t] *= alpha;
                for (std::size_t j = key_begin; j < causal_end; ++j) {
                    const double p = std::exp(qk[j - key_begin] - m_new);
                    l_block += p;
                    const auto v_row = w.v.row(j);
                    for (std::size_t t = 0; t < d; ++t) {
                        acc_row[t] += p * static_cast<double>(v_row[t]);
                    }
                }
                state.l[i] = state.l[i] * alpha + l_block;
                state.m[i] = m_new;
            }
        }
    }
    return state;
}

SelectionMask anchor_mask(std::size_t n, const BlockConfig& cfg) {
    cfg.validate();
    SelectionMask mask(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t group = detail::group_of_row(i, cfg);
        const std::size_t init_end = std::min(cfg.b_kv, i + 1);
        const std::size_t wstart = detail::window_start_token(group, cfg, n);
        auto& row = mask.rows[i];
        row.reserve(detail::covered_count_for_row(i, cfg, n));
        for (std::size_t j = 0; j < init_end; ++j) row.push_back(static_cast<std::uint32_t>(j));
        for (std::size_t j = wstart; j <= i; ++j) row.push_back(static_cast<std::uint32_t>(j));
    }
    return mask;
}

std::size_t anchor_covered_count(std::size_t n, const BlockConfig& cfg) {
    cfg.validate();
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) total += detail::covered_count_for_row(i, cfg, n);
    return total;
}

AttentionOutput finalize_anchor(const AnchorState& state) {
    AttentionOutput out;
    out.o = Matrix(state.n, state.d);
    for (std::size_t i = 0; i < state.n; ++i) {
        const double inv_l = 1.0 / state.l[i];
        const double* acc_row = state.acc.data() + i * state.d;
        for (std::size_t t = 0; t < state.d; ++t) {
            out.o.at(i, t) = static_cast<float>(acc_row[t] * inv_l);
        }
    }
    return out;
}

}  // namespace anchorattn

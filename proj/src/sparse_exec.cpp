#include "anchorattn/sparse_exec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "detail/geometry.hpp"
#include "detail/rng.hpp"

namespace anchorattn {

SparseResult sparse_attention(const HeadWorkload& w, const AnchorState& state,
                              const StripeIndex& idx, const BlockConfig& cfg,
                              const FoldPlan& plan) {
    cfg.validate();
    if (state.n != w.n || idx.n != w.n) {
        throw std::invalid_argument("sparse_attention: inputs built for another workload");
    }
    if (state.cfg.b_q != cfg.b_q || state.cfg.b_kv != cfg.b_kv ||
        state.cfg.step != cfg.step) {
        throw std::invalid_argument("sparse_attention: anchor state uses another blocking");
    }
    if (idx.groups.size() != detail::group_count(w.n, cfg)) {
        throw std::invalid_argument("sparse_attention: stripe index group count mismatch");
    }
    if (plan.index_chunk == 0) {
        throw std::invalid_argument("sparse_attention: index_chunk must be >= 1");
    }

    const std::size_t n = w.n;
    const std::size_t d = w.d;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

    SparseResult res;
    res.out.o = Matrix(n, d);
    res.stats.causal_positions = n * (n + 1) / 2;
    res.stats.computed_positions = anchor_covered_count(n, cfg);

    std::vector<double> m = state.m;
    std::vector<double> l = state.l;
    std::vector<double> acc = state.acc;
    std::vector<double> qk(plan.index_chunk);
    std::vector<std::uint32_t> kept(plan.index_chunk);
    std::vector<std::uint32_t> order;

    const std::size_t groups = idx.groups.size();
    for (std::size_t g = 0; g < groups; ++g) {
        const auto& selected = idx.groups[g];
        if (selected.empty()) continue;
        for (std::uint32_t j : selected) {
            if (j >= n) {
                throw std::out_of_range("sparse_attention: stripe index " +
                                        std::to_string(j) + " out of range");
            }
        }
        const std::size_t wstart = detail::window_start_token(g, cfg, n);

        order.assign(selected.begin(), selected.end());
        if (plan.shuffle_seed != 0) {
            detail::Rng rng(plan.shuffle_seed + g);
            for (std::size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1], order[rng.next_u64() % i]);
            }
        }

        const std::size_t row_begin = detail::group_row_begin(g, cfg);
        const std::size_t row_end = detail::group_row_end(g, cfg, n);
        for (std::size_t i = row_begin; i < row_end; ++i) {
            double* acc_row = acc.data() + i * d;
            const auto q_row = w.q.row(i);
            for (std::size_t chunk = 0; chunk < order.size(); chunk += plan.index_chunk) {
                const std::size_t chunk_end =
                    std::min(chunk + plan.index_chunk, order.size());
                std::size_t taken = 0;
                double chunk_max = -std::numeric_limits<double>::infinity();
                for (std::size_t s = chunk; s < chunk_end; ++s) {
                    const std::uint32_t j = order[s];
                    if (j > i) continue;  // causal clamp
                    // Group-boundary safety: anchor-covered stripes are
                    // skipped, the anchor pass already folded them.
                    if (j < cfg.b_kv || j >= wstart) continue;
                    double sum = 0.0;
                    const auto k_row = w.k.row(j);
                    for (std::size_t t = 0; t < d; ++t) {
                        sum += static_cast<double>(q_row[t]) * static_cast<double>(k_row[t]);
                    }
                    qk[taken] = sum * inv_sqrt_d;
                    chunk_max = std::max(chunk_max, qk[taken]);
                    kept[taken] = j;
                    ++taken;
                }
                if (taken == 0) continue;
                res.stats.computed_positions += taken;

                const double m_new = std::max(m[i], chunk_max);
                const double alpha = std::exp(m[i] - m_new);
                for (std::size_t t = 0; t < d; ++t) acc_row[t] *= alpha;
                double l_chunk = 0.0;
                for (std::size_t s = 0; s < taken; ++s) {
                    const double p = std::exp(qk[s] - m_new);
                    l_chunk += p;
                    const auto v_row = w.v.row(kept[s]);
                    for (std::size_t t = 0; t < d; ++t) {
                        acc_row[t] += p * static_cast<double>(v_row[t]);
                    }
                }
                l[i] = l[i] * alpha + l_chunk;
                m[i] = m_new;
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double inv_l = 1.0 / l[i];
        const double* acc_row = acc.data() + i * d;
        for (std::size_t t = 0; t < d; ++t) {
            res.out.o.at(i, t) = static_cast<float>(acc_row[t] * inv_l);
        }
    }
    res.stats.sparsity = 1.0 - static_cast<double>(res.stats.computed_positions) /
                                   static_cast<double>(res.stats.causal_positions);
    return res;
}

SparseResult anchor_attention(const HeadWorkload& w, const BlockConfig& cfg,
                              bool zero_anchor) {
    cfg.validate();
    const AnchorState state = compute_anchor(w, cfg);
    const StripeIndex idx = zero_anchor ? identify_stripes_zero_anchor(w, cfg)
                                        : identify_stripes(w, state, cfg);
    return sparse_attention(w, state, idx, cfg);
}

SelectionMask union_mask(const StripeIndex& idx, const BlockConfig& cfg,
                         std::size_t n) {
    cfg.validate();
    SelectionMask mask = anchor_mask(n, cfg);
    for (std::size_t g = 0; g < idx.groups.size(); ++g) {
        const std::size_t wstart = detail::window_start_token(g, cfg, n);
        const std::size_t row_begin = detail::group_row_begin(g, cfg);
        const std::size_t row_end = detail::group_row_end(g, cfg, n);
        for (std::size_t i = row_begin; i < row_end; ++i) {
            for (std::uint32_t j : idx.groups[g]) {
                if (j > i) break;  // sorted, later indices non-causal too
                if (j < cfg.b_kv || j >= wstart) continue;
                mask.rows[i].push_back(j);
            }
        }
    }
    mask.normalize();
    return mask;
}

}  // namespace anchorattn

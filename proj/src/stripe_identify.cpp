#include "anchorattn/stripe_identify.hpp"

#include <cmath>
#include <stdexcept>

#include "detail/geometry.hpp"

namespace anchorattn {

namespace {

// Shared search body: anchor_per_group supplies the reference value the
// pooled key scores are compared against.
StripeIndex identify_with_reference(const HeadWorkload& w,
                                    std::span<const double> anchor_per_group,
                                    const BlockConfig& cfg) {
    const std::size_t n = w.n;
    const std::size_t d = w.d;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    const std::size_t groups = detail::group_count(n, cfg);
    if (anchor_per_group.size() != groups) {
        throw std::invalid_argument("identify_stripes: anchor/group count mismatch");
    }

    const Matrix pooled_q = avgpool_rows(w.q, cfg.step * cfg.b_q);

    StripeIndex idx;
    idx.n = n;
    idx.cfg = cfg;
    idx.groups.resize(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t middle_end = detail::middle_end_token(g, cfg, n);
        if (middle_end <= cfg.b_kv) continue;
        const auto q_row = pooled_q.row(g);
        auto& selected = idx.groups[g];
        for (std::size_t j = cfg.b_kv; j < middle_end; ++j) {
            double sum = 0.0;
            const auto k_row = w.k.row(j);
            for (std::size_t t = 0; t < d; ++t) {
                sum += static_cast<double>(q_row[t]) * static_cast<double>(k_row[t]);
            }
            if (anchor_per_group[g] - sum * inv_sqrt_d <= cfg.theta) {
                selected.push_back(static_cast<std::uint32_t>(j));
            }
        }
    }
    return idx;
}

}  // namespace

std::size_t StripeIndex::total_selected() const {
    std::size_t total = 0;
    for (const auto& g : groups) total += g.size();
    return total;
}

bool StripeIndex::empty() const { return total_selected() == 0; }

std::size_t group_count(std::size_t n, const BlockConfig& cfg) {
    cfg.validate();
    return detail::group_count(n, cfg);
}

std::size_t middle_end_token(std::size_t group, const BlockConfig& cfg,
                             std::size_t n) {
    cfg.validate();
    return detail::middle_end_token(group, cfg, n);
}

std::vector<double> pooled_anchor(const AnchorState& state, const BlockConfig& cfg) {
    cfg.validate();
    return avgpool_vector(state.m, cfg.step * cfg.b_q);
}

StripeIndex identify_stripes(const HeadWorkload& w, const AnchorState& state,
                             const BlockConfig& cfg) {
    cfg.validate();
    if (state.n != w.n) {
        throw std::invalid_argument("identify_stripes: state/workload mismatch");
    }
    if (state.cfg.b_q != cfg.b_q || state.cfg.b_kv != cfg.b_kv ||
        state.cfg.step != cfg.step) {
        throw std::invalid_argument("identify_stripes: anchor state uses another blocking");
    }
    const std::vector<double> anchors = pooled_anchor(state, cfg);
    return identify_with_reference(w, anchors, cfg);
}

StripeIndex identify_stripes_zero_anchor(const HeadWorkload& w,
                                         const BlockConfig& cfg) {
    cfg.validate();
    const std::vector<double> zeros(detail::group_count(w.n, cfg), 0.0);
    return identify_with_reference(w, zeros, cfg);
}

}  // namespace anchorattn

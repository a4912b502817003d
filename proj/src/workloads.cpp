#include "anchorattn/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "anchorattn/oracle.hpp"
#include "detail/rng.hpp"

namespace anchorattn {

namespace {

constexpr double kNoiseScale = 0.015;  // q/k noise relative to structure
constexpr std::size_t kAnchorBandRows = 256;  // rows sharing one sink level
constexpr std::size_t kLocalWindowTokens = 128;  // window used by mass checks

Matrix gauss_matrix(std::size_t rows, std::size_t cols, detail::Rng& rng,
                    double scale = 1.0) {
    Matrix m(rows, cols);
    for (float& x : m.data) x = static_cast<float>(rng.next_gauss() * scale);
    return m;
}

// Orthonormal direction set drawn from the rng (Gram-Schmidt). Returns fewer
// than `count` vectors only when d < count.
std::vector<std::vector<double>> ortho_directions(std::size_t d, std::size_t count,
                                                  detail::Rng& rng) {
    count = std::min(count, d);
    std::vector<std::vector<double>> dirs;
    while (dirs.size() < count) {
        std::vector<double> v(d);
        for (double& x : v) x = rng.next_gauss();
        for (const auto& u : dirs) {
            double dot = 0.0;
            for (std::size_t t = 0; t < d; ++t) dot += v[t] * u[t];
            for (std::size_t t = 0; t < d; ++t) v[t] -= dot * u[t];
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-6) continue;  // rare degenerate draw, redraw
        for (double& x : v) x /= norm;
        dirs.push_back(std::move(v));
    }
    return dirs;
}

void add_scaled(Matrix& m, std::size_t row, const std::vector<double>& dir,
                double coef) {
    float* r = m.data.data() + row * m.cols;
    for (std::size_t t = 0; t < dir.size(); ++t) {
        r[t] += static_cast<float>(coef * dir[t]);
    }
}

// Component of q's noise row orthogonal to the structured directions; gives
// each position a personality the diagonal boost can couple to without
// leaking into the structured channels.
std::vector<double> residual_direction(const Matrix& q, std::size_t row,
                                       const std::vector<std::vector<double>>& dirs) {
    std::vector<double> v(q.cols);
    for (std::size_t t = 0; t < q.cols; ++t) v[t] = q.at(row, t);
    for (const auto& u : dirs) {
        double dot = 0.0;
        for (std::size_t t = 0; t < v.size(); ++t) dot += v[t] * u[t];
        for (std::size_t t = 0; t < v.size(); ++t) v[t] -= dot * u[t];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-9) return std::vector<double>(v.size(), 0.0);
    for (double& x : v) x /= norm;
    return v;
}

// Fraction of rows whose causal argmax lies in {0} or (i - window, i].
double argmax_in_anchor_fraction(const HeadWorkload& w, std::size_t window) {
    const Matrix s = dense_scores(w.q, w.k);
    std::size_t good = 0;
    for (std::size_t i = 0; i < w.n; ++i) {
        std::size_t best = 0;
        float best_val = s.at(i, 0);
        for (std::size_t j = 1; j <= i; ++j) {
            if (s.at(i, j) > best_val) {
                best_val = s.at(i, j);
                best = j;
            }
        }
        if (best == 0 || best + window > i) ++good;
    }
    return static_cast<double>(good) / static_cast<double>(w.n);
}

}  // namespace

std::vector<HeadWorkload> gen_random(std::size_t n, std::size_t d,
                                     std::size_t heads, std::uint64_t seed) {
    if (n == 0 || d == 0 || heads == 0) {
        throw std::invalid_argument("gen_random: n, d, heads must be >= 1");
    }
    detail::Rng root(seed);
    std::vector<HeadWorkload> out;
    out.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
        detail::Rng rng = root.fork(h);
        Matrix q = gauss_matrix(n, d, rng);
        Matrix k = gauss_matrix(n, d, rng);
        Matrix v = gauss_matrix(n, d, rng);
        out.push_back(HeadWorkload::create(std::move(q), std::move(k), std::move(v)));
    }
    return out;
}

HeadWorkload gen_sink_local(std::size_t n, std::size_t d, double sink_strength,
                            std::size_t window, std::uint64_t seed) {
    if (n == 0 || d == 0) {
        throw std::invalid_argument("gen_sink_local: n, d must be >= 1");
    }
    if (!(sink_strength > 0.0)) {
        throw std::invalid_argument("gen_sink_local: sink_strength must be > 0");
    }
    if (window == 0) window = 1;

    // One shared scale channel: key column j scores sink_mult(i) * (a -
    // depth_j) against row i, so every score in a row shifts and scales with
    // that row's sink level. The sink column has depth 0 and is always the
    // row max; a spread set of columns sits a few logits below and carries
    // the middle probability mass, graded so deeper columns hold
    // exponentially less of it; the rest are buried far down.
    for (int attempt = 0; attempt < 4; ++attempt) {
        const double a = sink_strength * std::pow(1.4, attempt);
        detail::Rng rng(seed + 0x9e37u * static_cast<unsigned>(attempt));
        const auto dirs = ortho_directions(d, 1, rng);
        const auto& u_scale = dirs[0];
        const double sqrt_d = std::sqrt(static_cast<double>(d));

        // Per anchor band of rows, the sink multiplier in [0.7, 1.3].
        const std::size_t n_bands = (n + kAnchorBandRows - 1) / kAnchorBandRows;
        std::vector<double> sink_mult(n_bands);
        for (double& s : sink_mult) {
            s = d >= 2 ? 0.7 + 0.6 * rng.next_unit() : 1.0;
        }

        Matrix q = gauss_matrix(n, d, rng, kNoiseScale);
        Matrix k = gauss_matrix(n, d, rng, kNoiseScale);
        Matrix v = gauss_matrix(n, d, rng);

        for (std::size_t i = 0; i < n; ++i) {
            add_scaled(q, i, u_scale, sink_mult[i / kAnchorBandRows]);
        }

        std::vector<std::size_t> strong_cols;
        if (n >= 512) {
            // Few enough that row normalizers stay near the sink mass and the
            // anchor-relative depth of a column tracks its captured fraction.
            const std::size_t n_strong = n / 32;
            const std::size_t lo = 192;
            const std::size_t hi = (n * 7) / 8;
            for (std::size_t c = 0; c < n_strong; ++c) {
                strong_cols.push_back(lo + (hi - lo) * c / n_strong);
            }
        }
        std::vector<bool> is_strong(n, false);
        for (std::size_t c : strong_cols) is_strong[c] = true;

        const double depth_lo = 3.0;
        const double depth_hi = depth_lo + 4.8;
        for (std::size_t j = 0; j < n; ++j) {
            double depth;
            if (j == 0) {
                depth = 0.0;
            } else if (is_strong[j]) {
                depth = depth_lo + (depth_hi - depth_lo) * rng.next_unit();
            } else {
                depth = depth_hi + 1.0 + 18.0 * rng.next_unit();
            }
            add_scaled(k, j, u_scale, (a - depth) * sqrt_d);
        }

        // Near-diagonal boost through each row's residual personality. The
        // gain is capped by sqrt(d): its off-diagonal leakage scales as
        // gain / sqrt(d) and must stay well below the shallowest depth.
        const double local_gain = std::min(0.3 * sqrt_d, a / 4.0);
        for (std::size_t j = 1; j < n; ++j) {
            const auto res = residual_direction(q, j, dirs);
            add_scaled(k, j, res, local_gain / kNoiseScale);
        }

        HeadWorkload w = HeadWorkload::create(std::move(q), std::move(k), std::move(v));
        if (argmax_in_anchor_fraction(w, window) >= 0.99) return w;
    }
    throw std::runtime_error(
        "gen_sink_local: argmax concentration not reached after bounded attempts");
}

HeadWorkload gen_planted_stripes(std::size_t n, std::size_t d,
                                 const std::vector<std::size_t>& stripe_cols,
                                 double mass_fraction, std::uint64_t seed,
                                 std::optional<VanishRange> vanish) {
    if (n == 0 || d == 0) {
        throw std::invalid_argument("gen_planted_stripes: n, d must be >= 1");
    }
    if (stripe_cols.empty()) {
        throw std::invalid_argument("gen_planted_stripes: stripe_cols must be non-empty");
    }
    for (std::size_t c : stripe_cols) {
        if (c >= n) {
            throw std::invalid_argument("gen_planted_stripes: stripe column out of range");
        }
    }
    if (!(mass_fraction > 0.0) || !(mass_fraction < 1.0)) {
        throw std::invalid_argument("gen_planted_stripes: mass_fraction must be in (0, 1)");
    }
    if (vanish && d < 2) {
        throw std::invalid_argument("gen_planted_stripes: vanish gating needs d >= 2");
    }
    if (vanish && vanish->begin >= vanish->end) {
        throw std::invalid_argument("gen_planted_stripes: empty vanish range");
    }

    const double sqrt_d = std::sqrt(static_cast<double>(d));
    const double odds = mass_fraction / (1.0 - mass_fraction);
    double stripe_level =
        std::log(std::max(2.0, odds * static_cast<double>(n) /
                                   static_cast<double>(stripe_cols.size()))) +
        1.0;

    for (int attempt = 0; attempt < 5; ++attempt, stripe_level += 1.0) {
        detail::Rng rng(seed + 0x51edu * static_cast<unsigned>(attempt));
        const auto dirs = ortho_directions(d, 2, rng);
        const auto& u_sink = dirs[0];
        const auto& u_gate = dirs.size() > 1 ? dirs[1] : dirs[0];

        Matrix q = gauss_matrix(n, d, rng, kNoiseScale);
        Matrix k = gauss_matrix(n, d, rng, kNoiseScale);
        Matrix v = gauss_matrix(n, d, rng);

        const bool gated = vanish.has_value() && dirs.size() > 1;
        for (std::size_t i = 0; i < n; ++i) {
            add_scaled(q, i, u_sink, 1.0);
            if (gated) {
                const bool inside = i >= vanish->begin && i < vanish->end;
                add_scaled(q, i, u_gate, inside ? 0.0 : 1.0);
            }
        }

        add_scaled(k, 0, u_sink, (stripe_level + 2.0) * sqrt_d);
        std::vector<bool> is_planted(n, false);
        is_planted[0] = true;
        for (std::size_t c : stripe_cols) is_planted[c] = true;
        for (std::size_t c : stripe_cols) {
            if (c == 0) continue;
            add_scaled(k, c, gated ? u_gate : u_sink, stripe_level * sqrt_d);
        }
        // Push the background well below the anchor so default thresholds
        // separate planted columns from noise.
        for (std::size_t j = 1; j < n; ++j) {
            if (!is_planted[j]) add_scaled(k, j, u_sink, -5.0 * sqrt_d);
        }

        HeadWorkload w = HeadWorkload::create(std::move(q), std::move(k), std::move(v));

        // Post-hoc mass check on the rows where the planted columns are
        // causal and outside the local window (and outside the vanish range).
        const Matrix p = dense_probs(w.q, w.k);
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            if (vanish && i >= vanish->begin && i < vanish->end) continue;
            bool applicable = false;
            double planted_mass = 0.0;
            for (std::size_t c : stripe_cols) {
                if (c <= i && c + kLocalWindowTokens <= i) {
                    applicable = true;
                    planted_mass += p.at(i, c);
                }
            }
            if (!applicable) continue;
            double anchor_mass = p.at(i, 0);
            const std::size_t w_begin = i + 1 > kLocalWindowTokens ? i + 1 - kLocalWindowTokens : 0;
            for (std::size_t j = std::max<std::size_t>(w_begin, 1); j <= i; ++j) {
                anchor_mass += p.at(i, j);
            }
            if (planted_mass + anchor_mass < mass_fraction) ok = false;
        }
        if (ok) return w;
    }
    throw std::runtime_error(
        "gen_planted_stripes: requested mass fraction infeasible after bounded attempts");
}

}  // namespace anchorattn

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "anchorattn/matrix.hpp"

namespace anchorattn {

/// Deterministic Gaussian workloads (unit scale). Same seed, same bytes.
std::vector<HeadWorkload> gen_random(std::size_t n, std::size_t d,
                                     std::size_t heads, std::uint64_t seed);

/// Sink-heavy head: key row 0 and the near-diagonal structure are boosted so
/// the causal score argmax lies in {0} or (i - window, i] for at least 99% of
/// rows; middle columns carry graded mass so recall varies with the
/// selection threshold. Verified against dense_scores with bounded retries;
/// throws std::runtime_error if the argmax property cannot be met.
HeadWorkload gen_sink_local(std::size_t n, std::size_t d, double sink_strength,
                            std::size_t window, std::uint64_t seed);

/// Inclusive-begin/exclusive-end row range over which planted stripes are
/// suppressed.
struct VanishRange {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Head with planted key columns: for rows where the planted columns are
/// causal and outside the local window, those columns plus the anchor region
/// carry at least mass_fraction of the dense probability row mass. A vanish
/// range suppresses the stripes over the given rows. Enforced post hoc by
/// oracle measurement with bounded retries; throws std::runtime_error when
/// the requested mass is infeasible.
HeadWorkload gen_planted_stripes(std::size_t n, std::size_t d,
                                 const std::vector<std::size_t>& stripe_cols,
                                 double mass_fraction, std::uint64_t seed,
                                 std::optional<VanishRange> vanish = std::nullopt);

}  // namespace anchorattn

#include "anchorattn/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace anchorattn {

double recall(const SelectionMask& mask, const Matrix& probs) {
    if (probs.rows != mask.n || probs.cols != mask.n) {
        throw std::invalid_argument("recall: probability map shape mismatch");
    }
    double captured = 0.0;
    for (std::size_t i = 0; i < mask.n; ++i) {
        for (std::uint32_t j : mask.rows[i]) {
            captured += probs.at(i, j);
        }
    }
    return captured / static_cast<double>(mask.n);
}

double sparsity(const SelectionMask& mask) {
    const double causal = static_cast<double>(mask.causal_positions());
    return 1.0 - static_cast<double>(mask.total_selected()) / causal;
}

std::pair<double, double> output_error(const AttentionOutput& a,
                                       const AttentionOutput& b) {
    if (!a.o.same_shape(b.o)) {
        throw std::invalid_argument("output_error: shape mismatch");
    }
    double max_abs = 0.0;
    double sum_abs = 0.0;
    for (std::size_t t = 0; t < a.o.data.size(); ++t) {
        const double diff = std::abs(static_cast<double>(a.o.data[t]) -
                                     static_cast<double>(b.o.data[t]));
        max_abs = std::max(max_abs, diff);
        sum_abs += diff;
    }
    return {max_abs, sum_abs / static_cast<double>(a.o.data.size())};
}

}  // namespace anchorattn

#pragma once

#include <cstddef>
#include <utility>

#include "anchorattn/matrix.hpp"
#include "anchorattn/oracle.hpp"
#include "anchorattn/selection_mask.hpp"

namespace anchorattn {

/// One evaluation row; see the CSV schema in the README.
struct EvalReport {
    double recall = 0.0;
    double sparsity = 0.0;
    double max_abs_err = 0.0;
    double mean_abs_err = 0.0;
    std::size_t computed_positions = 0;
};

/// Fraction of total attention probability mass captured by the mask:
/// the sum of p over selected positions divided by n (each row's causal mass
/// is 1).
double recall(const SelectionMask& mask, const Matrix& probs);

/// 1 - |selected| / (n(n+1)/2).
double sparsity(const SelectionMask& mask);

/// Elementwise (max, mean) absolute difference of two outputs.
std::pair<double, double> output_error(const AttentionOutput& a,
                                       const AttentionOutput& b);

}  // namespace anchorattn

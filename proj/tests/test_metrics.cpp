#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "anchorattn/metrics.hpp"
#include "anchorattn/oracle.hpp"
#include "anchorattn/sparse_exec.hpp"
#include "anchorattn/workloads.hpp"

using namespace anchorattn;

TEST_CASE("recall endpoints") {
    const auto head = gen_random(12, 4, 1, 101)[0];
    const Matrix p = dense_probs(head.q, head.k);
    CHECK(recall(SelectionMask::full_causal(12), p) ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(recall(SelectionMask::empty(12), p) == 0.0);
}

TEST_CASE("diagonal recall on uniform rows is the harmonic sum over n") {
    const std::size_t n = 10;
    Matrix q(n, 4, 0.0f);  // zero queries make every causal row uniform
    Matrix k(n, 4, 1.0f);
    const Matrix p = dense_probs(q, k);
    SelectionMask diag(n);
    for (std::uint32_t i = 0; i < n; ++i) diag.rows[i] = {i};
    double harmonic = 0.0;
    for (std::size_t i = 1; i <= n; ++i) harmonic += 1.0 / static_cast<double>(i);
    CHECK(recall(diag, p) == doctest::Approx(harmonic / n).epsilon(1e-6));
}

TEST_CASE("recall rejects shape mismatch") {
    const auto head = gen_random(8, 4, 1, 102)[0];
    const Matrix p = dense_probs(head.q, head.k);
    CHECK_THROWS_AS(recall(SelectionMask::full_causal(9), p), std::invalid_argument);
}

TEST_CASE("sparsity counts") {
    CHECK(sparsity(SelectionMask::full_causal(7)) == doctest::Approx(0.0));
    CHECK(sparsity(SelectionMask::empty(7)) == doctest::Approx(1.0));
    SelectionMask diag(4);
    for (std::uint32_t i = 0; i < 4; ++i) diag.rows[i] = {i};
    CHECK(sparsity(diag) == doctest::Approx(0.6));
}

TEST_CASE("output_error basics") {
    const auto head = gen_random(6, 3, 1, 103)[0];
    const AttentionOutput a = dense_attention(head);
    auto b = a;
    CHECK(output_error(a, b) == std::pair<double, double>{0.0, 0.0});

    for (float& x : b.o.data) x += 0.5f;
    const auto [mx, mean] = output_error(a, b);
    CHECK(mx == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(mean == doctest::Approx(0.5).epsilon(1e-6));

    AttentionOutput c;
    c.o = Matrix(5, 3);
    CHECK_THROWS_AS(output_error(a, c), std::invalid_argument);
}

TEST_CASE("full-coverage pipeline output error vanishes") {
    const auto head = gen_random(256, 8, 1, 104)[0];
    BlockConfig cfg;
    cfg.b_q = 64;
    cfg.b_kv = 64;
    cfg.step = 2;
    cfg.theta = 1e9;
    const SparseResult res = anchor_attention(head, cfg);
    const AttentionOutput dense = dense_attention(head);
    const auto [mx, mean] = output_error(res.out, dense);
    CHECK(mx <= 1e-5);
    CHECK(mean <= mx);
}

TEST_CASE("recall is monotone under mask inclusion") {
    const auto head = gen_random(32, 8, 1, 105)[0];
    const Matrix p = dense_probs(head.q, head.k);
    SelectionMask small(32);
    SelectionMask big(32);
    for (std::uint32_t i = 0; i < 32; ++i) {
        for (std::uint32_t j = 0; j <= i; ++j) {
            if (j % 3 == 0) small.rows[i].push_back(j);
            if (j % 3 == 0 || j % 2 == 0) big.rows[i].push_back(j);
        }
    }
    REQUIRE(small.subset_of(big));
    CHECK(recall(small, p) <= recall(big, p) + 1e-12);
    CHECK(sparsity(small) > sparsity(big));
}

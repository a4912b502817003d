#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "anchorattn/oracle.hpp"
#include "anchorattn/workloads.hpp"

using namespace anchorattn;

namespace {

// Causal argmax location of every row.
std::vector<std::size_t> row_argmax(const HeadWorkload& w) {
    const Matrix s = dense_scores(w.q, w.k);
    std::vector<std::size_t> out(w.n);
    for (std::size_t i = 0; i < w.n; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j <= i; ++j) {
            if (s.at(i, j) > s.at(i, best)) best = j;
        }
        out[i] = best;
    }
    return out;
}

}  // namespace

TEST_CASE("gen_random is deterministic in the seed") {
    const auto a = gen_random(32, 8, 3, 7);
    const auto b = gen_random(32, 8, 3, 7);
    const auto c = gen_random(32, 8, 3, 8);
    REQUIRE(a.size() == 3);
    for (std::size_t h = 0; h < 3; ++h) {
        CHECK(a[h].q.data == b[h].q.data);
        CHECK(a[h].k.data == b[h].k.data);
        CHECK(a[h].v.data == b[h].v.data);
    }
    CHECK(a[0].q.data != c[0].q.data);
}

TEST_CASE("gen_random passes oracle sanity") {
    const auto heads = gen_random(256, 16, 1, 9);
    const Matrix p = dense_probs(heads[0].q, heads[0].k);
    for (std::size_t i = 0; i < 256; i += 37) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 256; ++j) sum += p.at(i, j);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(heads[0].q.all_finite());
}

TEST_CASE("gen_random validates arguments") {
    CHECK_THROWS_AS(gen_random(0, 4, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_random(4, 0, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_random(4, 4, 0, 1), std::invalid_argument);
}

TEST_CASE("gen_sink_local concentrates the argmax in the anchor region") {
    const std::size_t window = 128;
    const HeadWorkload head = gen_sink_local(1024, 16, 12.0, window, 11);
    const auto argmax = row_argmax(head);
    std::size_t good = 0;
    for (std::size_t i = 0; i < head.n; ++i) {
        if (argmax[i] == 0 || argmax[i] + window > i) ++good;
    }
    CHECK(static_cast<double>(good) / head.n >= 0.99);
    CHECK(head.q.all_finite());
    CHECK(head.k.all_finite());
}

TEST_CASE("a very strong sink pins the argmax to column 0") {
    const HeadWorkload head = gen_sink_local(512, 16, 120.0, 1, 12);
    const auto argmax = row_argmax(head);
    std::size_t at_zero = 0;
    for (std::size_t i = 64; i < head.n; ++i) {  // skip near-diagonal rows
        if (argmax[i] == 0) ++at_zero;
    }
    CHECK(static_cast<double>(at_zero) / (head.n - 64) >= 0.99);
}

TEST_CASE("window = n makes the anchor property vacuous") {
    const HeadWorkload head = gen_sink_local(256, 16, 8.0, 256, 13);
    const auto argmax = row_argmax(head);
    for (std::size_t i = 0; i < head.n; ++i) {
        CHECK((argmax[i] == 0 || argmax[i] + head.n > i));
    }
}

TEST_CASE("gen_sink_local is deterministic") {
    const HeadWorkload a = gen_sink_local(512, 16, 12.0, 128, 14);
    const HeadWorkload b = gen_sink_local(512, 16, 12.0, 128, 14);
    CHECK(a.q.data == b.q.data);
    CHECK(a.k.data == b.k.data);
}

TEST_CASE("gen_planted_stripes meets the mass target") {
    const std::vector<std::size_t> cols = {200};
    const HeadWorkload head = gen_planted_stripes(1024, 16, cols, 0.5, 15);
    const Matrix p = dense_probs(head.q, head.k);
    for (std::size_t i = 350; i < head.n; i += 101) {
        double planted_and_anchor = p.at(i, 200) + p.at(i, 0);
        for (std::size_t j = i > 127 ? i - 127 : 1; j <= i; ++j) {
            planted_and_anchor += p.at(i, j);
        }
        CHECK(planted_and_anchor >= 0.5);
    }
}

TEST_CASE("gen_planted_stripes rejects bad arguments") {
    CHECK_THROWS_AS(gen_planted_stripes(64, 4, {}, 0.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_planted_stripes(64, 4, {99}, 0.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_planted_stripes(64, 4, {10}, 1.5, 1), std::invalid_argument);
}

TEST_CASE("vanish range suppresses the stripe") {
    VanishRange vanish{400, 600};
    const HeadWorkload head =
        gen_planted_stripes(1024, 16, {260}, 0.5, 16, vanish);
    const Matrix p = dense_probs(head.q, head.k);

    double inside = 0.0;
    std::size_t inside_count = 0;
    double outside = 0.0;
    std::size_t outside_count = 0;
    for (std::size_t i = 400; i < 600; ++i, ++inside_count) inside += p.at(i, 260);
    for (std::size_t i = 640; i < 1024; ++i, ++outside_count) outside += p.at(i, 260);
    inside /= inside_count;
    outside /= outside_count;
    CHECK(inside < 0.1 * outside);
}

#include "exactlab/dataset.hpp"
#include "exactlab/errors.hpp"
#include "exactlab/hypercube.hpp"
#include "exactlab/random.hpp"

#include <doctest.h>

#include <numeric>

using namespace exactlab;

namespace {

// Oracles written against bits directly, not the library helpers.
std::uint64_t block_value(const BitVector& x, std::size_t offset, std::size_t m) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < m; ++i) v = 2 * v + static_cast<std::uint64_t>(x[offset + i]);
    return v;
}

int integer_threshold(const std::vector<long long>& w, long long b, const BitVector& x) {
    long long a = b;
    for (std::size_t i = 0; i < w.size(); ++i) a += w[i] * x[i];
    return a >= 0 ? 1 : 0;
}

std::vector<long long> random_weights(std::size_t d, Rng& rng, long long r) {
    std::vector<long long> w(d);
    for (auto& v : w) v = static_cast<long long>(rng() % static_cast<std::uint64_t>(2 * r + 1)) - r;
    return w;
}

}  // namespace

TEST_CASE("bit vector index reads coordinate 0 as the most significant bit") {
    const BitVector x{1, 0, 1, 1};
    CHECK(x.index() == 0b1011);
    CHECK(BitVector::from_index(0b1011, 4) == x);
    CHECK(x.to_string() == "1011");
    for (std::uint64_t i = 0; i < 64; ++i) CHECK(BitVector::from_index(i, 6).index() == i);
    CHECK(BitVector::zeros(5).is_zero());
    CHECK_FALSE(x.is_zero());
    CHECK_THROWS_AS(BitVector({0, 2}), InvalidArgument);
}

TEST_CASE("integer thresholds evaluate like direct integer arithmetic") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 1 + rng() % 8;
        const auto w = random_weights(d, rng, 6);
        const long long b = static_cast<long long>(rng() % 13) - 6;
        const auto h = LinearThreshold::from_integers(std::span<const long long>(w), b);
        for (std::uint64_t i = 0; i < domain_size(d); ++i) {
            const auto x = BitVector::from_index(i, d);
            REQUIRE(h.evaluate(x) == integer_threshold(w, b, x));
            REQUIRE(h.evaluate_index(i) == integer_threshold(w, b, x));
        }
    }
}

TEST_CASE("evaluation is exact at the decision boundary") {
    // 1/3 + 1/3 - 2/3 is exactly zero, so the point is labeled 1.
    const LinearThreshold h({Rational(1, 3), Rational(1, 3)}, Rational(-2, 3));
    CHECK(h.activation(BitVector{1, 1}) == 0);
    CHECK(h.evaluate(BitVector{1, 1}) == 1);
    CHECK(h.evaluate(BitVector{1, 0}) == 0);

    // Doubles convert exactly: 0.1 + 0.2 - 0.3 is not zero in binary.
    const std::vector<double> w{0.1, 0.2};
    const auto g = LinearThreshold::from_real(w, -0.3);
    const Rational exact = Rational(0.1) + Rational(0.2) - Rational(0.3);
    CHECK(g.activation(BitVector{1, 1}) == exact);
    CHECK(g.evaluate(BitVector{1, 1}) == (exact >= 0 ? 1 : 0));
}

TEST_CASE("from_real snaps tiny coefficients to zero") {
    const std::vector<double> w{1e-12, -3e-10, 0.5};
    const auto h = LinearThreshold::from_real(w, -1e-11);
    CHECK(h.weights()[0] == 0);
    CHECK(h.weights()[1] == 0);
    CHECK(h.weights()[2] == Rational(1, 2));
    CHECK(h.bias() == 0);
    const std::vector<double> bad{std::nan("")};
    CHECK_THROWS_AS(LinearThreshold::from_real(bad, 0.0), InvalidArgument);
}

TEST_CASE("named hypotheses match their definitions on every point") {
    for (std::size_t m = 1; m <= 5; ++m) {
        const std::size_t d = 2 * m;
        const auto geq = build_named(NamedHypothesis::geq_compare(m));
        const auto gt = build_named(NamedHypothesis::gt_compare(m));
        for (std::uint64_t i = 0; i < domain_size(d); ++i) {
            const auto x = BitVector::from_index(i, d);
            const auto l = block_value(x, 0, m), r = block_value(x, m, m);
            REQUIRE(left_value(x, m) == l);
            REQUIRE(right_value(x, m) == r);
            REQUIRE(geq.evaluate(x) == (l >= r ? 1 : 0));
            REQUIRE(gt.evaluate(x) == (l > r ? 1 : 0));
        }
    }
    for (std::size_t d = 1; d <= 6; ++d) {
        const auto f0 = build_named(NamedHypothesis::all_zero(d));
        const auto f1 = build_named(NamedHypothesis::origin_indicator(d));
        for (std::uint64_t i = 0; i < domain_size(d); ++i) {
            REQUIRE(f0.evaluate_index(i) == 0);
            REQUIRE(f1.evaluate_index(i) == (i == 0 ? 1 : 0));
        }
    }
    CHECK_THROWS_AS(left_value(BitVector{1, 0, 1}, 1), InvalidArgument);
}

TEST_CASE("complement flips every label, including boundary points") {
    Rng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t d = 1 + rng() % 7;
        const auto w = random_weights(d, rng, 3);
        const long long b = static_cast<long long>(rng() % 7) - 3;
        const auto h = LinearThreshold::from_integers(std::span<const long long>(w), b);
        const auto c = h.complement();
        for (std::uint64_t i = 0; i < domain_size(d); ++i) REQUIRE(c.evaluate_index(i) == 1 - h.evaluate_index(i));
    }
    // Rational coefficients go through the integer form.
    const LinearThreshold h({Rational(1, 3), Rational(-1, 2)}, Rational(1, 6));
    const auto c = h.complement();
    for (std::uint64_t i = 0; i < 4; ++i) CHECK(c.evaluate_index(i) == 1 - h.evaluate_index(i));
}

TEST_CASE("permuted classifier reads inputs moved by the permutation") {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t d = 2 + rng() % 6;
        std::vector<std::size_t> perm(d);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const auto w = random_weights(d, rng, 4);
        const auto h = LinearThreshold::from_integers(std::span<const long long>(w), -1);
        const auto hp = h.permuted(perm);
        for (std::uint64_t i = 0; i < domain_size(d); ++i) {
            const auto x = BitVector::from_index(i, d);
            std::vector<std::uint8_t> y(d);
            for (std::size_t k = 0; k < d; ++k) y[perm[k]] = static_cast<std::uint8_t>(x[k]);
            REQUIRE(hp.evaluate(BitVector(y)) == h.evaluate(x));
        }
    }
    const auto h = LinearThreshold::from_integers({1, 2}, 0);
    const std::vector<std::size_t> bad{0, 0};
    CHECK_THROWS_AS(h.permuted(bad), InvalidArgument);
}

TEST_CASE("exact loss reports the lowest disagreeing index") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t d = 1 + rng() % 8;
        const auto a = LinearThreshold::from_integers(std::span<const long long>(random_weights(d, rng, 3)), 0);
        const auto b = LinearThreshold::from_integers(std::span<const long long>(random_weights(d, rng, 3)), -1);
        std::optional<std::uint64_t> first;
        std::uint64_t count = 0;
        for (std::uint64_t i = 0; i < domain_size(d); ++i) {
            if (a.evaluate_index(i) != b.evaluate_index(i)) {
                if (!first) first = i;
                ++count;
            }
        }
        const auto loss = exact_loss(a, b, d);
        CHECK(loss.loss == (first ? 1 : 0));
        if (first) CHECK(loss.witness->index() == *first);
        CHECK(disagreement_count(a, b, d) == count);
        CHECK(disagreement_count(a, b, d, {kDefaultEnumerationCap, 3}) == count);
    }
}

TEST_CASE("enumeration cap and dimension checks") {
    CHECK_THROWS_AS(require_enumerable(25, 24), CapExceeded);
    CHECK_NOTHROW(require_enumerable(24, 24));
    const auto a = build_named(NamedHypothesis::all_zero(3));
    const auto b = build_named(NamedHypothesis::all_zero(4));
    CHECK_THROWS_AS(exact_loss(a, b, 3), DimensionMismatch);
    CHECK_THROWS_AS(a.evaluate(BitVector{1, 0}), DimensionMismatch);
    const auto big = build_named(NamedHypothesis::all_zero(30));
    CHECK_THROWS_AS(exact_loss(big, big, 30), CapExceeded);
}

TEST_CASE("datasets validate their examples") {
    const auto h = build_named(NamedHypothesis::geq_compare(1));
    const auto full = LabeledDataset::full_domain(h);
    CHECK(full.size() == 4);
    CHECK(full.count_label(1) == 3);
    CHECK(full.has_both_classes());
    CHECK_FALSE(full.has_contradictions());
    LabeledDataset data(2);
    CHECK_THROWS_AS(data.add(BitVector{1, 0, 0}, 1), DimensionMismatch);
    CHECK_THROWS_AS(data.add(BitVector{1, 0}, 2), InvalidArgument);
    data.add(BitVector{1, 0}, 1);
    data.add(BitVector{1, 0}, 0);
    CHECK(data.has_contradictions());
}

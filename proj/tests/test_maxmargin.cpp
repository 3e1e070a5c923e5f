#include "exactlab/errors.hpp"
#include "exactlab/maxmargin.hpp"

#include <doctest.h>

#include <bit>
#include <cmath>

using namespace exactlab;

namespace {

double dot(const std::vector<double>& w, const BitVector& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
    return s;
}

// KKT certificate for the hard-margin program, checked from scratch:
// feasibility y(<w,x>+b) >= 1, w = sum lambda (x_p - x_n) with lambda >= 0,
// and every pair carrying weight is tight (<w, x_p - x_n> = 2).
void check_kkt(const MarginSolution& s, const LabeledDataset& data, double tol) {
    const std::size_t d = data.dimension();
    for (const auto& e : data.examples()) {
        const double y = e.label == 1 ? 1.0 : -1.0;
        REQUIRE(y * (dot(s.weights, e.input) + s.bias) >= 1.0 - tol);
    }
    std::vector<double> rebuilt(d, 0.0);
    for (const auto& [pair, lambda] : s.dual_coefficients) {
        REQUIRE(lambda > 0.0);
        const auto& p = data[pair.positive];
        const auto& n = data[pair.negative];
        REQUIRE(p.label == 1);
        REQUIRE(n.label == 0);
        for (std::size_t j = 0; j < d; ++j) rebuilt[j] += lambda * (p.input[j] - n.input[j]);
        REQUIRE(dot(s.weights, p.input) - dot(s.weights, n.input) == doctest::Approx(2.0).epsilon(tol));
    }
    for (std::size_t j = 0; j < d; ++j) REQUIRE(rebuilt[j] == doctest::Approx(s.weights[j]).epsilon(tol));
}

LinearThreshold random_target(std::size_t d, Rng& rng) { return random_separable_target(d, rng, 5); }

}  // namespace

TEST_CASE("AND on two bits has the textbook max-margin separator") {
    LabeledDataset data(2);
    data.add(BitVector{0, 0}, 0);
    data.add(BitVector{0, 1}, 0);
    data.add(BitVector{1, 0}, 0);
    data.add(BitVector{1, 1}, 1);
    const auto s = max_margin_fit(data);
    // w = (2,2), b = -3 puts (1,1) at +1 and (0,1),(1,0) at -1.
    CHECK(s.weights[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(s.weights[1] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(s.bias == doctest::Approx(-3.0).epsilon(1e-9));
    check_kkt(s, data, 1e-7);
}

TEST_CASE("full-domain fits satisfy the KKT conditions") {
    Rng rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t d = 2 + rng() % 5;
        const auto target = random_target(d, rng);
        const auto data = LabeledDataset::full_domain(target);
        const auto s = max_margin_fit(data);
        check_kkt(s, data, 1e-6);
        CHECK(exact_loss(s.classifier(), target, d).loss == 0);
    }
}

TEST_CASE("full-domain fit of LEFT >= RIGHT is twice its integer weights with bias 1") {
    for (std::size_t m = 1; m <= 4; ++m) {
        const auto target = build_named(NamedHypothesis::geq_compare(m));
        const auto s = max_margin_fit(LabeledDataset::full_domain(target));
        const auto w = target.weights_as_double();
        for (std::size_t j = 0; j < w.size(); ++j) CHECK(s.weights[j] == doctest::Approx(2.0 * w[j]).epsilon(1e-8));
        CHECK(s.bias == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("solver error cases") {
    LabeledDataset single(2);
    single.add(BitVector{0, 1}, 1);
    single.add(BitVector{1, 1}, 1);
    CHECK_THROWS_AS(max_margin_fit(single), SingleClass);

    LabeledDataset xor_data(2);
    xor_data.add(BitVector{0, 0}, 0);
    xor_data.add(BitVector{1, 1}, 0);
    xor_data.add(BitVector{0, 1}, 1);
    xor_data.add(BitVector{1, 0}, 1);
    CHECK_THROWS_AS(max_margin_fit(xor_data), NonSeparable);
    CHECK_FALSE(linearly_separable(xor_data));

    LabeledDataset contra(2);
    contra.add(BitVector{0, 1}, 1);
    contra.add(BitVector{0, 1}, 0);
    CHECK_THROWS_AS(max_margin_fit(contra), NonSeparable);
}

TEST_CASE("exact separability agrees with threshold labelings") {
    Rng rng(59);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t d = 2 + rng() % 4;
        CHECK(linearly_separable(LabeledDataset::full_domain(random_target(d, rng))));
        // Parity on two or more bits is never a threshold function.
        LabeledDataset parity(d);
        for (std::uint64_t i = 0; i < domain_size(d); ++i) parity.add(BitVector::from_index(i, d), std::popcount(i) % 2);
        CHECK_FALSE(linearly_separable(parity));
    }
}

TEST_CASE("duplicated examples do not change the solution") {
    const auto target = build_named(NamedHypothesis::geq_compare(2));
    const auto data = LabeledDataset::full_domain(target);
    LabeledDataset doubled(4);
    for (const auto& e : data.examples()) {
        doubled.add(e.input, e.label);
        doubled.add(e.input, e.label);
    }
    const auto a = max_margin_fit(data), b = max_margin_fit(doubled);
    for (std::size_t j = 0; j < 4; ++j) CHECK(a.weights[j] == doctest::Approx(b.weights[j]).epsilon(1e-8));
    CHECK(a.bias == doctest::Approx(b.bias).epsilon(1e-8));
}

TEST_CASE("support differences are tight") {
    const auto target = build_named(NamedHypothesis::geq_compare(2));
    const auto data = LabeledDataset::full_domain(target);
    const auto s = max_margin_fit(data);
    const auto sd = support_differences(s, data);
    CHECK_FALSE(sd.empty());
    for (const auto& t : sd) {
        double v = 0.0;
        for (std::size_t j = 0; j < t.delta.size(); ++j) v += s.weights[j] * t.delta[j];
        CHECK(v == doctest::Approx(2.0).epsilon(1e-8));
        CHECK(t.value == doctest::Approx(2.0).epsilon(1e-8));
    }
}

TEST_CASE("Caratheodory reduction keeps at most d+1 atoms") {
    Rng rng(43);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t d = 2 + rng() % 4;
        const std::size_t k = d + 3 + rng() % 8;
        std::vector<std::vector<double>> atoms(k, std::vector<double>(d));
        std::vector<double> coef(k), target(d, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            coef[i] = u(rng) + 0.1;
            for (std::size_t j = 0; j < d; ++j) {
                atoms[i][j] = u(rng) * 2.0 - 1.0;
                target[j] += coef[i] * atoms[i][j];
            }
        }
        const auto r = caratheodory_reduce(atoms, coef, target);
        CHECK(r.atoms.size() <= d + 1);
        std::vector<double> back(d, 0.0);
        for (std::size_t i = 0; i < r.atoms.size(); ++i) {
            CHECK(r.coefficients[i] >= 0.0);
            for (std::size_t j = 0; j < d; ++j) back[j] += r.coefficients[i] * atoms[r.atoms[i]][j];
        }
        for (std::size_t j = 0; j < d; ++j) CHECK(back[j] == doctest::Approx(target[j]).epsilon(1e-8));
    }
}

TEST_CASE("teaching sets for LEFT >= RIGHT") {
    for (std::size_t m = 1; m <= 4; ++m) {
        const std::size_t d = 2 * m;
        const auto target = build_named(NamedHypothesis::geq_compare(m));
        const auto ts = teaching_set(target, d);
        CHECK(ts.certified);
        CHECK(ts.examples.size() <= 2 * d + 2);
        CHECK(ts.weight_relative_error <= 1e-6);
        // Independent check: refit and compare on every point.
        const auto refit = max_margin_fit(ts.examples).classifier();
        for (std::uint64_t i = 0; i < domain_size(d); ++i)
            REQUIRE(refit.evaluate_index(i) == target.evaluate_index(i));
    }
}

TEST_CASE("teaching sets for random targets") {
    Rng rng(47);
    for (std::size_t d = 2; d <= 6; ++d) {
        for (int trial = 0; trial < 15; ++trial) {
            const auto target = random_target(d, rng);
            const auto ts = teaching_set(target, d);
            CHECK(ts.certified);
            CHECK(ts.examples.size() <= 2 * d + 2);
            CHECK(ts.weight_relative_error <= 1e-6);
            const auto full = max_margin_fit(LabeledDataset::full_domain(target));
            const auto refit = max_margin_fit(ts.examples);
            for (std::size_t j = 0; j < d; ++j)
                CHECK(refit.weights[j] == doctest::Approx(full.weights[j]).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("constant targets get an uncertified single example") {
    const auto zero = build_named(NamedHypothesis::all_zero(3));
    const auto ts = teaching_set(zero, 3);
    CHECK_FALSE(ts.certified);
    CHECK(ts.examples.size() == 1);
    CHECK_FALSE(ts.diagnostic.empty());
}

TEST_CASE("random separable targets take both labels") {
    Rng rng(53);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 1 + rng() % 6;
        const auto h = random_separable_target(d, rng);
        int seen = 0;
        for (std::uint64_t i = 0; i < domain_size(d); ++i) seen |= 1 << h.evaluate_index(i);
        CHECK(seen == 3);
    }
    CHECK_THROWS_AS(random_separable_target(3, rng, 0), InvalidArgument);
}

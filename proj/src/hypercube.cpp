#include "exactlab/hypercube.hpp"

#include "exactlab/errors.hpp"
#include "exactlab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>

namespace exactlab {

namespace {

void check_bits(const std::vector<std::uint8_t>& bits) {
    if (bits.empty()) throw InvalidArgument("bit vector must have dimension >= 1");
    for (auto b : bits)
        if (b > 1) throw InvalidArgument("bit vector entries must be 0 or 1");
}

inline bool bit_of(std::uint64_t index, std::size_t d, std::size_t i) {
    return (index >> (d - 1 - i)) & 1U;
}

}  // namespace

// ---------------------------------------------------------------------------
// BitVector

BitVector::BitVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) { check_bits(bits_); }

BitVector::BitVector(std::initializer_list<int> bits) {
    bits_.reserve(bits.size());
    for (int b : bits) {
        if (b != 0 && b != 1) throw InvalidArgument("bit vector entries must be 0 or 1");
        bits_.push_back(static_cast<std::uint8_t>(b));
    }
    check_bits(bits_);
}

BitVector BitVector::zeros(std::size_t d) { return BitVector(std::vector<std::uint8_t>(d, 0)); }

BitVector BitVector::from_index(std::uint64_t index, std::size_t d) {
    if (d == 0 || d > kMaxIndexDimension) throw InvalidArgument("dimension out of range for indexing");
    std::vector<std::uint8_t> bits(d);
    for (std::size_t i = 0; i < d; ++i) bits[i] = bit_of(index, d, i) ? 1 : 0;
    return BitVector(std::move(bits));
}

std::uint64_t BitVector::index() const {
    if (bits_.size() > kMaxIndexDimension) throw InvalidArgument("dimension too large for indexing");
    std::uint64_t idx = 0;
    for (auto b : bits_) idx = (idx << 1) | b;
    return idx;
}

bool BitVector::is_zero() const noexcept {
    return std::all_of(bits_.begin(), bits_.end(), [](auto b) { return b == 0; });
}

std::string BitVector::to_string() const {
    std::string s;
    s.reserve(bits_.size());
    for (auto b : bits_) s.push_back(b ? '1' : '0');
    return s;
}

// ---------------------------------------------------------------------------
// LinearThreshold

LinearThreshold::LinearThreshold(std::vector<Rational> weights, Rational bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {
    if (weights_.empty()) throw InvalidArgument("linear threshold needs dimension >= 1");
    prepare();
}

LinearThreshold LinearThreshold::from_integers(std::span<const long long> weights, long long bias) {
    std::vector<Rational> w(weights.begin(), weights.end());
    return LinearThreshold(std::move(w), Rational(bias));
}

LinearThreshold LinearThreshold::from_integers(std::initializer_list<long long> weights, long long bias) {
    return from_integers(std::span<const long long>(weights.begin(), weights.size()), bias);
}

LinearThreshold LinearThreshold::from_real(std::span<const double> weights, double bias, double snap) {
    auto convert = [snap](double v) {
        if (!std::isfinite(v)) throw InvalidArgument("non-finite classifier coefficient");
        return std::fabs(v) <= snap ? Rational(0) : Rational(v);
    };
    std::vector<Rational> w;
    w.reserve(weights.size());
    for (double v : weights) w.push_back(convert(v));
    return LinearThreshold(std::move(w), convert(bias));
}

void LinearThreshold::prepare() {
    approx_weights_.resize(weights_.size());
    double scale = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        approx_weights_[i] = weights_[i].convert_to<double>();
        scale += std::fabs(approx_weights_[i]);
    }
    approx_bias_ = bias_.convert_to<double>();
    scale += std::fabs(approx_bias_);
    // Conversion plus summation error of d+1 terms, with a factor-2 margin and
    // an absolute floor for subnormal coefficients.
    const double u = std::numeric_limits<double>::epsilon();
    filter_bound_ = static_cast<double>(weights_.size() + 3) * u * scale + 1e-300;
    filter_usable_ = std::isfinite(scale);
}

int LinearThreshold::exact_sign_index(std::uint64_t index) const {
    const std::size_t d = weights_.size();
    Rational a = bias_;
    for (std::size_t i = 0; i < d; ++i)
        if (bit_of(index, d, i)) a += weights_[i];
    return a >= 0 ? 1 : 0;
}

int LinearThreshold::evaluate_index(std::uint64_t index) const {
    const std::size_t d = weights_.size();
    if (filter_usable_) {
        double a = approx_bias_;
        for (std::size_t i = 0; i < d; ++i)
            if (bit_of(index, d, i)) a += approx_weights_[i];
        if (a > filter_bound_) return 1;
        if (a < -filter_bound_) return 0;
    }
    return exact_sign_index(index);
}

int LinearThreshold::evaluate(const BitVector& x) const {
    if (x.size() != weights_.size())
        throw DimensionMismatch("classifier has dimension " + std::to_string(weights_.size()) +
                                " but input has dimension " + std::to_string(x.size()));
    if (x.size() <= kMaxIndexDimension) return evaluate_index(x.index());
    return activation(x) >= 0 ? 1 : 0;
}

Rational LinearThreshold::activation(const BitVector& x) const {
    if (x.size() != weights_.size()) throw DimensionMismatch("classifier/input dimension mismatch");
    Rational a = bias_;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i]) a += weights_[i];
    return a;
}

std::pair<std::vector<BigInt>, BigInt> LinearThreshold::integer_form() const {
    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;
    BigInt l = denominator(bias_);
    for (const auto& w : weights_) l = boost::multiprecision::lcm(l, denominator(w));
    std::vector<BigInt> iw;
    iw.reserve(weights_.size());
    for (const auto& w : weights_) iw.push_back(numerator(w) * (l / denominator(w)));
    BigInt ib = numerator(bias_) * (l / denominator(bias_));
    return {std::move(iw), std::move(ib)};
}

LinearThreshold LinearThreshold::complement() const {
    // With integer activation a, 1 - 1(a >= 0) = 1(a < 0) = 1(-a - 1 >= 0).
    auto [iw, ib] = integer_form();
    std::vector<Rational> w;
    w.reserve(iw.size());
    for (auto& v : iw) w.emplace_back(-v);
    return LinearThreshold(std::move(w), Rational(-ib - 1));
}

LinearThreshold LinearThreshold::permuted(std::span<const std::size_t> perm) const {
    if (perm.size() != weights_.size()) throw DimensionMismatch("permutation/classifier dimension mismatch");
    std::vector<Rational> w(weights_.size());
    std::vector<bool> seen(weights_.size(), false);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        if (perm[i] >= perm.size() || seen[perm[i]]) throw InvalidArgument("not a permutation");
        seen[perm[i]] = true;
        w[perm[i]] = weights_[i];
    }
    return LinearThreshold(std::move(w), bias_);
}

std::vector<double> LinearThreshold::weights_as_double() const { return approx_weights_; }

double LinearThreshold::bias_as_double() const { return approx_bias_; }

std::string LinearThreshold::to_string() const {
    std::ostringstream os;
    os << "w=(";
    for (std::size_t i = 0; i < weights_.size(); ++i) os << (i ? "," : "") << weights_[i];
    os << ") b=" << bias_;
    return os.str();
}

// ---------------------------------------------------------------------------
// LEFT/RIGHT and named hypotheses

namespace {

std::uint64_t block_value(const BitVector& x, std::size_t m, std::size_t offset) {
    if (m == 0 || x.size() != 2 * m)
        throw InvalidArgument("LEFT/RIGHT split needs dimension 2m, got d=" + std::to_string(x.size()) +
                              " m=" + std::to_string(m));
    if (m > 63) throw InvalidArgument("block too wide");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < m; ++i) v = (v << 1) | static_cast<std::uint64_t>(x[offset + i]);
    return v;
}

}  // namespace

std::uint64_t left_value(const BitVector& x, std::size_t m) { return block_value(x, m, 0); }

std::uint64_t right_value(const BitVector& x, std::size_t m) { return block_value(x, m, m); }

std::string NamedHypothesis::name() const {
    switch (kind) {
        case Kind::AllZero: return "all_zero(d=" + std::to_string(dimension) + ")";
        case Kind::OriginIndicator: return "origin_indicator(d=" + std::to_string(dimension) + ")";
        case Kind::GeqCompare: return "geq(m=" + std::to_string(dimension / 2) + ")";
        case Kind::GtCompare: return "gt(m=" + std::to_string(dimension / 2) + ")";
    }
    return "unknown";
}

LinearThreshold build_named(const NamedHypothesis& h) {
    const std::size_t d = h.dimension;
    if (d == 0) throw InvalidArgument("named hypothesis needs dimension >= 1");
    switch (h.kind) {
        case NamedHypothesis::Kind::AllZero:
            return LinearThreshold(std::vector<Rational>(d, Rational(0)), Rational(-1));
        case NamedHypothesis::Kind::OriginIndicator:
            return LinearThreshold(std::vector<Rational>(d, Rational(-1)), Rational(0));
        case NamedHypothesis::Kind::GeqCompare:
        case NamedHypothesis::Kind::GtCompare: {
            if (d % 2 != 0) throw InvalidArgument("comparison hypotheses need even dimension");
            const std::size_t m = d / 2;
            const bool strict = h.kind == NamedHypothesis::Kind::GtCompare;
            std::vector<Rational> w(d);
            for (std::size_t i = 0; i < m; ++i) {
                Rational p = Rational(BigInt(1) << (m - 1 - i));
                if (strict) p *= 2;
                w[i] = p;
                w[m + i] = -p;
            }
            return LinearThreshold(std::move(w), Rational(strict ? -1 : 0));
        }
    }
    throw InvalidArgument("unknown hypothesis kind");
}

// ---------------------------------------------------------------------------
// Enumeration

std::uint64_t domain_size(std::size_t d) {
    if (d > kMaxIndexDimension) throw CapExceeded("dimension too large to enumerate");
    return std::uint64_t{1} << d;
}

void require_enumerable(std::size_t d, std::size_t cap) {
    if (d > cap || d > kMaxIndexDimension)
        throw CapExceeded("enumerating 2^" + std::to_string(d) + " points exceeds cap 2^" + std::to_string(cap) +
                          "; result would not be exactly verified");
}

namespace {

void check_pair(const LinearThreshold& a, const LinearThreshold& b, std::size_t d) {
    if (a.dimension() != d || b.dimension() != d)
        throw DimensionMismatch("classifiers have dimensions " + std::to_string(a.dimension()) + " and " +
                                std::to_string(b.dimension()) + ", expected " + std::to_string(d));
}

}  // namespace

ExactLossResult exact_loss(const LinearThreshold& candidate, const LinearThreshold& target, std::size_t d,
                           EnumerationOptions options) {
    check_pair(candidate, target, d);
    require_enumerable(d, options.cap);
    const std::uint64_t n = domain_size(d);
    std::atomic<std::uint64_t> first{n};
    parallel_for(n, n >= (1u << 16) ? options.threads : 1, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::uint64_t x = begin; x < end; ++x) {
            if (x >= first.load(std::memory_order_relaxed)) return;
            if (candidate.evaluate_index(x) != target.evaluate_index(x)) {
                std::uint64_t cur = first.load();
                while (x < cur && !first.compare_exchange_weak(cur, x)) {
                }
                return;
            }
        }
    });
    ExactLossResult r;
    if (first.load() < n) {
        r.loss = 1;
        r.witness = BitVector::from_index(first.load(), d);
    }
    return r;
}

std::uint64_t disagreement_count(const LinearThreshold& a, const LinearThreshold& b, std::size_t d,
                                 EnumerationOptions options) {
    check_pair(a, b, d);
    require_enumerable(d, options.cap);
    const std::uint64_t n = domain_size(d);
    std::atomic<std::uint64_t> total{0};
    parallel_for(n, n >= (1u << 16) ? options.threads : 1, [&](std::size_t begin, std::size_t end, std::size_t) {
        std::uint64_t local = 0;
        for (std::uint64_t x = begin; x < end; ++x) local += a.evaluate_index(x) != b.evaluate_index(x);
        total += local;
    });
    return total.load();
}

}  // namespace exactlab

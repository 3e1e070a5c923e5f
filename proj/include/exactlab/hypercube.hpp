#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace exactlab {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Largest dimension representable by an enumeration index.
inline constexpr std::size_t kMaxIndexDimension = 63;
inline constexpr std::size_t kDefaultEnumerationCap = 24;
/// Real-valued weights with magnitude at or below this are snapped to exactly
/// zero when a learned classifier is converted to exact form.
inline constexpr double kSnapTolerance = 1e-9;

/// A point of {0,1}^d.
///
/// Enumeration index convention: coordinate 0 is the most significant bit of
/// the index, so index(x) reads x as a binary numeral.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::vector<std::uint8_t> bits);
    BitVector(std::initializer_list<int> bits);

    static BitVector zeros(std::size_t d);
    static BitVector from_index(std::uint64_t index, std::size_t d);

    std::uint64_t index() const;
    std::size_t size() const noexcept { return bits_.size(); }
    int operator[](std::size_t i) const noexcept { return bits_[i]; }
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }
    bool is_zero() const noexcept;

    /// Compact "0110" form.
    std::string to_string() const;

    friend bool operator==(const BitVector&, const BitVector&) = default;
    friend auto operator<=>(const BitVector&, const BitVector&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

/// Halfspace classifier x -> 1(<w,x> + b >= 0) with exact rational
/// parameters. Evaluation is exact: a floating-point filter decides the sign
/// when it is certain and falls back to rational arithmetic otherwise.
class LinearThreshold {
public:
    LinearThreshold() = default;
    LinearThreshold(std::vector<Rational> weights, Rational bias);

    static LinearThreshold from_integers(std::span<const long long> weights, long long bias);
    static LinearThreshold from_integers(std::initializer_list<long long> weights, long long bias);
    /// Exact dyadic conversion of a float classifier; coefficients with
    /// |v| <= snap become exactly zero.
    static LinearThreshold from_real(std::span<const double> weights, double bias,
                                     double snap = kSnapTolerance);

    std::size_t dimension() const noexcept { return weights_.size(); }
    const std::vector<Rational>& weights() const noexcept { return weights_; }
    const Rational& bias() const noexcept { return bias_; }

    int evaluate(const BitVector& x) const;
    /// Unchecked evaluation at BitVector::from_index(index, dimension()).
    int evaluate_index(std::uint64_t index) const;
    Rational activation(const BitVector& x) const;

    /// The classifier 1 - f on {0,1}^d, again as a closed halfspace.
    LinearThreshold complement() const;
    /// Coordinate i of the input moves to position perm[i]:
    /// result(y) = f(x) where y[perm[i]] = x[i].
    LinearThreshold permuted(std::span<const std::size_t> perm) const;

    std::vector<double> weights_as_double() const;
    double bias_as_double() const;

    /// Weights and bias scaled by the lcm of their denominators.
    std::pair<std::vector<BigInt>, BigInt> integer_form() const;

    std::string to_string() const;

    friend bool operator==(const LinearThreshold& a, const LinearThreshold& b) {
        return a.weights_ == b.weights_ && a.bias_ == b.bias_;
    }

private:
    void prepare();
    int exact_sign_index(std::uint64_t index) const;

    std::vector<Rational> weights_;
    Rational bias_;
    std::vector<double> approx_weights_;
    double approx_bias_ = 0.0;
    double filter_bound_ = 0.0;
    bool filter_usable_ = false;
};

inline int evaluate(const LinearThreshold& h, const BitVector& x) { return h.evaluate(x); }

/// Integer value of the first m bits (most significant first).
std::uint64_t left_value(const BitVector& x, std::size_t m);
/// Integer value of the last m bits (most significant first).
std::uint64_t right_value(const BitVector& x, std::size_t m);

struct NamedHypothesis {
    enum class Kind { AllZero, OriginIndicator, GeqCompare, GtCompare };

    Kind kind = Kind::AllZero;
    std::size_t dimension = 1;

    static NamedHypothesis all_zero(std::size_t d) { return {Kind::AllZero, d}; }
    static NamedHypothesis origin_indicator(std::size_t d) { return {Kind::OriginIndicator, d}; }
    static NamedHypothesis geq_compare(std::size_t m) { return {Kind::GeqCompare, 2 * m}; }
    static NamedHypothesis gt_compare(std::size_t m) { return {Kind::GtCompare, 2 * m}; }

    std::string name() const;
};

/// Integer-weight realization of the named hypotheses:
/// LEFT >= RIGHT uses +2^(m-1-i) / -2^(m-1-j) with bias 0, LEFT > RIGHT
/// doubles those and uses bias -1.
LinearThreshold build_named(const NamedHypothesis& kind);

std::uint64_t domain_size(std::size_t d);
/// Throws CapExceeded when 2^d points exceed the enumeration cap.
void require_enumerable(std::size_t d, std::size_t cap);

struct EnumerationOptions {
    std::size_t cap = kDefaultEnumerationCap;
    std::size_t threads = 1;
};

struct ExactLossResult {
    int loss = 0;
    /// Lowest-index point where the two classifiers disagree.
    std::optional<BitVector> witness;
};

/// Worst-case 0/1 loss of `candidate` against `target` over all of {0,1}^d.
ExactLossResult exact_loss(const LinearThreshold& candidate, const LinearThreshold& target,
                           std::size_t d, EnumerationOptions options = {});

/// Number of points of {0,1}^d where the classifiers disagree.
std::uint64_t disagreement_count(const LinearThreshold& a, const LinearThreshold& b, std::size_t d,
                                 EnumerationOptions options = {});

}  // namespace exactlab

#pragma once

#include "exactlab/dataset.hpp"
#include "exactlab/hypercube.hpp"
#include "exactlab/random.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace exactlab {

/// Distribution over {0,1}^d: either uniform, or an explicit finite list of
/// (point, probability) atoms.
class InputDistribution {
public:
    enum class Kind { UniformHypercube, FiniteSupport };

    static InputDistribution uniform(std::size_t d);
    /// Probabilities must be nonnegative and sum to 1 within 1e-12.
    static InputDistribution finite_support(std::vector<std::pair<BitVector, double>> atoms);

    Kind kind() const noexcept { return kind_; }
    std::size_t dimension() const noexcept { return dimension_; }
    const std::vector<std::pair<BitVector, double>>& atoms() const noexcept { return atoms_; }

    std::uint64_t sample_index(Rng& rng) const;
    BitVector sample(Rng& rng) const { return BitVector::from_index(sample_index(rng), dimension_); }

private:
    InputDistribution() = default;

    Kind kind_ = Kind::UniformHypercube;
    std::size_t dimension_ = 1;
    std::vector<std::pair<BitVector, double>> atoms_;
    std::vector<std::uint64_t> atom_indices_;
    std::vector<double> cumulative_;
};

enum class EstimationMode { Exact, MonteCarlo };

std::string to_string(EstimationMode mode);

struct DisagreementReport {
    double probability = 0.0;
    /// Populated in exact mode.
    std::optional<Rational> exact;
    EstimationMode method = EstimationMode::Exact;
    std::uint64_t sample_count = 0;
    /// 99% normal-approximation halfwidth; zero in exact mode.
    double confidence_halfwidth = 0.0;
};

/// P(h(X) != h'(X)) for X ~ dist.
DisagreementReport disagreement_prob(const LinearThreshold& h, const LinearThreshold& other,
                                     const InputDistribution& dist, EstimationMode mode = EstimationMode::Exact,
                                     std::uint64_t samples = 0, std::uint64_t seed = 0,
                                     EnumerationOptions options = {});

/// Sample count below which exact identification fails with probability
/// >= 1/4, or the unbounded sentinel when no finite bound exists.
struct CriticalSampleSize {
    bool bounded = false;
    std::uint64_t value = 0;

    static CriticalSampleSize unbounded() { return {false, 0}; }
    static CriticalSampleSize of(std::uint64_t v) { return {true, v}; }
    std::string to_string() const { return bounded ? std::to_string(value) : "unbounded"; }

    friend bool operator==(const CriticalSampleSize&, const CriticalSampleSize&) = default;
};

/// floor(1 / (2 * min p)) over pairwise disagreement probabilities. A zero
/// probability (indistinguishable pair) or an empty list yields unbounded.
CriticalSampleSize critical_sample_size(std::span<const Rational> pair_disagreements);
CriticalSampleSize critical_sample_size(std::span<const double> pair_disagreements);

struct FailureLowerBound {
    /// agree^n / 2
    double power_bound = 0.0;
    /// (1 - n (1 - agree)) / 2, may be negative
    double linear_bound = 0.0;
};

FailureLowerBound failure_lower_bound(std::uint64_t n, double agree_prob);

/// Element of (label flip) x (coordinate permutation). The input action moves
/// coordinate i to position permutation[i].
class SymmetryAction {
public:
    SymmetryAction(bool label_flip, std::vector<std::size_t> permutation);

    static SymmetryAction identity(std::size_t d);
    static SymmetryAction flip(std::size_t d);
    static SymmetryAction transposition(std::size_t d, std::size_t i, std::size_t j);
    /// Exchanges the first and second half of the coordinates.
    static SymmetryAction block_swap(std::size_t m);
    static SymmetryAction cycle(std::size_t d);
    static SymmetryAction random(std::size_t d, Rng& rng, bool allow_flip = true);

    bool label_flip() const noexcept { return label_flip_; }
    const std::vector<std::size_t>& permutation() const noexcept { return permutation_; }
    std::size_t dimension() const noexcept { return permutation_.size(); }
    bool is_identity() const;

    BitVector act_on_input(const BitVector& x) const;
    int act_on_label(int y) const { return label_flip_ ? 1 - y : y; }

    /// (a * b) acts as b first, then a.
    friend SymmetryAction operator*(const SymmetryAction& a, const SymmetryAction& b);
    SymmetryAction inverse() const;

    std::string to_string() const;

    friend bool operator==(const SymmetryAction&, const SymmetryAction&) = default;
    friend auto operator<=>(const SymmetryAction&, const SymmetryAction&) = default;

private:
    bool label_flip_ = false;
    std::vector<std::size_t> permutation_;
};

/// (g h)(x) = flip(h(permute^{-1}(x))).
LinearThreshold apply_action(const SymmetryAction& g, const LinearThreshold& h);
/// Permutes each input and flips labels when g does.
LabeledDataset apply_action_data(const SymmetryAction& g, const LabeledDataset& data);

struct OrbitOptions {
    /// Largest number of group elements generated before giving up.
    std::size_t cap = 100000;
    /// When the cap is hit, evaluate over the explored elements and flag the
    /// result partial instead of throwing.
    bool allow_partial = false;
    EnumerationOptions enumeration{};
};

struct OrbitBound {
    CriticalSampleSize size = CriticalSampleSize::unbounded();
    /// The infimum was taken over a subset of the group; the bound is still
    /// valid but may be weaker.
    bool partial = false;
    std::size_t elements_examined = 0;
    /// Non-identity elements with g h = h on the whole domain. They do not
    /// produce a second hypothesis and are excluded from the infimum.
    std::size_t stabilizer_elements = 0;
    std::optional<Rational> min_disagreement;
    std::optional<SymmetryAction> minimizer;
};

/// Elements of the group generated by `generators` (identity first), up to
/// `cap` elements. Sets `truncated` when the cap cut the closure short.
std::vector<SymmetryAction> generate_group(std::span<const SymmetryAction> generators, std::size_t d,
                                           std::size_t cap, bool& truncated);

/// Critical sample size for G-symmetric learners on target h, with G the group
/// generated by `generators`. The distribution must be invariant under G.
OrbitBound orbit_critical_sample_size(const LinearThreshold& h, std::span<const SymmetryAction> generators,
                                      const InputDistribution& dist, OrbitOptions options = {});

/// Same bound evaluated over a caller-listed subset of G; always partial.
OrbitBound orbit_critical_sample_size_subset(const LinearThreshold& h, std::span<const SymmetryAction> elements,
                                             const InputDistribution& dist, EnumerationOptions options = {});

}  // namespace exactlab

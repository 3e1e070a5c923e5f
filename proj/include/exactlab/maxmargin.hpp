#pragma once

#include "exactlab/dataset.hpp"
#include "exactlab/hypercube.hpp"
#include "exactlab/random.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace exactlab {

struct MaxMarginOptions {
    /// Largest projected dual gradient accepted at convergence.
    double tol = 1e-10;
    std::size_t max_sweeps = 2000000;
    /// Sum of dual coefficients beyond which the data is declared non-separable.
    double divergence_cap = 1e9;
    /// Pairs whose constraint value exceeds 2 + band while inactive are set
    /// aside between full convergence checks.
    double shrink_band = 1e-3;
};

/// Positive/negative pair of dataset rows; the difference vector is
/// input[positive] - input[negative].
struct DifferencePair {
    std::size_t positive = 0;
    std::size_t negative = 0;

    friend bool operator==(const DifferencePair&, const DifferencePair&) = default;
    friend auto operator<=>(const DifferencePair&, const DifferencePair&) = default;
};

/// Solution of min 1/2 |w|^2 s.t. <x+ - x-, w> >= 2 for every
/// positive/negative pair, with bias placed at the margin midpoint.
struct MarginSolution {
    std::vector<double> weights;
    double bias = 0.0;
    /// Nonzero dual coefficients, keyed by dataset row pair.
    std::vector<std::pair<DifferencePair, double>> dual_coefficients;
    /// Largest projected dual gradient over all pairs (covers primal
    /// feasibility and complementary slackness).
    double kkt_residual = 0.0;
    std::size_t sweeps = 0;
    /// Functional margin min_pos <w,x> - max_neg <w,x>; 2 at the optimum.
    double margin_gap = 0.0;

    LinearThreshold classifier() const { return LinearThreshold::from_real(weights, bias); }
};

/// Exact test (rational simplex): some (w, b) puts every example strictly on
/// its side. Single-class data counts as separable.
bool linearly_separable(const LabeledDataset& data);

/// Hard-margin maximum-margin fit by dual coordinate ascent on the
/// difference-vector program. Throws SingleClass or NonSeparable.

MarginSolution max_margin_fit(const LabeledDataset& data, const MaxMarginOptions& options = {});

struct SupportDifference {
    DifferencePair pair;
    std::vector<int> delta;
    double value = 0.0;
};

/// Difference vectors with <delta, w> within tol of 2. Rows are deduplicated:
/// each distinct input contributes through its first occurrence.
std::vector<SupportDifference> support_differences(const MarginSolution& solution, const LabeledDataset& data,
                                                   double tol = 1e-6);

struct ConicCombination {
    /// Indices into the input atom list.
    std::vector<std::size_t> atoms;
    std::vector<double> coefficients;
};

/// Rewrites sum_k c_k atom_k = target with at most dim+1 nonzero
/// coefficients by repeatedly moving along a null-space direction of the
/// active atoms. Throws InvalidArgument if the input combination misses the
/// target by more than tol (relative to max(1, |target|_inf)).
ConicCombination caratheodory_reduce(const std::vector<std::vector<double>>& atoms,
                                     const std::vector<double>& coefficients, const std::vector<double>& target,
                                     double tol = 1e-8);

struct TeachingSetOptions {
    std::size_t enumeration_cap = kDefaultEnumerationCap;
    MaxMarginOptions solver{};
    double tight_tol = 1e-6;
};

struct TeachingSet {
    LabeledDataset examples{1};
    bool certified = false;
    /// Difference vectors kept after the reduction.
    std::size_t differences_used = 0;
    /// Relative distance between the refit weights and the full-domain
    /// max-margin weights.
    double weight_relative_error = 0.0;
    std::vector<double> full_domain_weights;
    double full_domain_bias = 0.0;
    std::string diagnostic;
};

/// Dataset of at most 2d+2 points whose max-margin classifier equals the
/// target on all of {0,1}^d. Constant targets yield an uncertified single
/// example. Throws CertificationFailure if the refit is not exact.
TeachingSet teaching_set(const LinearThreshold& target, std::size_t d, const TeachingSetOptions& options = {});

/// Integer weights uniform in [-max_weight, max_weight] and bias uniform in
/// [-2 max_weight, 2 max_weight], redrawn until both labels occur on {0,1}^d.
LinearThreshold random_separable_target(std::size_t d, Rng& rng, long long max_weight = 5,
                                        std::size_t enumeration_cap = kDefaultEnumerationCap);

}  // namespace exactlab

#pragma once

#include "exactlab/dataset.hpp"
#include "exactlab/disagreement.hpp"
#include "exactlab/hypercube.hpp"
#include "exactlab/maxmargin.hpp"
#include "exactlab/ode.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace exactlab {

/// Hard-margin SVM; single-class data yields the constant classifier.
struct MaxMarginLearner {
    MaxMarginOptions solver{};
};

/// Full-batch gradient descent on the mean logistic loss.
struct LogisticGdLearner {
    double step_size = 1.0;
    std::size_t steps = 200;
};

/// Gradient flow on the mean logistic loss, integrated to t_max.
struct LogisticFlowLearner {
    IntegratorConfig integrator{};
    double t_max = 100.0;
};

/// Rosenblatt perceptron on integer weights; updates when y * a <= 0.
struct PerceptronLearner {
    std::size_t max_passes = 100;
};

/// Always returns the all-zero classifier.
struct ConstantZeroLearner {};

/// Baseline for the {all-zero, origin-indicator} family: returns the origin
/// indicator iff the origin was observed with label 1, else all-zero.
struct BayesLikeLearner {};

struct LearnerSpec {
    std::variant<MaxMarginLearner, LogisticGdLearner, LogisticFlowLearner, PerceptronLearner, ConstantZeroLearner,
                 BayesLikeLearner>
        kind;
    /// Gradient learners and the perceptron start from zero; otherwise the
    /// start is drawn from the fit seed.
    bool zero_init = true;

    std::string name() const;
};

/// Deterministic in (spec, data order, seed).
LinearThreshold fit(const LearnerSpec& spec, const LabeledDataset& data, std::uint64_t seed = 0);

/// Every learner kind with its default configuration.
std::vector<LearnerSpec> builtin_learners();

struct FailureEstimate {
    double phi_hat = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    /// Trials where the learner raised (single-class or non-separable data);
    /// these count as failures to identify the target.
    std::uint64_t fit_errors = 0;
    double standard_error = 0.0;
    /// 99% normal-approximation halfwidth.
    double confidence_halfwidth = 0.0;
    std::uint64_t n = 0;
};

/// Monte Carlo estimate of P(A(D_h) != h) with D_h an i.i.d. sample of size n
/// from dist labeled by `target`. Trial i uses seed derive_seed(seed, i), so
/// the result does not depend on `threads`.
FailureEstimate estimate_failure(const LearnerSpec& spec, const LinearThreshold& target,
                                 const InputDistribution& dist, std::uint64_t n, std::uint64_t trials,
                                 std::uint64_t seed, std::size_t threads = 1, EnumerationOptions options = {});

}  // namespace exactlab

#pragma once

#include "exactlab/dataset.hpp"
#include "exactlab/hypercube.hpp"
#include "exactlab/maxmargin.hpp"
#include "exactlab/ode.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace exactlab {

/// Activation <w,x> + b, summed order-independently.
double linear_activation(const BitVector& x, std::span<const double> w, double b);

/// Mean cross-entropy with labels mapped 0 -> -1, 1 -> +1:
/// (1/n) sum log(1 + exp(-y (<w,x> + b))).
double logistic_loss(const LabeledDataset& data, std::span<const double> w, double b);

struct LogisticGradient {
    std::vector<double> weights;
    double bias = 0.0;
};

LogisticGradient logistic_grad(const LabeledDataset& data, std::span<const double> w, double b);

struct FlowConfig {
    IntegratorConfig integrator{};
    double t_max = 1e4;
    /// First log-spaced checkpoint after t = 0.
    double t_first = 1e-2;
    std::size_t checkpoints_per_decade = 64;
    /// Starting point; zero weights and bias when unset.
    std::optional<std::vector<double>> initial_weights;
    double initial_bias = 0.0;
    std::size_t enumeration_cap = kDefaultEnumerationCap;
};

/// t = 0 followed by t_first * 10^(k / per_decade) for every value <= t_max.
std::vector<double> log_checkpoints(double t_first, double t_max, std::size_t per_decade);

struct CurveRecord {
    double t = 0.0;
    double loss = 0.0;
    /// Classifier at this checkpoint equals the target on all of {0,1}^d.
    bool exact = false;
    /// cos(w(t), w*) against the max-margin weights of the training data;
    /// NaN when that fit is undefined or w(t) = 0.
    double cosine = 0.0;
};

struct TrainingCurve {
    std::vector<CurveRecord> records;
    std::vector<double> final_weights;
    double final_bias = 0.0;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    /// First checkpoint time flagged exact (checkpoint resolution).
    std::optional<double> first_exact_time() const;
};

/// Integrates dw/dt = -grad L_n(w, b) from the configured start and records
/// loss, exactness against `target` and direction cosine at each checkpoint.
TrainingCurve run_flow(const LabeledDataset& data, const LinearThreshold& target, const FlowConfig& config = {});

/// Plain gradient descent; with `loss_scaled_steps` the step at iteration k is
/// step_size / L(w_k).
struct GdConfig {
    double step_size = 1.0;
    std::size_t steps = 1000;
    bool loss_scaled_steps = false;
    std::size_t checkpoints_per_decade = 16;
    std::size_t enumeration_cap = kDefaultEnumerationCap;
};

/// Records at log-spaced iteration counts; CurveRecord::t is the iteration.
TrainingCurve run_gradient_descent(const LabeledDataset& data, const LinearThreshold& target,
                                   const GdConfig& config = {});

/// Per-m first exact time; nullopt means "not reached".
std::map<std::size_t, std::optional<double>> time_to_exact(const std::map<std::size_t, TrainingCurve>& curves);

/// True when every reached time is >= the one before and nothing after an
/// unreached m is reached. `strict` requires strict increase.
bool is_increasing(const std::map<std::size_t, std::optional<double>>& table, bool strict);

struct MarginExperimentConfig {
    std::size_t m = 2;
    std::size_t seeds = 20;
    std::vector<std::size_t> n_grid;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    MaxMarginOptions solver{};
};

/// Default grid: 1..32, then geometric steps of ~10% up to `max_n`.
std::vector<std::size_t> default_n_grid(std::size_t max_n);

struct MarginExperimentRow {
    std::size_t n = 0;
    double mean_fraction_correct = 0.0;
    double exact_fraction = 0.0;
};

struct MarginExperimentResult {
    std::size_t m = 0;
    /// Points x with |<w*,x> + b*| = 1 for the full-domain fit of LEFT >= RIGHT.
    std::vector<BitVector> support_vectors;
    std::vector<MarginExperimentRow> rows;
    /// Smallest grid n at which the prefix fit is exact, per seed.
    std::vector<std::optional<std::size_t>> n_star;
    /// Median over seeds; nullopt if the median seed never became exact.
    std::optional<double> median_n_star;
};

/// Support vectors of the full-domain max-margin fit of `target`.
std::vector<BitVector> margin_support_vectors(const LinearThreshold& target, const MaxMarginOptions& solver = {},
                                              double tol = 1e-6);

/// Fraction of {0,1}^d classified correctly by the max-margin fit of `data`;
/// single-class data predicts its one label everywhere.
double max_margin_fraction_correct(const LabeledDataset& data, const LinearThreshold& target,
                                   const MaxMarginOptions& solver = {});

/// Samples n points i.i.d. from the support vectors of LEFT >= RIGHT, fits the
/// max-margin classifier and measures how much of the domain it gets right.
MarginExperimentResult margin_sample_experiment(const MarginExperimentConfig& config);

}  // namespace exactlab

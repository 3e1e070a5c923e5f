#include "exactlab/learners.hpp"

#include "exactlab/dynamics.hpp"
#include "exactlab/errors.hpp"
#include "exactlab/parallel.hpp"
#include "exactlab/random.hpp"

#include <atomic>
#include <cmath>

namespace exactlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::vector<double> initial_point(std::size_t size, bool zero_init, std::uint64_t seed) {
    std::vector<double> v(size, 0.0);
    if (zero_init) return v;
    Rng rng = make_rng(seed, 0x1417);
    std::normal_distribution<double> normal(0.0, 0.01);
    for (auto& x : v) x = normal(rng);
    return v;
}

void require_data(const LabeledDataset& data, const char* who) {
    if (data.empty()) throw InvalidArgument(std::string(who) + " needs non-empty data");
}

LinearThreshold fit_gd(const LogisticGdLearner& cfg, const LabeledDataset& data, bool zero_init, std::uint64_t seed) {
    require_data(data, "logistic gradient descent");
    if (!(cfg.step_size > 0.0) || cfg.steps == 0) throw InvalidArgument("step size and steps must be positive");
    const std::size_t d = data.dimension();
    auto theta = initial_point(d + 1, zero_init, seed);
    std::vector<double> w(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(d));
    double b = theta[d];
    for (std::size_t k = 0; k < cfg.steps; ++k) {
        const auto g = logistic_grad(data, w, b);
        for (std::size_t j = 0; j < d; ++j) w[j] -= cfg.step_size * g.weights[j];
        b -= cfg.step_size * g.bias;
    }
    return LinearThreshold::from_real(w, b);
}

LinearThreshold fit_flow(const LogisticFlowLearner& cfg, const LabeledDataset& data, bool zero_init,
                         std::uint64_t seed) {
    require_data(data, "logistic gradient flow");
    if (!(cfg.t_max > 0.0)) throw InvalidArgument("t_max must be positive");
    const std::size_t d = data.dimension();
    DormandPrince solver(
        [&data, d](double, std::span<const double> y, std::span<double> dydt) {
            const auto g = logistic_grad(data, y.first(d), y[d]);
            for (std::size_t j = 0; j < d; ++j) dydt[j] = -g.weights[j];
            dydt[d] = -g.bias;
        },
        initial_point(d + 1, zero_init, seed), 0.0, cfg.integrator);
    solver.integrate_to(cfg.t_max);
    const auto& y = solver.state();
    return LinearThreshold::from_real(std::span<const double>(y).first(d), y[d]);
}

LinearThreshold fit_perceptron(const PerceptronLearner& cfg, const LabeledDataset& data, bool zero_init,
                               std::uint64_t seed) {
    require_data(data, "perceptron");
    const std::size_t d = data.dimension();
    std::vector<long long> w(d, 0);
    long long b = 0;
    if (!zero_init) {
        Rng rng = make_rng(seed, 0x9e7);
        std::uniform_int_distribution<int> pick(-1, 1);
        for (auto& v : w) v = pick(rng);
        b = pick(rng);
    }
    for (std::size_t pass = 0; pass < cfg.max_passes; ++pass) {
        bool clean = true;
        for (const auto& e : data.examples()) {
            long long a = b;
            for (std::size_t j = 0; j < d; ++j)
                if (e.input[j]) a += w[j];
            const long long y = e.label == 1 ? 1 : -1;
            if (y * a > 0) continue;
            clean = false;
            for (std::size_t j = 0; j < d; ++j)
                if (e.input[j]) w[j] += y;
            b += y;
        }
        if (clean) break;
    }
    return LinearThreshold::from_integers(std::span<const long long>(w), b);
}

// Single-class data has no margin; predict the one observed label everywhere.
LinearThreshold fit_max_margin(const MaxMarginLearner& cfg, const LabeledDataset& data) {
    require_data(data, "max-margin");
    if (!data.has_both_classes()) {
        const std::vector<long long> zero(data.dimension(), 0);
        return LinearThreshold::from_integers(std::span<const long long>(zero),
                                              data.examples().front().label == 1 ? 0 : -1);
    }
    return max_margin_fit(data, cfg.solver).classifier();
}

LinearThreshold fit_bayes_like(const LabeledDataset& data) {
    const std::size_t d = data.dimension();
    for (const auto& e : data.examples())
        if (e.input.is_zero() && e.label == 1) return build_named(NamedHypothesis::origin_indicator(d));
    return build_named(NamedHypothesis::all_zero(d));
}

}  // namespace

std::string LearnerSpec::name() const {
    const std::string base = std::visit(overloaded{
                                            [](const MaxMarginLearner&) { return std::string("max_margin"); },
                                            [](const LogisticGdLearner&) { return std::string("logistic_gd"); },
                                            [](const LogisticFlowLearner&) { return std::string("logistic_flow"); },
                                            [](const PerceptronLearner&) { return std::string("perceptron"); },
                                            [](const ConstantZeroLearner&) { return std::string("constant_zero"); },
                                            [](const BayesLikeLearner&) { return std::string("bayes_like"); },
                                        },
                                        kind);
    return zero_init ? base : base + "(random_init)";
}

LinearThreshold fit(const LearnerSpec& spec, const LabeledDataset& data, std::uint64_t seed) {
    return std::visit(
        overloaded{
            [&](const MaxMarginLearner& m) { return fit_max_margin(m, data); },
            [&](const LogisticGdLearner& g) { return fit_gd(g, data, spec.zero_init, seed); },
            [&](const LogisticFlowLearner& f) { return fit_flow(f, data, spec.zero_init, seed); },
            [&](const PerceptronLearner& p) { return fit_perceptron(p, data, spec.zero_init, seed); },
            [&](const ConstantZeroLearner&) { return build_named(NamedHypothesis::all_zero(data.dimension())); },
            [&](const BayesLikeLearner&) { return fit_bayes_like(data); },
        },
        spec.kind);
}

std::vector<LearnerSpec> builtin_learners() {
    return {
        {MaxMarginLearner{}, true},    {LogisticGdLearner{}, true},   {LogisticFlowLearner{}, true},
        {PerceptronLearner{}, true},   {ConstantZeroLearner{}, true}, {BayesLikeLearner{}, true},
    };
}

FailureEstimate estimate_failure(const LearnerSpec& spec, const LinearThreshold& target,
                                 const InputDistribution& dist, std::uint64_t n, std::uint64_t trials,
                                 std::uint64_t seed, std::size_t threads, EnumerationOptions options) {
    if (trials == 0) throw InvalidArgument("trials must be >= 1");
    const std::size_t d = target.dimension();
    if (dist.dimension() != d) throw DimensionMismatch("target/distribution dimension mismatch");
    require_enumerable(d, options.cap);

    std::atomic<std::uint64_t> failures{0};
    std::atomic<std::uint64_t> errors{0};
    parallel_for(trials, threads, [&](std::size_t begin, std::size_t end, std::size_t) {
        std::uint64_t local_fail = 0, local_err = 0;
        for (std::size_t t = begin; t < end; ++t) {
            const std::uint64_t trial_seed = derive_seed(seed, t);
            Rng rng(trial_seed);
            LabeledDataset data(d);
            for (std::uint64_t i = 0; i < n; ++i) {
                const std::uint64_t x = dist.sample_index(rng);
                data.add(BitVector::from_index(x, d), target.evaluate_index(x));
            }
            try {
                const LinearThreshold h = fit(spec, data, derive_seed(trial_seed, 1));
                local_fail += exact_loss(h, target, d, {options.cap, 1}).loss;
            } catch (const SingleClass&) {
                ++local_fail;
                ++local_err;
            } catch (const NonSeparable&) {
                ++local_fail;
                ++local_err;
            } catch (const InvalidArgument&) {
                // empty data for learners that need examples
                ++local_fail;
                ++local_err;
            }
        }
        failures += local_fail;
        errors += local_err;
    });

    FailureEstimate est;
    est.trials = trials;
    est.n = n;
    est.failures = failures.load();
    est.fit_errors = errors.load();
    est.phi_hat = static_cast<double>(est.failures) / static_cast<double>(trials);
    est.standard_error = std::sqrt(est.phi_hat * (1.0 - est.phi_hat) / static_cast<double>(trials));
    est.confidence_halfwidth = kZ99 * est.standard_error;
    return est;
}

}  // namespace exactlab

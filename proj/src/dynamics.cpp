#include "exactlab/dynamics.hpp"

#include "exactlab/errors.hpp"
#include "exactlab/exact_sum.hpp"
#include "exactlab/parallel.hpp"
#include "exactlab/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace exactlab {

namespace {

void check_params(const LabeledDataset& data, std::span<const double> w) {
    if (data.empty()) throw InvalidArgument("logistic loss needs non-empty data");
    if (w.size() != data.dimension()) throw DimensionMismatch("weight/data dimension mismatch");
}

// log(1 + exp(-margin)) without overflow.
double softplus_neg(double margin) {
    return margin > 0.0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
}

double signed_label(int label) { return label == 1 ? 1.0 : -1.0; }

double cosine(std::span<const double> a, std::span<const double> b) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return ab / std::sqrt(aa * bb);
}

bool is_exact(std::span<const double> w, double b, const LinearThreshold& target, std::size_t cap) {
    for (double v : w)
        if (!std::isfinite(v)) return false;
    if (!std::isfinite(b)) return false;
    return exact_loss(LinearThreshold::from_real(w, b), target, target.dimension(), {cap, 1}).loss == 0;
}

std::optional<std::vector<double>> reference_direction(const LabeledDataset& data) {
    try {
        return max_margin_fit(data).weights;
    } catch (const SingleClass&) {
    } catch (const NonSeparable&) {
    }
    return std::nullopt;
}

CurveRecord make_record(double t, const LabeledDataset& data, std::span<const double> w, double b,
                        const LinearThreshold& target, const std::optional<std::vector<double>>& reference,
                        std::size_t cap) {
    CurveRecord r;
    r.t = t;
    r.loss = logistic_loss(data, w, b);
    r.exact = is_exact(w, b, target, cap);
    r.cosine = reference ? cosine(w, *reference) : std::numeric_limits<double>::quiet_NaN();
    return r;
}

}  // namespace

double linear_activation(const BitVector& x, std::span<const double> w, double b) {
    double terms[kMaxIndexDimension + 2];
    std::vector<double> spill;
    double* out = terms;
    if (x.size() + 1 > std::size(terms)) {
        spill.resize(x.size() + 1);
        out = spill.data();
    }
    std::size_t k = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i]) out[k++] = w[i];
    out[k++] = b;
    return exact_sum(std::span<const double>(out, k));
}

double logistic_loss(const LabeledDataset& data, std::span<const double> w, double b) {
    check_params(data, w);
    double total = 0.0;
    for (const auto& e : data.examples()) total += softplus_neg(signed_label(e.label) * linear_activation(e.input, w, b));
    return total / static_cast<double>(data.size());
}

LogisticGradient logistic_grad(const LabeledDataset& data, std::span<const double> w, double b) {
    check_params(data, w);
    LogisticGradient g;
    g.weights.assign(w.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(data.size());
    for (const auto& e : data.examples()) {
        const double y = signed_label(e.label);
        const double margin = y * linear_activation(e.input, w, b);
        // d/da log(1 + exp(-y a)) = -y * sigmoid(-y a)
        const double coef = -y / (1.0 + std::exp(margin)) * inv_n;
        for (std::size_t j = 0; j < w.size(); ++j)
            if (e.input[j]) g.weights[j] += coef;
        g.bias += coef;
    }
    return g;
}

std::vector<double> log_checkpoints(double t_first, double t_max, std::size_t per_decade) {
    if (!(t_max > 0.0)) throw InvalidArgument("t_max must be positive");
    if (!(t_first > 0.0) || per_decade == 0) throw InvalidArgument("invalid checkpoint schedule");
    std::vector<double> times{0.0};
    for (std::size_t k = 0;; ++k) {
        const double t = t_first * std::pow(10.0, static_cast<double>(k) / static_cast<double>(per_decade));
        if (t > t_max * (1.0 + 1e-12)) break;
        times.push_back(std::min(t, t_max));
    }
    return times;
}

std::optional<double> TrainingCurve::first_exact_time() const {
    for (const auto& r : records)
        if (r.exact) return r.t;
    return std::nullopt;
}

TrainingCurve run_flow(const LabeledDataset& data, const LinearThreshold& target, const FlowConfig& config) {
    if (data.empty()) throw InvalidArgument("gradient flow needs non-empty data");
    const std::size_t d = data.dimension();
    if (target.dimension() != d) throw DimensionMismatch("target/data dimension mismatch");

    std::vector<double> y0(d + 1, 0.0);
    if (config.initial_weights) {
        if (config.initial_weights->size() != d) throw DimensionMismatch("initial weights have wrong dimension");
        std::copy(config.initial_weights->begin(), config.initial_weights->end(), y0.begin());
    }
    y0[d] = config.initial_bias;

    const auto reference = reference_direction(data);
    const auto times = log_checkpoints(config.t_first, config.t_max, config.checkpoints_per_decade);

    DormandPrince solver(
        [&data, d](double, std::span<const double> y, std::span<double> dydt) {
            const auto g = logistic_grad(data, y.first(d), y[d]);
            for (std::size_t j = 0; j < d; ++j) dydt[j] = -g.weights[j];
            dydt[d] = -g.bias;
        },
        y0, 0.0, config.integrator);

    TrainingCurve curve;
    for (double t : times) {
        solver.integrate_to(t);
        const auto& y = solver.state();
        curve.records.push_back(
            make_record(t, data, std::span<const double>(y).first(d), y[d], target, reference, config.enumeration_cap));
    }
    const auto& y = solver.state();
    curve.final_weights.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(d));
    curve.final_bias = y[d];
    curve.accepted_steps = solver.accepted_steps();
    curve.rejected_steps = solver.rejected_steps();
    return curve;
}

TrainingCurve run_gradient_descent(const LabeledDataset& data, const LinearThreshold& target, const GdConfig& config) {
    if (data.empty()) throw InvalidArgument("gradient descent needs non-empty data");
    if (!(config.step_size > 0.0) || config.steps == 0) throw InvalidArgument("step size and steps must be positive");
    const std::size_t d = data.dimension();
    if (target.dimension() != d) throw DimensionMismatch("target/data dimension mismatch");

    const auto reference = reference_direction(data);
    std::vector<double> w(d, 0.0);
    double b = 0.0;
    TrainingCurve curve;
    curve.records.push_back(make_record(0.0, data, w, b, target, reference, config.enumeration_cap));

    double next_record = 1.0;
    const double ratio = std::pow(10.0, 1.0 / static_cast<double>(std::max<std::size_t>(1, config.checkpoints_per_decade)));
    for (std::size_t k = 1; k <= config.steps; ++k) {
        double eta = config.step_size;
        if (config.loss_scaled_steps) eta /= std::max(logistic_loss(data, w, b), std::numeric_limits<double>::min());
        const auto g = logistic_grad(data, w, b);
        for (std::size_t j = 0; j < d; ++j) w[j] -= eta * g.weights[j];
        b -= eta * g.bias;
        if (static_cast<double>(k) >= next_record || k == config.steps) {
            curve.records.push_back(make_record(static_cast<double>(k), data, w, b, target, reference, config.enumeration_cap));
            while (next_record <= static_cast<double>(k)) next_record = std::max(next_record * ratio, next_record + 1.0);
        }
    }
    curve.final_weights = w;
    curve.final_bias = b;
    curve.accepted_steps = config.steps;
    return curve;
}

std::map<std::size_t, std::optional<double>> time_to_exact(const std::map<std::size_t, TrainingCurve>& curves) {
    std::map<std::size_t, std::optional<double>> table;
    for (const auto& [m, curve] : curves) table[m] = curve.first_exact_time();
    return table;
}

bool is_increasing(const std::map<std::size_t, std::optional<double>>& table, bool strict) {
    std::optional<double> prev;
    bool seen_unreached = false;
    bool first = true;
    for (const auto& [m, t] : table) {
        if (!t) {
            seen_unreached = true;
            if (strict && !first && !prev) return false;
            first = false;
            continue;
        }
        if (seen_unreached) return false;
        if (prev && (strict ? !(*t > *prev) : !(*t >= *prev))) return false;
        prev = t;
        first = false;
    }
    return true;
}

std::vector<std::size_t> default_n_grid(std::size_t max_n) {
    std::vector<std::size_t> grid;
    for (std::size_t n = 1; n <= std::min<std::size_t>(32, max_n); ++n) grid.push_back(n);
    double n = 32.0;
    while (true) {
        n *= 1.1;
        const auto v = static_cast<std::size_t>(std::ceil(n));
        if (v > max_n) break;
        if (v > grid.back()) grid.push_back(v);
    }
    return grid;
}

std::vector<BitVector> margin_support_vectors(const LinearThreshold& target, const MaxMarginOptions& solver,
                                              double tol) {
    const auto domain = LabeledDataset::full_domain(target);
    const auto sol = max_margin_fit(domain, solver);
    std::vector<BitVector> sv;
    for (const auto& e : domain.examples()) {
        double a = sol.bias;
        for (std::size_t j = 0; j < domain.dimension(); ++j) a += e.input[j] * sol.weights[j];
        if (std::fabs(std::fabs(a) - 1.0) <= tol) sv.push_back(e.input);
    }
    return sv;
}

double max_margin_fraction_correct(const LabeledDataset& data, const LinearThreshold& target,
                                   const MaxMarginOptions& solver) {
    const std::size_t d = target.dimension();
    const double total = static_cast<double>(domain_size(d));
    if (!data.has_both_classes()) {
        // The only label seen is predicted everywhere.
        const int label = data.empty() ? 0 : data[0].label;
        std::uint64_t correct = 0;
        for (std::uint64_t x = 0; x < domain_size(d); ++x) correct += target.evaluate_index(x) == label;
        return static_cast<double>(correct) / total;
    }
    const auto fit = max_margin_fit(data, solver).classifier();
    return 1.0 - static_cast<double>(disagreement_count(fit, target, d)) / total;
}

MarginExperimentResult margin_sample_experiment(const MarginExperimentConfig& config) {
    if (config.m == 0 || config.seeds == 0) throw InvalidArgument("m and seeds must be positive");
    const std::size_t d = 2 * config.m;
    const LinearThreshold target = build_named(NamedHypothesis::geq_compare(config.m));

    MarginExperimentResult result;
    result.m = config.m;
    result.support_vectors = margin_support_vectors(target, config.solver);
    std::vector<std::size_t> grid = config.n_grid.empty() ? default_n_grid(1024) : config.n_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.front() == 0) throw InvalidArgument("n grid entries must be positive");

    const std::size_t rows = grid.size();
    std::vector<double> fractions(config.seeds * rows, 0.0);
    result.n_star.assign(config.seeds, std::nullopt);
    const auto& sv = result.support_vectors;

    parallel_for(config.seeds, config.threads, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t s = begin; s < end; ++s) {
            Rng rng = make_rng(config.seed, s);
            std::uniform_int_distribution<std::size_t> pick(0, sv.size() - 1);
            LabeledDataset data(d);
            for (std::size_t r = 0; r < rows; ++r) {
                while (data.size() < grid[r]) {
                    const auto& x = sv[pick(rng)];
                    data.add(x, target.evaluate(x));
                }
                const double f = max_margin_fraction_correct(data, target, config.solver);
                fractions[s * rows + r] = f;
                if (f == 1.0 && !result.n_star[s]) result.n_star[s] = grid[r];
            }
        }
    });

    for (std::size_t r = 0; r < rows; ++r) {
        MarginExperimentRow row;
        row.n = grid[r];
        for (std::size_t s = 0; s < config.seeds; ++s) {
            row.mean_fraction_correct += fractions[s * rows + r];
            row.exact_fraction += fractions[s * rows + r] == 1.0 ? 1.0 : 0.0;
        }
        row.mean_fraction_correct /= static_cast<double>(config.seeds);
        row.exact_fraction /= static_cast<double>(config.seeds);
        result.rows.push_back(row);
    }

    std::vector<double> values;
    for (const auto& n : result.n_star)
        values.push_back(n ? static_cast<double>(*n) : std::numeric_limits<double>::infinity());
    std::sort(values.begin(), values.end());
    const std::size_t k = values.size();
    const double median = k % 2 ? values[k / 2] : (values[k / 2 - 1] + values[k / 2]) / 2.0;
    if (std::isfinite(median)) result.median_n_star = median;
    return result;
}

}  // namespace exactlab

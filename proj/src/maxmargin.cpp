#include "exactlab/maxmargin.hpp"

#include "exactlab/errors.hpp"
#include "exactlab/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace exactlab {

namespace {

struct DedupedRows {
    std::vector<std::size_t> positives;
    std::vector<std::size_t> negatives;
};

DedupedRows dedupe(const LabeledDataset& data) {
    DedupedRows rows;
    std::map<BitVector, int> seen;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& e = data[i];
        auto [it, inserted] = seen.emplace(e.input, e.label);
        if (!inserted) {
            if (it->second != e.label)
                throw NonSeparable("input " + e.input.to_string() + " appears with both labels");
            continue;
        }
        (e.label == 1 ? rows.positives : rows.negatives).push_back(i);
    }
    return rows;
}

double dot_delta(const std::int8_t* delta, const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += delta[j] * w[j];
    return s;
}

double projected_gradient(double lambda, double g) { return lambda > 0.0 ? std::fabs(g) : std::max(g, 0.0); }

// Phase-1 simplex (Bland's rule, exact rationals) on
//   sum_i mu_i v_i = 0,  sum_i mu_i = 1,  mu >= 0,   v_i = y_i (x_i, 1).
// Feasible iff no (w, b) has y_i (<w, x_i> + b) > 0 for every i.
bool zero_in_hull(const LabeledDataset& data, const DedupedRows& rows) {
    std::vector<std::size_t> idx = rows.positives;
    idx.insert(idx.end(), rows.negatives.begin(), rows.negatives.end());
    const std::size_t d = data.dimension();
    const std::size_t m = d + 2, n = idx.size(), cols = n + m;

    std::vector<std::vector<Rational>> t(m, std::vector<Rational>(cols + 1, Rational(0)));
    for (std::size_t c = 0; c < n; ++c) {
        const auto& e = data[idx[c]];
        const int y = e.label == 1 ? 1 : -1;
        for (std::size_t j = 0; j < d; ++j) t[j][c] = y * e.input[j];
        t[d][c] = y;
        t[d + 1][c] = 1;
    }
    for (std::size_t r = 0; r < m; ++r) t[r][n + r] = 1;
    t[d + 1][cols] = 1;
    std::vector<std::size_t> basis(m);
    std::iota(basis.begin(), basis.end(), n);

    while (true) {
        // Reduced cost of column c for minimizing the sum of artificials.
        std::size_t enter = cols;
        for (std::size_t c = 0; c < n && enter == cols; ++c) {
            Rational rc = 0;
            for (std::size_t r = 0; r < m; ++r)
                if (basis[r] >= n) rc -= t[r][c];
            if (rc < 0) enter = c;
        }
        if (enter == cols) break;
        std::size_t leave = m;
        Rational best;
        for (std::size_t r = 0; r < m; ++r) {
            if (t[r][enter] <= 0) continue;
            const Rational ratio = t[r][cols] / t[r][enter];
            if (leave == m || ratio < best || (ratio == best && basis[r] < basis[leave])) {
                leave = r;
                best = ratio;
            }
        }
        if (leave == m) break;  // unbounded direction cannot occur in phase 1
        const Rational piv = t[leave][enter];
        for (auto& v : t[leave]) v /= piv;
        for (std::size_t r = 0; r < m; ++r) {
            if (r == leave || t[r][enter] == 0) continue;
            const Rational f = t[r][enter];
            for (std::size_t c = 0; c <= cols; ++c) t[r][c] -= f * t[leave][c];
        }
        basis[leave] = enter;
    }
    Rational infeasibility = 0;
    for (std::size_t r = 0; r < m; ++r)
        if (basis[r] >= n) infeasibility += t[r][cols];
    return infeasibility == 0;
}

// The dual ascent separates quickly when a margin exists; past this many
// sweeps the exact hull test decides.
constexpr std::size_t kSeparabilityCheckSweep = 2000;

}  // namespace

bool linearly_separable(const LabeledDataset& data) {
    if (!data.has_both_classes()) return true;
    try {
        return !zero_in_hull(data, dedupe(data));
    } catch (const NonSeparable&) {
        return false;
    }
}

MarginSolution max_margin_fit(const LabeledDataset& data, const MaxMarginOptions& options) {
    if (data.empty() || !data.has_both_classes())
        throw SingleClass("max-margin fit needs both labels present (got " + std::to_string(data.count_label(1)) +
                          " positive, " + std::to_string(data.count_label(0)) + " negative)");
    const std::size_t d = data.dimension();
    const DedupedRows rows = dedupe(data);

    const std::size_t num_pairs = rows.positives.size() * rows.negatives.size();
    std::vector<DifferencePair> pairs;
    pairs.reserve(num_pairs);
    std::vector<std::int8_t> deltas(num_pairs * d);
    std::vector<double> sqnorm(num_pairs);
    for (std::size_t p : rows.positives) {
        for (std::size_t q : rows.negatives) {
            const std::size_t k = pairs.size();
            pairs.push_back({p, q});
            int s = 0;
            for (std::size_t j = 0; j < d; ++j) {
                const int v = data[p].input[j] - data[q].input[j];
                deltas[k * d + j] = static_cast<std::int8_t>(v);
                s += v * v;
            }
            sqnorm[k] = s;
        }
    }

    std::vector<double> w(d, 0.0);
    std::vector<double> lambda(num_pairs, 0.0);
    double lambda_total = 0.0;
    std::vector<std::size_t> active(num_pairs);
    std::iota(active.begin(), active.end(), std::size_t{0});
    Rng rng(0x5eed);

    MarginSolution sol;
    bool converged = false;
    for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
        sol.sweeps = sweep + 1;
        std::shuffle(active.begin(), active.end(), rng);
        double max_pg = 0.0;
        std::size_t kept = 0;
        for (std::size_t a = 0; a < active.size(); ++a) {
            const std::size_t k = active[a];
            const std::int8_t* delta = &deltas[k * d];
            const double g = 2.0 - dot_delta(delta, w);
            if (lambda[k] == 0.0 && g < -options.shrink_band) continue;  // shrink
            active[kept++] = k;
            max_pg = std::max(max_pg, projected_gradient(lambda[k], g));
            const double updated = std::max(0.0, lambda[k] + g / sqnorm[k]);
            const double step = updated - lambda[k];
            if (step != 0.0) {
                for (std::size_t j = 0; j < d; ++j) w[j] += step * delta[j];
                lambda_total += step;
                lambda[k] = updated;
            }
        }
        active.resize(kept);
        if (sweep + 1 == kSeparabilityCheckSweep && zero_in_hull(data, rows))
            throw NonSeparable("a convex combination of signed examples is zero; data is not linearly separable");
        if (!(lambda_total <= options.divergence_cap))
            throw NonSeparable("dual coefficients diverge (sum " + std::to_string(lambda_total) +
                               "); data is not linearly separable");
        if (max_pg > options.tol) continue;

        // Active set converged: rebuild w from the duals and check every pair.
        std::fill(w.begin(), w.end(), 0.0);
        for (std::size_t k = 0; k < num_pairs; ++k)
            if (lambda[k] != 0.0)
                for (std::size_t j = 0; j < d; ++j) w[j] += lambda[k] * deltas[k * d + j];
        double full_pg = 0.0;
        for (std::size_t k = 0; k < num_pairs; ++k)
            full_pg = std::max(full_pg, projected_gradient(lambda[k], 2.0 - dot_delta(&deltas[k * d], w)));
        sol.kkt_residual = full_pg;
        if (full_pg <= options.tol) {
            converged = true;
            break;
        }
        active.resize(num_pairs);
        std::iota(active.begin(), active.end(), std::size_t{0});
    }
    if (!converged)
        throw ConvergenceFailure("max-margin dual did not reach tolerance " + std::to_string(options.tol) + " in " +
                                 std::to_string(options.max_sweeps) + " sweeps");

    sol.weights = w;
    for (std::size_t k = 0; k < num_pairs; ++k)
        if (lambda[k] > 0.0) sol.dual_coefficients.emplace_back(pairs[k], lambda[k]);

    double min_pos = std::numeric_limits<double>::infinity();
    double max_neg = -std::numeric_limits<double>::infinity();
    for (const auto& e : data.examples()) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += e.input[j] * w[j];
        if (e.label == 1)
            min_pos = std::min(min_pos, s);
        else
            max_neg = std::max(max_neg, s);
    }
    sol.bias = -(min_pos + max_neg) / 2.0;
    sol.margin_gap = min_pos - max_neg;
    return sol;
}

std::vector<SupportDifference> support_differences(const MarginSolution& solution, const LabeledDataset& data,
                                                   double tol) {
    std::vector<SupportDifference> out;
    if (data.empty()) return out;
    if (solution.weights.size() != data.dimension()) throw DimensionMismatch("solution/data dimension mismatch");
    const DedupedRows rows = dedupe(data);
    const std::size_t d = data.dimension();
    for (std::size_t p : rows.positives) {
        for (std::size_t q : rows.negatives) {
            std::vector<int> delta(d);
            double v = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                delta[j] = data[p].input[j] - data[q].input[j];
                v += delta[j] * solution.weights[j];
            }
            if (std::fabs(v - 2.0) <= tol) out.push_back({{p, q}, std::move(delta), v});
        }
    }
    return out;
}

ConicCombination caratheodory_reduce(const std::vector<std::vector<double>>& atoms,
                                     const std::vector<double>& coefficients, const std::vector<double>& target,
                                     double tol) {
    if (atoms.size() != coefficients.size()) throw InvalidArgument("atoms and coefficients differ in length");
    const std::size_t dim = target.size();
    for (const auto& a : atoms)
        if (a.size() != dim) throw DimensionMismatch("atom/target dimension mismatch");
    for (double c : coefficients)
        if (!(c >= 0.0)) throw InvalidArgument("conic coefficients must be nonnegative");

    auto residual = [&](const std::vector<double>& coef) {
        double worst = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < atoms.size(); ++k) s += coef[k] * atoms[k][j];
            worst = std::max(worst, std::fabs(s - target[j]));
        }
        return worst;
    };
    double scale = 1.0;
    for (double t : target) scale = std::max(scale, std::fabs(t));
    if (residual(coefficients) > tol * scale)
        throw InvalidArgument("conic combination does not reproduce the target");

    std::vector<double> lambda = coefficients;
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < atoms.size(); ++k)
        if (lambda[k] > 0.0) active.push_back(k);

    while (active.size() > dim + 1) {
        const std::size_t cols = dim + 2;
        Eigen::MatrixXd a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(cols));
        for (std::size_t c = 0; c < cols; ++c)
            for (std::size_t j = 0; j < dim; ++j)
                a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = atoms[active[c]][j];
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
        Eigen::VectorXd nu = svd.matrixV().col(static_cast<Eigen::Index>(cols - 1));
        if (nu.maxCoeff() <= 0.0) nu = -nu;

        // Largest step keeping every coefficient nonnegative.
        double step = std::numeric_limits<double>::infinity();
        std::size_t hit = 0;
        const double floor = 1e-12 * nu.cwiseAbs().maxCoeff();
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = nu(static_cast<Eigen::Index>(c));
            if (v > floor && lambda[active[c]] / v < step) {
                step = lambda[active[c]] / v;
                hit = c;
            }
        }
        for (std::size_t c = 0; c < cols; ++c)
            lambda[active[c]] = std::max(0.0, lambda[active[c]] - step * nu(static_cast<Eigen::Index>(c)));
        lambda[active[hit]] = 0.0;
        std::erase_if(active, [&](std::size_t k) { return lambda[k] <= 0.0; });
    }

    ConicCombination out;
    for (std::size_t k : active) {
        out.atoms.push_back(k);
        out.coefficients.push_back(lambda[k]);
    }
    return out;
}

TeachingSet teaching_set(const LinearThreshold& target, std::size_t d, const TeachingSetOptions& options) {
    if (target.dimension() != d) throw DimensionMismatch("target dimension differs from d");
    const LabeledDataset domain = LabeledDataset::full_domain(target, options.enumeration_cap);

    TeachingSet result;
    if (!domain.has_both_classes()) {
        result.examples = LabeledDataset(d);
        result.examples.add(domain[0].input, domain[0].label);
        result.certified = false;
        result.diagnostic = "target is constant on {0,1}^d; the max-margin classifier is undefined";
        return result;
    }

    const MarginSolution full = max_margin_fit(domain, options.solver);
    result.full_domain_weights = full.weights;
    result.full_domain_bias = full.bias;

    // Express w as a conic combination of tight differences using the duals.
    const auto tight = support_differences(full, domain, options.tight_tol);
    std::map<DifferencePair, double> dual(full.dual_coefficients.begin(), full.dual_coefficients.end());
    std::vector<std::vector<double>> atoms;
    std::vector<double> coefficients;
    std::vector<DifferencePair> atom_pairs;
    for (const auto& s : tight) {
        auto it = dual.find(s.pair);
        if (it == dual.end()) continue;
        atoms.emplace_back(s.delta.begin(), s.delta.end());
        coefficients.push_back(it->second);
        atom_pairs.push_back(s.pair);
    }
    const ConicCombination reduced = caratheodory_reduce(atoms, coefficients, full.weights, 1e-6);
    result.differences_used = reduced.atoms.size();

    std::set<std::size_t> rows;
    for (std::size_t k : reduced.atoms) {
        rows.insert(atom_pairs[k].positive);
        rows.insert(atom_pairs[k].negative);
    }
    result.examples = LabeledDataset(d);
    for (std::size_t r : rows) result.examples.add(domain[r].input, domain[r].label);

    const MarginSolution refit = max_margin_fit(result.examples, options.solver);
    double diff = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        diff += (refit.weights[j] - full.weights[j]) * (refit.weights[j] - full.weights[j]);
        norm += full.weights[j] * full.weights[j];
    }
    result.weight_relative_error = std::sqrt(diff / norm);

    const auto check = exact_loss(refit.classifier(), target, d, {options.enumeration_cap, 1});
    if (check.loss != 0 || result.examples.size() > 2 * d + 2)
        throw CertificationFailure("teaching set of size " + std::to_string(result.examples.size()) +
                                   " does not reproduce the target" +
                                   (check.witness ? " (disagrees at " + check.witness->to_string() + ")" : ""));
    result.certified = true;
    return result;
}

LinearThreshold random_separable_target(std::size_t d, Rng& rng, long long max_weight,
                                        std::size_t enumeration_cap) {
    if (d == 0 || max_weight < 1) throw InvalidArgument("need d >= 1 and max_weight >= 1");
    require_enumerable(d, enumeration_cap);
    const auto span = static_cast<std::uint64_t>(max_weight);
    while (true) {
        std::vector<long long> w(d);
        for (auto& v : w) v = static_cast<long long>(rng() % (2 * span + 1)) - max_weight;
        const long long b = static_cast<long long>(rng() % (4 * span + 1)) - 2 * max_weight;
        const auto h = LinearThreshold::from_integers(std::span<const long long>(w), b);
        int seen = 0;
        for (std::uint64_t x = 0; x < domain_size(d) && seen != 3; ++x) seen |= 1 << h.evaluate_index(x);
        if (seen == 3) return h;
    }
}

}  // namespace exactlab

#include "exactlab/disagreement.hpp"

#include "exactlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace exactlab {

// ---------------------------------------------------------------------------
// InputDistribution

InputDistribution InputDistribution::uniform(std::size_t d) {
    if (d == 0 || d > kMaxIndexDimension) throw InvalidArgument("uniform distribution needs 1 <= d <= 63");
    InputDistribution dist;
    dist.kind_ = Kind::UniformHypercube;
    dist.dimension_ = d;
    return dist;
}

InputDistribution InputDistribution::finite_support(std::vector<std::pair<BitVector, double>> atoms) {
    if (atoms.empty()) throw InvalidArgument("finite-support distribution needs at least one atom");
    InputDistribution dist;
    dist.kind_ = Kind::FiniteSupport;
    dist.dimension_ = atoms.front().first.size();
    double total = 0.0;
    for (const auto& [x, p] : atoms) {
        if (x.size() != dist.dimension_) throw DimensionMismatch("atoms of differing dimension");
        if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("atom probabilities must be nonnegative");
        total += p;
        dist.cumulative_.push_back(total);
        dist.atom_indices_.push_back(x.index());
    }
    if (std::fabs(total - 1.0) > 1e-12) throw InvalidArgument("atom probabilities must sum to 1");
    dist.atoms_ = std::move(atoms);
    return dist;
}

std::uint64_t InputDistribution::sample_index(Rng& rng) const {
    if (kind_ == Kind::UniformHypercube) return rng() >> (64 - dimension_);
    std::uniform_real_distribution<double> unit(0.0, cumulative_.back());
    const double u = unit(rng);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    std::size_t k = static_cast<std::size_t>(it - cumulative_.begin());
    if (k >= atom_indices_.size()) k = atom_indices_.size() - 1;
    // Skip zero-probability atoms that upper_bound can land on at the edge.
    while (atoms_[k].second == 0.0 && k + 1 < atoms_.size()) ++k;
    return atom_indices_[k];
}

std::string to_string(EstimationMode mode) { return mode == EstimationMode::Exact ? "exact" : "monte_carlo"; }

// ---------------------------------------------------------------------------
// disagreement

DisagreementReport disagreement_prob(const LinearThreshold& h, const LinearThreshold& other,
                                     const InputDistribution& dist, EstimationMode mode, std::uint64_t samples,
                                     std::uint64_t seed, EnumerationOptions options) {
    const std::size_t d = dist.dimension();
    if (h.dimension() != d || other.dimension() != d)
        throw DimensionMismatch("classifier and distribution dimensions differ");

    DisagreementReport report;
    report.method = mode;
    if (mode == EstimationMode::Exact) {
        if (dist.kind() == InputDistribution::Kind::UniformHypercube) {
            const std::uint64_t count = disagreement_count(h, other, d, options);
            report.exact = Rational(count) / Rational(BigInt(1) << d);
            report.sample_count = domain_size(d);
        } else {
            Rational p = 0;
            for (const auto& [x, w] : dist.atoms())
                if (h.evaluate(x) != other.evaluate(x)) p += Rational(w);
            report.exact = p;
            report.sample_count = dist.atoms().size();
        }
        report.probability = report.exact->convert_to<double>();
        return report;
    }

    if (samples == 0) throw InvalidArgument("Monte Carlo mode needs samples >= 1");
    Rng rng = make_rng(seed, 0);
    std::uint64_t hits = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        const std::uint64_t x = dist.sample_index(rng);
        hits += h.evaluate_index(x) != other.evaluate_index(x);
    }
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    report.probability = p;
    report.sample_count = samples;
    report.confidence_halfwidth = kZ99 * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
    return report;
}

// ---------------------------------------------------------------------------
// critical sample sizes

CriticalSampleSize critical_sample_size(std::span<const Rational> pair_disagreements) {
    if (pair_disagreements.empty()) return CriticalSampleSize::unbounded();
    Rational lo = 2;
    for (const auto& p : pair_disagreements) {
        if (p < 0 || p > 1) throw InvalidArgument("disagreement probabilities must lie in [0,1]");
        lo = std::min(lo, p);
    }
    if (lo == 0) return CriticalSampleSize::unbounded();
    const Rational bound = Rational(1) / (2 * lo);
    const BigInt floor_value = boost::multiprecision::numerator(bound) / boost::multiprecision::denominator(bound);
    if (floor_value > std::numeric_limits<std::uint64_t>::max()) return CriticalSampleSize::unbounded();
    return CriticalSampleSize::of(floor_value.convert_to<std::uint64_t>());
}

CriticalSampleSize critical_sample_size(std::span<const double> pair_disagreements) {
    std::vector<Rational> exact;
    exact.reserve(pair_disagreements.size());
    for (double p : pair_disagreements) {
        if (!std::isfinite(p)) throw InvalidArgument("non-finite disagreement probability");
        exact.emplace_back(p);
    }
    return critical_sample_size(exact);
}

FailureLowerBound failure_lower_bound(std::uint64_t n, double agree_prob) {
    if (!(agree_prob >= 0.0 && agree_prob <= 1.0)) throw InvalidArgument("agreement probability must lie in [0,1]");
    FailureLowerBound b;
    b.power_bound = std::pow(agree_prob, static_cast<double>(n)) / 2.0;
    b.linear_bound = (1.0 - static_cast<double>(n) * (1.0 - agree_prob)) / 2.0;
    return b;
}

// ---------------------------------------------------------------------------
// SymmetryAction

SymmetryAction::SymmetryAction(bool label_flip, std::vector<std::size_t> permutation)
    : label_flip_(label_flip), permutation_(std::move(permutation)) {
    if (permutation_.empty()) throw InvalidArgument("symmetry action needs dimension >= 1");
    std::vector<bool> seen(permutation_.size(), false);
    for (auto p : permutation_) {
        if (p >= permutation_.size() || seen[p]) throw InvalidArgument("permutation is not a bijection");
        seen[p] = true;
    }
}

SymmetryAction SymmetryAction::identity(std::size_t d) {
    std::vector<std::size_t> p(d);
    std::iota(p.begin(), p.end(), std::size_t{0});
    return SymmetryAction(false, std::move(p));
}

SymmetryAction SymmetryAction::flip(std::size_t d) {
    auto g = identity(d);
    g.label_flip_ = true;
    return g;
}

SymmetryAction SymmetryAction::transposition(std::size_t d, std::size_t i, std::size_t j) {
    auto g = identity(d);
    if (i >= d || j >= d) throw InvalidArgument("transposition index out of range");
    std::swap(g.permutation_[i], g.permutation_[j]);
    return g;
}

SymmetryAction SymmetryAction::block_swap(std::size_t m) {
    std::vector<std::size_t> p(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
        p[i] = m + i;
        p[m + i] = i;
    }
    return SymmetryAction(false, std::move(p));
}

SymmetryAction SymmetryAction::cycle(std::size_t d) {
    std::vector<std::size_t> p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = (i + 1) % d;
    return SymmetryAction(false, std::move(p));
}

SymmetryAction SymmetryAction::random(std::size_t d, Rng& rng, bool allow_flip) {
    auto g = identity(d);
    std::shuffle(g.permutation_.begin(), g.permutation_.end(), rng);
    g.label_flip_ = allow_flip && (rng() & 1U);
    return g;
}

bool SymmetryAction::is_identity() const {
    if (label_flip_) return false;
    for (std::size_t i = 0; i < permutation_.size(); ++i)
        if (permutation_[i] != i) return false;
    return true;
}

BitVector SymmetryAction::act_on_input(const BitVector& x) const {
    if (x.size() != permutation_.size()) throw DimensionMismatch("action/input dimension mismatch");
    std::vector<std::uint8_t> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[permutation_[i]] = static_cast<std::uint8_t>(x[i]);
    return BitVector(std::move(y));
}

SymmetryAction operator*(const SymmetryAction& a, const SymmetryAction& b) {
    if (a.dimension() != b.dimension()) throw DimensionMismatch("composing actions of different dimension");
    std::vector<std::size_t> p(a.dimension());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = a.permutation_[b.permutation_[i]];
    return SymmetryAction(a.label_flip_ != b.label_flip_, std::move(p));
}

SymmetryAction SymmetryAction::inverse() const {
    std::vector<std::size_t> p(permutation_.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[permutation_[i]] = i;
    return SymmetryAction(label_flip_, std::move(p));
}

std::string SymmetryAction::to_string() const {
    std::ostringstream os;
    os << (label_flip_ ? "flip" : "keep") << "[";
    for (std::size_t i = 0; i < permutation_.size(); ++i) os << (i ? " " : "") << permutation_[i];
    os << "]";
    return os.str();
}

LinearThreshold apply_action(const SymmetryAction& g, const LinearThreshold& h) {
    if (g.dimension() != h.dimension()) throw DimensionMismatch("action/classifier dimension mismatch");
    LinearThreshold moved = h.permuted(g.permutation());
    return g.label_flip() ? moved.complement() : moved;
}

LabeledDataset apply_action_data(const SymmetryAction& g, const LabeledDataset& data) {
    if (g.dimension() != data.dimension()) throw DimensionMismatch("action/dataset dimension mismatch");
    LabeledDataset out(data.dimension());
    for (const auto& e : data.examples()) out.add(g.act_on_input(e.input), g.act_on_label(e.label));
    return out;
}

// ---------------------------------------------------------------------------
// orbits

std::vector<SymmetryAction> generate_group(std::span<const SymmetryAction> generators, std::size_t d,
                                           std::size_t cap, bool& truncated) {
    truncated = false;
    for (const auto& g : generators)
        if (g.dimension() != d) throw DimensionMismatch("generator dimension mismatch");
    std::vector<SymmetryAction> elements{SymmetryAction::identity(d)};
    std::set<SymmetryAction> seen{elements.front()};
    for (std::size_t head = 0; head < elements.size(); ++head) {
        for (const auto& gen : generators) {
            SymmetryAction next = gen * elements[head];
            if (seen.contains(next)) continue;
            if (elements.size() >= cap) {
                truncated = true;
                return elements;
            }
            seen.insert(next);
            elements.push_back(std::move(next));
        }
    }
    return elements;
}

namespace {

void require_invariant(const InputDistribution& dist, std::span<const SymmetryAction> generators) {
    if (dist.kind() == InputDistribution::Kind::UniformHypercube) return;
    std::map<BitVector, double> mass;
    for (const auto& [x, p] : dist.atoms()) mass[x] += p;
    for (const auto& g : generators) {
        for (const auto& [x, p] : mass) {
            auto it = mass.find(g.act_on_input(x));
            const double q = it == mass.end() ? 0.0 : it->second;
            if (std::fabs(p - q) > 1e-12)
                throw InvalidArgument("input distribution is not invariant under generator " + g.to_string());
        }
    }
}

bool same_function(const LinearThreshold& a, const LinearThreshold& b, EnumerationOptions options) {
    return exact_loss(a, b, a.dimension(), options).loss == 0;
}

OrbitBound evaluate_elements(const LinearThreshold& h, std::span<const SymmetryAction> elements,
                             const InputDistribution& dist, EnumerationOptions options) {
    OrbitBound bound;
    std::vector<Rational> probs;
    for (const auto& g : elements) {
        if (g.is_identity()) continue;
        ++bound.elements_examined;
        const LinearThreshold gh = apply_action(g, h);
        if (same_function(gh, h, options)) {
            ++bound.stabilizer_elements;
            continue;
        }
        const auto report = disagreement_prob(h, gh, dist, EstimationMode::Exact, 0, 0, options);
        if (!bound.min_disagreement || *report.exact < *bound.min_disagreement) {
            bound.min_disagreement = *report.exact;
            bound.minimizer = g;
        }
        probs.push_back(*report.exact);
    }
    bound.size = critical_sample_size(probs);
    return bound;
}

}  // namespace

OrbitBound orbit_critical_sample_size(const LinearThreshold& h, std::span<const SymmetryAction> generators,
                                      const InputDistribution& dist, OrbitOptions options) {
    if (h.dimension() != dist.dimension()) throw DimensionMismatch("classifier/distribution dimension mismatch");
    require_invariant(dist, generators);
    bool truncated = false;
    auto elements = generate_group(generators, h.dimension(), options.cap, truncated);
    if (truncated && !options.allow_partial)
        throw CapExceeded("group generated by " + std::to_string(generators.size()) + " generators exceeds " +
                          std::to_string(options.cap) + " elements");
    OrbitBound bound = evaluate_elements(h, elements, dist, options.enumeration);
    bound.partial = truncated;
    return bound;
}

OrbitBound orbit_critical_sample_size_subset(const LinearThreshold& h, std::span<const SymmetryAction> elements,
                                             const InputDistribution& dist, EnumerationOptions options) {
    if (h.dimension() != dist.dimension()) throw DimensionMismatch("classifier/distribution dimension mismatch");
    require_invariant(dist, elements);
    OrbitBound bound = evaluate_elements(h, elements, dist, options);
    bound.partial = true;
    return bound;
}

}  // namespace exactlab

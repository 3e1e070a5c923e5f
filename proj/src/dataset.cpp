#include "exactlab/dataset.hpp"

#include "exactlab/errors.hpp"

#include <algorithm>
#include <map>

namespace exactlab {

LabeledDataset::LabeledDataset(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) throw InvalidArgument("dataset dimension must be >= 1");
}

LabeledDataset::LabeledDataset(std::size_t dimension, std::vector<LabeledExample> examples)
    : LabeledDataset(dimension) {
    examples_.reserve(examples.size());
    for (auto& e : examples) add(std::move(e.input), e.label);
}

LabeledDataset LabeledDataset::full_domain(const LinearThreshold& target, std::size_t cap) {
    const std::size_t d = target.dimension();
    require_enumerable(d, cap);
    LabeledDataset data(d);
    data.examples_.reserve(domain_size(d));
    for (std::uint64_t x = 0; x < domain_size(d); ++x)
        data.examples_.push_back({BitVector::from_index(x, d), target.evaluate_index(x)});
    return data;
}

LabeledDataset LabeledDataset::labeled_by(const LinearThreshold& target, const std::vector<BitVector>& inputs) {
    LabeledDataset data(target.dimension());
    for (const auto& x : inputs) data.add(x, target.evaluate(x));
    return data;
}

void LabeledDataset::add(BitVector input, int label) {
    if (input.size() != dimension_)
        throw DimensionMismatch("example has dimension " + std::to_string(input.size()) + ", dataset has " +
                                std::to_string(dimension_));
    if (label != 0 && label != 1) throw InvalidArgument("labels must be 0 or 1");
    examples_.push_back({std::move(input), label});
}

std::size_t LabeledDataset::count_label(int label) const {
    return static_cast<std::size_t>(
        std::count_if(examples_.begin(), examples_.end(), [label](const auto& e) { return e.label == label; }));
}

bool LabeledDataset::has_contradictions() const {
    std::map<BitVector, int> seen;
    for (const auto& e : examples_) {
        auto [it, inserted] = seen.emplace(e.input, e.label);
        if (!inserted && it->second != e.label) return true;
    }
    return false;
}

}  // namespace exactlab

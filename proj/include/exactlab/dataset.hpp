#pragma once

#include "exactlab/hypercube.hpp"

#include <cstddef>
#include <vector>

namespace exactlab {

struct LabeledExample {
    BitVector input;
    int label = 0;

    friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

/// Ordered sequence of labeled points of uniform dimension. Repeats are
/// allowed (i.i.d. samples).
class LabeledDataset {
public:
    explicit LabeledDataset(std::size_t dimension = 1);
    LabeledDataset(std::size_t dimension, std::vector<LabeledExample> examples);

    /// All 2^d points labeled by `target`, in index order.
    static LabeledDataset full_domain(const LinearThreshold& target, std::size_t cap = kDefaultEnumerationCap);
    static LabeledDataset labeled_by(const LinearThreshold& target, const std::vector<BitVector>& inputs);

    void add(BitVector input, int label);

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return examples_.size(); }
    bool empty() const noexcept { return examples_.empty(); }
    const std::vector<LabeledExample>& examples() const noexcept { return examples_; }
    const LabeledExample& operator[](std::size_t i) const { return examples_[i]; }

    std::size_t count_label(int label) const;
    bool has_both_classes() const { return count_label(0) > 0 && count_label(1) > 0; }
    /// True when the same input appears with both labels.
    bool has_contradictions() const;

    friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

private:
    std::size_t dimension_;
    std::vector<LabeledExample> examples_;
};

}  // namespace exactlab

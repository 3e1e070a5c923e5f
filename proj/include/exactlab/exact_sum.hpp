#pragma once

#include <span>

namespace exactlab {

/// Correctly rounded sum of doubles (Shewchuk partials, as in Python's
/// math.fsum). The result does not depend on the order of the addends and
/// exact_sum(-x) == -exact_sum(x) bitwise, which keeps gradient learners
/// exactly equivariant under coordinate permutations and label flips.
double exact_sum(std::span<const double> values);

}  // namespace exactlab

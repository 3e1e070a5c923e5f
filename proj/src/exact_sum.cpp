#include "exactlab/exact_sum.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace exactlab {

double exact_sum(std::span<const double> values) {
    std::vector<double> partials;
    partials.reserve(8);
    for (double x : values) {
        if (!std::isfinite(x)) {
            // Non-finite input: partials are meaningless, plain sum propagates inf/nan.
            double s = 0.0;
            for (double v : values) s += v;
            return s;
        }
        std::size_t i = 0;
        for (double y : partials) {
            if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) partials[i++] = lo;
            x = hi;
        }
        partials.resize(i);
        partials.push_back(x);
    }

    std::size_t n = partials.size();
    if (n == 0) return 0.0;
    double hi = partials[--n];
    double lo = 0.0;
    while (n > 0) {
        const double x = hi;
        const double y = partials[--n];
        hi = x + y;
        const double yr = hi - x;
        lo = y - yr;
        if (lo != 0.0) break;
    }
    // Round-half-even correction when the remaining partials push the tie.
    if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
        const double y = lo * 2.0;
        const double x = hi + y;
        const double yr = x - hi;
        if (y == yr) hi = x;
    }
    return hi;
}

}  // namespace exactlab

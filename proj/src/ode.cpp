#include "exactlab/ode.hpp"

#include "exactlab/errors.hpp"
#include "exactlab/exact_sum.hpp"

#include <algorithm>
#include <cmath>

namespace exactlab {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// Fifth-order weights minus embedded fourth-order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

// PI controller constants (Hairer & Wanner, DOPRI5).
constexpr double kBeta = 0.04;
constexpr double kAlpha = 0.2 - 0.75 * kBeta;
constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

}  // namespace

DormandPrince::DormandPrince(Rhs rhs, std::vector<double> y0, double t0, IntegratorConfig config)
    : rhs_(std::move(rhs)), config_(config), y_(std::move(y0)), f_(y_.size()), t_(t0) {
    if (!(config_.abs_tol > 0.0) || !(config_.rel_tol >= 0.0)) throw InvalidArgument("tolerances must be positive");
    rhs_(t_, y_, f_);
    h_ = config_.initial_step > 0.0 ? config_.initial_step : initial_step();
}

double DormandPrince::error_norm(std::span<const double> y_new, std::span<const double> err) const {
    std::vector<double> sq(err.size());
    for (std::size_t i = 0; i < err.size(); ++i) {
        const double scale = config_.abs_tol + config_.rel_tol * std::max(std::fabs(y_[i]), std::fabs(y_new[i]));
        sq[i] = (err[i] / scale) * (err[i] / scale);
    }
    // Order-independent sum keeps step decisions invariant under relabeling of components.
    return std::sqrt(exact_sum(sq) / static_cast<double>(std::max<std::size_t>(1, err.size())));
}

double DormandPrince::initial_step() const {
    std::vector<double> ys(y_.size()), fy(y_.size());
    for (std::size_t i = 0; i < y_.size(); ++i) {
        const double scale = config_.abs_tol + config_.rel_tol * std::fabs(y_[i]);
        ys[i] = (y_[i] / scale) * (y_[i] / scale);
        fy[i] = (f_[i] / scale) * (f_[i] / scale);
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, y_.size()));
    const double d0 = std::sqrt(exact_sum(ys) / n);
    const double d1 = std::sqrt(exact_sum(fy) / n);
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    return std::max(h, config_.min_step);
}

void DormandPrince::integrate_to(double t_target) {
    const std::size_t n = y_.size();
    std::vector<double> k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y_new(n), err(n);

    while (t_ < t_target) {
        if (accepted_ + rejected_ >= config_.max_steps)
            throw ConvergenceFailure("integrator exceeded the maximum number of steps");
        const bool last = t_ + h_ >= t_target;
        const double h = last ? t_target - t_ : h_;

        for (std::size_t i = 0; i < n; ++i) tmp[i] = y_[i] + h * a21 * f_[i];
        rhs_(t_ + c2 * h, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y_[i] + h * (a31 * f_[i] + a32 * k2[i]);
        rhs_(t_ + c3 * h, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y_[i] + h * (a41 * f_[i] + a42 * k2[i] + a43 * k3[i]);
        rhs_(t_ + c4 * h, tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y_[i] + h * (a51 * f_[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs_(t_ + c5 * h, tmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y_[i] + h * (a61 * f_[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        rhs_(t_ + h, tmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            y_new[i] = y_[i] + h * (b1 * f_[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs_(t_ + h, y_new, k7);
        for (std::size_t i = 0; i < n; ++i)
            err[i] = h * (e1 * f_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

        const double e = error_norm(y_new, err);
        if (e <= 1.0) {
            const double factor =
                e == 0.0 ? kMaxFactor
                         : std::clamp(kSafety * std::pow(e, -kAlpha) * std::pow(err_prev_, kBeta), kMinFactor,
                                      kMaxFactor);
            err_prev_ = std::max(e, 1e-4);
            t_ = last ? t_target : t_ + h;
            y_.swap(y_new);
            f_.swap(k7);
            ++accepted_;
            // A clipped final step says nothing about the natural step size.
            if (!last) h_ = h * factor;
        } else {
            ++rejected_;
            h_ = h * std::max(kMinFactor, kSafety * std::pow(e, -kAlpha));
            if (h_ < config_.min_step)
                throw ConvergenceFailure("integrator step size fell below " + std::to_string(config_.min_step) +
                                         " at t=" + std::to_string(t_));
        }
    }
}

}  // namespace exactlab

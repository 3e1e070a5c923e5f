#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace exactlab {

struct IntegratorConfig {
    double abs_tol = 1e-9;
    double rel_tol = 1e-7;
    /// Zero selects an initial step from the first derivative.
    double initial_step = 0.0;
    double min_step = 1e-14;
    std::size_t max_steps = 50'000'000;
};

/// Explicit Dormand-Prince 5(4) integrator with FSAL stages, embedded error
/// estimate and PI step-size control.
class DormandPrince {
public:
    /// dy/dt = rhs(t, y) written into dydt.
    using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

    DormandPrince(Rhs rhs, std::vector<double> y0, double t0, IntegratorConfig config = {});

    /// Advances exactly to t_target (the last step is clipped). Throws
    /// ConvergenceFailure when the step size drops below min_step.
    void integrate_to(double t_target);

    double time() const noexcept { return t_; }
    const std::vector<double>& state() const noexcept { return y_; }
    std::size_t accepted_steps() const noexcept { return accepted_; }
    std::size_t rejected_steps() const noexcept { return rejected_; }

private:
    double initial_step() const;
    double error_norm(std::span<const double> y_new, std::span<const double> err) const;

    Rhs rhs_;
    IntegratorConfig config_;
    std::vector<double> y_;
    std::vector<double> f_;  // derivative at (t_, y_)
    double t_;
    double h_ = 0.0;
    double err_prev_ = 1e-4;
    std::size_t accepted_ = 0;
    std::size_t rejected_ = 0;
};

}  // namespace exactlab

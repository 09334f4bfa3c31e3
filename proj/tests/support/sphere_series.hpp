// Independent analytic oracles for the spherical no-trap diffusion problem.
// Test-only: kept free of any dependence on the solver implementation.
#pragma once

#include <cmath>
#include <numbers>

#include "tdskit/kinetics.hpp"

namespace oracle {

/// Fractional release from a uniformly loaded sphere with an absorbing
/// surface: f(tau) = 1 - (6/pi^2) sum 1/n^2 exp(-n^2 pi^2 tau), tau = D t / r^2.
inline double sphere_fractional_release(double tau, int terms = 60) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double sum = 0.0;
    for (int n = 1; n <= terms; ++n) {
        sum += std::exp(-double(n) * n * pi2 * tau) / (double(n) * n);
    }
    return 1.0 - 6.0 / pi2 * sum;
}

/// d f / d tau for the same series.
inline double sphere_release_rate_tau(double tau, int terms = 60) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double sum = 0.0;
    for (int n = 1; n <= terms; ++n) sum += std::exp(-double(n) * n * pi2 * tau);
    return 6.0 * sum;
}

/// Dimensionless diffusion time tau(t) = integral_0^t D(T(t')) dt' / r^2 for a
/// temperature ramp, by composite Simpson quadrature. Reduces the ramped
/// no-trap problem to the constant-coefficient series solution.
inline double ramped_tau(const tdskit::ArrheniusRate& diffusivity,
                         const tdskit::TemperatureSchedule& schedule, double t, double radius_m,
                         int intervals = 4000) {
    const double h = t / intervals;
    double sum = 0.0;
    for (int i = 0; i <= intervals; ++i) {
        const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        sum += w * tdskit::arrhenius_eval(diffusivity, tdskit::schedule_eval(schedule, i * h));
    }
    return sum * h / 3.0 / (radius_m * radius_m);
}

} // namespace oracle

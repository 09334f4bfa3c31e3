// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdskit/io_util.hpp"
#include "tdskit/kinetics.hpp"
#include "tdskit/linear_solvers.hpp"

namespace tdskit {

/// Adaptive backward-Euler step control.
struct StepController {
    double dt_initial = 1e-3;      ///< s
    double dt_min = 1e-10;         ///< s
    double dt_max = 10.0;          ///< s
    double growth_factor = 1.3;
    double shrink_factor = 0.5;
    double newton_tolerance = 1e-8; ///< relative residual
    int newton_max_iterations = 12;

    void validate() const {
        if (!(dt_min <= dt_initial && dt_initial <= dt_max)) {
            throw std::invalid_argument("StepController: need dt_min <= dt_initial <= dt_max");
        }
        if (!(growth_factor > 1.0) || !(shrink_factor > 0.0 && shrink_factor < 1.0)) {
            throw std::invalid_argument("StepController: bad growth/shrink factors");
        }
        if (!(newton_tolerance > 0.0) || newton_max_iterations < 1) {
            throw std::invalid_argument("StepController: bad Newton settings");
        }
    }
};

class IntegrationFailure : public std::runtime_error {
  public:
    IntegrationFailure(const std::string& what, double t, double temperature)
        : std::runtime_error(what + " (t = " + io::format_double(t) +
                             " s, T = " + io::format_double(temperature) + " K)"),
          time(t), temperature_K(temperature) {}

    double time;
    double temperature_K;
};

/// Backward-Euler system F(u) = u - u_old - dt f(u, t_new) = 0 over all
/// coupled fields. Implementations supply the residual and solve the exact
/// Newton linearization; the integrator never sees the sparsity structure.
class ImplicitSystem {
  public:
    virtual ~ImplicitSystem() = default;

    virtual std::size_t size() const = 0;

    virtual void residual(std::span<const double> u, std::span<const double> u_old, double t_new,
                          double dt, std::span<double> out) const = 0;

    /// Solves (dF/du)|_u delta = rhs.
    virtual void solve_linearized(std::span<const double> u, double t_new, double dt,
                                  std::span<const double> rhs, std::span<double> delta) const = 0;

    /// Per-component magnitudes used to scale the residual convergence test.
    virtual void residual_scales(std::span<const double> u_old, std::span<double> out) const {
        double peak = 0.0;
        for (const double v : u_old) peak = std::max(peak, std::abs(v));
        if (peak == 0.0) peak = 1.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = std::abs(u_old[i]) + 0.01 * peak;
        }
    }

    /// Physical admissibility of a converged state. Inadmissible states
    /// (e.g. negative concentrations) reject the step; nothing is clipped.
    virtual bool admissible(std::span<const double> u) const {
        return std::all_of(u.begin(), u.end(), [](double v) { return std::isfinite(v); });
    }
};

struct NewtonResult {
    bool converged = false;
    int iterations = 0;
    double scaled_residual = 0.0;
};

/// One backward-Euler step by Newton iteration with simple backtracking.
/// `u` enters as the predictor (normally a copy of u_old) and leaves as the
/// converged solution when successful.
inline NewtonResult advance_step(const ImplicitSystem& system, std::span<double> u,
                                 std::span<const double> u_old, double t_new, double dt,
                                 const StepController& ctrl) {
    const std::size_t n = system.size();
    std::vector<double> f(n), scales(n), delta(n), trial(n), f_trial(n);
    system.residual_scales(u_old, scales);

    auto scaled_norm = [&](std::span<const double> r) {
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(r[i])) return std::numeric_limits<double>::infinity();
            norm = std::max(norm, std::abs(r[i]) / scales[i]);
        }
        return norm;
    };

    system.residual(u, u_old, t_new, dt, f);
    double norm = scaled_norm(f);
    NewtonResult result;
    result.scaled_residual = norm;
    if (norm <= ctrl.newton_tolerance) {
        result.converged = true; // already at a fixed point
        return result;
    }

    for (int it = 1; it <= ctrl.newton_max_iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) f[i] = -f[i];
        try {
            system.solve_linearized(u, t_new, dt, f, delta);
        } catch (const SingularSystemError&) {
            result.iterations = it;
            return result; // step rejected, caller shrinks dt
        }

        double lambda = 1.0;
        double trial_norm = std::numeric_limits<double>::infinity();
        for (int bt = 0; bt < 5; ++bt) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + lambda * delta[i];
            system.residual(trial, u_old, t_new, dt, f_trial);
            trial_norm = scaled_norm(f_trial);
            if (trial_norm < norm || trial_norm <= ctrl.newton_tolerance) break;
            lambda *= 0.5;
        }

        double update_norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            update_norm = std::max(update_norm, std::abs(lambda * delta[i]) / scales[i]);
        }

        std::copy(trial.begin(), trial.end(), u.begin());
        std::copy(f_trial.begin(), f_trial.end(), f.begin());
        norm = trial_norm;
        result.iterations = it;
        result.scaled_residual = norm;
        // For very stiff steps, cancellation noise in F exceeds any residual
        // tolerance; converge on the scaled update instead.
        if (norm <= ctrl.newton_tolerance ||
            (std::isfinite(norm) && lambda == 1.0 && update_norm <= ctrl.newton_tolerance)) {
            result.converged = true;
            return result;
        }
    }
    return result;
}

/// Everything an observer sees after each accepted step.
struct StepRecord {
    double t = 0.0;
    double dt = 0.0;
    double temperature_K = 0.0;
    int newton_iterations = 0;
    std::span<const double> state;
};

using StepObserver = std::function<void(const StepRecord&)>;

/// Integrates from t = 0 to t_end with adaptive step control. The observer is
/// invoked at every accepted step. Deterministic for fixed inputs.
inline std::vector<double> integrate(const ImplicitSystem& system, std::vector<double> state,
                                     const TemperatureSchedule& schedule, double t_end,
                                     const StepController& ctrl, const StepObserver& observe = {}) {
    ctrl.validate();
    if (!(t_end > 0.0)) throw std::invalid_argument("integrate: t_end must be > 0");
    if (state.size() != system.size()) throw std::invalid_argument("integrate: state size mismatch");

    std::vector<double> u_old(state);
    double t = 0.0;
    double dt = std::clamp(ctrl.dt_initial, ctrl.dt_min, ctrl.dt_max);
    const double t_eps = t_end * 1e-12;

    while (t < t_end - t_eps) {
        dt = std::min(dt, t_end - t);
        const double t_new = t + dt;
        std::copy(state.begin(), state.end(), u_old.begin());

        const auto newton = advance_step(system, state, u_old, t_new, dt, ctrl);
        const bool ok = newton.converged && system.admissible(state);
        if (!ok) {
            std::copy(u_old.begin(), u_old.end(), state.begin());
            dt *= ctrl.shrink_factor;
            if (dt < ctrl.dt_min) {
                throw IntegrationFailure(
                    newton.converged ? "integrate: step kept producing inadmissible states"
                                     : "integrate: Newton failed to converge at minimum step",
                    t, schedule_eval(schedule, t));
            }
            continue;
        }

        t = t_new;
        if (observe) {
            StepRecord rec;
            rec.t = t;
            rec.dt = dt;
            rec.temperature_K = schedule_eval(schedule, t);
            rec.newton_iterations = newton.iterations;
            rec.state = std::span<const double>(state.data(), state.size());
            observe(rec);
        }
        if (newton.iterations <= ctrl.newton_max_iterations / 3) {
            dt = std::min(dt * ctrl.growth_factor, ctrl.dt_max);
        }
    }
    return state;
}

} // namespace tdskit

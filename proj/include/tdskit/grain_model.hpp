// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "tdskit/integrator.hpp"
#include "tdskit/kinetics.hpp"
#include "tdskit/linear_solvers.hpp"
#include "tdskit/mesh.hpp"
#include "tdskit/release_curve.hpp"

namespace tdskit {

/// Tritium transport in a spherical grain: mobile diffusion, one trap family
/// at annealing defect sites, and first-order defect annihilation.
struct GrainParams {
    double grain_radius_m = 1.5e-6;
    ArrheniusRate diffusivity{6.9e-7, 1.07};   ///< m^2/s
    ArrheniusRate trapping{4.2e8, 1.04};       ///< 1/s
    ArrheniusRate detrapping{4.1e6, 1.19};     ///< 1/s
    ArrheniusRate annihilation{1.0e2, 0.9};    ///< 1/s
    double lattice_density = 1.88e28;          ///< atoms/m^3
    double initial_defect_density = 3.384e26;  ///< atoms/m^3
    TemperatureSchedule schedule = linear_ramp(300.0, 5.0, 7200.0);
    double initial_occupancy = 0.99;           ///< trap fill fraction at t = 0

    /// Mobile concentration used when there are no traps to equilibrate
    /// against; the normalized curve is invariant to this scale.
    double trap_free_mobile_fraction = 1e-6;

    void validate() const {
        if (!(grain_radius_m > 0.0)) throw std::invalid_argument("GrainParams: grain radius must be > 0");
        if (!(lattice_density > 0.0)) throw std::invalid_argument("GrainParams: lattice density must be > 0");
        if (initial_defect_density < 0.0 || initial_defect_density > lattice_density) {
            throw std::invalid_argument("GrainParams: defect density must lie in [0, N]");
        }
        if (!(initial_occupancy > 0.0) || !(initial_occupancy < 1.0)) {
            throw std::domain_error("GrainParams: initial occupancy must lie in (0, 1)");
        }
    }
};

/// Discretized grain fields. The trap-site fraction chi is a scalar: the
/// annihilation ODE has no spatial coupling and temperature is uniform.
struct GrainState {
    std::vector<double> mobile;  ///< atoms/m^3 per cell
    std::vector<double> trapped; ///< atoms/m^3 per cell
    double trap_fraction = 0.0;  ///< chi, dimensionless
    double time_s = 0.0;
};

/// Mobile/trapped equilibrium at the schedule start temperature.
///
/// chi(0) N equals the defect density; traps are filled to the requested
/// occupancy and the mobile field balances trapping against detrapping
/// (annihilation excluded from the balance).
inline GrainState init_equilibrium(const GrainParams& params, std::size_t cells) {
    params.validate();
    if (cells == 0) throw std::invalid_argument("init_equilibrium: need at least one cell");
    GrainState state;
    state.trap_fraction = params.initial_defect_density / params.lattice_density;
    const double t0_temperature = params.schedule.start_temperature();

    double trapped = 0.0;
    double mobile = 0.0;
    if (params.initial_defect_density > 0.0) {
        trapped = params.initial_occupancy * state.trap_fraction * params.lattice_density;
        const double alpha_t = arrhenius_eval(params.trapping, t0_temperature);
        const double alpha_r = arrhenius_eval(params.detrapping, t0_temperature);
        if (!(alpha_t > 0.0)) {
            throw std::domain_error("init_equilibrium: trapping rate vanishes at T_start");
        }
        // alpha_t (chi N - C_T) C / N = alpha_r C_T
        mobile = alpha_r * trapped * params.lattice_density /
                 (alpha_t * (state.trap_fraction * params.lattice_density - trapped));
    } else {
        mobile = params.trap_free_mobile_fraction * params.lattice_density;
    }
    state.mobile.assign(cells, mobile);
    state.trapped.assign(cells, trapped);
    return state;
}

/// Time derivatives of the grain fields at uniform temperature T. The trapped
/// loss to annihilation reappears as a mobile source through the coupling.
struct GrainRhs {
    std::vector<double> d_mobile;
    std::vector<double> d_trapped;
    double d_trap_fraction = 0.0;
};

inline GrainRhs grain_rhs(const GrainState& state, double temperature_K, const GrainParams& params,
                          const Mesh1D& mesh) {
    const std::size_t n = mesh.cell_count();
    if (state.mobile.size() != n || state.trapped.size() != n) {
        throw std::invalid_argument("grain_rhs: state does not match mesh");
    }
    const double diffusivity = arrhenius_eval(params.diffusivity, temperature_K);
    const double alpha_t = arrhenius_eval(params.trapping, temperature_K);
    const double alpha_r = arrhenius_eval(params.detrapping, temperature_K);
    const double k_ann = arrhenius_eval(params.annihilation, temperature_K);
    const double site_density = state.trap_fraction * params.lattice_density;

    GrainRhs rhs;
    rhs.d_mobile.assign(n, 0.0);
    rhs.d_trapped.assign(n, 0.0);
    rhs.d_trap_fraction = -k_ann * state.trap_fraction;

    const std::vector<double> face_d(n - 1, diffusivity);
    const auto op = assemble_diffusion(mesh, face_d);
    const auto diff = op.apply(state.mobile);
    const double surf =
        mesh.outer_face_area() * diffusivity / mesh.outer_face_distance() / mesh.volumes()[n - 1];

    for (std::size_t i = 0; i < n; ++i) {
        const double exchange =
            alpha_t * (site_density - state.trapped[i]) * state.mobile[i] / params.lattice_density -
            alpha_r * state.trapped[i] - k_ann * state.trapped[i];
        rhs.d_trapped[i] = exchange;
        rhs.d_mobile[i] = diff[i] - exchange;
    }
    rhs.d_mobile[n - 1] -= surf * state.mobile[n - 1]; // C = 0 at the surface
    return rhs;
}

namespace detail {

/// Backward-Euler system for the grain model. State layout is cell-major
/// (mobile, trapped) pairs with the trap fraction appended.
class GrainSystem : public ImplicitSystem {
  public:
    GrainSystem(GrainParams params, Mesh1D mesh)
        : params_(std::move(params)), mesh_(std::move(mesh)) {
        const std::size_t n = mesh_.cell_count();
        face_g_.resize(n - 1);
        for (std::size_t f = 0; f + 1 < n; ++f) {
            face_g_[f] = mesh_.interior_face_area(f) / mesh_.interior_face_distance(f);
        }
        surf_g_ = mesh_.outer_face_area() / mesh_.outer_face_distance();
    }

    std::size_t size() const override { return 2 * mesh_.cell_count() + 1; }

    const Mesh1D& mesh() const { return mesh_; }

    double mobile(std::span<const double> u, std::size_t i) const { return u[2 * i]; }
    double trapped(std::span<const double> u, std::size_t i) const { return u[2 * i + 1]; }
    double chi(std::span<const double> u) const { return u[2 * mesh_.cell_count()]; }

    std::vector<double> pack(const GrainState& state) const {
        const std::size_t n = mesh_.cell_count();
        std::vector<double> u(2 * n + 1);
        for (std::size_t i = 0; i < n; ++i) {
            u[2 * i] = state.mobile[i];
            u[2 * i + 1] = state.trapped[i];
        }
        u[2 * n] = state.trap_fraction;
        return u;
    }

    GrainState unpack(std::span<const double> u, double t) const {
        const std::size_t n = mesh_.cell_count();
        GrainState s;
        s.mobile.resize(n);
        s.trapped.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            s.mobile[i] = u[2 * i];
            s.trapped[i] = u[2 * i + 1];
        }
        s.trap_fraction = u[2 * n];
        s.time_s = t;
        return s;
    }

    /// Instantaneous surface outflux in atoms/s. The surface cell may sit a
    /// rounding error below zero on admissible states; the recorded outflux
    /// is floored there.
    double release_rate(std::span<const double> u, double temperature_K) const {
        const double d = arrhenius_eval(params_.diffusivity, temperature_K);
        return std::max(0.0, surf_g_ * d * mobile(u, mesh_.cell_count() - 1));
    }

    void residual(std::span<const double> u, std::span<const double> u_old, double t_new,
                  double dt, std::span<double> out) const override {
        const std::size_t n = mesh_.cell_count();
        const double temperature = schedule_eval(params_.schedule, t_new);
        const double diffusivity = arrhenius_eval(params_.diffusivity, temperature);
        const double alpha_t = arrhenius_eval(params_.trapping, temperature);
        const double alpha_r = arrhenius_eval(params_.detrapping, temperature);
        const double k_ann = arrhenius_eval(params_.annihilation, temperature);
        const double lattice = params_.lattice_density;
        const auto& vol = mesh_.volumes();

        const double chi_new = chi(u);
        const double site_density = chi_new * lattice;

        for (std::size_t i = 0; i < n; ++i) {
            const double c = mobile(u, i);
            const double ct = trapped(u, i);
            double diff = 0.0;
            if (i > 0) diff += face_g_[i - 1] * diffusivity * (mobile(u, i - 1) - c);
            if (i + 1 < n) diff += face_g_[i] * diffusivity * (mobile(u, i + 1) - c);
            if (i + 1 == n) diff += surf_g_ * diffusivity * (0.0 - c);
            diff /= vol[i];
            const double exchange =
                alpha_t * (site_density - ct) * c / lattice - alpha_r * ct - k_ann * ct;
            out[2 * i] = c - u_old[2 * i] - dt * (diff - exchange);
            out[2 * i + 1] = ct - u_old[2 * i + 1] - dt * exchange;
        }
        out[2 * n] = chi_new - u_old[2 * n] + dt * k_ann * chi_new;
    }

    void solve_linearized(std::span<const double> u, double t_new, double dt,
                          std::span<const double> rhs, std::span<double> delta) const override {
        const std::size_t n = mesh_.cell_count();
        const double temperature = schedule_eval(params_.schedule, t_new);
        const double diffusivity = arrhenius_eval(params_.diffusivity, temperature);
        const double alpha_t = arrhenius_eval(params_.trapping, temperature);
        const double alpha_r = arrhenius_eval(params_.detrapping, temperature);
        const double k_ann = arrhenius_eval(params_.annihilation, temperature);
        const double lattice = params_.lattice_density;
        const auto& vol = mesh_.volumes();
        const double site_density = chi(u) * lattice;

        // chi row is independent of the fields: eliminate it first
        const double delta_chi = rhs[2 * n] / (1.0 + dt * k_ann);

        BlockTridiagonalSystem block(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
            const double c = mobile(u, i);
            const double ct = trapped(u, i);
            const double dg_dc = alpha_t * (site_density - ct) / lattice;
            const double dg_dt = -(alpha_t * c / lattice + alpha_r + k_ann);
            const double dg_dchi = alpha_t * c;

            double diff_diag = 0.0;
            if (i > 0) {
                const double g = face_g_[i - 1] * diffusivity / vol[i];
                diff_diag -= g;
                block.sub(i, 0, 0) = -dt * g;
            }
            if (i + 1 < n) {
                const double g = face_g_[i] * diffusivity / vol[i];
                diff_diag -= g;
                block.super(i, 0, 0) = -dt * g;
            }
            if (i + 1 == n) diff_diag -= surf_g_ * diffusivity / vol[i];

            block.diag(i, 0, 0) = 1.0 - dt * diff_diag + dt * dg_dc;
            block.diag(i, 0, 1) = dt * dg_dt;
            block.diag(i, 1, 0) = -dt * dg_dc;
            block.diag(i, 1, 1) = 1.0 - dt * dg_dt;
            block.rhs(i, 0) = rhs[2 * i] - dt * dg_dchi * delta_chi;
            block.rhs(i, 1) = rhs[2 * i + 1] + dt * dg_dchi * delta_chi;
        }
        const auto x = block.solve();
        std::copy(x.begin(), x.end(), delta.begin());
        delta[2 * n] = delta_chi;
    }

    bool admissible(std::span<const double> u) const override {
        const std::size_t n = mesh_.cell_count();
        const double neg_tol = 1e-10 * params_.lattice_density;
        const double chi_new = chi(u);
        if (!std::isfinite(chi_new) || chi_new < -1e-15) return false;
        const double capacity = chi_new * params_.lattice_density;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = mobile(u, i);
            const double ct = trapped(u, i);
            if (!std::isfinite(c) || !std::isfinite(ct)) return false;
            if (c < -neg_tol || ct < -neg_tol) return false;
            if (ct > capacity + 1e-12 * capacity + neg_tol) return false;
        }
        return true;
    }

    void residual_scales(std::span<const double> u_old, std::span<double> out) const override {
        const std::size_t n = mesh_.cell_count();
        double peak_c = 0.0, peak_t = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            peak_c = std::max(peak_c, std::abs(u_old[2 * i]));
            peak_t = std::max(peak_t, std::abs(u_old[2 * i + 1]));
        }
        const double floor_scale = 1e-12 * params_.lattice_density;
        peak_c = std::max(peak_c, floor_scale);
        peak_t = std::max({peak_t, peak_c, floor_scale});
        for (std::size_t i = 0; i < n; ++i) {
            out[2 * i] = std::abs(u_old[2 * i]) + 0.01 * peak_c;
            out[2 * i + 1] = std::abs(u_old[2 * i + 1]) + 0.01 * peak_t;
        }
        out[2 * n] = std::max(std::abs(u_old[2 * n]), 1e-12);
    }

  private:
    GrainParams params_;
    Mesh1D mesh_;
    std::vector<double> face_g_;
    double surf_g_ = 0.0;
};

} // namespace detail

struct GrainMeshSpec {
    std::size_t cells = 200;
    double grading_ratio = 1.0 / 1.02; ///< widths shrink toward the surface
};

inline Mesh1D build_grain_mesh(const GrainParams& params, const GrainMeshSpec& spec) {
    return build_graded_mesh({{params.grain_radius_m, spec.cells, spec.grading_ratio}},
                             Geometry::spherical);
}

inline StepController grain_default_controller() {
    StepController ctrl;
    ctrl.dt_initial = 1e-2;
    ctrl.dt_min = 1e-9;
    ctrl.dt_max = 5.0;
    ctrl.growth_factor = 1.3;
    ctrl.shrink_factor = 0.5;
    ctrl.newton_tolerance = 1e-8;
    ctrl.newton_max_iterations = 12;
    return ctrl;
}

/// Scalar history recorded at every accepted step.
struct GrainTrace {
    double time_s = 0.0;
    double temperature_K = 0.0;
    double release_rate = 0.0;       ///< atoms/s
    double mobile_inventory = 0.0;   ///< atoms
    double trapped_inventory = 0.0;  ///< atoms
    double trap_fraction = 0.0;
};

struct GrainResult {
    ReleaseCurve release;            ///< raw surface outflux, atoms/s
    std::vector<GrainTrace> trace;
    GrainState final_state;
    double initial_inventory = 0.0;  ///< atoms
};

inline GrainResult simulate_grain_tds(const GrainParams& params,
                                      const GrainMeshSpec& mesh_spec = {},
                                      const StepController& controller = grain_default_controller(),
                                      const std::optional<GrainState>& initial = std::nullopt) {
    params.validate();
    const double t_end = params.schedule.end_time();
    if (!(t_end > 0.0)) throw std::domain_error("simulate_grain_tds: schedule has zero duration");

    detail::GrainSystem system(params, build_grain_mesh(params, mesh_spec));
    const auto& mesh = system.mesh();
    const std::size_t n = mesh.cell_count();
    const auto state0 = initial ? *initial : init_equilibrium(params, n);
    if (state0.mobile.size() != n || state0.trapped.size() != n) {
        throw std::invalid_argument("simulate_grain_tds: initial state does not match the mesh");
    }
    auto u = system.pack(state0);

    GrainResult result;
    auto inventory = [&](std::span<const double> u_now, double& mob, double& trap) {
        mob = trap = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mob += system.mobile(u_now, i) * mesh.volumes()[i];
            trap += system.trapped(u_now, i) * mesh.volumes()[i];
        }
    };
    double mob0 = 0.0, trap0 = 0.0;
    inventory(u, mob0, trap0);
    result.initial_inventory = mob0 + trap0;

    const auto final_u = integrate(
        system, u, params.schedule, t_end, controller, [&](const StepRecord& rec) {
            GrainTrace tr;
            tr.time_s = rec.t;
            tr.temperature_K = rec.temperature_K;
            tr.release_rate = system.release_rate(rec.state, rec.temperature_K);
            inventory(rec.state, tr.mobile_inventory, tr.trapped_inventory);
            tr.trap_fraction = system.chi(rec.state);
            result.trace.push_back(tr);
            result.release.samples.push_back({rec.t, rec.temperature_K, tr.release_rate});
        });

    result.final_state = system.unpack(final_u, t_end);
    return result;
}

} // namespace tdskit

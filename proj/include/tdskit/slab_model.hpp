// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdskit/integrator.hpp"
#include "tdskit/kinetics.hpp"
#include "tdskit/linear_solvers.hpp"
#include "tdskit/mesh.hpp"
#include "tdskit/release_curve.hpp"

namespace tdskit {

inline constexpr std::size_t slab_trap_count = 6; ///< intrinsic + five irradiation families

/// Default desorption history: linear ramp between the tabulated endpoints.
inline TemperatureSchedule default_slab_schedule() {
    const double duration_s = 4.166 * 3600.0;
    return TemperatureSchedule({{0.0, 295.775}, {duration_s, 1001.408}});
}

/// Trapping follows the deuterium migration barrier; detrapping prefactors
/// are attempt-frequency scale. Site densities are plateau values before the
/// uniform trap-density scale factor is applied.
inline std::array<TrapFamily, slab_trap_count> default_slab_traps() {
    const ArrheniusRate trapping(1.32e13, 0.28);
    return {
        TrapFamily("intrinsic", 1.595e23, trapping, ArrheniusRate(1e13, 1.08)),
        TrapFamily("trap_1", 3.076e26, trapping, ArrheniusRate(1e13, 1.20)),
        TrapFamily("trap_2", 1.910e26, trapping, ArrheniusRate(1e13, 1.38)),
        TrapFamily("trap_3", 1.304e26, trapping, ArrheniusRate(1e13, 1.65)),
        TrapFamily("trap_4", 2.392e26, trapping, ArrheniusRate(1e13, 1.85)),
        TrapFamily("trap_5", 7.330e25, trapping, ArrheniusRate(1e13, 2.05)),
    };
}

/// Deuterium release from oxide-coated self-irradiated tungsten: 1D slab with
/// six trap families, oxygen confined to the oxide layer, and competing
/// D2 / D2O surface reactions. Solved internally in dimensionless variables.
struct SlabParams {
    // geometry
    double slab_thickness_m = 0.8e-3;
    double oxide_thickness_m = 1.0e-9;     ///< natural oxide by default
    double damaged_depth_m = 2.3e-6;
    double oxide_transition_m = 0.25e-9;   ///< w_ox
    double damage_transition_m = 0.05e-6;  ///< w_d

    // transport
    ArrheniusRate d_diffusivity{1.6e-7, 0.28};  ///< same in oxide and tungsten
    ArrheniusRate o_diffusivity{2.0e-17, 0.45}; ///< active only inside the oxide

    // traps
    std::array<TrapFamily, slab_trap_count> traps = default_slab_traps();
    double trap_scale = 6.644848; ///< s_T, applied uniformly to site densities

    // surface release channels (m^4/atom/s prefactors)
    ArrheniusRate k_r_d2{3.8e-16, 0.34};
    ArrheniusRate k_r_d2o{3.8e1, 2.10};

    // oxygen loading
    double initial_oxygen = 4.94e28; ///< atoms/m^3 inside the oxide

    // host and dimensionless references
    double host_density = 6.3222e28;       ///< N, atoms/m^3
    double length_ref_m = 1.0e-6;
    double time_ref_s = 1.0;
    double mobile_ref = 6.3222e16;         ///< atoms/m^3
    double trap_ref_intrinsic = 6.3222e17; ///< atoms/m^3
    double trap_ref_irradiation = 6.3222e20;
    double oxygen_ref = 4.94e28;           ///< defaults to the initial loading

    TemperatureSchedule schedule = default_slab_schedule();
    double initial_trap_occupancy = 1.0;
    double mobile_floor = 1e-6; ///< dimensionless initial mobile concentration

    void validate() const {
        if (!(oxide_thickness_m > 0.0) || !(damaged_depth_m > oxide_thickness_m) ||
            !(slab_thickness_m > oxide_thickness_m + damaged_depth_m)) {
            throw std::invalid_argument("SlabParams: need l_ox < l_d < l_W");
        }
        if (!(oxide_transition_m > 0.0) || !(damage_transition_m > 0.0)) {
            throw std::invalid_argument("SlabParams: transition widths must be > 0");
        }
        for (const double ref : {length_ref_m, time_ref_s, mobile_ref, trap_ref_intrinsic,
                                 trap_ref_irradiation, oxygen_ref, host_density}) {
            if (!(ref > 0.0)) throw std::invalid_argument("SlabParams: references must be > 0");
        }
        if (!(initial_trap_occupancy >= 0.0 && initial_trap_occupancy <= 1.0)) {
            throw std::invalid_argument("SlabParams: occupancy must lie in [0, 1]");
        }
        if (initial_oxygen < 0.0 || mobile_floor < 0.0) {
            throw std::invalid_argument("SlabParams: concentrations must be >= 0");
        }
    }

    double trap_reference(std::size_t family) const {
        return family == 0 ? trap_ref_intrinsic : trap_ref_irradiation;
    }
};

/// Arrhenius-evaluated coefficients rewritten in the dimensionless groups
/// used by the solver.
struct DimensionlessCoefficients {
    double d_d = 0.0;
    double d_o = 0.0;
    std::array<double, slab_trap_count> alpha_t{};
    std::array<double, slab_trap_count> alpha_r{};
    double k_d2 = 0.0;
    double k_d2o = 0.0;
};

inline DimensionlessCoefficients nondimensionalize(const SlabParams& params, double temperature_K) {
    DimensionlessCoefficients c;
    const double t_ref = params.time_ref_s;
    const double l_ref = params.length_ref_m;
    c.d_d = arrhenius_eval(params.d_diffusivity, temperature_K) * t_ref / (l_ref * l_ref);
    c.d_o = arrhenius_eval(params.o_diffusivity, temperature_K) * t_ref / (l_ref * l_ref);
    for (std::size_t f = 0; f < slab_trap_count; ++f) {
        c.alpha_t[f] = t_ref * arrhenius_eval(params.traps[f].trapping, temperature_K) *
                       params.mobile_ref / params.host_density;
        c.alpha_r[f] = t_ref * arrhenius_eval(params.traps[f].detrapping, temperature_K);
    }
    c.k_d2 = arrhenius_eval(params.k_r_d2, temperature_K) * params.mobile_ref * t_ref / l_ref;
    c.k_d2o = arrhenius_eval(params.k_r_d2o, temperature_K) * params.mobile_ref * t_ref / l_ref;
    return c;
}

/// Trap capacity at depth x in atoms/m^3, including the uniform scale factor.
/// The intrinsic family is homogeneous; irradiation families plateau over the
/// damaged band with tanh shoulders and vanish in the oxide and the bulk.
inline double trap_capacity_profile(const SlabParams& params, std::size_t family, double x_m) {
    if (family >= slab_trap_count) throw std::invalid_argument("trap_capacity_profile: bad family");
    if (!(x_m >= 0.0 && x_m <= params.slab_thickness_m)) {
        throw std::domain_error("trap_capacity_profile: x outside the slab");
    }
    const double plateau = params.trap_scale * params.traps[family].site_density;
    if (family == 0) return plateau;
    return plateau *
           smooth_step((x_m - params.oxide_thickness_m) / params.oxide_transition_m) *
           smooth_step((params.oxide_thickness_m + params.damaged_depth_m - x_m) /
                       params.damage_transition_m);
}

/// Oxygen confinement shape: 1 inside the oxide, 0 beyond it, with the oxide
/// transition width. Shapes both the initial oxygen profile and the mask that
/// suppresses oxygen diffusion outside the layer.
inline double oxide_fraction(const SlabParams& params, double x_m) {
    return smooth_step((params.oxide_thickness_m - x_m) / params.oxide_transition_m);
}

/// Surface fluxes in D-atoms (and O-atoms) per m^2 s. The D2O channel is
/// gated by the oxygen fill fraction C_O / C_O,ref, which keeps the two
/// release coefficients directly comparable.
struct SurfaceFluxes {
    double j_d2_atoms = 0.0;
    double j_d2o_atoms = 0.0;
    double j_o = 0.0;
};

inline SurfaceFluxes surface_fluxes(double c_m_surface, double c_o_surface, double temperature_K,
                                    const SlabParams& params) {
    if (c_m_surface < 0.0 || c_o_surface < 0.0) {
        throw std::domain_error("surface_fluxes: concentrations must be >= 0");
    }
    SurfaceFluxes f;
    f.j_d2_atoms = 2.0 * arrhenius_eval(params.k_r_d2, temperature_K) * c_m_surface * c_m_surface;
    f.j_d2o_atoms = 2.0 * arrhenius_eval(params.k_r_d2o, temperature_K) *
                    (c_o_surface / params.oxygen_ref) * c_m_surface * c_m_surface;
    f.j_o = 0.5 * f.j_d2o_atoms;
    return f;
}

/// Dimensionless slab fields, cell-centered.
struct SlabState {
    std::vector<double> mobile;                              ///< C_M / C_M,ref
    std::array<std::vector<double>, slab_trap_count> trapped; ///< C_T,i / C_T,ref,i
    std::vector<double> oxygen;                              ///< C_O / C_O,ref
    double time_s = 0.0;
};

/// Default mesh: sub-nanometer cells through the oxide and its transition,
/// graded coarsening across the damaged region, fine band at the
/// damaged-to-bulk transition, then strong coarsening to the back face.
/// Coordinates are dimensionless (x / L_ref).
inline std::vector<MeshRegion> default_slab_regions(const SlabParams& params) {
    const double l = params.length_ref_m;
    const double lox = params.oxide_thickness_m / l;
    const double wox = params.oxide_transition_m / l;
    const double wd = params.damage_transition_m / l;
    const double damage_end = (params.oxide_thickness_m + params.damaged_depth_m) / l;
    const double l_w = params.slab_thickness_m / l;

    const double w_fine = wox / 6.0;
    const double a_end = lox + 6.0 * wox;
    const double band = 6.0 * wd;
    const double w_band = wd / 6.0;
    const double w_mid = 0.02; // 20 nm through the damaged interior

    std::vector<MeshRegion> regions;
    regions.push_back({a_end, std::size_t(std::ceil(a_end / w_fine)), 1.0});
    const double ramp_len = std::min(0.15, 0.5 * (damage_end - band - a_end));
    regions.push_back(graded_region(ramp_len, w_fine, w_mid));
    const double mid_len = damage_end - band - a_end - ramp_len;
    regions.push_back({mid_len, std::size_t(std::ceil(mid_len / w_mid)), 1.0});
    regions.push_back({2.0 * band, std::size_t(std::ceil(2.0 * band / w_band)), 1.0});
    regions.push_back(graded_region(l_w - damage_end - band, w_band, 60.0));
    return regions;
}

inline Mesh1D build_slab_mesh(const std::vector<MeshRegion>& regions) {
    return build_graded_mesh(regions, Geometry::planar);
}

/// Traps filled to the requested occupancy within their capacity profiles, a
/// small uniform mobile floor, and the oxide loaded with oxygen.
inline SlabState init_slab_state(const SlabParams& params, const Mesh1D& mesh) {
    params.validate();
    const std::size_t n = mesh.cell_count();
    SlabState state;
    state.mobile.assign(n, params.mobile_floor);
    state.oxygen.resize(n);
    for (std::size_t f = 0; f < slab_trap_count; ++f) state.trapped[f].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x_m = mesh.centers()[i] * params.length_ref_m;
        for (std::size_t f = 0; f < slab_trap_count; ++f) {
            state.trapped[f][i] = params.initial_trap_occupancy *
                                  trap_capacity_profile(params, f, x_m) /
                                  params.trap_reference(f);
        }
        state.oxygen[i] =
            (params.initial_oxygen / params.oxygen_ref) * oxide_fraction(params, x_m);
    }
    return state;
}

namespace detail {

/// Cell-major blocks of (mobile, six traps, oxygen).
class SlabSystem : public ImplicitSystem {
  public:
    static constexpr std::size_t fields = slab_trap_count + 2;
    static constexpr std::size_t ox = fields - 1; ///< oxygen index inside a block

    SlabSystem(SlabParams params, Mesh1D mesh)
        : params_(std::move(params)), mesh_(std::move(mesh)) {
        const std::size_t n = mesh_.cell_count();
        const double l = params_.length_ref_m;
        face_g_.resize(n - 1);
        for (std::size_t f = 0; f + 1 < n; ++f) face_g_[f] = 1.0 / mesh_.interior_face_distance(f);
        cap_hat_.resize(slab_trap_count);
        for (std::size_t f = 0; f < slab_trap_count; ++f) {
            cap_hat_[f].resize(n);
            rho_[f] = params_.trap_reference(f) / params_.mobile_ref;
            for (std::size_t i = 0; i < n; ++i) {
                cap_hat_[f][i] = trap_capacity_profile(params_, f, mesh_.centers()[i] * l) /
                                 params_.trap_reference(f);
            }
        }
        // harmonic-mean oxygen mask per interior face; zero once either side dies
        oxy_face_mask_.resize(n - 1);
        for (std::size_t f = 0; f + 1 < n; ++f) {
            const double a = oxide_fraction(params_, mesh_.centers()[f] * l);
            const double b = oxide_fraction(params_, mesh_.centers()[f + 1] * l);
            oxy_face_mask_[f] = (a > 0.0 && b > 0.0) ? 2.0 * a * b / (a + b) : 0.0;
        }
        o_to_m_ = params_.mobile_ref / params_.oxygen_ref;
    }

    const Mesh1D& mesh() const { return mesh_; }
    const SlabParams& params() const { return params_; }

    std::size_t size() const override { return fields * mesh_.cell_count(); }

    std::vector<double> pack(const SlabState& state) const {
        const std::size_t n = mesh_.cell_count();
        std::vector<double> u(size());
        for (std::size_t i = 0; i < n; ++i) {
            u[fields * i] = state.mobile[i];
            for (std::size_t f = 0; f < slab_trap_count; ++f) {
                u[fields * i + 1 + f] = state.trapped[f][i];
            }
            u[fields * i + ox] = state.oxygen[i];
        }
        return u;
    }

    SlabState unpack(std::span<const double> u, double t) const {
        const std::size_t n = mesh_.cell_count();
        SlabState s;
        s.mobile.resize(n);
        s.oxygen.resize(n);
        for (auto& tr : s.trapped) tr.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            s.mobile[i] = u[fields * i];
            for (std::size_t f = 0; f < slab_trap_count; ++f) s.trapped[f][i] = u[fields * i + 1 + f];
            s.oxygen[i] = u[fields * i + ox];
        }
        s.time_s = t;
        return s;
    }

    /// Physical surface fluxes for the current state.
    SurfaceFluxes fluxes(std::span<const double> u, double temperature_K) const {
        return surface_fluxes(std::max(0.0, u[0]) * params_.mobile_ref,
                              std::max(0.0, u[ox]) * params_.oxygen_ref, temperature_K, params_);
    }

    void residual(std::span<const double> u, std::span<const double> u_old, double t_new,
                  double dt, std::span<double> out) const override {
        const std::size_t n = mesh_.cell_count();
        const double temperature = schedule_eval(params_.schedule, t_new);
        const auto c = nondimensionalize(params_, temperature);
        const double dt_hat = dt / params_.time_ref_s;
        const auto& vol = mesh_.volumes();

        for (std::size_t i = 0; i < n; ++i) {
            const double cm = u[fields * i];
            const double co = u[fields * i + ox];

            double diff_m = 0.0, diff_o = 0.0;
            if (i > 0) {
                diff_m += face_g_[i - 1] * c.d_d * (u[fields * (i - 1)] - cm);
                diff_o += face_g_[i - 1] * c.d_o * oxy_face_mask_[i - 1] *
                          (u[fields * (i - 1) + ox] - co);
            }
            if (i + 1 < n) {
                diff_m += face_g_[i] * c.d_d * (u[fields * (i + 1)] - cm);
                diff_o += face_g_[i] * c.d_o * oxy_face_mask_[i] * (u[fields * (i + 1) + ox] - co);
            }
            diff_m /= vol[i];
            diff_o /= vol[i];

            double exchange_sum = 0.0;
            for (std::size_t f = 0; f < slab_trap_count; ++f) {
                const double ct = u[fields * i + 1 + f];
                const double exchange =
                    c.alpha_t[f] * cm * (cap_hat_[f][i] - ct) - c.alpha_r[f] * ct;
                out[fields * i + 1 + f] = ct - u_old[fields * i + 1 + f] - dt_hat * exchange;
                exchange_sum += rho_[f] * exchange;
            }
            out[fields * i] = cm - u_old[fields * i] - dt_hat * (diff_m - exchange_sum);
            out[fields * i + ox] = co - u_old[fields * i + ox] - dt_hat * diff_o;
        }

        // exposed surface: nonlinear removal of mobile deuterium and oxygen
        const double cm0 = u[0];
        const double co0 = u[ox];
        const double j_d2 = 2.0 * c.k_d2 * cm0 * cm0;
        const double j_d2o = 2.0 * c.k_d2o * co0 * cm0 * cm0;
        const double j_o = 0.5 * j_d2o * o_to_m_;
        out[0] += dt_hat * (j_d2 + j_d2o) / vol[0];
        out[ox] += dt_hat * j_o / vol[0];
    }

    void solve_linearized(std::span<const double> u, double t_new, double dt,
                          std::span<const double> rhs, std::span<double> delta) const override {
        const std::size_t n = mesh_.cell_count();
        const double temperature = schedule_eval(params_.schedule, t_new);
        const auto c = nondimensionalize(params_, temperature);
        const double dt_hat = dt / params_.time_ref_s;
        const auto& vol = mesh_.volumes();

        BlockTridiagonalSystem block(n, fields);
        for (std::size_t i = 0; i < n; ++i) {
            const double cm = u[fields * i];

            double diag_m = 0.0, diag_o = 0.0;
            if (i > 0) {
                const double gm = face_g_[i - 1] * c.d_d / vol[i];
                const double go = face_g_[i - 1] * c.d_o * oxy_face_mask_[i - 1] / vol[i];
                diag_m -= gm;
                diag_o -= go;
                block.sub(i, 0, 0) = -dt_hat * gm;
                block.sub(i, ox, ox) = -dt_hat * go;
            }
            if (i + 1 < n) {
                const double gm = face_g_[i] * c.d_d / vol[i];
                const double go = face_g_[i] * c.d_o * oxy_face_mask_[i] / vol[i];
                diag_m -= gm;
                diag_o -= go;
                block.super(i, 0, 0) = -dt_hat * gm;
                block.super(i, ox, ox) = -dt_hat * go;
            }

            double sum_dexch_dcm = 0.0;
            for (std::size_t f = 0; f < slab_trap_count; ++f) {
                const double ct = u[fields * i + 1 + f];
                const double de_dcm = c.alpha_t[f] * (cap_hat_[f][i] - ct);
                const double de_dct = -(c.alpha_t[f] * cm + c.alpha_r[f]);
                block.diag(i, 1 + f, 1 + f) = 1.0 - dt_hat * de_dct;
                block.diag(i, 1 + f, 0) = -dt_hat * de_dcm;
                block.diag(i, 0, 1 + f) = dt_hat * rho_[f] * de_dct;
                sum_dexch_dcm += rho_[f] * de_dcm;
            }
            block.diag(i, 0, 0) = 1.0 - dt_hat * diag_m + dt_hat * sum_dexch_dcm;
            block.diag(i, ox, ox) = 1.0 - dt_hat * diag_o;

            for (std::size_t r = 0; r < fields; ++r) block.rhs(i, r) = rhs[fields * i + r];
        }

        // surface reaction couplings in the first cell's diagonal block
        {
            const double cm0 = u[0];
            const double co0 = u[ox];
            const double dj2_dcm = 4.0 * c.k_d2 * cm0;
            const double dj2o_dcm = 4.0 * c.k_d2o * co0 * cm0;
            const double dj2o_dco = 2.0 * c.k_d2o * cm0 * cm0;
            block.diag(0, 0, 0) += dt_hat * (dj2_dcm + dj2o_dcm) / vol[0];
            block.diag(0, 0, ox) += dt_hat * dj2o_dco / vol[0];
            block.diag(0, ox, 0) += dt_hat * 0.5 * o_to_m_ * dj2o_dcm / vol[0];
            block.diag(0, ox, ox) += dt_hat * 0.5 * o_to_m_ * dj2o_dco / vol[0];
        }

        const auto x = block.solve();
        std::copy(x.begin(), x.end(), delta.begin());
    }

    bool admissible(std::span<const double> u) const override {
        const std::size_t n = mesh_.cell_count();
        std::array<double, fields> peak{};
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t r = 0; r < fields; ++r) {
                const double v = u[fields * i + r];
                if (!std::isfinite(v)) return false;
                peak[r] = std::max(peak[r], std::abs(v));
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t r = 0; r < fields; ++r) {
                if (u[fields * i + r] < -1e-9 * std::max(peak[r], 1e-6)) return false;
            }
        }
        return true;
    }

    void residual_scales(std::span<const double> u_old, std::span<double> out) const override {
        const std::size_t n = mesh_.cell_count();
        std::array<double, fields> peak{};
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t r = 0; r < fields; ++r) {
                peak[r] = std::max(peak[r], std::abs(u_old[fields * i + r]));
            }
        }
        for (auto& p : peak) p = std::max(p, 1e-9);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t r = 0; r < fields; ++r) {
                out[fields * i + r] = std::abs(u_old[fields * i + r]) + 0.01 * peak[r];
            }
        }
    }

    /// Areal inventories in atoms/m^2 (mobile, traps..., oxygen).
    std::array<double, fields> inventories(std::span<const double> u) const {
        const std::size_t n = mesh_.cell_count();
        std::array<double, fields> inv{};
        for (std::size_t i = 0; i < n; ++i) {
            const double v = mesh_.volumes()[i];
            inv[0] += u[fields * i] * v;
            for (std::size_t f = 0; f < slab_trap_count; ++f) inv[1 + f] += u[fields * i + 1 + f] * v;
            inv[ox] += u[fields * i + ox] * v;
        }
        const double l = params_.length_ref_m;
        inv[0] *= params_.mobile_ref * l;
        for (std::size_t f = 0; f < slab_trap_count; ++f) inv[1 + f] *= params_.trap_reference(f) * l;
        inv[ox] *= params_.oxygen_ref * l;
        return inv;
    }

    /// Largest physical oxygen concentration beyond the containment boundary
    /// l_ox + 5 w_ox.
    double oxygen_beyond_oxide(std::span<const double> u) const {
        const double boundary =
            (params_.oxide_thickness_m + 5.0 * params_.oxide_transition_m) / params_.length_ref_m;
        double peak = 0.0;
        for (std::size_t i = 0; i < mesh_.cell_count(); ++i) {
            if (mesh_.centers()[i] > boundary) {
                peak = std::max(peak, u[fields * i + ox] * params_.oxygen_ref);
            }
        }
        return peak;
    }

  private:
    SlabParams params_;
    Mesh1D mesh_;
    std::vector<double> face_g_;
    std::vector<std::vector<double>> cap_hat_;
    std::vector<double> oxy_face_mask_;
    std::array<double, slab_trap_count> rho_{};
    double o_to_m_ = 0.0;
};

} // namespace detail

inline StepController slab_default_controller() {
    StepController ctrl;
    ctrl.dt_initial = 1e-3;
    ctrl.dt_min = 1e-10;
    ctrl.dt_max = 10.0;
    ctrl.growth_factor = 1.25;
    ctrl.shrink_factor = 0.4;
    ctrl.newton_tolerance = 1e-8;
    ctrl.newton_max_iterations = 14;
    return ctrl;
}

/// Per-step record of fluxes and inventories.
struct SlabTrace {
    double time_s = 0.0;
    double temperature_K = 0.0;
    double j_d2_atoms = 0.0;  ///< D-atoms/m^2/s
    double j_d2o_atoms = 0.0; ///< D-atoms/m^2/s
    double j_o = 0.0;         ///< O-atoms/m^2/s, exactly half the D2O atom flux
    double mobile_inventory = 0.0;                          ///< atoms/m^2
    std::array<double, slab_trap_count> trap_inventory{};   ///< atoms/m^2
    double oxygen_inventory = 0.0;                          ///< atoms/m^2
    double oxygen_beyond_oxide = 0.0;                       ///< atoms/m^3
};

struct SlabResult {
    ReleaseCurve d2;  ///< raw, D-atoms/m^2/s
    ReleaseCurve d2o; ///< raw, D-atoms/m^2/s
    std::vector<SlabTrace> trace;
    SlabState final_state;
    double initial_d_inventory = 0.0; ///< atoms/m^2
    double initial_o_inventory = 0.0; ///< atoms/m^2
};

inline SlabResult simulate_slab_tds(const SlabParams& params,
                                    const std::optional<std::vector<MeshRegion>>& regions = {},
                                    const StepController& controller = slab_default_controller()) {
    params.validate();
    const double t_end = params.schedule.end_time();
    if (!(t_end > 0.0)) throw std::domain_error("simulate_slab_tds: schedule has zero duration");

    detail::SlabSystem system(
        params, build_slab_mesh(regions ? *regions : default_slab_regions(params)));
    const auto u0 = system.pack(init_slab_state(params, system.mesh()));

    SlabResult result;
    {
        const auto inv0 = system.inventories(u0);
        for (std::size_t f = 0; f < slab_trap_count; ++f) result.initial_d_inventory += inv0[1 + f];
        result.initial_d_inventory += inv0[0];
        result.initial_o_inventory = inv0[detail::SlabSystem::ox];
    }

    const auto final_u = integrate(
        system, u0, params.schedule, t_end, controller, [&](const StepRecord& rec) {
            SlabTrace tr;
            tr.time_s = rec.t;
            tr.temperature_K = rec.temperature_K;
            const auto f = system.fluxes(rec.state, rec.temperature_K);
            tr.j_d2_atoms = f.j_d2_atoms;
            tr.j_d2o_atoms = f.j_d2o_atoms;
            tr.j_o = f.j_o;
            const auto inv = system.inventories(rec.state);
            tr.mobile_inventory = inv[0];
            for (std::size_t t = 0; t < slab_trap_count; ++t) tr.trap_inventory[t] = inv[1 + t];
            tr.oxygen_inventory = inv[detail::SlabSystem::ox];
            tr.oxygen_beyond_oxide = system.oxygen_beyond_oxide(rec.state);
            result.trace.push_back(tr);
            result.d2.samples.push_back({rec.t, rec.temperature_K, f.j_d2_atoms});
            result.d2o.samples.push_back({rec.t, rec.temperature_K, f.j_d2o_atoms});
        });

    result.final_state = system.unpack(final_u, t_end);
    return result;
}

/// First prominent local maximum of a release curve by temperature.
struct CurvePeak {
    double temperature_K = 0.0;
    double rate = 0.0;
};

inline std::optional<CurvePeak> find_first_peak(const ReleaseCurve& curve,
                                                double prominence_fraction = 0.05) {
    const auto& s = curve.samples;
    if (s.size() < 3) return std::nullopt;
    const double floor = prominence_fraction * curve.peak_rate();
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (s[i].rate > s[i - 1].rate && s[i].rate >= s[i + 1].rate && s[i].rate >= floor) {
            // require a genuine subsequent dip before the next rise
            double valley = s[i].rate;
            for (std::size_t j = i + 1; j < s.size(); ++j) {
                valley = std::min(valley, s[j].rate);
                if (valley < 0.8 * s[i].rate || j + 1 == s.size()) {
                    return CurvePeak{s[i].temperature_K, s[i].rate};
                }
                if (s[j].rate > s[i].rate) break; // still climbing to a bigger peak
            }
        }
    }
    return std::nullopt;
}

/// Temperature at which a trap family's inventory first drops to half its
/// initial value; empty when it never does.
inline std::optional<double> trap_half_emptying_temperature(const SlabResult& result,
                                                            std::size_t family) {
    if (result.trace.empty()) return std::nullopt;
    const double initial = result.trace.front().trap_inventory[family];
    if (!(initial > 0.0)) return std::nullopt;
    for (std::size_t i = 0; i < result.trace.size(); ++i) {
        const double inv = result.trace[i].trap_inventory[family];
        if (inv <= 0.5 * initial) {
            if (i == 0) return result.trace[0].temperature_K;
            const double prev = result.trace[i - 1].trap_inventory[family];
            const double w = (0.5 * initial - prev) / (inv - prev);
            return result.trace[i - 1].temperature_K +
                   w * (result.trace[i].temperature_K - result.trace[i - 1].temperature_K);
        }
    }
    return std::nullopt;
}

/// Writes `time_s,temperature_K,J_D2_atoms,J_D2O_atoms`.
inline void write_slab_release_csv(const SlabResult& result, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "time_s,temperature_K,J_D2_atoms,J_D2O_atoms\n";
    for (const auto& tr : result.trace) {
        out << io::format_double(tr.time_s) << ',' << io::format_double(tr.temperature_K) << ','
            << io::format_double(tr.j_d2_atoms) << ',' << io::format_double(tr.j_d2o_atoms) << '\n';
    }
}

/// Writes `time_s,mobile,trap_intr,trap_1..trap_5,oxygen` areal inventories.
inline void write_slab_inventory_csv(const SlabResult& result, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "time_s,mobile,trap_intr,trap_1,trap_2,trap_3,trap_4,trap_5,oxygen\n";
    for (const auto& tr : result.trace) {
        out << io::format_double(tr.time_s) << ',' << io::format_double(tr.mobile_inventory);
        for (const double t : tr.trap_inventory) out << ',' << io::format_double(t);
        out << ',' << io::format_double(tr.oxygen_inventory) << '\n';
    }
}

/// Writes a physical-units profile snapshot `x_m,C_M,C_T_intr,...,C_T_5,C_O`.
inline void write_slab_profile_csv(const SlabState& state, const Mesh1D& mesh,
                                   const SlabParams& params, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "x_m,C_M,C_T_intr,C_T_1,C_T_2,C_T_3,C_T_4,C_T_5,C_O\n";
    for (std::size_t i = 0; i < mesh.cell_count(); ++i) {
        out << io::format_double(mesh.centers()[i] * params.length_ref_m) << ','
            << io::format_double(state.mobile[i] * params.mobile_ref);
        for (std::size_t f = 0; f < slab_trap_count; ++f) {
            out << ',' << io::format_double(state.trapped[f][i] * params.trap_reference(f));
        }
        out << ',' << io::format_double(state.oxygen[i] * params.oxygen_ref) << '\n';
    }
}

} // namespace tdskit

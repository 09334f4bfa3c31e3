// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "tdskit/bayes_opt.hpp"
#include "tdskit/config.hpp"
#include "tdskit/grain_calibration.hpp"
#include "tdskit/grain_model.hpp"
#include "tdskit/slab_model.hpp"

namespace tdskit {

/// [grain] section keyed by the model symbols. Missing keys keep the
/// reference defaults.
inline GrainParams grain_params_from_config(const Config& cfg) {
    GrainParams p;
    const std::string s = "grain";
    p.grain_radius_m = cfg.get_double_or(s, "r_g_um", 1.5) * 1e-6;
    p.diffusivity = ArrheniusRate(cfg.get_double_or(s, "D_0_m2_per_s", 6.9e-7),
                                  cfg.get_double_or(s, "E_d_eV", 1.07));
    p.trapping = ArrheniusRate(cfg.get_double_or(s, "alpha_t0_per_s", 4.2e8),
                               cfg.get_double_or(s, "eps_t_eV", 1.04));
    p.detrapping = ArrheniusRate(cfg.get_double_or(s, "alpha_r0_per_s", 4.1e6),
                                 cfg.get_double_or(s, "eps_r_eV", 1.19));
    p.annihilation = ArrheniusRate(cfg.get_double_or(s, "k_dpda_0_per_s", 1.0e2),
                                   cfg.get_double_or(s, "E_dpda_eV", 0.9));
    p.lattice_density = cfg.get_double_or(s, "N_per_m3", 1.88e28);
    p.initial_defect_density = cfg.get_double_or(s, "D_id_per_m3", 3.384e26);
    p.initial_occupancy = cfg.get_double_or(s, "theta_0", 0.99);
    if (cfg.has(s, "schedule_csv")) {
        p.schedule = load_schedule_csv(cfg.get_string(s, "schedule_csv"));
    } else {
        const double t_start = cfg.get_double_or(s, "T_start_K", 300.0);
        const double rate = cfg.get_double_or(s, "heating_rate_K_per_min", 5.0);
        const double t_end = cfg.get_double_or(s, "T_end_K", 900.0);
        if (!(rate > 0.0)) throw ConfigError("grain: heating rate must be > 0 for a ramp");
        if (!(t_end > t_start)) throw ConfigError("grain: T_end_K must exceed T_start_K");
        p.schedule = linear_ramp(t_start, rate, (t_end - t_start) / rate * 60.0);
    }
    return p;
}

/// [slab] section keyed by the model symbols.
inline SlabParams slab_params_from_config(const Config& cfg) {
    SlabParams p;
    const std::string s = "slab";
    p.slab_thickness_m = cfg.get_double_or(s, "l_W_mm", 0.8) * 1e-3;
    p.oxide_thickness_m = cfg.get_double_or(s, "l_ox_nm", 1.0) * 1e-9;
    p.damaged_depth_m = cfg.get_double_or(s, "l_d_um", 2.3) * 1e-6;
    p.oxide_transition_m = cfg.get_double_or(s, "w_ox_nm", 0.25) * 1e-9;
    p.damage_transition_m = cfg.get_double_or(s, "w_d_um", 0.05) * 1e-6;
    p.d_diffusivity = ArrheniusRate(cfg.get_double_or(s, "D_D0_m2_per_s", 1.6e-7),
                                    cfg.get_double_or(s, "E_D_eV", 0.28));
    p.o_diffusivity = ArrheniusRate(cfg.get_double_or(s, "D_O0_m2_per_s", 2.0e-17),
                                    cfg.get_double_or(s, "E_D_O_eV", 0.45));
    p.k_r_d2 = ArrheniusRate(cfg.get_double_or(s, "K_r_D2_0_m4_per_at_s", 3.8e-16),
                             cfg.get_double_or(s, "E_r_D2_eV", 0.34));
    p.k_r_d2o = ArrheniusRate(cfg.get_double_or(s, "K_r_D2O_0_m4_per_at_s", 3.8e1),
                              cfg.get_double_or(s, "E_r_D2O_eV", 2.10));
    p.initial_oxygen = cfg.get_double_or(s, "C_O0_per_m3", 4.94e28);
    p.host_density = cfg.get_double_or(s, "N_per_m3", 6.3222e28);
    p.length_ref_m = cfg.get_double_or(s, "L_ref_um", 1.0) * 1e-6;
    p.time_ref_s = cfg.get_double_or(s, "t_ref_s", 1.0);
    p.mobile_ref = cfg.get_double_or(s, "C_M_ref_per_m3", 6.3222e16);
    p.trap_ref_intrinsic = cfg.get_double_or(s, "C_T_ref_intr_per_m3", 6.3222e17);
    p.trap_ref_irradiation = cfg.get_double_or(s, "C_T_ref_irr_per_m3", 6.3222e20);
    p.oxygen_ref = cfg.get_double_or(s, "C_O_ref_per_m3", p.initial_oxygen);
    p.trap_scale = cfg.get_double_or(s, "s_T", 6.644848);
    p.initial_trap_occupancy = cfg.get_double_or(s, "occupancy", 1.0);
    p.mobile_floor = cfg.get_double_or(s, "mobile_floor", 1e-6);

    const ArrheniusRate trapping(cfg.get_double_or(s, "alpha_t0_per_s", 1.32e13),
                                 cfg.get_double_or(s, "E_D_eV", 0.28));
    const double nu = cfg.get_double_or(s, "alpha_r0_per_s", 1.0e13);
    const std::array<const char*, slab_trap_count> energy_keys = {
        "E_T_intr_eV", "E_T_1_eV", "E_T_2_eV", "E_T_3_eV", "E_T_4_eV", "E_T_5_eV"};
    const std::array<const char*, slab_trap_count> density_keys = {
        "n_T_intr_per_m3", "n_T_1_per_m3", "n_T_2_per_m3", "n_T_3_per_m3", "n_T_4_per_m3",
        "n_T_5_per_m3"};
    const auto defaults = default_slab_traps();
    for (std::size_t f = 0; f < slab_trap_count; ++f) {
        const double energy =
            cfg.get_double_or(s, energy_keys[f], defaults[f].detrapping.activation_energy_eV);
        const double density = cfg.get_double_or(s, density_keys[f], defaults[f].site_density);
        p.traps[f] = TrapFamily(defaults[f].label, density, trapping, ArrheniusRate(nu, energy));
    }

    if (cfg.has(s, "schedule_csv")) {
        p.schedule = load_schedule_csv(cfg.get_string(s, "schedule_csv"));
    } else {
        const double t0 = cfg.get_double_or(s, "T_0_K", 295.775);
        const double tf = cfg.get_double_or(s, "T_f_K", 1001.408);
        const double duration = cfg.get_double_or(s, "t_f_h", 4.166) * 3600.0;
        p.schedule = TemperatureSchedule({{0.0, t0}, {duration, tf}});
    }
    return p;
}

/// [numerics] overrides on top of a command-specific default controller.
inline StepController controller_from_config(const Config& cfg, StepController ctrl) {
    const std::string s = "numerics";
    ctrl.dt_initial = cfg.get_double_or(s, "dt_initial_s", ctrl.dt_initial);
    ctrl.dt_min = cfg.get_double_or(s, "dt_min_s", ctrl.dt_min);
    ctrl.dt_max = cfg.get_double_or(s, "dt_max_s", ctrl.dt_max);
    ctrl.growth_factor = cfg.get_double_or(s, "growth_factor", ctrl.growth_factor);
    ctrl.shrink_factor = cfg.get_double_or(s, "shrink_factor", ctrl.shrink_factor);
    ctrl.newton_tolerance = cfg.get_double_or(s, "newton_tolerance", ctrl.newton_tolerance);
    ctrl.newton_max_iterations =
        int(cfg.get_long_or(s, "newton_max_iterations", ctrl.newton_max_iterations));
    return ctrl;
}

inline GrainMeshSpec grain_mesh_from_config(const Config& cfg) {
    GrainMeshSpec spec;
    spec.cells = std::size_t(cfg.get_long_or("numerics", "grain_cells", long(spec.cells)));
    spec.grading_ratio = cfg.get_double_or("numerics", "grain_grading", spec.grading_ratio);
    return spec;
}

inline OptimizeOptions optimize_options_from_config(const Config& cfg, std::uint64_t seed) {
    OptimizeOptions opt;
    const std::string s = "calibration";
    opt.iterations = std::size_t(cfg.get_long_or(s, "iterations", long(opt.iterations)));
    opt.batch_size = std::size_t(cfg.get_long_or(s, "batch_size", long(opt.batch_size)));
    opt.initial_design = std::size_t(cfg.get_long_or(s, "initial_design", long(opt.initial_design)));
    opt.seed = seed;
    return opt;
}

inline GrainObjectiveOptions objective_options_from_config(const Config& cfg) {
    GrainObjectiveOptions opt;
    const std::string s = "calibration";
    opt.denominator_floor = cfg.get_double_or(s, "denominator_floor", opt.denominator_floor);
    opt.penalty_weight = cfg.get_double_or(s, "penalty_weight", opt.penalty_weight);
    opt.penalty_target = cfg.get_double_or(s, "penalty_target", opt.penalty_target);
    opt.mesh = grain_mesh_from_config(cfg);
    opt.controller = controller_from_config(cfg, grain_default_controller());
    return opt;
}

} // namespace tdskit

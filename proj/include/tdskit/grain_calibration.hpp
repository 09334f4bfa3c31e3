// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <vector>

#include "tdskit/bayes_opt.hpp"
#include "tdskit/curve_compare.hpp"
#include "tdskit/grain_model.hpp"
#include "tdskit/parameter_space.hpp"

namespace tdskit {

/// The eight grain-model calibration dimensions: four Arrhenius prefactors in
/// log10 space and four activation energies, in this fixed order.
inline ParameterSpace grain_parameter_space() {
    ParameterSpace space;
    space.dimensions = {
        {"D_0_m2_per_s", 1e-8, 1e-4, DimensionScale::log10},
        {"E_d_eV", 0.8, 1.4, DimensionScale::linear},
        {"alpha_t0_per_s", 1e7, 1e10, DimensionScale::log10},
        {"eps_t_eV", 0.8, 1.3, DimensionScale::linear},
        {"alpha_r0_per_s", 1e5, 1e8, DimensionScale::log10},
        {"eps_r_eV", 0.9, 1.5, DimensionScale::linear},
        {"k_dpda_0_per_s", 1e0, 1e5, DimensionScale::log10},
        {"E_dpda_eV", 0.5, 1.5, DimensionScale::linear},
    };
    return space;
}

/// Applies a point from grain_parameter_space to a parameter set.
inline GrainParams apply_grain_point(GrainParams base, const std::vector<double>& physical) {
    if (physical.size() != 8) {
        throw std::invalid_argument("apply_grain_point: expected 8 parameter values");
    }
    base.diffusivity = ArrheniusRate(physical[0], physical[1]);
    base.trapping = ArrheniusRate(physical[2], physical[3]);
    base.detrapping = ArrheniusRate(physical[4], physical[5]);
    base.annihilation = ArrheniusRate(physical[6], physical[7]);
    return base;
}

struct GrainObjectiveOptions {
    double denominator_floor = 0.01;
    double penalty_weight = 1.0;
    double penalty_target = 0.01;     ///< normalized units
    double penalty_t_start_K = 300.0;
    double penalty_t_end_K = 475.0;
    double penalty_t_step_K = 25.0;
    double sentinel_score = 1e6;
    GrainMeshSpec mesh;
    StepController controller = grain_default_controller();
};

/// RMSPE of the unit-peak-normalized simulation against the experimental
/// interpolant, plus a quadratic penalty on release in the low-temperature
/// window where the measurement shows none.
inline double grain_objective_score(const GrainParams& params, const ExperimentalCurve& fixture,
                                    const GrainObjectiveOptions& options) {
    const auto result = simulate_grain_tds(params, options.mesh, options.controller);
    const auto normalized = normalize_curve(result.release, Normalization::unit_peak);
    double score = rmspe(normalized, fixture, options.denominator_floor);
    for (double t = options.penalty_t_start_K; t <= options.penalty_t_end_K + 1e-9;
         t += options.penalty_t_step_K) {
        const double excess = normalized.rate_at_temperature(t) - options.penalty_target;
        if (excess > 0.0) score += options.penalty_weight * excess * excess;
    }
    return score;
}

/// Objective over physical points of grain_parameter_space. Simulation or
/// normalization failures score the sentinel instead of propagating.
inline std::function<double(const std::vector<double>&)> make_grain_objective(
    const GrainParams& base, const ExperimentalCurve& fixture,
    const GrainObjectiveOptions& options = {}) {
    return [base, fixture, options](const std::vector<double>& physical) -> double {
        try {
            return grain_objective_score(apply_grain_point(base, physical), fixture, options);
        } catch (const std::exception&) {
            return options.sentinel_score;
        }
    };
}

/// History CSV: iteration, the eight physical values, score.
inline void write_history_csv(const OptimizeResult& result, const ParameterSpace& space,
                              const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "iteration";
    for (const auto& d : space.dimensions) out << ',' << d.name;
    out << ",score\n";
    for (const auto& rec : result.history) {
        out << rec.iteration;
        for (const double v : rec.physical) out << ',' << io::format_double(v);
        out << ',' << io::format_double(rec.score) << '\n';
    }
}

/// Best-parameters key-value file keyed by the space's symbol names.
inline void write_best_parameters(const OptimizeResult& result, const ParameterSpace& space,
                                  const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "[best]\n";
    for (std::size_t i = 0; i < space.dimensions.size(); ++i) {
        out << space.dimensions[i].name << " = " << io::format_double(result.best_physical[i])
            << '\n';
    }
    out << "score = " << io::format_double(result.best_score) << '\n';
}

} // namespace tdskit

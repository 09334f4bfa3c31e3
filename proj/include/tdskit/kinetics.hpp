// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdskit/constants.hpp"
#include "tdskit/io_util.hpp"

namespace tdskit {

/// Arrhenius rate law: prefactor * exp(-activation_energy / (kB * T)).
///
/// The prefactor carries the rate's native units (m^2/s for diffusivities,
/// 1/s for trap kinetics, m^4/atom/s for surface reactions). A zero prefactor
/// is accepted and encodes a disabled channel.
struct ArrheniusRate {
    double prefactor = 0.0;
    double activation_energy_eV = 0.0;

    ArrheniusRate() = default;

    ArrheniusRate(double prefactor_, double activation_energy_eV_)
        : prefactor(prefactor_), activation_energy_eV(activation_energy_eV_) {
        if (!std::isfinite(prefactor) || prefactor < 0.0) {
            throw std::invalid_argument("ArrheniusRate: prefactor must be finite and >= 0");
        }
        if (!std::isfinite(activation_energy_eV) || activation_energy_eV < 0.0) {
            throw std::invalid_argument("ArrheniusRate: activation energy must be finite and >= 0");
        }
    }
};

/// Evaluates an Arrhenius rate at the given temperature.
inline double arrhenius_eval(const ArrheniusRate& rate, double temperature_K) {
    if (!(temperature_K > 0.0)) {
        throw std::domain_error("arrhenius_eval: temperature must be > 0 K");
    }
    return rate.prefactor *
           std::exp(-rate.activation_energy_eV / (constants::k_boltzmann_eV_per_K * temperature_K));
}

/// Temperature at which two Arrhenius rates are equal, if one exists.
///
/// Solves A_a exp(-E_a/kT) = A_b exp(-E_b/kT) for T. Returns an empty optional
/// when the rates are parallel or the formal solution is not a positive finite
/// temperature (the curves do not cross for T > 0).
inline std::optional<double> crossover_temperature(const ArrheniusRate& a, const ArrheniusRate& b) {
    if (a.prefactor <= 0.0 || b.prefactor <= 0.0) return std::nullopt;
    const double log_ratio = std::log(b.prefactor / a.prefactor);
    if (log_ratio == 0.0) return std::nullopt;
    const double t = (b.activation_energy_eV - a.activation_energy_eV) /
                     (constants::k_boltzmann_eV_per_K * log_ratio);
    if (!std::isfinite(t) || t <= 0.0) return std::nullopt;
    return t;
}

/// Piecewise-linear time -> temperature history.
class TemperatureSchedule {
  public:
    /// Breakpoints are (time_s, temperature_K) pairs, strictly increasing in time.
    explicit TemperatureSchedule(std::vector<std::pair<double, double>> breakpoints)
        : points_(std::move(breakpoints)) {
        if (points_.size() < 2) {
            throw std::invalid_argument("TemperatureSchedule: need at least two breakpoints");
        }
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (!std::isfinite(points_[i].first) || !std::isfinite(points_[i].second) ||
                points_[i].second <= 0.0) {
                throw std::invalid_argument("TemperatureSchedule: temperatures must be finite and > 0");
            }
            if (i > 0 && points_[i].first <= points_[i - 1].first) {
                throw std::invalid_argument("TemperatureSchedule: times must be strictly increasing");
            }
        }
    }

    const std::vector<std::pair<double, double>>& breakpoints() const { return points_; }

    double start_time() const { return points_.front().first; }
    double end_time() const { return points_.back().first; }
    double start_temperature() const { return points_.front().second; }
    double end_temperature() const { return points_.back().second; }

  private:
    std::vector<std::pair<double, double>> points_;
};

/// Linear interpolation between breakpoints, clamped outside the span.
inline double schedule_eval(const TemperatureSchedule& schedule, double t_s) {
    const auto& pts = schedule.breakpoints();
    if (t_s <= pts.front().first) return pts.front().second;
    if (t_s >= pts.back().first) return pts.back().second;
    auto hi = std::upper_bound(pts.begin(), pts.end(), t_s,
                               [](double t, const auto& p) { return t < p.first; });
    auto lo = hi - 1;
    const double w = (t_s - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
}

/// Two-breakpoint constant-rate ramp starting at t = 0.
inline TemperatureSchedule linear_ramp(double t_start_K, double rate_K_per_min, double duration_s) {
    if (!(duration_s > 0.0)) {
        throw std::domain_error("linear_ramp: duration must be > 0");
    }
    if (!(rate_K_per_min >= 0.0)) {
        throw std::domain_error("linear_ramp: heating rate must be >= 0");
    }
    const double t_end_K = t_start_K + rate_K_per_min * duration_s / 60.0;
    return TemperatureSchedule({{0.0, t_start_K}, {duration_s, t_end_K}});
}

/// Loads a schedule from CSV with header `time_s,temperature_K`.
inline TemperatureSchedule load_schedule_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open schedule CSV: " + path.string());
    std::string line;
    if (!std::getline(in, line) || io::strip(line) != "time_s,temperature_K") {
        throw std::runtime_error("schedule CSV must start with header time_s,temperature_K: " +
                                 path.string());
    }
    std::vector<std::pair<double, double>> pts;
    while (std::getline(in, line)) {
        if (io::strip(line).empty()) continue;
        const auto fields = io::split_csv(line);
        if (fields.size() != 2) {
            throw std::runtime_error("schedule CSV row must have 2 columns: " + path.string());
        }
        pts.emplace_back(io::parse_double(fields[0]), io::parse_double(fields[1]));
    }
    return TemperatureSchedule(std::move(pts));
}

/// One trap population: capacity plus trapping/detrapping kinetics.
struct TrapFamily {
    std::string label;
    double site_density = 0.0; ///< plateau trap-site density, atoms/m^3
    ArrheniusRate trapping;    ///< 1/s
    ArrheniusRate detrapping;  ///< 1/s

    TrapFamily() = default;

    TrapFamily(std::string label_, double site_density_, ArrheniusRate trapping_,
               ArrheniusRate detrapping_)
        : label(std::move(label_)),
          site_density(site_density_),
          trapping(trapping_),
          detrapping(detrapping_) {
        if (!std::isfinite(site_density) || site_density < 0.0) {
            throw std::invalid_argument("TrapFamily: site density must be finite and >= 0");
        }
    }
};

/// Smooth unit step: 0 far left, 1/2 at the origin, 1 far right.
/// The nominal transition width of 1 spans the 12% -> 88% rise.
inline double smooth_step(double u) { return 0.5 * (1.0 + std::tanh(2.0 * u)); }

/// Smooth plateau between `start` and `end` with tanh shoulders.
struct PlateauProfile {
    double plateau_value = 0.0;
    double start = 0.0;                ///< m
    double end = 0.0;                  ///< m
    double transition_width_left = 0.0;  ///< m
    double transition_width_right = 0.0; ///< m

    PlateauProfile() = default;

    PlateauProfile(double plateau_value_, double start_, double end_, double width_left,
                   double width_right)
        : plateau_value(plateau_value_),
          start(start_),
          end(end_),
          transition_width_left(width_left),
          transition_width_right(width_right) {
        if (!(start < end)) throw std::invalid_argument("PlateauProfile: start must be < end");
        if (!(width_left > 0.0) || !(width_right > 0.0)) {
            throw std::invalid_argument("PlateauProfile: transition widths must be > 0");
        }
    }
};

inline double plateau_profile_eval(const PlateauProfile& profile, double x) {
    return profile.plateau_value * smooth_step((x - profile.start) / profile.transition_width_left) *
           smooth_step((profile.end - x) / profile.transition_width_right);
}

} // namespace tdskit

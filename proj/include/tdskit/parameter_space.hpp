// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdskit {

enum class DimensionScale { linear, log10 };

/// Bounded calibration space. Points travel through the optimizer as
/// unit-cube coordinates; log10 dimensions map exponent-linearly.
struct ParameterSpace {
    struct Dimension {
        std::string name;
        double lower = 0.0;
        double upper = 1.0;
        DimensionScale scale = DimensionScale::linear;
    };

    std::vector<Dimension> dimensions;

    std::size_t size() const { return dimensions.size(); }

    void validate() const {
        if (dimensions.empty()) throw std::invalid_argument("ParameterSpace: no dimensions");
        for (const auto& d : dimensions) {
            if (!(d.lower < d.upper)) {
                throw std::invalid_argument("ParameterSpace: lower must be < upper for " + d.name);
            }
            if (d.scale == DimensionScale::log10 && !(d.lower > 0.0)) {
                throw std::invalid_argument("ParameterSpace: log10 dimension needs lower > 0 for " +
                                            d.name);
            }
        }
    }

    std::vector<double> to_physical(const std::vector<double>& unit) const {
        if (unit.size() != dimensions.size()) {
            throw std::invalid_argument("ParameterSpace: unit point has wrong dimension");
        }
        std::vector<double> out(unit.size());
        for (std::size_t i = 0; i < unit.size(); ++i) {
            const auto& d = dimensions[i];
            const double u = unit[i];
            if (d.scale == DimensionScale::linear) {
                out[i] = d.lower + u * (d.upper - d.lower);
            } else {
                const double lo = std::log10(d.lower), hi = std::log10(d.upper);
                out[i] = std::pow(10.0, lo + u * (hi - lo));
            }
        }
        return out;
    }

    std::vector<double> to_unit(const std::vector<double>& physical) const {
        if (physical.size() != dimensions.size()) {
            throw std::invalid_argument("ParameterSpace: physical point has wrong dimension");
        }
        std::vector<double> out(physical.size());
        for (std::size_t i = 0; i < physical.size(); ++i) {
            const auto& d = dimensions[i];
            if (d.scale == DimensionScale::linear) {
                out[i] = (physical[i] - d.lower) / (d.upper - d.lower);
            } else {
                out[i] = (std::log10(physical[i]) - std::log10(d.lower)) /
                         (std::log10(d.upper) - std::log10(d.lower));
            }
        }
        return out;
    }

    bool contains_unit(const std::vector<double>& unit) const {
        if (unit.size() != dimensions.size()) return false;
        for (const double u : unit) {
            if (!(u >= 0.0 && u <= 1.0)) return false;
        }
        return true;
    }
};

} // namespace tdskit

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdskit/io_util.hpp"
#include "tdskit/release_curve.hpp"

namespace tdskit {

/// Measured normalized release rates on a temperature grid, treated as a
/// piecewise-linear interpolant.
struct ExperimentalCurve {
    struct Point {
        double temperature_K = 0.0;
        double normalized_rate = 0.0;
    };
    std::vector<Point> points;
    std::string source;

    void validate() const {
        if (points.empty()) throw std::invalid_argument("ExperimentalCurve: no points");
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (!std::isfinite(points[i].temperature_K) ||
                !std::isfinite(points[i].normalized_rate) || points[i].normalized_rate < 0.0) {
                throw std::invalid_argument("ExperimentalCurve: rates must be finite and >= 0");
            }
            if (i > 0 && !(points[i].temperature_K > points[i - 1].temperature_K)) {
                throw std::invalid_argument(
                    "ExperimentalCurve: temperatures must be strictly increasing");
            }
        }
    }
};

/// Linear interpolation, clamped to the endpoint rates outside the span.
inline double interp_experimental(const ExperimentalCurve& curve, double temperature_K) {
    const auto& pts = curve.points;
    if (pts.empty()) throw std::domain_error("interp_experimental: empty curve");
    if (temperature_K <= pts.front().temperature_K) return pts.front().normalized_rate;
    if (temperature_K >= pts.back().temperature_K) return pts.back().normalized_rate;
    const auto hi = std::upper_bound(
        pts.begin(), pts.end(), temperature_K,
        [](double t, const ExperimentalCurve::Point& p) { return t < p.temperature_K; });
    const auto lo = hi - 1;
    const double w = (temperature_K - lo->temperature_K) / (hi->temperature_K - lo->temperature_K);
    return lo->normalized_rate + w * (hi->normalized_rate - lo->normalized_rate);
}

/// Root mean square percent error between a normalized simulated curve and the
/// experimental interpolant, evaluated at every simulated sample inside the
/// experimental temperature span. The denominator floor guards near-zero
/// experimental values.
inline double rmspe(const ReleaseCurve& simulated, const ExperimentalCurve& experimental,
                    double denominator_floor = 0.01) {
    if (simulated.normalization == Normalization::raw) {
        throw std::invalid_argument("rmspe: simulated curve must be normalized first");
    }
    if (simulated.samples.empty()) throw std::domain_error("rmspe: empty simulated curve");
    experimental.validate();
    const double t_lo = experimental.points.front().temperature_K;
    const double t_hi = experimental.points.back().temperature_K;
    double acc = 0.0;
    std::size_t count = 0;
    for (const auto& s : simulated.samples) {
        if (s.temperature_K < t_lo || s.temperature_K > t_hi) continue;
        const double e = interp_experimental(experimental, s.temperature_K);
        const double rel = (s.rate - e) / std::max(e, denominator_floor);
        acc += rel * rel;
        ++count;
    }
    if (count == 0) throw std::domain_error("rmspe: no simulated samples overlap the experiment");
    return 100.0 * std::sqrt(acc / double(count));
}

/// Loads `temperature_K,normalized_rate` CSV.
inline ExperimentalCurve load_experimental_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || io::strip(line) != "temperature_K,normalized_rate") {
        throw std::runtime_error("expected header temperature_K,normalized_rate in " +
                                 path.string());
    }
    ExperimentalCurve curve;
    curve.source = path.string();
    while (std::getline(in, line)) {
        if (io::strip(line).empty()) continue;
        const auto f = io::split_csv(line);
        if (f.size() != 2) throw std::runtime_error("bad experimental CSV row in " + path.string());
        curve.points.push_back({io::parse_double(f[0]), io::parse_double(f[1])});
    }
    curve.validate();
    return curve;
}

inline void write_experimental_csv(const ExperimentalCurve& curve,
                                   const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "temperature_K,normalized_rate\n";
    for (const auto& p : curve.points) {
        out << io::format_double(p.temperature_K) << ',' << io::format_double(p.normalized_rate)
            << '\n';
    }
}

} // namespace tdskit

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdskit/io_util.hpp"

namespace tdskit {

enum class Normalization { raw, unit_peak, unit_integral };

/// One desorption-rate sample.
struct ReleaseSample {
    double time_s = 0.0;
    double temperature_K = 0.0;
    double rate = 0.0; ///< species-specific units when raw, dimensionless when normalized
};

/// Time/temperature-indexed desorption-rate series for one released species.
struct ReleaseCurve {
    std::vector<ReleaseSample> samples;
    Normalization normalization = Normalization::raw;

    void validate() const {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (!std::isfinite(samples[i].rate) || samples[i].rate < -1e-12) {
                throw std::invalid_argument("ReleaseCurve: release rates must be finite and >= 0");
            }
            if (i > 0 && !(samples[i].time_s > samples[i - 1].time_s)) {
                throw std::invalid_argument("ReleaseCurve: times must be strictly increasing");
            }
        }
    }

    double peak_rate() const {
        double peak = 0.0;
        for (const auto& s : samples) peak = std::max(peak, s.rate);
        return peak;
    }

    /// Temperature at the global rate maximum.
    double peak_temperature() const {
        if (samples.empty()) throw std::domain_error("ReleaseCurve: empty curve");
        const auto it = std::max_element(samples.begin(), samples.end(),
                                         [](const auto& a, const auto& b) { return a.rate < b.rate; });
        return it->temperature_K;
    }

    /// Trapezoidal time integral of the rate.
    double integral() const {
        double acc = 0.0;
        for (std::size_t i = 1; i < samples.size(); ++i) {
            acc += 0.5 * (samples[i].rate + samples[i - 1].rate) *
                   (samples[i].time_s - samples[i - 1].time_s);
        }
        return acc;
    }

    /// Rate at a temperature by linear interpolation (requires a monotone
    /// temperature history); clamped outside the span.
    double rate_at_temperature(double temperature_K) const {
        if (samples.empty()) throw std::domain_error("ReleaseCurve: empty curve");
        if (temperature_K <= samples.front().temperature_K) return samples.front().rate;
        if (temperature_K >= samples.back().temperature_K) return samples.back().rate;
        const auto hi = std::upper_bound(
            samples.begin(), samples.end(), temperature_K,
            [](double t, const ReleaseSample& s) { return t < s.temperature_K; });
        const auto lo = hi - 1;
        const double span = hi->temperature_K - lo->temperature_K;
        if (span <= 0.0) return lo->rate;
        const double w = (temperature_K - lo->temperature_K) / span;
        return lo->rate + w * (hi->rate - lo->rate);
    }
};

/// Rescales a curve to unit peak or unit time-integral.
inline ReleaseCurve normalize_curve(const ReleaseCurve& curve, Normalization mode) {
    if (curve.samples.empty()) throw std::domain_error("normalize_curve: empty curve");
    if (mode == Normalization::raw) {
        ReleaseCurve out = curve;
        out.normalization = Normalization::raw;
        return out;
    }
    const double denom = mode == Normalization::unit_peak ? curve.peak_rate() : curve.integral();
    if (!(denom > 0.0)) throw std::domain_error("normalize_curve: curve has no signal");
    ReleaseCurve out = curve;
    for (auto& s : out.samples) s.rate /= denom;
    out.normalization = mode;
    return out;
}

/// Writes `time_s,temperature_K,release_rate` CSV.
inline void write_release_csv(const ReleaseCurve& curve, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "time_s,temperature_K,release_rate\n";
    for (const auto& s : curve.samples) {
        out << io::format_double(s.time_s) << ',' << io::format_double(s.temperature_K) << ','
            << io::format_double(s.rate) << '\n';
    }
}

/// Reads a release CSV written by write_release_csv. The normalization tag is
/// the caller's claim about the file contents.
inline ReleaseCurve read_release_csv(const std::filesystem::path& path,
                                     Normalization normalization) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || io::strip(line) != "time_s,temperature_K,release_rate") {
        throw std::runtime_error("expected header time_s,temperature_K,release_rate in " +
                                 path.string());
    }
    ReleaseCurve curve;
    curve.normalization = normalization;
    while (std::getline(in, line)) {
        if (io::strip(line).empty()) continue;
        const auto f = io::split_csv(line);
        if (f.size() != 3) throw std::runtime_error("bad release CSV row in " + path.string());
        curve.samples.push_back(
            {io::parse_double(f[0]), io::parse_double(f[1]), io::parse_double(f[2])});
    }
    curve.validate();
    return curve;
}

} // namespace tdskit

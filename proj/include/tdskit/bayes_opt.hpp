// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "tdskit/gaussian_process.hpp"
#include "tdskit/parameter_space.hpp"

namespace tdskit {

inline double standard_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Phi via the complementary error function.
inline double standard_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Expected improvement under the minimization convention.
inline double expected_improvement(double mean, double stddev, double best_so_far) {
    if (!(stddev >= 0.0)) throw std::invalid_argument("expected_improvement: stddev must be >= 0");
    const double gap = best_so_far - mean;
    if (stddev == 0.0) return std::max(0.0, gap);
    const double z = gap / stddev;
    return gap * standard_normal_cdf(z) + stddev * standard_normal_pdf(z);
}

/// Deterministic uniform generator with platform-independent double draws.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double unit() { return double(gen_() >> 11) * 0x1.0p-53; }

    std::size_t index(std::size_t bound) {
        return std::min(bound - 1, static_cast<std::size_t>(unit() * double(bound)));
    }

  private:
    std::mt19937_64 gen_;
};

/// Seeded Latin hypercube design on [0,1]^d: one stratum per sample and
/// dimension, independently permuted.
inline std::vector<std::vector<double>> latin_hypercube(std::size_t samples, std::size_t dims,
                                                        Rng& rng) {
    if (samples == 0 || dims == 0) throw std::invalid_argument("latin_hypercube: empty design");
    std::vector<std::vector<double>> points(samples, std::vector<double>(dims, 0.0));
    std::vector<std::size_t> perm(samples);
    for (std::size_t d = 0; d < dims; ++d) {
        for (std::size_t i = 0; i < samples; ++i) perm[i] = i;
        for (std::size_t i = samples; i-- > 1;) std::swap(perm[i], perm[rng.index(i + 1)]);
        for (std::size_t i = 0; i < samples; ++i) {
            points[i][d] = (double(perm[i]) + rng.unit()) / double(samples);
        }
    }
    return points;
}

namespace detail {

/// Multistart EI maximization: uniform candidates, an exploitation pool around
/// the incumbent, then a coordinate pattern search from the best one.
inline std::vector<double> maximize_ei(const GPModel& model, double best_value,
                                       const std::vector<double>& incumbent, Rng& rng,
                                       std::size_t candidates = 1024) {
    const std::size_t d = model.dimension();
    auto ei_at = [&](const std::vector<double>& x) {
        const auto p = model.predict(x);
        return expected_improvement(p.mean, p.stddev, best_value);
    };

    // seed pool: uniform and stratified draws plus exploitation shells around
    // the incumbent
    std::vector<std::pair<double, std::vector<double>>> pool;
    pool.reserve(2 * candidates + 3 * candidates / 8 + 1);
    std::vector<double> x(d);
    pool.emplace_back(0.0, std::vector<double>(d, 0.5));
    for (std::size_t c = 0; c < candidates; ++c) {
        for (auto& xi : x) xi = rng.unit();
        pool.emplace_back(0.0, x);
    }
    for (auto& point : latin_hypercube(candidates, d, rng)) {
        pool.emplace_back(0.0, std::move(point));
    }
    for (const double radius : {0.02, 0.08, 0.2}) {
        for (std::size_t c = 0; c < candidates / 8; ++c) {
            for (std::size_t k = 0; k < d; ++k) {
                x[k] = std::clamp(incumbent[k] + radius * (2.0 * rng.unit() - 1.0), 0.0, 1.0);
            }
            pool.emplace_back(0.0, x);
        }
    }
    for (auto& [value, point] : pool) value = ei_at(point);
    std::partial_sort(pool.begin(), pool.begin() + 4, pool.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });

    // pattern-search refinement from the leading candidates
    std::vector<double> best_x = pool.front().second;
    double best_ei = pool.front().first;
    for (int start = 0; start < 4; ++start) {
        auto cur = pool[start].second;
        double cur_ei = pool[start].first;
        double step = 0.1;
        while (step > 1e-4) {
            bool moved = false;
            for (std::size_t k = 0; k < d; ++k) {
                for (const double dir : {+1.0, -1.0}) {
                    auto trial = cur;
                    trial[k] = std::clamp(trial[k] + dir * step, 0.0, 1.0);
                    const double e = ei_at(trial);
                    if (e > cur_ei) {
                        cur_ei = e;
                        cur = trial;
                        moved = true;
                    }
                }
            }
            if (!moved) step *= 0.5;
        }
        if (cur_ei > best_ei) {
            best_ei = cur_ei;
            best_x = cur;
        }
    }
    return best_x;
}

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double q = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) q += (a[i] - b[i]) * (a[i] - b[i]);
    return q;
}

} // namespace detail

/// Batch proposal by constant-liar fantasizing: each accepted proposal is
/// appended to the surrogate with the current best value before the next EI
/// maximization. Proposals are pairwise distinct.
inline std::vector<std::vector<double>> propose_batch(const GPModel& model,
                                                      const ParameterSpace& space,
                                                      std::size_t batch_size, Rng& rng) {
    if (batch_size < 1) throw std::invalid_argument("propose_batch: batch size must be >= 1");
    if (space.size() != model.dimension()) {
        throw std::invalid_argument("propose_batch: space/model dimension mismatch");
    }
    const double lie = model.best_observed();
    constexpr double min_sq_dist = 1e-6 * 1e-6;

    std::vector<std::vector<double>> proposals;
    const GPModel* current = &model;
    GPModel fantasized = model; // storage for refits

    for (std::size_t b = 0; b < batch_size; ++b) {
        auto x = detail::maximize_ei(*current, lie, model.best_input(), rng);
        for (int guard = 0; guard < 64; ++guard) {
            const bool clash = std::any_of(proposals.begin(), proposals.end(),
                                           [&](const std::vector<double>& p) {
                                               return detail::squared_distance(p, x) < min_sq_dist;
                                           });
            if (!clash) break;
            for (auto& xi : x) xi = std::clamp(xi + 0.02 * (rng.unit() - 0.5), 0.0, 1.0);
        }
        proposals.push_back(x);

        if (b + 1 < batch_size) {
            // refit with fixed hyperparameters and the fantasized observation
            fantasized = current->with_observation(x, lie);
            current = &fantasized;
        }
    }
    return proposals;
}

struct EvaluationRecord {
    int iteration = 0; ///< 0 for the initial design
    std::vector<double> unit;
    std::vector<double> physical;
    double score = 0.0;
};

struct OptimizeResult {
    std::vector<double> best_unit;
    std::vector<double> best_physical;
    double best_score = 0.0;
    std::vector<EvaluationRecord> history;
};

struct OptimizeOptions {
    std::size_t iterations = 40;
    std::size_t batch_size = 5;
    std::size_t initial_design = 16;
    std::uint64_t seed = 42;
    double sentinel_score = 1e6; ///< objective value that marks a failed run
    bool parallel_evaluations = true;
};

class OptimizationFailed : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// GP/EI active-learning loop over a bounded space. The objective receives
/// physical coordinates and may evaluate concurrently within a batch; the
/// recorded history order is the deterministic proposal order.
inline OptimizeResult optimize(const std::function<double(const std::vector<double>&)>& objective,
                               const ParameterSpace& space, const OptimizeOptions& options = {}) {
    space.validate();
    if (options.initial_design < 2) {
        throw std::invalid_argument("optimize: initial design needs at least two points");
    }
    Rng rng(options.seed);

    auto evaluate_batch = [&](const std::vector<std::vector<double>>& unit_points, int iteration,
                              OptimizeResult& result) {
        std::vector<std::vector<double>> phys(unit_points.size());
        for (std::size_t i = 0; i < unit_points.size(); ++i) {
            phys[i] = space.to_physical(unit_points[i]);
        }
        std::vector<double> scores(unit_points.size(), 0.0);
        if (options.parallel_evaluations && unit_points.size() > 1) {
            std::vector<std::future<double>> futures;
            futures.reserve(unit_points.size());
            for (std::size_t i = 0; i < unit_points.size(); ++i) {
                futures.push_back(
                    std::async(std::launch::async, [&objective, &phys, i] { return objective(phys[i]); }));
            }
            for (std::size_t i = 0; i < futures.size(); ++i) scores[i] = futures[i].get();
        } else {
            for (std::size_t i = 0; i < unit_points.size(); ++i) scores[i] = objective(phys[i]);
        }
        for (std::size_t i = 0; i < unit_points.size(); ++i) {
            result.history.push_back({iteration, unit_points[i], phys[i], scores[i]});
        }
    };

    OptimizeResult result;
    evaluate_batch(latin_hypercube(options.initial_design, space.size(), rng), 0, result);

    // The surrogate sees log-compressed scores: percent-error objectives have
    // heavy right tails that otherwise dominate the standardization.
    auto compress = [](double score) { return std::log1p(std::max(0.0, score)); };
    auto finite_scores = [&](std::vector<std::vector<double>>& xs, std::vector<double>& ys) {
        xs.clear();
        ys.clear();
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& rec : result.history) {
            if (rec.score < options.sentinel_score) {
                lo = std::min(lo, compress(rec.score));
                hi = std::max(hi, compress(rec.score));
            }
        }
        if (!std::isfinite(lo)) return false;
        const double cap = hi + (hi - lo) + 1.0; // sentinel stand-in for the surrogate
        for (const auto& rec : result.history) {
            xs.push_back(rec.unit);
            ys.push_back(rec.score < options.sentinel_score ? compress(rec.score) : cap);
        }
        return true;
    };

    for (std::size_t it = 1; it <= options.iterations; ++it) {
        std::vector<std::vector<double>> xs;
        std::vector<double> ys;
        if (!finite_scores(xs, ys)) {
            throw OptimizationFailed("optimize: every evaluation so far returned the sentinel");
        }
        const auto model = GPModel::fit_ml(xs, ys);
        const auto batch = propose_batch(model, space, options.batch_size, rng);
        evaluate_batch(batch, int(it), result);
    }

    const EvaluationRecord* best = nullptr;
    for (const auto& rec : result.history) {
        if (rec.score < options.sentinel_score && (!best || rec.score < best->score)) best = &rec;
    }
    if (!best) throw OptimizationFailed("optimize: every evaluation returned the sentinel");
    result.best_unit = best->unit;
    result.best_physical = best->physical;
    result.best_score = best->score;
    return result;
}

} // namespace tdskit

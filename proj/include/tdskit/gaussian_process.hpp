// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tdskit {

/// Anisotropic squared-exponential kernel hyperparameters. Signal variance
/// and jitter act in standardized-target space.
struct GpHyperparameters {
    double signal_variance = 1.0;
    std::vector<double> length_scales;
    double jitter = 1e-8;
};

/// Gaussian-process regressor on the unit cube with internally standardized
/// targets. Fitting is exact (Cholesky); hyperparameters come either from the
/// caller or from a deterministic marginal-likelihood search.
class GPModel {
  public:
    struct Prediction {
        double mean = 0.0;
        double stddev = 0.0;
    };

    static GPModel fit(const std::vector<std::vector<double>>& inputs,
                       const std::vector<double>& targets, GpHyperparameters hyper) {
        GPModel model;
        model.init_data(inputs, targets);
        if (hyper.length_scales.size() != model.dim_) {
            throw std::invalid_argument("GPModel: one length scale per dimension required");
        }
        model.hyper_ = std::move(hyper);
        model.factorize();
        return model;
    }

    /// Selects length scales and signal variance by maximizing the log
    /// marginal likelihood over a shared-scale grid followed by per-dimension
    /// refinement sweeps. Fully deterministic.
    static GPModel fit_ml(const std::vector<std::vector<double>>& inputs,
                          const std::vector<double>& targets) {
        GPModel model;
        model.init_data(inputs, targets);
        const std::size_t d = model.dim_;

        auto likelihood = [&model](const std::vector<double>& scales, double& signal_out) {
            return model.profile_log_marginal(scales, signal_out);
        };

        double best_lml = -std::numeric_limits<double>::infinity();
        std::vector<double> best_scales(d, 1.0);
        double best_signal = 1.0;
        for (int i = 0; i < 25; ++i) {
            const double ell = 0.05 * std::pow(4.0 / 0.05, i / 24.0);
            std::vector<double> scales(d, ell);
            double signal = 1.0;
            const double lml = likelihood(scales, signal);
            if (lml > best_lml) {
                best_lml = lml;
                best_scales = scales;
                best_signal = signal;
            }
        }
        for (int sweep = 0; sweep < 4; ++sweep) {
            bool improved = false;
            for (std::size_t k = 0; k < d; ++k) {
                for (const double factor : {0.25, 0.5, 2.0, 4.0}) {
                    auto trial = best_scales;
                    trial[k] = std::clamp(trial[k] * factor, 0.01, 10.0);
                    double signal = 1.0;
                    const double lml = likelihood(trial, signal);
                    if (lml > best_lml) {
                        best_lml = lml;
                        best_scales = trial;
                        best_signal = signal;
                        improved = true;
                    }
                }
            }
            if (!improved) break;
        }

        model.hyper_.length_scales = best_scales;
        model.hyper_.signal_variance = best_signal;
        model.hyper_.jitter = 1e-8;
        model.factorize();
        return model;
    }

    Prediction predict(const std::vector<double>& x) const {
        if (x.size() != dim_) throw std::invalid_argument("GPModel::predict: wrong dimension");
        const std::size_t n = inputs_.size();
        std::vector<double> k(n);
        for (std::size_t i = 0; i < n; ++i) k[i] = correlation(inputs_[i], x);

        double mean_std = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean_std += k[i] * alpha_[i];

        // v = L^{-1} k; posterior correlation deficit is |v|^2
        std::vector<double> v(k);
        forward_solve(v);
        double reduction = 0.0;
        for (const double vi : v) reduction += vi * vi;
        const double var_std = hyper_.signal_variance * std::max(0.0, 1.0 - reduction);

        Prediction out;
        out.mean = mean_y_ + std_y_ * mean_std;
        out.stddev = std_y_ * std::sqrt(var_std);
        return out;
    }

    /// Prior signal variance in raw target units.
    double prior_variance() const { return hyper_.signal_variance * std_y_ * std_y_; }

    /// Copy of this model with one more observation, refit under the same
    /// hyperparameters (used for constant-liar batching).
    GPModel with_observation(const std::vector<double>& x, double y) const {
        auto xs = inputs_;
        auto ys = targets_;
        xs.push_back(x);
        ys.push_back(y);
        return fit(xs, ys, hyper_);
    }

    double best_observed() const {
        return *std::min_element(targets_.begin(), targets_.end());
    }

    const std::vector<double>& best_input() const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < targets_.size(); ++i) {
            if (targets_[i] < targets_[best]) best = i;
        }
        return inputs_[best];
    }

    const GpHyperparameters& hyperparameters() const { return hyper_; }
    std::size_t size() const { return inputs_.size(); }
    std::size_t dimension() const { return dim_; }

  private:
    void init_data(const std::vector<std::vector<double>>& inputs,
                   const std::vector<double>& targets) {
        if (inputs.size() < 2) throw std::invalid_argument("GPModel: need at least two points");
        if (inputs.size() != targets.size()) {
            throw std::invalid_argument("GPModel: inputs/targets size mismatch");
        }
        dim_ = inputs.front().size();
        for (const auto& x : inputs) {
            if (x.size() != dim_) throw std::invalid_argument("GPModel: ragged inputs");
            for (const double xi : x) {
                if (!(xi >= 0.0 && xi <= 1.0)) {
                    throw std::invalid_argument("GPModel: inputs must lie in the unit cube");
                }
            }
        }
        inputs_ = inputs;
        targets_ = targets;

        const double n = double(targets.size());
        mean_y_ = 0.0;
        for (const double y : targets) mean_y_ += y;
        mean_y_ /= n;
        double var = 0.0;
        for (const double y : targets) var += (y - mean_y_) * (y - mean_y_);
        std_y_ = std::sqrt(var / n);
        if (!(std_y_ > 1e-12)) std_y_ = 1.0; // constant targets
        y_std_.resize(targets.size());
        for (std::size_t i = 0; i < targets.size(); ++i) y_std_[i] = (targets[i] - mean_y_) / std_y_;
        hyper_.length_scales.assign(dim_, 1.0);
    }

    double correlation(const std::vector<double>& a, const std::vector<double>& b) const {
        double q = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double r = (a[i] - b[i]) / hyper_.length_scales[i];
            q += r * r;
        }
        return std::exp(-0.5 * q);
    }

    /// Builds and factors C + jitter I with the current hyperparameters;
    /// escalates the jitter on factorization failure.
    void factorize() {
        const std::size_t n = inputs_.size();
        for (int attempt = 0; attempt < 4; ++attempt) {
            chol_.assign(n * n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j <= i; ++j) {
                    chol_[i * n + j] = correlation(inputs_[i], inputs_[j]);
                }
                chol_[i * n + i] += hyper_.jitter;
            }
            if (cholesky_in_place()) {
                alpha_ = y_std_;
                forward_solve(alpha_);
                backward_solve(alpha_);
                return;
            }
            hyper_.jitter *= 100.0;
        }
        throw std::runtime_error("GPModel: covariance factorization failed at maximum jitter");
    }

    bool cholesky_in_place() {
        const std::size_t n = inputs_.size();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double sum = chol_[i * n + j];
                for (std::size_t k = 0; k < j; ++k) sum -= chol_[i * n + k] * chol_[j * n + k];
                if (i == j) {
                    if (!(sum > 0.0)) return false;
                    chol_[i * n + i] = std::sqrt(sum);
                } else {
                    chol_[i * n + j] = sum / chol_[j * n + j];
                }
            }
        }
        return true;
    }

    void forward_solve(std::vector<double>& b) const { // L x = b
        const std::size_t n = inputs_.size();
        for (std::size_t i = 0; i < n; ++i) {
            double sum = b[i];
            for (std::size_t k = 0; k < i; ++k) sum -= chol_[i * n + k] * b[k];
            b[i] = sum / chol_[i * n + i];
        }
    }

    void backward_solve(std::vector<double>& b) const { // L^T x = b
        const std::size_t n = inputs_.size();
        for (std::size_t i = n; i-- > 0;) {
            double sum = b[i];
            for (std::size_t k = i + 1; k < n; ++k) sum -= chol_[k * n + i] * b[k];
            b[i] = sum / chol_[i * n + i];
        }
    }

    /// Log marginal likelihood with the signal variance profiled out.
    double profile_log_marginal(const std::vector<double>& scales, double& signal_out) {
        hyper_.length_scales = scales;
        hyper_.signal_variance = 1.0;
        hyper_.jitter = 1e-8;
        try {
            factorize();
        } catch (const std::runtime_error&) {
            signal_out = 1.0;
            return -std::numeric_limits<double>::infinity();
        }
        const std::size_t n = inputs_.size();
        double quad = 0.0;
        for (std::size_t i = 0; i < n; ++i) quad += y_std_[i] * alpha_[i];
        const double signal = std::max(quad / double(n), 1e-12);
        double log_det = 0.0;
        for (std::size_t i = 0; i < n; ++i) log_det += std::log(chol_[i * n + i]);
        signal_out = signal;
        return -0.5 * double(n) * std::log(signal) - log_det - 0.5 * double(n);
    }

    std::size_t dim_ = 0;
    std::vector<std::vector<double>> inputs_;
    std::vector<double> targets_;
    std::vector<double> y_std_;
    double mean_y_ = 0.0;
    double std_y_ = 1.0;
    GpHyperparameters hyper_;
    std::vector<double> chol_;
    std::vector<double> alpha_;
};

} // namespace tdskit

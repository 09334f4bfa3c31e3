// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdskit/mesh.hpp"

namespace tdskit {

class SingularSystemError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Tridiagonal system A x = b. sub[0] and super[n-1] are unused.
struct TridiagonalSystem {
    std::vector<double> sub;
    std::vector<double> diag;
    std::vector<double> super;
    std::vector<double> rhs;

    std::size_t size() const { return diag.size(); }

    void validate() const {
        const std::size_t n = diag.size();
        if (n == 0 || sub.size() != n || super.size() != n || rhs.size() != n) {
            throw std::invalid_argument("TridiagonalSystem: inconsistent vector lengths");
        }
    }

    /// y = A x for the operator part (rhs ignored).
    std::vector<double> apply(std::span<const double> x) const {
        validate();
        const std::size_t n = size();
        std::vector<double> y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = diag[i] * x[i];
            if (i > 0) y[i] += sub[i] * x[i - 1];
            if (i + 1 < n) y[i] += super[i] * x[i + 1];
        }
        return y;
    }
};

/// Thomas algorithm. Throws SingularSystemError on a vanishing pivot.
inline std::vector<double> tridiag_solve(const TridiagonalSystem& system) {
    system.validate();
    const std::size_t n = system.size();
    std::vector<double> c(n), d(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        scale = std::max({scale, std::abs(system.diag[i]), std::abs(system.sub[i]),
                          std::abs(system.super[i])});
    }
    const double pivot_floor = scale > 0.0 ? scale * 1e-300 : 1e-300;

    double pivot = system.diag[0];
    if (std::abs(pivot) < pivot_floor) throw SingularSystemError("tridiag_solve: zero pivot at row 0");
    c[0] = system.super[0] / pivot;
    d[0] = system.rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = system.diag[i] - system.sub[i] * c[i - 1];
        if (std::abs(pivot) < pivot_floor) {
            throw SingularSystemError("tridiag_solve: zero pivot at row " + std::to_string(i));
        }
        c[i] = system.super[i] / pivot;
        d[i] = (system.rhs[i] - system.sub[i] * d[i - 1]) / pivot;
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

/// Assembles the finite-volume diffusion rate operator L, where (L C)_i is the
/// rate of change of cell i from interior-face fluxes:
///   (L C)_i = (1/V_i) sum_f A_f D_f (C_nbr - C_i) / delta_f.
/// Exterior faces carry no flux; boundary conditions are the caller's job.
/// `diffusivity_per_face` holds one value per interior face (cell_count - 1).
inline TridiagonalSystem assemble_diffusion(const Mesh1D& mesh,
                                            std::span<const double> diffusivity_per_face) {
    const std::size_t n = mesh.cell_count();
    if (diffusivity_per_face.size() != n - 1) {
        throw std::domain_error("assemble_diffusion: need one diffusivity per interior face");
    }
    TridiagonalSystem op;
    op.sub.assign(n, 0.0);
    op.diag.assign(n, 0.0);
    op.super.assign(n, 0.0);
    op.rhs.assign(n, 0.0);
    const auto& vol = mesh.volumes();
    for (std::size_t f = 0; f + 1 < n; ++f) {
        const double d = diffusivity_per_face[f];
        if (!(d >= 0.0)) throw std::domain_error("assemble_diffusion: diffusivities must be >= 0");
        const double g = mesh.interior_face_area(f) * d / mesh.interior_face_distance(f);
        op.diag[f] -= g / vol[f];
        op.super[f] += g / vol[f];
        op.diag[f + 1] -= g / vol[f + 1];
        op.sub[f + 1] += g / vol[f + 1];
    }
    return op;
}

namespace detail {

/// Dense m x m LU with partial pivoting, stored in place.
struct DenseLU {
    std::size_t m = 0;
    std::vector<double> a;      // factored matrix
    std::vector<std::size_t> p; // pivot rows

    void factor(std::span<const double> matrix, std::size_t size) {
        m = size;
        a.assign(matrix.begin(), matrix.end());
        p.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            std::size_t piv = k;
            for (std::size_t i = k + 1; i < m; ++i) {
                if (std::abs(a[i * m + k]) > std::abs(a[piv * m + k])) piv = i;
            }
            if (std::abs(a[piv * m + k]) < 1e-300) {
                throw SingularSystemError("block solve: singular diagonal block");
            }
            p[k] = piv;
            if (piv != k) {
                for (std::size_t c = 0; c < m; ++c) std::swap(a[k * m + c], a[piv * m + c]);
            }
            const double inv = 1.0 / a[k * m + k];
            for (std::size_t i = k + 1; i < m; ++i) {
                const double f = a[i * m + k] * inv;
                a[i * m + k] = f;
                for (std::size_t c = k + 1; c < m; ++c) a[i * m + c] -= f * a[k * m + c];
            }
        }
    }

    void solve(double* b) const {
        for (std::size_t k = 0; k < m; ++k) {
            if (p[k] != k) std::swap(b[k], b[p[k]]);
            for (std::size_t i = k + 1; i < m; ++i) b[i] -= a[i * m + k] * b[k];
        }
        for (std::size_t k = m; k-- > 0;) {
            for (std::size_t c = k + 1; c < m; ++c) b[k] -= a[k * m + c] * b[c];
            b[k] /= a[k * m + k];
        }
    }
};

} // namespace detail

/// Block-tridiagonal system with dense m x m blocks, solved by block Thomas
/// elimination (LU with partial pivoting inside each diagonal block).
class BlockTridiagonalSystem {
  public:
    BlockTridiagonalSystem(std::size_t cells, std::size_t block)
        : n_(cells), m_(block), sub_(cells * block * block, 0.0),
          diag_(cells * block * block, 0.0), super_(cells * block * block, 0.0),
          rhs_(cells * block, 0.0) {
        if (cells == 0 || block == 0) {
            throw std::invalid_argument("BlockTridiagonalSystem: empty system");
        }
    }

    std::size_t cells() const { return n_; }
    std::size_t block_size() const { return m_; }

    void clear() {
        std::fill(sub_.begin(), sub_.end(), 0.0);
        std::fill(diag_.begin(), diag_.end(), 0.0);
        std::fill(super_.begin(), super_.end(), 0.0);
        std::fill(rhs_.begin(), rhs_.end(), 0.0);
    }

    double& sub(std::size_t cell, std::size_t r, std::size_t c) { return sub_[(cell * m_ + r) * m_ + c]; }
    double& diag(std::size_t cell, std::size_t r, std::size_t c) { return diag_[(cell * m_ + r) * m_ + c]; }
    double& super(std::size_t cell, std::size_t r, std::size_t c) { return super_[(cell * m_ + r) * m_ + c]; }
    double& rhs(std::size_t cell, std::size_t r) { return rhs_[cell * m_ + r]; }

    /// Returns the solution laid out cell-major.
    std::vector<double> solve() const {
        const std::size_t n = n_, m = m_, mm = m_ * m_;
        detail::DenseLU lu;
        std::vector<double> sweep_g(n * mm, 0.0); // G_i = D~_i^{-1} U_i
        std::vector<double> sweep_h(n * m, 0.0);  // h_i = D~_i^{-1} (r_i - L_i h_{i-1})
        std::vector<double> dtilde(mm), col(m), rh(m);

        for (std::size_t cell = 0; cell < n; ++cell) {
            std::copy_n(&diag_[cell * mm], mm, dtilde.begin());
            std::copy_n(&rhs_[cell * m], m, rh.begin());
            if (cell > 0) {
                const double* l = &sub_[cell * mm];
                const double* gprev = &sweep_g[(cell - 1) * mm];
                const double* hprev = &sweep_h[(cell - 1) * m];
                for (std::size_t r = 0; r < m; ++r) {
                    for (std::size_t c = 0; c < m; ++c) {
                        double acc = 0.0;
                        for (std::size_t k = 0; k < m; ++k) acc += l[r * m + k] * gprev[k * m + c];
                        dtilde[r * m + c] -= acc;
                    }
                    double acc = 0.0;
                    for (std::size_t k = 0; k < m; ++k) acc += l[r * m + k] * hprev[k];
                    rh[r] -= acc;
                }
            }
            lu.factor(dtilde, m);
            // G_i column by column
            double* g = &sweep_g[cell * mm];
            if (cell + 1 < n) {
                const double* u = &super_[cell * mm];
                for (std::size_t c = 0; c < m; ++c) {
                    for (std::size_t r = 0; r < m; ++r) col[r] = u[r * m + c];
                    lu.solve(col.data());
                    for (std::size_t r = 0; r < m; ++r) g[r * m + c] = col[r];
                }
            }
            lu.solve(rh.data());
            std::copy_n(rh.begin(), m, &sweep_h[cell * m]);
        }

        std::vector<double> x(n * m);
        std::copy_n(&sweep_h[(n - 1) * m], m, &x[(n - 1) * m]);
        for (std::size_t cell = n - 1; cell-- > 0;) {
            const double* g = &sweep_g[cell * mm];
            const double* hx = &x[(cell + 1) * m];
            for (std::size_t r = 0; r < m; ++r) {
                double acc = sweep_h[cell * m + r];
                for (std::size_t k = 0; k < m; ++k) acc -= g[r * m + k] * hx[k];
                x[cell * m + r] = acc;
            }
        }
        return x;
    }

  private:
    std::size_t n_, m_;
    std::vector<double> sub_, diag_, super_, rhs_;
};

} // namespace tdskit

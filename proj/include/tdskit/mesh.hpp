// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace tdskit {

enum class Geometry { planar, spherical };

/// One region of a graded mesh: `cell_count` cells over `length`, with
/// consecutive cell widths following `grading_ratio` (1 = uniform).
struct MeshRegion {
    double length = 0.0;
    std::size_t cell_count = 0;
    double grading_ratio = 1.0;
};

/// 1D cell-centered finite-volume mesh, planar or spherical.
///
/// Spherical meshes must start at the origin; the center cell then has no
/// inner face, which realizes the symmetry condition there.
class Mesh1D {
  public:
    Mesh1D(std::vector<double> cell_edges, Geometry geometry)
        : edges_(std::move(cell_edges)), geometry_(geometry) {
        if (edges_.size() < 2) throw std::invalid_argument("Mesh1D: need at least one cell");
        if (edges_.front() < 0.0) throw std::invalid_argument("Mesh1D: first edge must be >= 0");
        for (std::size_t i = 1; i < edges_.size(); ++i) {
            if (!(edges_[i] > edges_[i - 1])) {
                throw std::invalid_argument("Mesh1D: edges must be strictly increasing");
            }
        }
        if (geometry_ == Geometry::spherical && edges_.front() != 0.0) {
            throw std::invalid_argument("Mesh1D: spherical mesh must start at r = 0");
        }

        const std::size_t n = cell_count();
        centers_.resize(n);
        volumes_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            centers_[i] = 0.5 * (edges_[i] + edges_[i + 1]);
            if (geometry_ == Geometry::planar) {
                volumes_[i] = edges_[i + 1] - edges_[i];
            } else {
                volumes_[i] = (4.0 * std::numbers::pi / 3.0) *
                              (std::pow(edges_[i + 1], 3) - std::pow(edges_[i], 3));
            }
        }
    }

    Geometry geometry() const { return geometry_; }
    std::size_t cell_count() const { return edges_.size() - 1; }
    const std::vector<double>& edges() const { return edges_; }
    const std::vector<double>& centers() const { return centers_; }
    const std::vector<double>& volumes() const { return volumes_; }

    double extent() const { return edges_.back(); }

    /// Area of the face at a given edge coordinate.
    double face_area(double coordinate) const {
        if (geometry_ == Geometry::planar) return 1.0;
        return 4.0 * std::numbers::pi * coordinate * coordinate;
    }

    /// Interior face i sits between cells i and i+1 (edge index i+1).
    double interior_face_area(std::size_t face) const { return face_area(edges_[face + 1]); }

    /// Distance between the centers of the cells adjacent to interior face i.
    double interior_face_distance(std::size_t face) const {
        return centers_[face + 1] - centers_[face];
    }

    /// Area of the outer boundary face.
    double outer_face_area() const { return face_area(edges_.back()); }

    /// Half-width of the last cell: ghost-value distance for a Dirichlet
    /// condition imposed at the outer boundary.
    double outer_face_distance() const { return edges_.back() - centers_.back(); }

  private:
    std::vector<double> edges_;
    Geometry geometry_;
    std::vector<double> centers_;
    std::vector<double> volumes_;
};

/// Builds a mesh from concatenated graded regions starting at `origin`.
///
/// Within a region the cell widths form a geometric progression with the
/// region's ratio, normalized so the widths sum exactly to the region length.
inline Mesh1D build_graded_mesh(const std::vector<MeshRegion>& regions, Geometry geometry,
                                double origin = 0.0) {
    if (regions.empty()) throw std::domain_error("build_graded_mesh: region list is empty");
    std::vector<double> edges;
    edges.push_back(origin);
    for (const auto& region : regions) {
        if (!(region.length > 0.0) || region.cell_count < 1 || !(region.grading_ratio > 0.0)) {
            throw std::invalid_argument(
                "build_graded_mesh: region needs length > 0, cells >= 1, ratio > 0");
        }
        const double q = region.grading_ratio;
        const std::size_t n = region.cell_count;
        // widths w0 * q^i normalized to the region length
        double sum = 0.0;
        double qi = 1.0;
        for (std::size_t i = 0; i < n; ++i, qi *= q) sum += qi;
        const double w0 = region.length / sum;
        const double region_start = edges.back();
        double acc = 0.0;
        qi = 1.0;
        for (std::size_t i = 0; i < n; ++i, qi *= q) {
            acc += w0 * qi;
            edges.push_back(i + 1 == n ? region_start + region.length : region_start + acc);
        }
    }
    return Mesh1D(std::move(edges), geometry);
}

/// Picks (cell_count, ratio) for a region of length L whose cell widths grow
/// from roughly `w_first` to roughly `w_last`. Used to assemble boundary-layer
/// meshes without hand-tuned cell counts.
inline MeshRegion graded_region(double length, double w_first, double w_last) {
    if (!(length > 0.0) || !(w_first > 0.0) || !(w_last > 0.0)) {
        throw std::invalid_argument("graded_region: lengths and widths must be > 0");
    }
    if (w_first + w_last >= length) {
        // too short to grade; fall back to a uniform region
        const auto n = static_cast<std::size_t>(
            std::max(1.0, std::round(length / std::min(w_first, w_last))));
        return {length, n, 1.0};
    }
    // geometric sum: L = w0 (q^n - 1)/(q - 1) with w_{n-1} = w0 q^{n-1}
    // eliminating n gives q = (L - w0) / (L - w_{n-1})
    const double q = (length - w_first) / (length - w_last);
    if (std::abs(q - 1.0) < 1e-12) {
        const auto n = static_cast<std::size_t>(std::max(1.0, std::round(length / w_first)));
        return {length, n, 1.0};
    }
    const double n_real = 1.0 + std::log(w_last / w_first) / std::log(q);
    const auto n = static_cast<std::size_t>(std::max(1.0, std::round(n_real)));
    return {length, n, std::pow(w_last / w_first, n > 1 ? 1.0 / (double(n) - 1.0) : 0.0)};
}

} // namespace tdskit

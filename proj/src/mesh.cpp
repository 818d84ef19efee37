#include "neurofem/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace neurofem {

Mesh1D::Mesh1D(Index n_elements) : n_elements_(n_elements) {
    if (n_elements < 1)
        throw std::invalid_argument("Mesh1D: n_elements must be positive");
    nodes_.resize(static_cast<std::size_t>(n_elements + 1));
    for (Index i = 0; i <= n_elements; ++i)
        nodes_[static_cast<std::size_t>(i)] = static_cast<double>(i) / static_cast<double>(n_elements);
}

Index Mesh1D::locate(double x) const {
    constexpr double tol = 1e-13;
    if (!(x >= -tol && x <= 1.0 + tol))
        throw OutOfDomainError("Mesh1D::locate: point outside [0,1]");
    // Nodes are exact multiples of h, so snap to the nearest node first to keep
    // the left-element convention stable under rounding.
    const double scaled = x * static_cast<double>(n_elements_);
    const double nearest = std::round(scaled);
    Index e;
    if (std::abs(scaled - nearest) < 1e-10)
        e = static_cast<Index>(nearest) - 1;
    else
        e = static_cast<Index>(std::floor(scaled));
    return std::clamp<Index>(e, 0, n_elements_ - 1);
}

Mesh2DTri::Mesh2DTri(Index nx, Index ny) : nx_(nx), ny_(ny) {
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("Mesh2DTri: subdivisions must be positive");
    const auto grid = [nx](Index i, Index j) { return j * (nx + 1) + i; };
    for (Index j = 0; j <= ny; ++j)
        for (Index i = 0; i <= nx; ++i)
            vertices_.emplace_back(static_cast<double>(i) / nx, static_cast<double>(j) / ny);
    const Index centre0 = static_cast<Index>(vertices_.size());
    for (Index j = 0; j < ny; ++j)
        for (Index i = 0; i < nx; ++i)
            vertices_.emplace_back((i + 0.5) / nx, (j + 0.5) / ny);
    // Per cell: bottom, right, top, left (all counter-clockwise).
    for (Index j = 0; j < ny; ++j) {
        for (Index i = 0; i < nx; ++i) {
            const Index c = centre0 + j * nx + i;
            const Index v00 = grid(i, j), v10 = grid(i + 1, j), v11 = grid(i + 1, j + 1), v01 = grid(i, j + 1);
            triangles_.push_back({v00, v10, c});
            triangles_.push_back({v10, v11, c});
            triangles_.push_back({v11, v01, c});
            triangles_.push_back({v01, v00, c});
        }
    }
}

double Mesh2DTri::area(Index e) const {
    const auto& t = triangle(e);
    const Point a = vertex(t[1]) - vertex(t[0]);
    const Point b = vertex(t[2]) - vertex(t[0]);
    return 0.5 * (a[0] * b[1] - a[1] * b[0]);
}

Index Mesh2DTri::locate(const Point& x) const {
    constexpr double tol = 1e-13;
    if (!(x[0] >= -tol && x[0] <= 1.0 + tol && x[1] >= -tol && x[1] <= 1.0 + tol))
        throw OutOfDomainError("Mesh2DTri::locate: point outside the unit square");
    const double sx = std::clamp(x[0], 0.0, 1.0) * nx_;
    const double sy = std::clamp(x[1], 0.0, 1.0) * ny_;
    const Index i = std::min<Index>(static_cast<Index>(sx), nx_ - 1);
    const Index j = std::min<Index>(static_cast<Index>(sy), ny_ - 1);
    const double dx = sx - i - 0.5, dy = sy - j - 0.5;
    Index local;
    if (std::abs(dy) >= std::abs(dx))
        local = dy < 0 ? 0 : 2;
    else
        local = dx > 0 ? 1 : 3;
    return 4 * (j * nx_ + i) + local;
}

Point Mesh2DTri::map(Index e, const Point& ref) const {
    const auto& t = triangle(e);
    return vertex(t[0]) + ref[0] * (vertex(t[1]) - vertex(t[0])) + ref[1] * (vertex(t[2]) - vertex(t[0]));
}

std::array<Eigen::Vector2d, 3> Mesh2DTri::barycentric_gradients(Index e) const {
    const auto& t = triangle(e);
    const Point& p0 = vertex(t[0]);
    const Point& p1 = vertex(t[1]);
    const Point& p2 = vertex(t[2]);
    const double twice_area = 2.0 * area(e);
    std::array<Eigen::Vector2d, 3> g;
    g[0] = Eigen::Vector2d(p1[1] - p2[1], p2[0] - p1[0]) / twice_area;
    g[1] = Eigen::Vector2d(p2[1] - p0[1], p0[0] - p2[0]) / twice_area;
    g[2] = Eigen::Vector2d(p0[1] - p1[1], p1[0] - p0[0]) / twice_area;
    return g;
}

Mesh1D build_uniform_mesh_1d(Index n_elements) { return Mesh1D(n_elements); }

Mesh2DTri build_crisscross_mesh(Index nx, Index ny) { return Mesh2DTri(nx, ny); }

}  // namespace neurofem

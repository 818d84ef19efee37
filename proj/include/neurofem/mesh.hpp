#pragma once

#include "neurofem/common.hpp"

#include <array>
#include <memory>
#include <variant>
#include <vector>

namespace neurofem {

/// Uniform partition of [0,1].
class Mesh1D {
public:
    explicit Mesh1D(Index n_elements);

    Index n_elements() const { return n_elements_; }
    Index n_nodes() const { return n_elements_ + 1; }
    double h() const { return 1.0 / static_cast<double>(n_elements_); }
    const std::vector<double>& nodes() const { return nodes_; }
    double node(Index i) const { return nodes_[static_cast<std::size_t>(i)]; }

    /// Element containing x. At interior nodes the element on the left is
    /// returned; x = 0 maps to the first element.
    Index locate(double x) const;

    /// Affine map of the reference coordinate s in [0,1] into element e.
    double map(Index e, double s) const { return node(e) + s * h(); }

private:
    Index n_elements_;
    std::vector<double> nodes_;
};

/// Structured criss-cross triangulation of the unit square: every cell is cut
/// along both diagonals into four triangles sharing a centre vertex.
class Mesh2DTri {
public:
    Mesh2DTri(Index nx, Index ny);

    Index nx() const { return nx_; }
    Index ny() const { return ny_; }
    Index n_elements() const { return static_cast<Index>(triangles_.size()); }
    Index n_nodes() const { return static_cast<Index>(vertices_.size()); }
    const std::vector<Point>& vertices() const { return vertices_; }
    const std::vector<std::array<Index, 3>>& triangles() const { return triangles_; }
    const Point& vertex(Index i) const { return vertices_[static_cast<std::size_t>(i)]; }
    const std::array<Index, 3>& triangle(Index e) const { return triangles_[static_cast<std::size_t>(e)]; }

    /// Signed area (positive for counter-clockwise orientation).
    double area(Index e) const;
    Index locate(const Point& x) const;

    /// Affine map of reference coordinates (s,t) into triangle e.
    Point map(Index e, const Point& ref) const;
    /// Gradients of the three barycentric coordinates on triangle e.
    std::array<Eigen::Vector2d, 3> barycentric_gradients(Index e) const;

private:
    Index nx_, ny_;
    std::vector<Point> vertices_;
    std::vector<std::array<Index, 3>> triangles_;
};

Mesh1D build_uniform_mesh_1d(Index n_elements);
Mesh2DTri build_crisscross_mesh(Index nx, Index ny);

using MeshHandle = std::variant<std::shared_ptr<const Mesh1D>, std::shared_ptr<const Mesh2DTri>>;

inline int mesh_dimension(const MeshHandle& mesh) { return mesh.index() == 0 ? 1 : 2; }

}  // namespace neurofem

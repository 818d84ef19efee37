#pragma once

#include "neurofem/mesh.hpp"

#include <functional>

namespace neurofem {

enum class SpaceKind { P0, P1, P1Disc };

struct ShapeValue {
    double value = 0.0;
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
};

/// A basis function restricted to one element; dof < 0 marks a constrained node.
struct LocalShape {
    Index dof = -1;
    ShapeValue shape;
};

struct LocalBasis {
    std::array<LocalShape, 3> shapes;
    int count = 0;

    const LocalShape* begin() const { return shapes.data(); }
    const LocalShape* end() const { return shapes.data() + count; }
};

/// Lagrange space on a 1D or 2D mesh. P1 spaces eliminate constrained
/// (essential boundary) nodes from the numbering, so every represented
/// function vanishes there.
class FunctionSpace {
public:
    using BoundaryPredicate = std::function<bool(const Point&)>;

    static FunctionSpace p0(MeshHandle mesh);
    static FunctionSpace p1(MeshHandle mesh, const BoundaryPredicate& constrained = {});
    static FunctionSpace p1_disc(MeshHandle mesh);

    SpaceKind kind() const { return kind_; }
    const MeshHandle& mesh() const { return mesh_; }
    int dimension() const { return mesh_dimension(mesh_); }
    Index dim() const { return dim_; }
    Index n_elements() const;
    /// Mesh size parameter: 1/N in 1D, 1/nx in 2D.
    double h() const;

    bool is_constrained(Index node) const { return dof_of_node_[static_cast<std::size_t>(node)] < 0; }
    const std::vector<Index>& dof_of_node() const { return dof_of_node_; }

    /// Basis functions supported on element e, evaluated at the physical point x.
    LocalBasis local_basis(Index element, const Point& x) const;
    Index locate(const Point& x) const;

    /// Element of this space's mesh containing the given element of another
    /// mesh of the same family. Requires nested 1D meshes or identical 2D meshes.
    Index parent_element(const MeshHandle& finer, Index fine_element) const;

    /// Point at which the dof is nodally defined (centroid for P0).
    Point dof_point(Index dof) const;

private:
    FunctionSpace(MeshHandle mesh, SpaceKind kind) : mesh_(std::move(mesh)), kind_(kind) {}

    MeshHandle mesh_;
    SpaceKind kind_;
    Index dim_ = 0;
    std::vector<Index> dof_of_node_;
    std::vector<Point> dof_points_;
};

/// Finite element function: coefficient vector over the free dofs of a space.
struct FEFunction {
    FunctionSpace space;
    Eigen::VectorXd coeffs;

    FEFunction(FunctionSpace s, Eigen::VectorXd c);
    explicit FEFunction(FunctionSpace s) : FEFunction(s, Eigen::VectorXd::Zero(s.dim())) {}
};

double eval_fe(const FEFunction& f, const Point& x);
double eval_fe(const FEFunction& f, double x);
/// Gradient of a P1 (or broken P1) function; zero for P0.
Eigen::Vector2d eval_fe_grad(const FEFunction& f, const Point& x);

/// Nodal interpolant (element-centroid value for P0).
FEFunction interpolate(const FunctionSpace& space, const std::function<double(const Point&)>& g);

/// Mesh of the same family refined by an integer factor (1D only).
MeshHandle refine_mesh(const MeshHandle& mesh, Index factor);

namespace boundary {
inline bool left(const Point& p) { return p[0] < 1e-12; }
inline bool right(const Point& p) { return p[0] > 1.0 - 1e-12; }
inline bool left_or_right(const Point& p) { return left(p) || right(p); }
}  // namespace boundary

}  // namespace neurofem

#include "neurofem/function_space.hpp"

namespace neurofem {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Index mesh_elements(const MeshHandle& mesh) {
    return std::visit([](const auto& m) { return m->n_elements(); }, mesh);
}

Index mesh_nodes(const MeshHandle& mesh) {
    return std::visit([](const auto& m) { return m->n_nodes(); }, mesh);
}

Point mesh_node(const MeshHandle& mesh, Index i) {
    return std::visit(overloaded{[i](const std::shared_ptr<const Mesh1D>& m) { return point1d(m->node(i)); },
                                 [i](const std::shared_ptr<const Mesh2DTri>& m) { return m->vertex(i); }},
                      mesh);
}

}  // namespace

FunctionSpace FunctionSpace::p0(MeshHandle mesh) {
    FunctionSpace s(std::move(mesh), SpaceKind::P0);
    s.dim_ = mesh_elements(s.mesh_);
    s.dof_points_.reserve(static_cast<std::size_t>(s.dim_));
    std::visit(overloaded{[&](const std::shared_ptr<const Mesh1D>& m) {
                              for (Index e = 0; e < m->n_elements(); ++e)
                                  s.dof_points_.push_back(point1d(m->map(e, 0.5)));
                          },
                          [&](const std::shared_ptr<const Mesh2DTri>& m) {
                              for (Index e = 0; e < m->n_elements(); ++e)
                                  s.dof_points_.push_back(m->map(e, Point(1.0 / 3.0, 1.0 / 3.0)));
                          }},
               s.mesh_);
    return s;
}

FunctionSpace FunctionSpace::p1(MeshHandle mesh, const BoundaryPredicate& constrained) {
    FunctionSpace s(std::move(mesh), SpaceKind::P1);
    const Index n = mesh_nodes(s.mesh_);
    s.dof_of_node_.assign(static_cast<std::size_t>(n), -1);
    for (Index i = 0; i < n; ++i) {
        const Point p = mesh_node(s.mesh_, i);
        if (constrained && constrained(p))
            continue;
        s.dof_of_node_[static_cast<std::size_t>(i)] = s.dim_++;
        s.dof_points_.push_back(p);
    }
    return s;
}

FunctionSpace FunctionSpace::p1_disc(MeshHandle mesh) {
    FunctionSpace s(std::move(mesh), SpaceKind::P1Disc);
    std::visit(overloaded{[&](const std::shared_ptr<const Mesh1D>& m) {
                              for (Index e = 0; e < m->n_elements(); ++e) {
                                  s.dof_points_.push_back(point1d(m->node(e)));
                                  s.dof_points_.push_back(point1d(m->node(e + 1)));
                              }
                          },
                          [&](const std::shared_ptr<const Mesh2DTri>& m) {
                              for (Index e = 0; e < m->n_elements(); ++e)
                                  for (Index v : m->triangle(e))
                                      s.dof_points_.push_back(m->vertex(v));
                          }},
               s.mesh_);
    s.dim_ = static_cast<Index>(s.dof_points_.size());
    return s;
}

Index FunctionSpace::n_elements() const { return mesh_elements(mesh_); }

double FunctionSpace::h() const {
    return std::visit(overloaded{[](const std::shared_ptr<const Mesh1D>& m) { return m->h(); },
                                 [](const std::shared_ptr<const Mesh2DTri>& m) { return 1.0 / m->nx(); }},
                      mesh_);
}

Index FunctionSpace::locate(const Point& x) const {
    return std::visit(overloaded{[&](const std::shared_ptr<const Mesh1D>& m) { return m->locate(x[0]); },
                                 [&](const std::shared_ptr<const Mesh2DTri>& m) { return m->locate(x); }},
                      mesh_);
}

LocalBasis FunctionSpace::local_basis(Index e, const Point& x) const {
    LocalBasis basis;
    if (kind_ == SpaceKind::P0) {
        basis.count = 1;
        basis.shapes[0] = {e, {1.0, Eigen::Vector2d::Zero()}};
        return basis;
    }
    std::visit(overloaded{[&](const std::shared_ptr<const Mesh1D>& m) {
                              const double h = m->h();
                              const double left = m->node(e);
                              const double s = (x[0] - left) / h;
                              basis.count = 2;
                              basis.shapes[0].shape = {1.0 - s, Eigen::Vector2d(-1.0 / h, 0.0)};
                              basis.shapes[1].shape = {s, Eigen::Vector2d(1.0 / h, 0.0)};
                              if (kind_ == SpaceKind::P1) {
                                  basis.shapes[0].dof = dof_of_node_[static_cast<std::size_t>(e)];
                                  basis.shapes[1].dof = dof_of_node_[static_cast<std::size_t>(e + 1)];
                              } else {
                                  basis.shapes[0].dof = 2 * e;
                                  basis.shapes[1].dof = 2 * e + 1;
                              }
                          },
                          [&](const std::shared_ptr<const Mesh2DTri>& m) {
                              const auto grads = m->barycentric_gradients(e);
                              const auto& tri = m->triangle(e);
                              const Point centroid =
                                  (m->vertex(tri[0]) + m->vertex(tri[1]) + m->vertex(tri[2])) / 3.0;
                              basis.count = 3;
                              for (int i = 0; i < 3; ++i) {
                                  basis.shapes[i].shape = {1.0 / 3.0 + grads[i].dot(x - centroid), grads[i]};
                                  basis.shapes[i].dof = kind_ == SpaceKind::P1
                                                            ? dof_of_node_[static_cast<std::size_t>(tri[i])]
                                                            : 3 * e + i;
                              }
                          }},
               mesh_);
    return basis;
}

Index FunctionSpace::parent_element(const MeshHandle& finer, Index fine_element) const {
    if (finer.index() != mesh_.index())
        throw std::invalid_argument("FunctionSpace: meshes of different dimension");
    if (finer.index() == 0) {
        const Index n_fine = std::get<0>(finer)->n_elements();
        const Index n_own = std::get<0>(mesh_)->n_elements();
        if (n_fine % n_own != 0)
            throw std::invalid_argument("FunctionSpace: 1D meshes are not nested");
        return fine_element / (n_fine / n_own);
    }
    const auto& a = *std::get<1>(finer);
    const auto& b = *std::get<1>(mesh_);
    if (a.nx() != b.nx() || a.ny() != b.ny())
        throw std::invalid_argument("FunctionSpace: 2D spaces must share the mesh");
    return fine_element;
}

Point FunctionSpace::dof_point(Index dof) const { return dof_points_[static_cast<std::size_t>(dof)]; }

FEFunction::FEFunction(FunctionSpace s, Eigen::VectorXd c) : space(std::move(s)), coeffs(std::move(c)) {
    if (coeffs.size() != space.dim())
        throw std::invalid_argument("FEFunction: coefficient length does not match space dimension");
}

double eval_fe(const FEFunction& f, const Point& x) {
    const Index e = f.space.locate(x);
    double value = 0.0;
    for (const auto& s : f.space.local_basis(e, x))
        if (s.dof >= 0)
            value += f.coeffs[s.dof] * s.shape.value;
    return value;
}

double eval_fe(const FEFunction& f, double x) {
    if (f.space.dimension() != 1)
        throw std::invalid_argument("eval_fe: scalar point given for a 2D function");
    return eval_fe(f, point1d(x));
}

Eigen::Vector2d eval_fe_grad(const FEFunction& f, const Point& x) {
    const Index e = f.space.locate(x);
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (const auto& s : f.space.local_basis(e, x))
        if (s.dof >= 0)
            g += f.coeffs[s.dof] * s.shape.grad;
    return g;
}

FEFunction interpolate(const FunctionSpace& space, const std::function<double(const Point&)>& g) {
    Eigen::VectorXd c(space.dim());
    for (Index i = 0; i < space.dim(); ++i)
        c[i] = g(space.dof_point(i));
    return FEFunction(space, std::move(c));
}

MeshHandle refine_mesh(const MeshHandle& mesh, Index factor) {
    if (factor < 1)
        throw std::invalid_argument("refine_mesh: factor must be positive");
    if (mesh.index() != 0)
        throw std::invalid_argument("refine_mesh: only 1D meshes can be refined");
    return std::make_shared<const Mesh1D>(std::get<0>(mesh)->n_elements() * factor);
}

}  // namespace neurofem

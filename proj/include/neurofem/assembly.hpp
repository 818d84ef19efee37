#pragma once

#include "neurofem/function_space.hpp"
#include "neurofem/quadrature.hpp"

#include <type_traits>

namespace neurofem {

/// Order-3 Gauss in 1D, mid-edge rule in 2D.
QuadratureRule default_rule(int dimension);

struct QuadraturePoint {
    Index index = 0;
    Index element = 0;  ///< element of the integration mesh
    Point x = Point::Zero();
    double jxw = 0.0;   ///< quadrature weight times element measure
    LocalBasis trial;
    LocalBasis test;
};

/// Quadrature points over the finer of two nested meshes, with both spaces'
/// local bases tabulated at every point.
class QuadratureCache {
public:
    QuadratureCache(const FunctionSpace& trial, const FunctionSpace& test, const QuadratureRule& rule);
    QuadratureCache(const FunctionSpace& space, const QuadratureRule& rule) : QuadratureCache(space, space, rule) {}

    const FunctionSpace& trial() const { return trial_; }
    const FunctionSpace& test() const { return test_; }
    const MeshHandle& integration_mesh() const { return integration_mesh_; }
    const std::vector<QuadraturePoint>& points() const { return points_; }
    Index size() const { return static_cast<Index>(points_.size()); }

    auto begin() const { return points_.begin(); }
    auto end() const { return points_.end(); }

private:
    FunctionSpace trial_;
    FunctionSpace test_;
    MeshHandle integration_mesh_;
    std::vector<QuadraturePoint> points_;
};

namespace detail {
template <class Field>
decltype(auto) sample(Field& field, const QuadraturePoint& qp) {
    if constexpr (std::is_invocable_v<Field&, const QuadraturePoint&>)
        return field(qp);
    else
        return field(qp.x);
}
}  // namespace detail

inline double unit_field(const Point&) { return 1.0; }

/// Matrix M(i,j) = sum_q jxw * kernel(trial_j, test_i, x_q, field(x_q)).
/// `field` may take a Point or a QuadraturePoint; its result is passed through
/// to the kernel unchanged.
template <class Kernel, class Field>
Eigen::MatrixXd assemble_form(const QuadratureCache& cache, Kernel&& kernel, Field&& field) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(cache.test().dim(), cache.trial().dim());
    for (const auto& qp : cache) {
        const auto w = detail::sample(field, qp);
        for (const auto& v : qp.test) {
            if (v.dof < 0)
                continue;
            for (const auto& u : qp.trial) {
                if (u.dof < 0)
                    continue;
                m(v.dof, u.dof) += qp.jxw * kernel(u.shape, v.shape, qp.x, w);
            }
        }
    }
    return m;
}

template <class Kernel, class Field>
Eigen::MatrixXd assemble_form(const FunctionSpace& trial, const FunctionSpace& test, Kernel&& kernel,
                              Field&& field, const QuadratureRule& rule) {
    return assemble_form(QuadratureCache(trial, test, rule), std::forward<Kernel>(kernel),
                         std::forward<Field>(field));
}

/// Vector b(i) = sum_q jxw * kernel(test_i, x_q, field(x_q)).
template <class Kernel, class Field>
Eigen::VectorXd assemble_functional(const QuadratureCache& cache, Kernel&& kernel, Field&& field) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(cache.test().dim());
    for (const auto& qp : cache) {
        const auto w = detail::sample(field, qp);
        for (const auto& v : qp.test)
            if (v.dof >= 0)
                b[v.dof] += qp.jxw * kernel(v.shape, qp.x, w);
    }
    return b;
}

template <class Kernel>
Eigen::VectorXd assemble_functional(const FunctionSpace& test, Kernel&& kernel, const QuadratureRule& rule) {
    return assemble_functional(QuadratureCache(test, rule), std::forward<Kernel>(kernel), unit_field);
}

/// Value of sum_k c_k phi_k at a tabulated point, from one side of the cache.
inline double local_value(const LocalBasis& basis, const Eigen::VectorXd& coeffs) {
    double v = 0.0;
    for (const auto& s : basis)
        if (s.dof >= 0)
            v += coeffs[s.dof] * s.shape.value;
    return v;
}

inline Eigen::Vector2d local_grad(const LocalBasis& basis, const Eigen::VectorXd& coeffs) {
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (const auto& s : basis)
        if (s.dof >= 0)
            g += coeffs[s.dof] * s.shape.grad;
    return g;
}

// Common kernels.
inline double mass_kernel(const ShapeValue& u, const ShapeValue& v, const Point&, double w) {
    return w * u.value * v.value;
}
inline double stiffness_kernel(const ShapeValue& u, const ShapeValue& v, const Point&, double w) {
    return w * u.grad.dot(v.grad);
}

}  // namespace neurofem

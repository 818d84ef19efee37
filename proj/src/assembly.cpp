#include "neurofem/assembly.hpp"

namespace neurofem {

QuadratureRule default_rule(int dimension) {
    return dimension == 1 ? gauss_quadrature_1d(3) : triangle_midedge_rule();
}

QuadratureCache::QuadratureCache(const FunctionSpace& trial, const FunctionSpace& test, const QuadratureRule& rule)
    : trial_(trial), test_(test) {
    if (trial.dimension() != test.dimension())
        throw std::invalid_argument("QuadratureCache: trial and test spaces have different dimensions");
    if (rule.dimension != trial.dimension())
        throw std::invalid_argument("QuadratureCache: quadrature rule dimension does not match the spaces");
    integration_mesh_ = trial.n_elements() >= test.n_elements() ? trial.mesh() : test.mesh();
    const Index n_el = std::visit([](const auto& m) { return m->n_elements(); }, integration_mesh_);
    points_.reserve(static_cast<std::size_t>(n_el * rule.size()));
    for (Index e = 0; e < n_el; ++e) {
        const Index e_trial = trial.parent_element(integration_mesh_, e);
        const Index e_test = test.parent_element(integration_mesh_, e);
        for (Index q = 0; q < rule.size(); ++q) {
            QuadraturePoint qp;
            qp.index = static_cast<Index>(points_.size());
            qp.element = e;
            if (integration_mesh_.index() == 0) {
                const auto& m = *std::get<0>(integration_mesh_);
                qp.x = point1d(m.map(e, rule.points[q][0]));
                qp.jxw = rule.weights[q] * m.h();
            } else {
                const auto& m = *std::get<1>(integration_mesh_);
                qp.x = m.map(e, rule.points[q]);
                qp.jxw = rule.weights[q] * 2.0 * m.area(e);
            }
            qp.trial = trial.local_basis(e_trial, qp.x);
            qp.test = test.local_basis(e_test, qp.x);
            points_.push_back(qp);
        }
    }
}

}  // namespace neurofem

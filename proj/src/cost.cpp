#include "neurofem/cost.hpp"

#include <cmath>

namespace neurofem {

namespace {

QuadratureRule cost_rule(int dimension) {
    return dimension == 1 ? gauss_quadrature_1d(5) : triangle_degree5_rule();
}

bool inside_domain(const Point& x, int dimension) {
    for (int k = 0; k < dimension; ++k)
        if (!(x[k] >= 0.0 && x[k] <= 1.0))
            return false;
    return dimension == 2 || x[1] == 0.0;
}

}  // namespace

CostFunctional::CostFunctional(CostSpec spec, const ProblemSpec& problem, const FunctionSpace& trial)
    : spec_(std::move(spec)), problem_(problem), trial_(trial) {
    if (!(spec_.alpha >= 0.0))
        throw std::invalid_argument("CostSpec: alpha must be nonnegative");
    if (!(spec_.l1_smoothing > 0.0))
        throw std::invalid_argument("CostSpec: smoothing parameter must be positive");

    std::vector<PointValueQoI> points;
    if (const auto* p = std::get_if<PointValueQoI>(&spec_.variant))
        points.push_back(*p);
    else if (const auto* s = std::get_if<PointValueSum>(&spec_.variant))
        points = s->terms;
    for (const auto& p : points) {
        if (!inside_domain(p.x0, trial.dimension()))
            throw std::invalid_argument("PointValueQoI: x0 lies outside the domain");
        if (!p.target && !problem.has_exact())
            throw std::invalid_argument("PointValueQoI: target 'exact' needs an exact solution");
        Index el = trial.locate(p.x0);
        if (p.side == NodeSide::Right && trial.dimension() == 1) {
            const double scaled = p.x0[0] * static_cast<double>(trial.n_elements());
            if (el + 1 < trial.n_elements() && std::abs(scaled - static_cast<double>(el + 1)) < 1e-10)
                ++el;
        }
        data_.push_back({p.x0, p.target ? *p.target : problem.exact_solution(p.x0), el});
    }

    cache_ = std::make_shared<const QuadratureCache>(trial_, cost_rule(trial.dimension()));
    forcing_.reserve(static_cast<std::size_t>(cache_->size()));
    for (const auto& qp : *cache_)
        forcing_.push_back(problem_.f(qp.x));
    if (const auto* w = std::get_if<WeightedResidualL2>(&spec_.variant)) {
        if (!w->weight)
            throw std::invalid_argument("WeightedResidualL2: missing weight");
        for (const auto& qp : *cache_)
            residual_weight_.push_back(w->weight(qp.x));
    }
}

double CostFunctional::point_value(const Datum& d, const FEFunction& u) const {
    double v = 0.0;
    for (const auto& s : trial_.local_basis(d.element, d.x))
        if (s.dof >= 0)
            v += u.coeffs[s.dof] * s.shape.value;
    return v;
}

double CostFunctional::residual_at(const QuadraturePoint& qp, const FEFunction& u) const {
    return forcing_[static_cast<std::size_t>(qp.index)] -
           problem_.apply(local_value(qp.trial, u.coeffs), local_grad(qp.trial, u.coeffs));
}

double CostFunctional::j1(const FEFunction& u) const {
    const double eps = spec_.l1_smoothing;
    if (!data_.empty()) {
        double j = 0.0;
        for (const auto& d : data_) {
            const double e = point_value(d, u) - d.target;
            j += 0.5 * e * e;
        }
        return j;
    }
    double j = 0.0;
    if (std::holds_alternative<WeightedResidualL2>(spec_.variant)) {
        for (const auto& qp : *cache_) {
            const double res = residual_at(qp, u);
            j += 0.5 * qp.jxw * residual_weight_[static_cast<std::size_t>(qp.index)] * res * res;
        }
    } else if (std::holds_alternative<ResidualL1>(spec_.variant)) {
        for (const auto& qp : *cache_)
            j += qp.jxw * smoothed_abs(residual_at(qp, u), eps);
    } else if (trial_.kind() == SpaceKind::P0) {
        if (trial_.dimension() != 1)
            throw std::invalid_argument("TotalVariationL1: P0 states are supported in 1D only");
        for (Index e = 0; e + 1 < u.coeffs.size(); ++e)
            j += smoothed_abs(u.coeffs[e + 1] - u.coeffs[e], eps);
    } else {
        for (const auto& qp : *cache_) {
            const Eigen::Vector2d g = local_grad(qp.trial, u.coeffs);
            j += qp.jxw * std::sqrt(g.squaredNorm() + eps * eps);
        }
    }
    return j;
}

Eigen::VectorXd CostFunctional::grad_u(const FEFunction& u) const {
    const double eps = spec_.l1_smoothing;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(trial_.dim());
    if (!data_.empty()) {
        for (const auto& d : data_) {
            const double e = point_value(d, u) - d.target;
            for (const auto& s : trial_.local_basis(d.element, d.x))
                if (s.dof >= 0)
                    g[s.dof] += e * s.shape.value;
        }
        return g;
    }
    const bool l2 = std::holds_alternative<WeightedResidualL2>(spec_.variant);
    if (l2 || std::holds_alternative<ResidualL1>(spec_.variant)) {
        for (const auto& qp : *cache_) {
            const double res = residual_at(qp, u);
            const double s = l2 ? residual_weight_[static_cast<std::size_t>(qp.index)] * res
                                : res / smoothed_abs(res, eps);
            for (const auto& v : qp.trial)
                if (v.dof >= 0)
                    g[v.dof] -= qp.jxw * s * problem_.apply(v.shape);
        }
    } else if (trial_.kind() == SpaceKind::P0) {
        for (Index e = 0; e + 1 < u.coeffs.size(); ++e) {
            const double jump = u.coeffs[e + 1] - u.coeffs[e];
            const double s = jump / smoothed_abs(jump, eps);
            g[e + 1] += s;
            g[e] -= s;
        }
    } else {
        for (const auto& qp : *cache_) {
            const Eigen::Vector2d gu = local_grad(qp.trial, u.coeffs);
            const double norm = std::sqrt(gu.squaredNorm() + eps * eps);
            for (const auto& v : qp.trial)
                if (v.dof >= 0)
                    g[v.dof] += qp.jxw * gu.dot(v.shape.grad) / norm;
        }
    }
    return g;
}

double CostFunctional::regularization(const QuadratureCache& cache, const Eigen::VectorXd& xi_samples) const {
    if (spec_.alpha == 0.0)
        return 0.0;
    return 0.5 * spec_.alpha * xi_l2_squared(cache, xi_samples);
}

double xi_l2_squared(const QuadratureCache& cache, const Eigen::VectorXd& xi_samples) {
    if (xi_samples.size() != cache.size())
        throw std::invalid_argument("xi_l2_squared: sample count does not match the quadrature");
    double s = 0.0;
    for (const auto& qp : cache)
        s += qp.jxw * xi_samples[qp.index] * xi_samples[qp.index];
    return s;
}

double xi_l2_squared(const QuadratureCache& cache, const Net& xi) {
    double s = 0.0;
    for (const auto& qp : cache) {
        const double v = sample_control(xi, qp.x).value;
        s += qp.jxw * v * v;
    }
    return s;
}

double cost_eval(const CostSpec& spec, const StateSolver& solver, const StateSolution& sol) {
    const CostFunctional j(spec, solver.problem(), solver.trial());
    return j.j1(sol.u) + j.regularization(solver.control_cache(), sol.control.xi);
}

Eigen::VectorXd cost_grad_u(const CostSpec& spec, const ProblemSpec& problem, const FEFunction& u) {
    return CostFunctional(spec, problem, u.space).grad_u(u);
}

ParamVector cost_grad_xi_reg(const CostSpec& spec, const Net& xi, const QuadratureCache& cache) {
    ParamVector g = ParamVector::Zero(xi.n_params());
    if (spec.alpha == 0.0)
        return g;
    for (const auto& qp : cache) {
        const double v = sample_control(xi, qp.x).value;
        g += (spec.alpha * qp.jxw * v) * control_param_gradient(xi, qp.x);
    }
    return g;
}

}  // namespace neurofem

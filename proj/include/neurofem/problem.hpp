#pragma once

#include "neurofem/function_space.hpp"

#include <functional>

namespace neurofem {

enum class BoundaryCondition {
    Inflow,    ///< u = 0 on {x1 = 0}
    BothEnds,  ///< u = 0 on {x1 = 0} and {x1 = 1} (over-constrained)
};

/// Linear advection-reaction(-diffusion) problem
///   -diffusion * Laplace(u) + beta . grad(u) + sigma * u = f
/// on (0,1) or (0,1)^2 with homogeneous essential conditions on x1 = 0 (and x1 = 1).
struct ProblemSpec {
    int dimension = 1;
    Eigen::Vector2d beta = Eigen::Vector2d(1.0, 0.0);
    double sigma = 0.0;
    /// Only the weighted Galerkin solver accepts a second-order term.
    double diffusion = 0.0;
    std::function<double(const Point&)> forcing = [](const Point&) { return 0.0; };
    BoundaryCondition boundary = BoundaryCondition::Inflow;
    std::function<double(const Point&)> exact_solution;

    double f(const Point& x) const { return forcing(x); }
    bool has_exact() const { return static_cast<bool>(exact_solution); }

    /// First-order part beta . grad(w) + sigma * w of the operator, applied to a shape.
    double apply(const ShapeValue& s) const { return beta.dot(s.grad) + sigma * s.value; }
    double apply(double value, const Eigen::Vector2d& grad) const { return beta.dot(grad) + sigma * value; }
    /// Formal adjoint -beta . grad(v) + sigma * v, for ultraweak forms.
    double apply_adjoint(const ShapeValue& s) const { return -beta.dot(s.grad) + sigma * s.value; }

    FunctionSpace::BoundaryPredicate trial_constraint() const;
    /// Outflow boundary {x1 = 1}, where test functions of ultraweak forms vanish.
    static bool outflow(const Point& p) { return boundary::right(p); }

    void validate() const;
};

/// u' + sigma u = sigma, u(0) = 0; exact u = 1 - exp(-sigma x).
ProblemSpec advection_reaction_problem(double sigma);
/// u' = pi sin(pi x), u(0) = 0; exact u = 1 - cos(pi x).
ProblemSpec sine_advection_problem();
/// u' + u = 1 with u(0) = u(1) = 0; reference 1 - exp(-x) satisfies only the inflow condition.
ProblemSpec overconstrained_problem_1d();
/// beta . grad(u) + u = 1 on the unit square, beta = (1,0), u = 0 on x1 in {0,1};
/// reference 1 - exp(-x1).
ProblemSpec overconstrained_problem_2d();
/// -u'' = f with u(0) = u(1) = 0.
ProblemSpec poisson_problem_1d(std::function<double(const Point&)> f);

}  // namespace neurofem

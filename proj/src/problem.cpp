#include "neurofem/problem.hpp"

#include <cmath>
#include <numbers>

namespace neurofem {

FunctionSpace::BoundaryPredicate ProblemSpec::trial_constraint() const {
    if (boundary == BoundaryCondition::BothEnds)
        return boundary::left_or_right;
    return boundary::left;
}

void ProblemSpec::validate() const {
    if (dimension != 1 && dimension != 2)
        throw std::invalid_argument("ProblemSpec: dimension must be 1 or 2");
    if (dimension == 1 && beta[1] != 0.0)
        throw std::invalid_argument("ProblemSpec: 1D problems need a scalar advection field");
    if (sigma < 0.0 || diffusion < 0.0)
        throw std::invalid_argument("ProblemSpec: reaction and diffusion must be nonnegative");
    if (diffusion == 0.0 && beta.isZero() && sigma == 0.0)
        throw std::invalid_argument("ProblemSpec: zero operator");
    if (!forcing)
        throw std::invalid_argument("ProblemSpec: missing forcing");
}

ProblemSpec advection_reaction_problem(double sigma) {
    ProblemSpec p;
    p.sigma = sigma;
    p.forcing = [sigma](const Point&) { return sigma; };
    p.exact_solution = [sigma](const Point& x) { return 1.0 - std::exp(-sigma * x[0]); };
    return p;
}

ProblemSpec sine_advection_problem() {
    using std::numbers::pi;
    ProblemSpec p;
    p.sigma = 0.0;
    p.forcing = [](const Point& x) { return pi * std::sin(pi * x[0]); };
    p.exact_solution = [](const Point& x) { return 1.0 - std::cos(pi * x[0]); };
    return p;
}

ProblemSpec overconstrained_problem_1d() {
    ProblemSpec p;
    p.sigma = 1.0;
    p.boundary = BoundaryCondition::BothEnds;
    p.forcing = [](const Point&) { return 1.0; };
    p.exact_solution = [](const Point& x) { return 1.0 - std::exp(-x[0]); };
    return p;
}

ProblemSpec overconstrained_problem_2d() {
    ProblemSpec p = overconstrained_problem_1d();
    p.dimension = 2;
    p.beta = Eigen::Vector2d(1.0, 0.0);
    return p;
}

ProblemSpec poisson_problem_1d(std::function<double(const Point&)> f) {
    ProblemSpec p;
    p.beta = Eigen::Vector2d::Zero();
    p.sigma = 0.0;
    p.diffusion = 1.0;
    p.boundary = BoundaryCondition::BothEnds;
    p.forcing = std::move(f);
    return p;
}

}  // namespace neurofem

#pragma once

#include "neurofem/state_solver.hpp"

#include <optional>
#include <variant>

namespace neurofem {

/// Element used when a 1D evaluation point sits on an interior node.
/// Only matters for discontinuous states.
enum class NodeSide { Left, Right };

/// 1/2 (u_h(x0) - target)^2; an empty target means "use the exact solution at x0".
struct PointValueQoI {
    Point x0 = Point::Zero();
    std::optional<double> target;
    NodeSide side = NodeSide::Left;
};

/// Sum of point-value misfits.
struct PointValueSum {
    std::vector<PointValueQoI> terms;
};

/// 1/2 int wbar (f - B u_h)^2.
struct WeightedResidualL2 {
    std::function<double(const Point&)> weight = unit_field;
};

/// int |grad u_h|_eps; for P0 states the sum of smoothed interface jumps.
struct TotalVariationL1 {};

/// int |f - B u_h|_eps.
struct ResidualL1 {};

using CostVariant = std::variant<PointValueQoI, PointValueSum, WeightedResidualL2, TotalVariationL1, ResidualL1>;

inline constexpr double kDefaultL1Smoothing = 1e-8;

/// J(u_h, xi) = J1(u_h) + (alpha/2) ||xi||^2.
struct CostSpec {
    CostVariant variant = PointValueQoI{};
    double alpha = 0.0;
    double l1_smoothing = kDefaultL1Smoothing;
};

/// sqrt(t^2 + eps^2).
inline double smoothed_abs(double t, double eps) { return std::sqrt(t * t + eps * eps); }

/// J1 and its derivative for one trial space. Integrals use a degree-5 rule
/// on the trial mesh.
class CostFunctional {
public:
    CostFunctional(CostSpec spec, const ProblemSpec& problem, const FunctionSpace& trial);

    const CostSpec& spec() const { return spec_; }
    double alpha() const { return spec_.alpha; }

    double j1(const FEFunction& u) const;
    /// dJ1/du in trial coefficients.
    Eigen::VectorXd grad_u(const FEFunction& u) const;
    /// (alpha/2) sum_q jxw xi_q^2 over a control quadrature.
    double regularization(const QuadratureCache& cache, const Eigen::VectorXd& xi_samples) const;

private:
    struct Datum {
        Point x;
        double target;
        Index element;
    };
    double point_value(const Datum& d, const FEFunction& u) const;
    double residual_at(const QuadraturePoint& qp, const FEFunction& u) const;

    CostSpec spec_;
    ProblemSpec problem_;
    FunctionSpace trial_;
    std::shared_ptr<const QuadratureCache> cache_;
    std::vector<Datum> data_;
    std::vector<double> forcing_;
    std::vector<double> residual_weight_;
};

/// ||xi||_{L2}^2 on a quadrature.
double xi_l2_squared(const QuadratureCache& cache, const Eigen::VectorXd& xi_samples);
double xi_l2_squared(const QuadratureCache& cache, const Net& xi);

double cost_eval(const CostSpec& spec, const StateSolver& solver, const StateSolution& sol);
Eigen::VectorXd cost_grad_u(const CostSpec& spec, const ProblemSpec& problem, const FEFunction& u);
/// alpha * sum_q jxw xi(x_q) dxi/dtheta(x_q).
ParamVector cost_grad_xi_reg(const CostSpec& spec, const Net& xi, const QuadratureCache& cache);

}  // namespace neurofem

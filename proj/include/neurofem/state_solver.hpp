#pragma once

#include "neurofem/assembly.hpp"
#include "neurofem/dense_solve.hpp"
#include "neurofem/problem.hpp"
#include "neurofem/shallow_net.hpp"
#include "neurofem/weight.hpp"

#include <limits>
#include <memory>
#include <optional>
#include <string>

namespace neurofem {

enum class SolverKind {
    WeightedLSQ,       ///< weighted normal equations
    MixedLSQ,          ///< saddle form with 1/omega on an L2 residual space
    WeightedGalerkin,  ///< b(u, omega v) = f(omega v)
    DDMinres,          ///< discrete-dual minimal residual, P0 trial / P1 test
};

std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);

/// Test-space inner product of the dd-minres form. "Weighted" terms carry omega(xi).
enum class TestInnerProduct {
    WeightedGradient,          ///< (omega r', v')
    WeightedGradientPlusMass,  ///< (omega r', v') + (r, v)
    GradientPlusWeightedMass,  ///< (r', v') + (omega r, v)
    WeightedFull,              ///< (omega r', v') + (omega r, v)
};

struct SolverOptions {
    /// Refinement of the P0 residual space for the mixed least-squares form.
    Index residual_refinement = 4;
    /// Refinement of the P1 test space for dd-minres.
    Index test_refinement = 2;
    /// Refinement of the probe space used by the kernel-coercivity check.
    Index kernel_refinement = 4;
    bool check_kernel_coercivity = true;
    TestInnerProduct inner_product = TestInnerProduct::WeightedGradient;
    /// Element rule on the integration mesh; default_rule(dimension) when empty.
    std::optional<QuadratureRule> rule;
};

inline constexpr double kKernelCoercivityTol = 1e-10;
inline constexpr double kInfSupTol = 1e-10;

/// Control and weight values at the solver's quadrature points.
struct ControlSamples {
    Eigen::VectorXd xi;
    std::vector<Eigen::Vector2d> xi_grad;
    Eigen::VectorXd w;    ///< omega(xi)
    Eigen::VectorXd dw;   ///< omega'(xi)
    Eigen::VectorXd d2w;  ///< omega''(xi)
};

struct StabilityReport {
    double weight_min = 0.0;
    double weight_max = 0.0;
    /// Weighted Galerkin only: coercivity of b(varpi v, v) on the discrete kernel.
    double kernel_coercivity = std::numeric_limits<double>::quiet_NaN();
    /// dd-minres only: discrete inf-sup constant of b.
    double infsup = std::numeric_limits<double>::quiet_NaN();
    /// Smallest over largest LU pivot of the system matrix.
    double pivot_ratio = 0.0;
};

struct StateSolution {
    SolverKind kind;
    FEFunction u;
    /// Residual representative on the test space (mixed forms only).
    std::optional<FEFunction> r;
    /// Residual representative at the control quadrature points (empty for Galerkin).
    Eigen::VectorXd residual_samples;
    ControlSamples control;
    StabilityReport stability;
    std::shared_ptr<const DenseLU<double>> factorization;
};

struct StateDerivative {
    FEFunction du;
    std::optional<FEFunction> dr;
    Eigen::VectorXd dresidual_samples;
};

/// Derivative of u -> J1(u) pulled back to the control: for a perturbation
/// Delta of xi, dj1[Delta] = sum_q jxw_q (value_q Delta(x_q) + grad_q . grad Delta(x_q)).
struct ControlSensitivity {
    Eigen::VectorXd value;
    std::vector<Eigen::Vector2d> grad;  ///< empty unless the form differentiates omega in space
};

struct AssembledSystem {
    /// Full system matrix: normal equations, Galerkin matrix, or [[A, B], [B^T, 0]].
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
    /// Saddle forms only: weighted test-space block and constraint block (test x trial).
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
    Index n_test = 0;
    Index n_trial = 0;
};

/// Solve session for one discretization. Everything independent of the
/// control is assembled once; each solve() factors the xi-dependent system
/// and keeps the factorization for derivative and adjoint solves.
class StateSolver {
public:
    StateSolver(SolverKind kind, ProblemSpec problem, FunctionSpace trial, WeightSpec weight,
                SolverOptions options = {}, std::optional<FunctionSpace> test = std::nullopt);

    SolverKind kind() const { return kind_; }
    const ProblemSpec& problem() const { return problem_; }
    const WeightSpec& weight() const { return weight_; }
    const SolverOptions& options() const { return options_; }
    const FunctionSpace& trial() const { return trial_; }
    /// Residual/test space of the saddle forms; the trial space otherwise.
    const FunctionSpace& test() const { return test_; }
    /// Quadrature on which the control is sampled and sensitivities live.
    const QuadratureCache& control_cache() const { return *cache_; }
    /// dd-minres inf-sup constant computed at setup (NaN for other kinds).
    double infsup() const { return infsup_; }

    ControlSamples sample(const Net& xi) const;
    AssembledSystem assemble(const Net& xi) const;
    StateSolution solve(const Net& xi) const;
    /// Solve with a control given directly by its samples on control_cache().
    /// The kernel-coercivity check is skipped (it needs the control off the quadrature).
    StateSolution solve(ControlSamples control) const;
    /// Control samples of a field given by value and spatial gradient.
    ControlSamples sample(const std::function<ControlSample(const Point&)>& field) const;

    /// Directional derivative of (r, u_h) in parameter direction eta.
    StateDerivative state_derivative(const StateSolution& sol, const Net& xi, const ParamVector& eta) const;
    /// One adjoint solve with the stored factorization; g_u is dJ1/du in trial coefficients.
    ControlSensitivity sensitivity(const StateSolution& sol, const Eigen::VectorXd& g_u) const;
    /// sum_q jxw (value_q dxi/dtheta(x_q) + grad_q . d grad xi/dtheta(x_q)).
    ParamVector pullback(const Net& xi, const ControlSensitivity& s) const;

    /// B^T r, which vanishes for an exact solve (empty for Galerkin).
    Eigen::VectorXd constraint_residual(const StateSolution& sol) const;

    /// Kernel-coercivity estimate for an explicitly given inverse weight field
    /// varpi(x) and its gradient (weighted Galerkin, 1D).
    double kernel_coercivity(const std::function<ControlSample(const Point&)>& varpi) const;

private:
    bool needs_spatial_weight() const;
    double form_weight(double w) const;
    double form_weight_deriv(double w, double dw) const;
    double weighted_kernel(const ShapeValue& a, const ShapeValue& b) const;
    double plain_kernel(const ShapeValue& a, const ShapeValue& b) const;
    double weighted_kernel(double av, const Eigen::Vector2d& ag, const ShapeValue& b) const;
    Eigen::MatrixXd galerkin_matrix(const ControlSamples& c) const;
    Eigen::MatrixXd weighted_test_block(const ControlSamples& c) const;
    AssembledSystem assemble(const ControlSamples& c) const;
    double galerkin_kernel_coercivity(const std::vector<ControlSample>& varpi) const;

    SolverKind kind_;
    ProblemSpec problem_;
    FunctionSpace trial_;
    FunctionSpace test_;
    WeightSpec weight_;
    SolverOptions options_;
    std::shared_ptr<const QuadratureCache> cache_;
    std::vector<double> forcing_;
    Eigen::MatrixXd b_;   // saddle constraint block, test x trial
    Eigen::VectorXd f_;   // saddle load vector
    Eigen::MatrixXd a0_;  // unweighted part of the test inner product
    double infsup_ = std::numeric_limits<double>::quiet_NaN();
    // Kernel-coercivity probe (weighted Galerkin).
    std::optional<FunctionSpace> probe_;
    std::shared_ptr<const QuadratureCache> probe_cache_;
    Eigen::MatrixXd kernel_basis_;
    Eigen::MatrixXd probe_gram_;
};

StateSolution solve_weighted_lsq(const ProblemSpec& problem, const FunctionSpace& trial, const WeightSpec& weight,
                                 const Net& xi);
StateSolution solve_mixed_lsq(const ProblemSpec& problem, const FunctionSpace& trial, const FunctionSpace& test,
                              const WeightSpec& weight, const Net& xi);
StateSolution solve_weighted_galerkin(const ProblemSpec& problem, const FunctionSpace& space,
                                      const WeightSpec& weight, const Net& xi, bool check_kernel_coercivity = true);
StateSolution solve_dd_minres(const ProblemSpec& problem, const FunctionSpace& trial, const FunctionSpace& test,
                              TestInnerProduct inner_product, const WeightSpec& weight, const Net& xi);

/// Default trial space of a solver kind: P1 with the problem's essential
/// conditions, or P0 for dd-minres.
FunctionSpace default_trial_space(SolverKind kind, const ProblemSpec& problem, Index n_elements);

}  // namespace neurofem

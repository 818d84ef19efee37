#pragma once

#include "neurofem/cost.hpp"

#include <filesystem>

namespace neurofem {

/// Solver kind plus spaces; the test space defaults from the options when empty.
struct Discretization {
    SolverKind kind = SolverKind::WeightedLSQ;
    FunctionSpace trial;
    std::optional<FunctionSpace> test;
    SolverOptions options;
};

/// j(xi) = J1(S_h(xi)) + (alpha/2) ||xi||^2 with its adjoint gradient.
class ReducedProblem {
public:
    struct Evaluation {
        double j = 0.0;
        double j1 = 0.0;
        double reg = 0.0;
        StateSolution state;
    };

    ReducedProblem(const ProblemSpec& problem, const Discretization& disc, const WeightSpec& weight,
                   const CostSpec& cost);

    const StateSolver& solver() const { return solver_; }
    const CostFunctional& cost() const { return cost_; }

    Evaluation evaluate(const Net& xi) const;
    double value(const Net& xi) const { return evaluate(xi).j; }
    /// Derivative density of j with respect to xi at the control quadrature,
    /// regularization included.
    ControlSensitivity derivative(const Evaluation& ev) const;
    ParamVector gradient(const Net& xi, const Evaluation& ev) const;
    ParamVector gradient(const Net& xi) const { return gradient(xi, evaluate(xi)); }
    /// ||xi||_{L2} on the control quadrature.
    double xi_l2(const Evaluation& ev) const;

private:
    StateSolver solver_;
    CostFunctional cost_;
};

double reduced_cost(const ProblemSpec& problem, const Discretization& disc, const WeightSpec& weight,
                    const CostSpec& cost, const Net& xi);
ParamVector reduced_gradient(const ProblemSpec& problem, const Discretization& disc, const WeightSpec& weight,
                             const CostSpec& cost, const Net& xi);

enum class OptimMethod { GradientDescent, Adam };

struct OptimConfig {
    OptimMethod method = OptimMethod::Adam;
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int max_iters = 500;
    /// Stop once the gradient norm drops to this value.
    double grad_tolerance = 0.0;
    std::uint64_t seed = 0;
    int trace_every = 1;

    void validate() const;
};

struct TraceRow {
    int iter = 0;
    double cost = 0.0;  ///< best cost seen up to this iteration
    double grad_norm = 0.0;
    double xi_l2 = 0.0;
};

struct TrainTrace {
    std::vector<TraceRow> rows;
    Net best{1, 1};
    double best_cost = 0.0;
    int best_iter = 0;
    double initial_cost = 0.0;
    /// Cost of every evaluated iterate, in order.
    std::vector<double> iterate_costs;
    int iterations = 0;
    bool converged = false;
    double wall_seconds = 0.0;

    std::string to_csv() const;
    void write_csv(const std::filesystem::path& path) const;
};

class DivergedError : public std::runtime_error {
public:
    DivergedError(const std::string& what, TrainTrace trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const TrainTrace& trace() const { return trace_; }

private:
    TrainTrace trace_;
};

/// First-order descent on the network parameters. Evaluates iterates
/// 0..max_iters (fewer on convergence) and returns the best one seen.
TrainTrace quasi_minimize(const ReducedProblem& reduced, const Net& xi0, const OptimConfig& config);
TrainTrace quasi_minimize(const ProblemSpec& problem, const Discretization& disc, const WeightSpec& weight,
                          const CostSpec& cost, const Net& xi0, const OptimConfig& config);

struct QuasiOptimalityReport {
    int dimension = 0;
    int subspace_dimension = 0;
    int instances = 0;
    int samples = 0;
    int violations = 0;
    /// Largest ratio of observed error to the bound.
    double worst_ratio = 0.0;
    bool passed() const { return violations == 0 && samples > 0; }
};

/// Random strongly convex quadratics j(x) = 1/2 (x - xbar)^T H (x - xbar) on R^d
/// with random k-dimensional subspaces standing in for the network class.
/// Quasi-minimizers for random tolerances delta are sampled and the error
/// estimate ||xbar - x_n||^2 <= (L/gamma) dist(xbar, V)^2 + delta/gamma is checked.
QuasiOptimalityReport toy_quasi_optimality_check(int dimension, int subspace_dimension = 2, int instances = 100,
                                                 int deltas_per_instance = 100, std::uint64_t seed = 1);

}  // namespace neurofem

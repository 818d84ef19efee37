#pragma once

#include "neurofem/infsup.hpp"
#include "neurofem/optimizer.hpp"

namespace neurofem {

struct VerificationReport {
    double alpha_h = 0.0;
    double beta_h = 0.0;
    /// C1 ||v|| <= sqrt(a(xi; v, v)) <= C2 ||v|| on the discrete test space.
    double C1 = 0.0;
    double C2 = 0.0;
    /// Discrete dual norm of f over the test space.
    double f_norm = 0.0;
    double u_norm = 0.0;
    double apriori_margin = std::numeric_limits<double>::quiet_NaN();
    double pg_residual = std::numeric_limits<double>::quiet_NaN();
    double gamma_hat = std::numeric_limits<double>::quiet_NaN();
    double L_hat = std::numeric_limits<double>::quiet_NaN();

    bool apriori_ok() const { return apriori_margin >= 0.0; }
    bool pg_ok(double tol = 1e-9) const { return pg_residual <= tol; }
    nlohmann::json to_json() const;
};

/// Norm of the trial space: L2 for dd-minres, graph norm ||w||^2 + ||Bw||^2 otherwise.
Eigen::MatrixXd trial_gram(const StateSolver& solver);
/// Norm of the residual/test space: L2 for the mixed least-squares form, the
/// unweighted test inner product for dd-minres.
Eigen::MatrixXd test_gram(const StateSolver& solver);
/// sqrt(F^T G^{-1} F).
double dual_norm(const Eigen::VectorXd& f, const Eigen::MatrixXd& gram);

/// alpha_h, beta_h, C1, C2 and ||f||_{V_h*} of a saddle-form solver at xi.
VerificationReport stability_report(const StateSolver& solver, const Net& xi);

/// (C2/C1)(1/beta_h)||f|| - ||u_h||_U given the trial norm of u_h.
double check_apriori(double u_norm, double f_norm, const VerificationReport& report);
/// Fills u_norm and apriori_margin of the report and returns the margin.
double check_apriori(const StateSolver& solver, const StateSolution& sol, VerificationReport& report);

struct PGCheck {
    double max_defect = 0.0;
    /// Optimal test functions A(xi)^{-1} B e_j as columns (test-space coefficients).
    Eigen::MatrixXd test_functions;
};

/// |b(u_h, v_j) - f(v_j)| over the optimal test functions of every trial basis function.
PGCheck check_pg_equivalence(const StateSolver& solver, const StateSolution& sol, const Net& xi);

struct ConvexityProbe {
    double gamma_hat = std::numeric_limits<double>::infinity();
    double L_hat = 0.0;
    int pairs = 0;
};

/// Sampled monotonicity and Lipschitz quotients of the derivative of j as a
/// function of the control, using the L2 pairing on the control quadrature:
/// <j'(xi) - j'(eta), xi - eta> / ||xi - eta||^2 and ||j'(xi) - j'(eta)|| / ||xi - eta||.
/// Networks have all parameters uniform in [-range, range].
ConvexityProbe probe_convexity(const ReducedProblem& reduced, int sample_count, Index n_neurons,
                               std::uint64_t seed = 7, double range = 2.0);

}  // namespace neurofem

#include "neurofem/verification.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <random>

namespace neurofem {

namespace {

nlohmann::json number(double x) {
    if (std::isfinite(x))
        return x;
    return nullptr;
}

void require_saddle(const StateSolver& solver, const char* what) {
    if (solver.kind() != SolverKind::MixedLSQ && solver.kind() != SolverKind::DDMinres)
        throw std::invalid_argument(std::string(what) + ": needs a mixed least-squares or dd-minres solver");
}

}  // namespace

nlohmann::json VerificationReport::to_json() const {
    nlohmann::json j;
    j["alpha_h"] = number(alpha_h);
    j["beta_h"] = number(beta_h);
    j["C1"] = number(C1);
    j["C2"] = number(C2);
    j["f_norm"] = number(f_norm);
    j["u_norm"] = number(u_norm);
    j["apriori_margin"] = number(apriori_margin);
    j["pg_residual"] = number(pg_residual);
    j["gamma_hat"] = number(gamma_hat);
    j["L_hat"] = number(L_hat);
    j["apriori_ok"] = std::isfinite(apriori_margin) ? nlohmann::json(apriori_ok()) : nlohmann::json(nullptr);
    j["pg_ok"] = std::isfinite(pg_residual) ? nlohmann::json(pg_ok()) : nlohmann::json(nullptr);
    return j;
}

Eigen::MatrixXd trial_gram(const StateSolver& solver) {
    const FunctionSpace& trial = solver.trial();
    const QuadratureCache cache(trial, default_rule(trial.dimension()));
    Eigen::MatrixXd g = assemble_form(cache, mass_kernel, unit_field);
    // The ultraweak dd-minres form lives in L2 whatever the trial space.
    if (solver.kind() != SolverKind::DDMinres) {
        const ProblemSpec& p = solver.problem();
        g += assemble_form(
            cache, [&p](const ShapeValue& u, const ShapeValue& v, const Point&, double) { return p.apply(u) * p.apply(v); },
            unit_field);
    }
    return g;
}

Eigen::MatrixXd test_gram(const StateSolver& solver) {
    require_saddle(solver, "test_gram");
    // The weighted block at a constant unit weight is the reference inner product.
    const StateSolver unit(solver.kind(), solver.problem(), solver.trial(), ConstantWeight{1.0}, solver.options(),
                           solver.test());
    return unit.assemble(Net(solver.problem().dimension, 1)).a;
}

double dual_norm(const Eigen::VectorXd& f, const Eigen::MatrixXd& gram) {
    if (f.size() == 0)
        return 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("dual_norm: Gram matrix is not positive definite");
    return std::sqrt(std::max(0.0, f.dot(llt.solve(f))));
}

VerificationReport stability_report(const StateSolver& solver, const Net& xi) {
    require_saddle(solver, "stability_report");
    const AssembledSystem sys = solver.assemble(xi);
    const Eigen::MatrixXd gv = test_gram(solver);
    const Eigen::MatrixXd gu = trial_gram(solver);
    VerificationReport rep;
    const InfSupEstimate est = estimate_infsup(sys.a, sys.b, gu, gv);
    rep.alpha_h = est.alpha_h;
    rep.beta_h = est.beta_h;
    const auto [lo, hi] = whitened_eigen_range(sys.a, gv);
    rep.C1 = std::sqrt(std::max(0.0, lo));
    rep.C2 = std::sqrt(std::max(0.0, hi));
    rep.f_norm = dual_norm(sys.rhs.head(sys.n_test), gv);
    return rep;
}

double check_apriori(double u_norm, double f_norm, const VerificationReport& report) {
    if (!(report.C1 > 0.0) || !(report.beta_h > 0.0))
        return -std::numeric_limits<double>::infinity();
    return report.C2 / report.C1 / report.beta_h * f_norm - u_norm;
}

double check_apriori(const StateSolver& solver, const StateSolution& sol, VerificationReport& report) {
    const Eigen::MatrixXd gu = trial_gram(solver);
    report.u_norm = std::sqrt(std::max(0.0, sol.u.coeffs.dot(gu * sol.u.coeffs)));
    report.apriori_margin = check_apriori(report.u_norm, report.f_norm, report);
    return report.apriori_margin;
}

PGCheck check_pg_equivalence(const StateSolver& solver, const StateSolution& sol, const Net& xi) {
    require_saddle(solver, "check_pg_equivalence");
    const AssembledSystem sys = solver.assemble(xi);
    PGCheck out;
    // A(xi)^* v = B w_h for every trial basis function w_h.
    out.test_functions = DenseLU<double>(Eigen::MatrixXd(sys.a.transpose())).solve_matrix(sys.b);
    const Eigen::VectorXd defect =
        out.test_functions.transpose() * (sys.b * sol.u.coeffs - sys.rhs.head(sys.n_test));
    out.max_defect = defect.size() ? defect.cwiseAbs().maxCoeff() : 0.0;
    return out;
}

ConvexityProbe probe_convexity(const ReducedProblem& reduced, int sample_count, Index n_neurons,
                               std::uint64_t seed, double range) {
    if (sample_count < 1)
        throw std::invalid_argument("probe_convexity: sample_count must be positive");
    const QuadratureCache& cache = reduced.solver().control_cache();
    const int dim = reduced.solver().problem().dimension;
    std::mt19937_64 rng(seed);
    ConvexityProbe out;
    for (int s = 0; s < sample_count; ++s) {
        const Net a = nn_uniform_init(dim, n_neurons, range, rng);
        const Net b = nn_uniform_init(dim, n_neurons, range, rng);
        const auto ea = reduced.evaluate(a);
        const auto eb = reduced.evaluate(b);
        const ControlSensitivity da = reduced.derivative(ea);
        const ControlSensitivity db = reduced.derivative(eb);
        double pairing = 0.0, diff2 = 0.0, ddiff2 = 0.0;
        for (const auto& qp : cache) {
            const Index q = qp.index;
            const double dxi = ea.state.control.xi[q] - eb.state.control.xi[q];
            const double dd = da.value[q] - db.value[q];
            pairing += qp.jxw * dd * dxi;
            diff2 += qp.jxw * dxi * dxi;
            ddiff2 += qp.jxw * dd * dd;
            if (!da.grad.empty()) {
                const auto sq = static_cast<std::size_t>(q);
                const Eigen::Vector2d gdiff = ea.state.control.xi_grad[sq] - eb.state.control.xi_grad[sq];
                pairing += qp.jxw * (da.grad[sq] - db.grad[sq]).dot(gdiff);
            }
        }
        if (!(diff2 > 1e-14))
            continue;
        ++out.pairs;
        out.gamma_hat = std::min(out.gamma_hat, pairing / diff2);
        out.L_hat = std::max(out.L_hat, std::sqrt(ddiff2 / diff2));
    }
    return out;
}

}  // namespace neurofem

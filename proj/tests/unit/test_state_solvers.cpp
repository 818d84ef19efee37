#include "neurofem/state_solver.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace neurofem;

namespace {

MeshHandle line(Index n) { return std::make_shared<const Mesh1D>(n); }

ProblemSpec unit_slope() {
    ProblemSpec p;
    p.sigma = 0.0;
    p.forcing = [](const Point&) { return 1.0; };
    p.exact_solution = [](const Point& x) { return x[0]; };
    return p;
}

ProblemSpec zero_forcing(double sigma) {
    ProblemSpec p = advection_reaction_problem(sigma);
    p.forcing = [](const Point&) { return 0.0; };
    return p;
}

std::vector<WeightSpec> weights() {
    return {ConstantWeight{1.0}, ConstantWeight{7.0}, LogisticOffset{1.0}, LogisticOffset{100.0},
            LogisticOffset{1000.0}, BoundedLogistic{}};
}

// Hat-function element integrals on [a, a+h], local order (left, right).
struct Element {
    double h;
    double mass(int i, int j) const { return i == j ? h / 3.0 : h / 6.0; }
    double stiff(int i, int j) const { return (i == j ? 1.0 : -1.0) / h; }
    // int phi_j' phi_i
    double adv(int i, int j) const { return (j == 0 ? -1.0 : 1.0) / 2.0; }
    double load() const { return h / 2.0; }
    double dload(int i) const { return i == 0 ? -1.0 : 1.0; }
};

// Unweighted least squares for u' + s u = s, u(0) = 0, P1 on N elements.
Eigen::VectorXd lsq_oracle(double s, int n) {
    const Element el{1.0 / n};
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n + 1, n + 1);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n + 1);
    for (int e = 0; e < n; ++e)
        for (int i = 0; i < 2; ++i) {
            f[e + i] += s * el.dload(i) + s * s * el.load();
            for (int j = 0; j < 2; ++j)
                k(e + i, e + j) += el.stiff(i, j) + s * (el.adv(i, j) + el.adv(j, i)) + s * s * el.mass(i, j);
        }
    return k.bottomRightCorner(n, n).fullPivLu().solve(f.tail(n));
}

// Standard Galerkin for u' + u = 1, u(0) = 0, P1 on N elements.
Eigen::VectorXd galerkin_oracle(int n) {
    const Element el{1.0 / n};
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n + 1, n + 1);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n + 1);
    for (int e = 0; e < n; ++e)
        for (int i = 0; i < 2; ++i) {
            f[e + i] += el.load();
            for (int j = 0; j < 2; ++j)
                k(e + i, e + j) += el.adv(i, j) + el.mass(i, j);
        }
    return k.bottomRightCorner(n, n).fullPivLu().solve(f.tail(n));
}

// Unweighted dd-minres: P0 on N, P1 on 2N with v(1) = 0, inner product (r', v').
Eigen::VectorXd ddminres_oracle(double s, int n) {
    const int m = 2 * n;
    const Element el{1.0 / m};
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + 1, m + 1);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m + 1, n);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(m + 1);
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < 2; ++i) {
            f[k + i] += s * el.load();
            b(k + i, k / 2) += -el.dload(i) + s * el.load();
            for (int j = 0; j < 2; ++j)
                a(k + i, k + j) += el.stiff(i, j);
        }
    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(m + n, m + n);
    sys.topLeftCorner(m, m) = a.topLeftCorner(m, m);
    sys.topRightCorner(m, n) = b.topRows(m);
    sys.bottomLeftCorner(n, m) = b.topRows(m).transpose();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + n);
    rhs.head(m) = f.head(m);
    return sys.fullPivLu().solve(rhs).tail(n);
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

TEST(StateSolvers, ConsistencyEveryWeight) {
    const ProblemSpec p = unit_slope();
    const auto trial = FunctionSpace::p1(line(4), p.trial_constraint());
    const auto p1_for_dd = FunctionSpace::p1(line(4));
    for (const auto& w : weights())
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const Net xi = nn_random_init(1, 8, seed);
            for (auto kind : {SolverKind::WeightedLSQ, SolverKind::MixedLSQ, SolverKind::WeightedGalerkin,
                              SolverKind::DDMinres}) {
                const auto& space = kind == SolverKind::DDMinres ? p1_for_dd : trial;
                SolverOptions opt;
                opt.check_kernel_coercivity = false;
                const StateSolution sol = StateSolver(kind, p, space, w, opt).solve(xi);
                for (double x = 0.0; x <= 1.0; x += 0.05)
                    EXPECT_NEAR(eval_fe(sol.u, x), x, 1e-10) << to_string(kind);
                if (sol.residual_samples.size())
                    EXPECT_LT(sol.residual_samples.cwiseAbs().maxCoeff(), 1e-10) << to_string(kind);
            }
        }
}

TEST(StateSolvers, ZeroForcingGivesZero) {
    const ProblemSpec p = zero_forcing(10.0);
    const Net xi = nn_random_init(1, 8, 4);
    for (auto kind : {SolverKind::WeightedLSQ, SolverKind::MixedLSQ, SolverKind::WeightedGalerkin,
                      SolverKind::DDMinres}) {
        const StateSolution sol =
            StateSolver(kind, p, default_trial_space(kind, p, 8), LogisticOffset{100.0}).solve(xi);
        EXPECT_EQ(sol.u.coeffs.norm(), 0.0) << to_string(kind);
        if (sol.r)
            EXPECT_EQ(sol.r->coeffs.norm(), 0.0);
    }
}

TEST(WeightedLSQ, UnitWeightMatchesIndependentAssembly) {
    const ProblemSpec p = advection_reaction_problem(160.0);
    const StateSolution sol =
        solve_weighted_lsq(p, default_trial_space(SolverKind::WeightedLSQ, p, 16), ConstantWeight{1.0}, Net(1, 1));
    EXPECT_LT(rel(sol.u.coeffs, lsq_oracle(160.0, 16)), 1e-12);
}

TEST(WeightedLSQ, SymmetricPositiveDefiniteAndOptimal) {
    const ProblemSpec p = advection_reaction_problem(160.0);
    const auto trial = default_trial_space(SolverKind::WeightedLSQ, p, 16);
    const WeightSpec w = LogisticOffset{100.0};
    const Net xi = nn_random_init(1, 8, 7);
    const StateSolver solver(SolverKind::WeightedLSQ, p, trial, w);
    const AssembledSystem sys = solver.assemble(xi);
    EXPECT_LT((sys.matrix - sys.matrix.transpose()).cwiseAbs().maxCoeff(), 1e-10 * sys.matrix.norm());
    EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(sys.matrix).info(), Eigen::Success);

    const StateSolution sol = solver.solve(xi);
    // 1/2 u^T K u - F^T u differs from the weighted residual norm by a constant.
    const auto energy = [&](const Eigen::VectorXd& u) { return 0.5 * u.dot(sys.matrix * u) - sys.rhs.dot(u); };
    const double best = energy(sol.u.coeffs);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    for (int k = 0; k < 100; ++k) {
        Eigen::VectorXd d(trial.dim());
        for (Index i = 0; i < d.size(); ++i)
            d[i] = 1e-3 * n01(rng);
        EXPECT_GE(energy(sol.u.coeffs + d), best);
    }
    EXPECT_LT(solver.constraint_residual(sol).norm(), 1e-10 * std::max(1.0, sol.residual_samples.norm()));
}

TEST(MixedLSQ, MatchesNormalEquationsWhenResidualIsRepresentable) {
    const ProblemSpec p = advection_reaction_problem(10.0);
    const auto trial = default_trial_space(SolverKind::WeightedLSQ, p, 4);
    const auto broken = FunctionSpace::p1_disc(trial.mesh());
    const StateSolution lsq = solve_weighted_lsq(p, trial, ConstantWeight{1.0}, Net(1, 1));
    const StateSolution mixed = solve_mixed_lsq(p, trial, broken, ConstantWeight{1.0}, Net(1, 1));
    EXPECT_LT((lsq.u.coeffs - mixed.u.coeffs).cwiseAbs().maxCoeff(), 1e-9);

    // With a constant weight 3 the representative is 3 (f - B u_h) pointwise.
    const StateSolver solver(SolverKind::MixedLSQ, p, trial, ConstantWeight{3.0}, {}, broken);
    const StateSolution sol = solver.solve(Net(1, 1));
    for (const auto& qp : solver.control_cache()) {
        const double bu = p.apply(local_value(qp.trial, sol.u.coeffs), local_grad(qp.trial, sol.u.coeffs));
        EXPECT_NEAR(sol.residual_samples[qp.index], 3.0 * (p.f(qp.x) - bu), 1e-10);
    }
}

TEST(MixedLSQ, ConstraintHolds) {
    const ProblemSpec p = advection_reaction_problem(160.0);
    const StateSolver solver(SolverKind::MixedLSQ, p, default_trial_space(SolverKind::MixedLSQ, p, 16),
                             LogisticOffset{100.0});
    const StateSolution sol = solver.solve(nn_random_init(1, 8, 2));
    EXPECT_LT(solver.constraint_residual(sol).norm(), 1e-10 * std::max(1.0, sol.r->coeffs.norm()));
}

TEST(WeightedGalerkin, UnitWeightIsStandardGalerkin) {
    const ProblemSpec p = overconstrained_problem_1d();
    ProblemSpec inflow = p;
    inflow.boundary = BoundaryCondition::Inflow;
    const auto space = default_trial_space(SolverKind::WeightedGalerkin, inflow, 8);
    const StateSolution sol = solve_weighted_galerkin(inflow, space, ConstantWeight{1.0}, Net(1, 1));
    EXPECT_LT(rel(sol.u.coeffs, galerkin_oracle(8)), 1e-12);
    EXPECT_GT(sol.stability.kernel_coercivity, kKernelCoercivityTol);
}

TEST(WeightedGalerkin, ReactionSurrogateAlwaysSolvable) {
    ProblemSpec p;
    p.beta = Eigen::Vector2d::Zero();
    p.sigma = 2.0;
    p.forcing = [](const Point& x) { return 1.0 + x[0]; };
    const auto space = FunctionSpace::p1(line(8));
    for (const auto& w : weights())
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const StateSolution sol = solve_weighted_galerkin(p, space, w, nn_random_init(1, 8, seed), false);
            // Pointwise weighted mass projection of f/2, which is linear and hence exact.
            for (double x = 0.0; x <= 1.0; x += 0.1)
                EXPECT_NEAR(eval_fe(sol.u, x), 0.5 * (1.0 + x), 1e-10);
        }
}

TEST(WeightedGalerkin, KernelCoercivityCanFail) {
    const ProblemSpec p = poisson_problem_1d([](const Point&) { return 1.0; });
    const auto space = FunctionSpace::p1(line(8), p.trial_constraint());
    const StateSolver solver(SolverKind::WeightedGalerkin, p, space, LogisticOffset{1000.0});
    // varpi = 1 + c (x - x0)^2 gives b(varpi v, v) = int varpi |v'|^2 - c int v^2. The
    // kernel consists of bubbles vanishing at coarse nodes, so x0 sits inside an element.
    const double x0 = 9.0 / 16.0;
    const auto varpi = [x0](double c) {
        return [c, x0](const Point& x) {
            const double t = x[0] - x0;
            return ControlSample{1.0 + c * t * t, Eigen::Vector2d(2.0 * c * t, 0.0)};
        };
    };
    EXPECT_GT(solver.kernel_coercivity(varpi(0.0)), 0.1);
    EXPECT_LE(solver.kernel_coercivity(varpi(1e4)), kKernelCoercivityTol);

    // xi = -c |x - x0| makes varpi = 1/omega(xi) V-shaped around x0, from 1/501 up to 1.
    Net steep(1, 2);
    steep.W()(0, 0) = 1.0;
    steep.W()(1, 0) = -1.0;
    steep.b() << -x0, x0;
    steep.c() << -200.0, -200.0;
    try {
        solver.solve(steep);
        ADD_FAILURE() << "expected a kernel-coercivity failure";
    } catch (const SolverFailure& e) {
        EXPECT_EQ(e.reason(), "kernel-coercivity violated");
        EXPECT_LE(e.estimate(), kKernelCoercivityTol);
    }
    EXPECT_NO_THROW(solver.solve(Net(1, 1)));
}

TEST(DDMinres, UnitWeightMatchesIndependentAssembly) {
    const ProblemSpec p = advection_reaction_problem(160.0);
    const StateSolver solver(SolverKind::DDMinres, p, default_trial_space(SolverKind::DDMinres, p, 16),
                             ConstantWeight{1.0});
    EXPECT_EQ(solver.test().dim(), 32);
    const StateSolution sol = solver.solve(Net(1, 1));
    EXPECT_LT(rel(sol.u.coeffs, ddminres_oracle(160.0, 16)), 1e-10);
    EXPECT_GT(solver.infsup(), kInfSupTol);
}

TEST(DDMinres, ConstraintHoldsForRandomControls) {
    const ProblemSpec p = advection_reaction_problem(160.0);
    for (auto ip : {TestInnerProduct::WeightedGradient, TestInnerProduct::WeightedGradientPlusMass,
                    TestInnerProduct::GradientPlusWeightedMass, TestInnerProduct::WeightedFull}) {
        SolverOptions opt;
        opt.inner_product = ip;
        const StateSolver solver(SolverKind::DDMinres, p, default_trial_space(SolverKind::DDMinres, p, 16),
                                 LogisticOffset{100.0}, opt);
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const StateSolution sol = solver.solve(nn_random_init(1, 8, seed));
            EXPECT_LT(solver.constraint_residual(sol).cwiseAbs().maxCoeff(), 1e-10);
        }
    }
}

TEST(DDMinres, RejectsTooSmallTestSpace) {
    const ProblemSpec p = advection_reaction_problem(1.0);
    const auto trial = default_trial_space(SolverKind::DDMinres, p, 8);
    const auto small = FunctionSpace::p1(line(4), ProblemSpec::outflow);
    EXPECT_THROW(StateSolver(SolverKind::DDMinres, p, trial, ConstantWeight{1.0}, {}, small), SolverFailure);
}

TEST(StateDerivative, TrivialDirections) {
    const ProblemSpec p = advection_reaction_problem(10.0);
    const Net xi = nn_random_init(1, 8, 5);
    for (auto kind : {SolverKind::WeightedLSQ, SolverKind::MixedLSQ, SolverKind::DDMinres}) {
        const auto trial = default_trial_space(kind, p, 8);
        const StateSolver solver(kind, p, trial, LogisticOffset{100.0});
        const StateSolution sol = solver.solve(xi);
        EXPECT_EQ(solver.state_derivative(sol, xi, ParamVector::Zero(xi.n_params())).du.coeffs.norm(), 0.0);

        const StateSolver flat(kind, p, trial, ConstantWeight{2.0});
        const StateSolution fs = flat.solve(xi);
        const StateDerivative d = flat.state_derivative(fs, xi, ParamVector::Ones(xi.n_params()));
        EXPECT_EQ(d.du.coeffs.norm(), 0.0);
    }
}

TEST(StateDerivative, MatchesFiniteDifferences) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n01;
    const SolverKind kinds[] = {SolverKind::WeightedLSQ, SolverKind::MixedLSQ, SolverKind::WeightedGalerkin,
                                SolverKind::DDMinres};
    for (int trial = 0; trial < 8; ++trial) {
        const SolverKind kind = kinds[trial % 4];
        const ProblemSpec p = advection_reaction_problem(trial < 4 ? 10.0 : 160.0);
        SolverOptions opt;
        opt.check_kernel_coercivity = false;
        const StateSolver solver(kind, p, default_trial_space(kind, p, 8), LogisticOffset{100.0}, opt);
        const Net xi = nn_random_init(1, 6, 20 + trial);
        ParamVector eta(xi.n_params());
        for (Index i = 0; i < eta.size(); ++i)
            eta[i] = n01(rng);
        const StateDerivative d = solver.state_derivative(solver.solve(xi), xi, eta);
        const double step = 1e-5;
        const auto shifted = [&](double s) { return Net::from_params(1, 6, xi.params() + s * eta); };
        const Eigen::VectorXd fd =
            (solver.solve(shifted(step)).u.coeffs - solver.solve(shifted(-step)).u.coeffs) / (2.0 * step);
        EXPECT_LT(rel(d.du.coeffs, fd), 1e-6) << to_string(kind);
    }
}

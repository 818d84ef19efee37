#include "neurofem/optimizer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace neurofem;

namespace {

double xibar(double x) { return -std::log(2.0 / (std::sin(std::numbers::pi * x / 2.0) + 0.5) - 1.0); }
double wbar(const Point& x) { return 1.0 + std::sin(std::numbers::pi * x[0] / 2.0); }

Discretization lsq(const ProblemSpec& p, Index n) {
    return {SolverKind::WeightedLSQ, default_trial_space(SolverKind::WeightedLSQ, p, n), std::nullopt, {}};
}

ParamVector central_difference(const ReducedProblem& rp, const Net& xi, double step) {
    ParamVector g(xi.n_params());
    for (Index k = 0; k < g.size(); ++k) {
        ParamVector tp = xi.params(), tm = xi.params();
        tp[k] += step;
        tm[k] -= step;
        g[k] = (rp.value(Net::from_params(xi.input_dim(), xi.n_neurons(), tp)) -
                rp.value(Net::from_params(xi.input_dim(), xi.n_neurons(), tm))) /
               (2.0 * step);
    }
    return g;
}

}  // namespace

TEST(ReducedCost, SelfConsistentDatum) {
    const ProblemSpec p = advection_reaction_problem(160.0);
    const Discretization d = lsq(p, 16);
    const double target = eval_fe(solve_weighted_lsq(p, d.trial, ConstantWeight{1.0}, Net(1, 1)).u, 0.3);
    const CostSpec cost{PointValueQoI{point1d(0.3), target}, 0.0};
    EXPECT_NEAR(reduced_cost(p, d, ConstantWeight{1.0}, cost, nn_random_init(1, 8, 1)), 0.0, 1e-28);
    EXPECT_EQ(reduced_gradient(p, d, ConstantWeight{1.0}, cost, nn_random_init(1, 8, 1)).norm(), 0.0);
}

TEST(ReducedCost, ZeroNetHasNoRegularization) {
    const ProblemSpec p = advection_reaction_problem(160.0);
    const Discretization d = lsq(p, 16);
    const CostSpec cost{TotalVariationL1{}, 1e6};
    const ReducedProblem rp(p, d, LogisticOffset{100.0}, cost);
    const auto ev = rp.evaluate(Net(1, 8));
    EXPECT_EQ(ev.reg, 0.0);
    EXPECT_EQ(ev.j, ev.j1);
    const CostFunctional j1(cost, p, d.trial);
    EXPECT_EQ(ev.j, j1.j1(solve_weighted_lsq(p, d.trial, LogisticOffset{100.0}, Net(1, 8)).u));
}

TEST(ReducedCost, InterpolantApproachesClosedFormControl) {
    const ProblemSpec p = sine_advection_problem();
    const Discretization d = lsq(p, 16);
    const ReducedProblem rp(p, d, BoundedLogistic{}, CostSpec{WeightedResidualL2{wbar}, 0.0});
    const StateSolver& solver = rp.solver();
    const StateSolution exact = solver.solve(solver.sample([](const Point& x) {
        const double h = 1e-6;
        return ControlSample{xibar(x[0]), Eigen::Vector2d((xibar(x[0] + h) - xibar(x[0] - h)) / (2 * h), 0.0)};
    }));
    const double j_bar = rp.cost().j1(exact.u);
    EXPECT_NEAR(rp.value(nn_interpolate_init(64, xibar)), j_bar, 1e-4);
}

TEST(ReducedGradient, ConstantWeightIsPureRegularization) {
    const ProblemSpec p = advection_reaction_problem(10.0);
    const Discretization d = lsq(p, 8);
    const CostSpec cost{TotalVariationL1{}, 0.3};
    const Net xi = nn_random_init(1, 6, 3);
    const ReducedProblem rp(p, d, ConstantWeight{2.0}, cost);
    const ParamVector g = rp.gradient(xi);
    const ParamVector reg = cost_grad_xi_reg(cost, xi, rp.solver().control_cache());
    EXPECT_LT((g - reg).norm(), 1e-14 * std::max(1.0, reg.norm()));
}

TEST(ReducedGradient, MatchesFiniteDifferencesOnConvergenceSetup) {
    const ProblemSpec p = sine_advection_problem();
    const ReducedProblem rp(p, lsq(p, 16), BoundedLogistic{}, CostSpec{WeightedResidualL2{wbar}, 1e-3});
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Net xi = nn_random_init(1, 8, seed);
        const ParamVector g = rp.gradient(xi);
        const ParamVector fd = central_difference(rp, xi, 1e-5);
        EXPECT_LT((g - fd).norm() / fd.norm(), 1e-5) << "seed " << seed;
    }
}

TEST(ReducedGradient, GalerkinAndMixedForms) {
    const ProblemSpec p = advection_reaction_problem(10.0);
    for (auto kind : {SolverKind::MixedLSQ, SolverKind::WeightedGalerkin}) {
        Discretization d{kind, default_trial_space(kind, p, 8), std::nullopt, {}};
        d.options.check_kernel_coercivity = false;
        const ReducedProblem rp(p, d, LogisticOffset{10.0}, CostSpec{PointValueQoI{point1d(0.3), 0.4}, 0.01});
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const Net xi = nn_random_init(1, 6, seed);
            const ParamVector fd = central_difference(rp, xi, 1e-5);
            EXPECT_LT((rp.gradient(xi) - fd).norm() / fd.norm(), 1e-5) << to_string(kind);
        }
    }
}

TEST(ReducedGradient, DiffusiveGalerkinForm) {
    ProblemSpec p = poisson_problem_1d([](const Point& x) { return 1.0 + x[0]; });
    p.beta = Eigen::Vector2d(1.0, 0.0);
    Discretization d{SolverKind::WeightedGalerkin, FunctionSpace::p1(std::make_shared<const Mesh1D>(8),
                                                                     p.trial_constraint()),
                     std::nullopt, {}};
    d.options.check_kernel_coercivity = false;
    const ReducedProblem rp(p, d, BoundedLogistic{}, CostSpec{PointValueQoI{point1d(0.4), 0.1}, 0.0});
    const Net xi = nn_random_init(1, 6, 2);
    const ParamVector fd = central_difference(rp, xi, 1e-5);
    EXPECT_LT((rp.gradient(xi) - fd).norm() / fd.norm(), 1e-5);
}

TEST(QuasiMinimize, LoopContract) {
    const ProblemSpec p = advection_reaction_problem(160.0);
    const ReducedProblem rp(p, lsq(p, 16), LogisticOffset{100.0},
                            CostSpec{PointValueQoI{point1d(1.0 / 16.0), std::nullopt}, 0.0});
    OptimConfig cfg;
    cfg.max_iters = 0;
    EXPECT_THROW(quasi_minimize(rp, nn_random_init(1, 8, 1), cfg), std::invalid_argument);
    cfg.learning_rate = -1.0;
    cfg.max_iters = 5;
    EXPECT_THROW(quasi_minimize(rp, nn_random_init(1, 8, 1), cfg), std::invalid_argument);

    cfg.learning_rate = 0.05;
    cfg.max_iters = 1;
    const TrainTrace one = quasi_minimize(rp, nn_random_init(1, 8, 1), cfg);
    EXPECT_EQ(one.iterations, 1);
    EXPECT_EQ(one.iterate_costs.size(), 2u);

    cfg.max_iters = 300;
    const TrainTrace tr = quasi_minimize(rp, nn_random_init(1, 8, 1), cfg);
    ASSERT_FALSE(tr.rows.empty());
    for (std::size_t i = 1; i < tr.rows.size(); ++i)
        EXPECT_LE(tr.rows[i].cost, tr.rows[i - 1].cost);
    for (double c : tr.iterate_costs) {
        EXPECT_TRUE(std::isfinite(c));
        EXPECT_LE(tr.best_cost, c);
    }
    EXPECT_DOUBLE_EQ(rp.value(tr.best), tr.best_cost);
    EXPECT_EQ(tr.to_csv().substr(0, 27), "iter,cost,grad_norm,xi_l2\n0");

    const TrainTrace again = quasi_minimize(rp, nn_random_init(1, 8, 1), cfg);
    EXPECT_EQ(again.iterate_costs, tr.iterate_costs);
    EXPECT_EQ(again.best.params(), tr.best.params());
}

TEST(QuasiMinimize, GradientToleranceStops) {
    const ProblemSpec p = advection_reaction_problem(10.0);
    const ReducedProblem rp(p, lsq(p, 8), ConstantWeight{1.0}, CostSpec{TotalVariationL1{}, 0.0});
    OptimConfig cfg;
    cfg.max_iters = 50;
    cfg.grad_tolerance = 1e-12;
    const TrainTrace tr = quasi_minimize(rp, nn_random_init(1, 4, 1), cfg);
    EXPECT_TRUE(tr.converged);
    EXPECT_EQ(tr.iterations, 0);
}

TEST(QuasiMinimize, OptimalStartBarelyMoves) {
    const ProblemSpec p = sine_advection_problem();
    const ReducedProblem rp(p, lsq(p, 16), BoundedLogistic{}, CostSpec{WeightedResidualL2{wbar}, 0.0});
    OptimConfig cfg;
    cfg.max_iters = 100;
    const TrainTrace tr = quasi_minimize(rp, nn_interpolate_init(64, xibar), cfg);
    EXPECT_LE(std::abs(tr.best_cost - tr.initial_cost), 0.01 * tr.initial_cost);
}

TEST(QuasiMinimize, GradientDescentReducesCost) {
    const ProblemSpec p = advection_reaction_problem(160.0);
    const ReducedProblem rp(p, lsq(p, 16), LogisticOffset{100.0}, CostSpec{TotalVariationL1{}, 0.0});
    OptimConfig cfg;
    cfg.method = OptimMethod::GradientDescent;
    cfg.learning_rate = 0.5;
    cfg.max_iters = 50;
    const TrainTrace tr = quasi_minimize(rp, nn_random_init(1, 8, 2), cfg);
    EXPECT_LT(tr.best_cost, tr.initial_cost);
}

TEST(ToyQuasiOptimality, HoldsOnRandomQuadratics) {
    const QuasiOptimalityReport r = toy_quasi_optimality_check(5, 2, 100, 100, 1);
    EXPECT_TRUE(r.passed());
    EXPECT_EQ(r.instances, 100);
    EXPECT_LE(r.worst_ratio, 1.0);
    // A subspace equal to the whole space contains the minimizer.
    EXPECT_TRUE(toy_quasi_optimality_check(3, 3, 20, 20, 2).passed());
}

#include "neurofem/optimizer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace neurofem;

namespace {

ParamVector central_difference(const ReducedProblem& rp, const Net& xi, double step) {
    ParamVector theta = xi.params();
    ParamVector g(theta.size());
    Net probe = xi;
    for (Index k = 0; k < theta.size(); ++k) {
        ParamVector tp = theta, tm = theta;
        tp[k] += step;
        tm[k] -= step;
        probe.set_params(tp);
        const double jp = rp.value(probe);
        probe.set_params(tm);
        const double jm = rp.value(probe);
        g[k] = (jp - jm) / (2.0 * step);
    }
    return g;
}

double relative_error(const ParamVector& a, const ParamVector& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-12);
}

struct Case {
    SolverKind kind;
    CostSpec cost;
    const char* name;
};

std::vector<Case> cases() {
    const auto wbar = [](const Point& x) { return 1.0 + std::sin(std::numbers::pi * x[0] / 2.0); };
    std::vector<Case> out;
    for (auto kind : {SolverKind::WeightedLSQ, SolverKind::DDMinres}) {
        out.push_back({kind, CostSpec{PointValueQoI{point1d(1.0 / 16.0), std::nullopt}, 0.0}, "point"});
        out.push_back(
            {kind, CostSpec{PointValueQoI{point1d(1.0 / 16.0), std::nullopt, NodeSide::Right}, 0.0}, "point_right"});
        out.push_back({kind, CostSpec{WeightedResidualL2{wbar}, 0.1}, "l2"});
        out.push_back({kind, CostSpec{TotalVariationL1{}, 0.0}, "tv"});
        out.push_back({kind, CostSpec{ResidualL1{}, 0.01}, "l1"});
    }
    return out;
}

}  // namespace

TEST(ReducedGradient, MatchesCentralDifferences) {
    const ProblemSpec problem = advection_reaction_problem(160.0);
    for (const auto& c : cases()) {
        Discretization disc{c.kind, default_trial_space(c.kind, problem, 16), std::nullopt, {}};
        ReducedProblem rp(problem, disc, LogisticOffset{100.0}, c.cost);
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const Net xi = nn_random_init(1, 8, seed);
            const ParamVector g = rp.gradient(xi);
            const ParamVector fd = central_difference(rp, xi, 1e-5);
            EXPECT_LT(relative_error(g, fd), 1e-5) << to_string(c.kind) << " " << c.name << " seed " << seed
                                                    << "\n" << g.transpose() << "\n" << fd.transpose();
        }
    }
}

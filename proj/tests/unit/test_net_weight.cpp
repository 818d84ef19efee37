#include "neurofem/shallow_net.hpp"
#include "neurofem/weight.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace neurofem;

namespace {

Net net1(std::initializer_list<double> w, std::initializer_list<double> b, std::initializer_list<double> c) {
    const Index n = static_cast<Index>(w.size());
    Eigen::MatrixXd W(n, 1);
    Eigen::VectorXd bb(n), cc(n);
    Index i = 0;
    for (double v : w)
        W(i++, 0) = v;
    i = 0;
    for (double v : b)
        bb[i++] = v;
    i = 0;
    for (double v : c)
        cc[i++] = v;
    return Net(W, bb, cc);
}

double xibar(double x) { return -std::log(2.0 / (std::sin(std::numbers::pi * x / 2.0) + 0.5) - 1.0); }

}  // namespace

TEST(ShallowNet, Forward) {
    EXPECT_DOUBLE_EQ(nn_forward(net1({1}, {0}, {1}), 0.7), 0.7);
    EXPECT_DOUBLE_EQ(nn_forward(net1({1, 1}, {0, -0.5}, {1, -1}), 0.8), 0.5);
    Net zero = nn_random_init(1, 5, 3);
    zero.c().setZero();
    EXPECT_EQ(nn_forward(zero, 0.42), 0.0);
    const Net two = nn_random_init(2, 3, 1);
    EXPECT_THROW(nn_forward(two, 0.5), std::invalid_argument);
    EXPECT_THROW(nn_forward(net1({1}, {0}, {1}), Eigen::Vector2d(0.1, 0.2)), std::invalid_argument);
}

TEST(ShallowNet, ParamRoundTrip) {
    const Net net = nn_random_init(2, 4, 9);
    EXPECT_EQ(net.n_params(), 16);
    const ParamVector theta = net.params();
    const Net back = Net::from_params(2, 4, theta);
    EXPECT_EQ(back.params(), theta);
    EXPECT_EQ(params_from_json(params_to_json(theta)), theta);
    // Canonical order: W row-major, then b, then c.
    EXPECT_EQ(theta[1], net.W()(0, 1));
    EXPECT_EQ(theta[8], net.b()[0]);
    EXPECT_EQ(theta[12], net.c()[0]);
}

TEST(ShallowNet, ParamGradientHandChainRule) {
    const Net net = net1({1}, {0}, {2});
    const ParamVector g = nn_param_gradient(net, 0.5);
    EXPECT_DOUBLE_EQ(g[net.c_offset(0)], 0.5);
    EXPECT_DOUBLE_EQ(g[net.w_offset(0, 0)], 1.0);
    // c * H(Wx + b) = 2.
    EXPECT_DOUBLE_EQ(g[net.b_offset(0)], 2.0);

    const ParamVector dead = nn_param_gradient(net1({1}, {-1}, {3}), 0.5);
    EXPECT_EQ(dead.norm(), 0.0);
}

TEST(ShallowNet, ParamGradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + trial % 2;
        const Net net = nn_random_init(d, 6, 100 + trial);
        const Eigen::VectorXd x = d == 1 ? Eigen::VectorXd::Constant(1, unit(rng)) : Eigen::VectorXd(Eigen::Vector2d(unit(rng), unit(rng)));
        const ParamVector g = nn_param_gradient(net, x);
        ParamVector fd(g.size());
        const double step = 1e-6;
        for (Index k = 0; k < g.size(); ++k) {
            ParamVector tp = net.params(), tm = net.params();
            tp[k] += step;
            tm[k] -= step;
            fd[k] = (nn_forward(Net::from_params(d, 6, tp), x) - nn_forward(Net::from_params(d, 6, tm), x)) /
                    (2.0 * step);
        }
        EXPECT_LT((g - fd).norm(), 1e-7 * std::max(1.0, g.norm())) << "trial " << trial;
    }
}

TEST(ShallowNet, HomogeneityAndLipschitz) {
    const Net net = nn_random_init(1, 8, 4);
    Net scaled = net;
    scaled.c() *= 3.0;
    const double lip = nn_lipschitz_bound(net);
    for (double x = 0.0; x <= 1.0; x += 0.05) {
        EXPECT_NEAR(nn_forward(scaled, x), 3.0 * nn_forward(net, x), 1e-13);
        const double y = std::min(1.0, x + 0.013);
        EXPECT_LE(std::abs(nn_forward(net, x) - nn_forward(net, y)), lip * (y - x) + 1e-15);
    }
}

TEST(ShallowNet, InterpolationInit) {
    const Net lin = nn_interpolate_init(4, [](double x) { return x; });
    for (double x = 0.0; x <= 1.0; x += 0.01)
        EXPECT_NEAR(nn_forward(lin, x), x, 1e-12);

    const Net net = nn_interpolate_init(9, xibar);
    for (int i = 0; i < 9; ++i) {
        const double x = i / 8.0;
        EXPECT_NEAR(nn_forward(net, x), xibar(x), 1e-12);
    }
    EXPECT_NEAR(xibar(1.0), std::log(3.0), 1e-14);
    EXPECT_NEAR(nn_forward(net, 1.0), 1.0986122886681098, 1e-12);

    const Net zero = nn_interpolate_init(5, [](double) { return 0.0; });
    for (double x = 0.0; x <= 1.0; x += 0.1)
        EXPECT_EQ(nn_forward(zero, x), 0.0);
    EXPECT_THROW(nn_interpolate_init(1, xibar), std::invalid_argument);
}

TEST(ShallowNet, SeededInitIsDeterministic) {
    EXPECT_EQ(nn_random_init(1, 8, 5).params(), nn_random_init(1, 8, 5).params());
    EXPECT_NE(nn_random_init(1, 8, 5).params(), nn_random_init(1, 8, 6).params());
    const Net net = nn_random_init(2, 50, 1);
    EXPECT_LE(net.W().cwiseAbs().maxCoeff(), 1.0);
    EXPECT_LE(net.c().cwiseAbs().maxCoeff(), 0.5);
}

TEST(Weight, ClosedForms) {
    const WeightSpec lo = LogisticOffset{100.0};
    EXPECT_DOUBLE_EQ(weight_eval(lo, 0.0), 51.0);
    EXPECT_DOUBLE_EQ(weight_deriv(lo, 0.0), 25.0);
    const WeightSpec bl = BoundedLogistic{};
    EXPECT_DOUBLE_EQ(weight_eval(bl, 0.0), 1.5);
    EXPECT_DOUBLE_EQ(weight_inv(bl, 0.0), 2.0 / 3.0);
    const WeightSpec c = ConstantWeight{3.0};
    EXPECT_EQ(weight_eval(c, 17.0), 3.0);
    EXPECT_EQ(weight_deriv(c, 17.0), 0.0);
}

TEST(Weight, BoundsMonotonicityAndStability) {
    for (const WeightSpec& spec : {WeightSpec{LogisticOffset{100.0}}, WeightSpec{BoundedLogistic{}}}) {
        const auto b = weight_bounds(spec);
        double prev = -1.0;
        for (int i = 0; i <= 1000; ++i) {
            const double s = -30.0 + 0.06 * i;
            const double w = weight_eval(spec, s);
            EXPECT_GT(w, prev);
            EXPECT_GE(w, b.lower);
            EXPECT_LE(w, b.upper);
            EXPECT_NEAR(weight_inv(spec, s) * w, 1.0, 1e-15);
            prev = w;
        }
        EXPECT_TRUE(std::isfinite(weight_eval(spec, 800.0)));
        EXPECT_TRUE(std::isfinite(weight_eval(spec, -800.0)));
    }
    EXPECT_DOUBLE_EQ(weight_bounds(LogisticOffset{100.0}).lower, 1.0);
    EXPECT_DOUBLE_EQ(weight_bounds(LogisticOffset{100.0}).upper, 101.0);
    const auto inv = inverse_weight_bounds(BoundedLogistic{});
    EXPECT_DOUBLE_EQ(inv.lower, 0.4);
    EXPECT_DOUBLE_EQ(inv.upper, 2.0);
}

TEST(Weight, DerivativesMatchFiniteDifferences) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> dist(-8.0, 8.0);
    for (const WeightSpec& spec : {WeightSpec{LogisticOffset{100.0}}, WeightSpec{BoundedLogistic{}}}) {
        for (int i = 0; i < 100; ++i) {
            const double s = dist(rng), h = 1e-5;
            const double fd = (weight_eval(spec, s + h) - weight_eval(spec, s - h)) / (2 * h);
            EXPECT_NEAR(weight_deriv(spec, s), fd, 1e-8 * std::max(1.0, std::abs(fd)));
            const double fd2 = (weight_deriv(spec, s + h) - weight_deriv(spec, s - h)) / (2 * h);
            EXPECT_NEAR(weight_deriv2(spec, s), fd2, 1e-6 * std::max(1.0, std::abs(fd2)));
        }
    }
}

TEST(Weight, JsonRoundTrip) {
    const WeightSpec spec = weight_from_json(nlohmann::json{{"variant", "logistic_offset"}, {"M", 100.0}});
    ASSERT_TRUE(std::holds_alternative<LogisticOffset>(spec));
    EXPECT_EQ(std::get<LogisticOffset>(spec).M, 100.0);
    EXPECT_TRUE(std::holds_alternative<BoundedLogistic>(weight_from_json(weight_to_json(BoundedLogistic{}))));
    EXPECT_THROW(weight_from_json(nlohmann::json{{"variant", "tanh"}}), std::invalid_argument);
}

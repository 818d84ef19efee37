#include "neurofem/shallow_net.hpp"

namespace neurofem {

ControlSample sample_control(const Net& net, const Point& p) {
    const int d = net.input_dim();
    ControlSample s;
    double value = 0.0;
    for (Index j = 0; j < net.n_neurons(); ++j) {
        double z = net.b()[j];
        for (int k = 0; k < d; ++k)
            z += net.W()(j, k) * p[k];
        if (z > 0.0) {
            value += net.c()[j] * z;
            for (int k = 0; k < d; ++k)
                s.grad[k] += net.c()[j] * net.W()(j, k);
        }
    }
    s.value = value;
    return s;
}

ParamVector control_param_gradient(const Net& net, const Point& p) {
    return nn_param_gradient(net, p.head(net.input_dim()));
}

Eigen::MatrixX2d control_mixed_gradient(const Net& net, const Point& p) {
    Eigen::MatrixX2d g = Eigen::MatrixX2d::Zero(net.n_params(), 2);
    g.leftCols(net.input_dim()) = nn_mixed_gradient(net, p.head(net.input_dim()));
    return g;
}

Net nn_interpolate_init(Index n, const std::function<double(double)>& target) {
    if (n < 2)
        throw std::invalid_argument("nn_interpolate_init: need at least two nodes");
    const double h = 1.0 / static_cast<double>(n - 1);
    std::vector<double> y(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k)
        y[static_cast<std::size_t>(k)] = target(k == n - 1 ? 1.0 : k * h);
    const auto slope = [&](Index k) { return (y[static_cast<std::size_t>(k + 1)] - y[static_cast<std::size_t>(k)]) / h; };

    Net net(1, n);
    // Constant neuron: ReLU(0*x + 1) = 1.
    net.W()(0, 0) = 0.0;
    net.b()[0] = 1.0;
    net.c()[0] = y[0];
    // Linear neuron: ReLU(x) = x on [0,1].
    net.W()(1, 0) = 1.0;
    net.b()[1] = 0.0;
    net.c()[1] = slope(0);
    for (Index k = 1; k + 1 < n; ++k) {
        net.W()(k + 1, 0) = 1.0;
        net.b()[k + 1] = -k * h;
        net.c()[k + 1] = slope(k) - slope(k - 1);
    }
    return net;
}

Net nn_random_init(int input_dim, Index n_neurons, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> hidden(-1.0, 1.0);
    std::uniform_real_distribution<double> output(-0.5, 0.5);
    Net net(input_dim, n_neurons);
    for (Index j = 0; j < n_neurons; ++j) {
        for (int k = 0; k < input_dim; ++k)
            net.W()(j, k) = hidden(rng);
        net.b()[j] = hidden(rng);
    }
    for (Index j = 0; j < n_neurons; ++j)
        net.c()[j] = output(rng);
    return net;
}

Net nn_uniform_init(int input_dim, Index n_neurons, double range, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-range, range);
    Net net(input_dim, n_neurons);
    ParamVector theta(net.n_params());
    for (Index i = 0; i < theta.size(); ++i)
        theta[i] = u(rng);
    net.set_params(theta);
    return net;
}

nlohmann::json params_to_json(const ParamVector& theta) {
    return nlohmann::json(std::vector<double>(theta.data(), theta.data() + theta.size()));
}

ParamVector params_from_json(const nlohmann::json& j) {
    if (!j.is_array())
        throw std::invalid_argument("params_from_json: expected a flat array");
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const ParamVector>(values.data(), static_cast<Index>(values.size()));
}

}  // namespace neurofem

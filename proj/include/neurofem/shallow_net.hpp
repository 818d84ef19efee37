#pragma once

#include "neurofem/common.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <random>

namespace neurofem {

/// Flat parameter vector in canonical order: W (row-major, n x d), then b, then c.
using ParamVector = Eigen::VectorXd;

/// One-hidden-layer ReLU network  x -> sum_j c_j max(0, W_j . x + b_j).
template <typename Scalar>
class ShallowNet {
public:
    using Vector = VectorX<Scalar>;
    using Matrix = MatrixX<Scalar>;

    ShallowNet(int input_dim, Index n_neurons)
        : W_(Matrix::Zero(n_neurons, input_dim)), b_(Vector::Zero(n_neurons)), c_(Vector::Zero(n_neurons)) {
        check_shape();
    }

    ShallowNet(Matrix W, Vector b, Vector c) : W_(std::move(W)), b_(std::move(b)), c_(std::move(c)) {
        if (b_.size() != W_.rows() || c_.size() != W_.rows())
            throw std::invalid_argument("ShallowNet: W, b and c disagree on the neuron count");
        check_shape();
    }

    static ShallowNet from_params(int input_dim, Index n_neurons, const Vector& theta) {
        ShallowNet net(input_dim, n_neurons);
        net.set_params(theta);
        return net;
    }

    int input_dim() const { return static_cast<int>(W_.cols()); }
    Index n_neurons() const { return W_.rows(); }
    Index n_params() const { return n_neurons() * (input_dim() + 2); }

    const Matrix& W() const { return W_; }
    const Vector& b() const { return b_; }
    const Vector& c() const { return c_; }
    Matrix& W() { return W_; }
    Vector& b() { return b_; }
    Vector& c() { return c_; }

    Vector params() const {
        const Index n = n_neurons(), d = input_dim();
        Vector theta(n_params());
        for (Index j = 0; j < n; ++j)
            for (Index k = 0; k < d; ++k)
                theta[j * d + k] = W_(j, k);
        theta.segment(n * d, n) = b_;
        theta.segment(n * d + n, n) = c_;
        return theta;
    }

    void set_params(const Vector& theta) {
        if (theta.size() != n_params())
            throw std::invalid_argument("ShallowNet: parameter vector has the wrong length");
        const Index n = n_neurons(), d = input_dim();
        for (Index j = 0; j < n; ++j)
            for (Index k = 0; k < d; ++k)
                W_(j, k) = theta[j * d + k];
        b_ = theta.segment(n * d, n);
        c_ = theta.segment(n * d + n, n);
    }

    /// Offsets of the three parameter blocks inside the flat vector.
    Index w_offset(Index neuron, Index k) const { return neuron * input_dim() + k; }
    Index b_offset(Index neuron) const { return n_neurons() * input_dim() + neuron; }
    Index c_offset(Index neuron) const { return n_neurons() * (input_dim() + 1) + neuron; }

private:
    void check_shape() const {
        if (W_.cols() < 1 || W_.cols() > 2)
            throw std::invalid_argument("ShallowNet: input dimension must be 1 or 2");
        if (W_.rows() < 1)
            throw std::invalid_argument("ShallowNet: at least one neuron is required");
    }

    Matrix W_;
    Vector b_;
    Vector c_;
};

namespace detail {
template <typename Scalar, typename Derived>
void check_input(const ShallowNet<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
    if (x.size() != net.input_dim())
        throw std::invalid_argument("ShallowNet: input has dimension " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(net.input_dim()));
}

/// ReLU subgradient, taking 0 at the kink.
template <typename Scalar>
Scalar heaviside(Scalar z) {
    return z > Scalar(0) ? Scalar(1) : Scalar(0);
}
}  // namespace detail

template <typename Scalar, typename Derived>
Scalar nn_forward(const ShallowNet<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
    detail::check_input(net, x);
    const VectorX<Scalar> z = net.W() * x.template cast<Scalar>() + net.b();
    return net.c().dot(z.cwiseMax(Scalar(0)));
}

template <typename Scalar>
Scalar nn_forward(const ShallowNet<Scalar>& net, Scalar x) {
    return nn_forward(net, VectorX<Scalar>::Constant(1, x));
}

/// Exact gradient with respect to all parameters, in canonical order.
template <typename Scalar, typename Derived>
VectorX<Scalar> nn_param_gradient(const ShallowNet<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
    detail::check_input(net, x);
    const Index n = net.n_neurons(), d = net.input_dim();
    VectorX<Scalar> g(net.n_params());
    for (Index j = 0; j < n; ++j) {
        const Scalar z = net.W().row(j).dot(x.template cast<Scalar>()) + net.b()[j];
        const Scalar active = detail::heaviside(z);
        for (Index k = 0; k < d; ++k)
            g[net.w_offset(j, k)] = net.c()[j] * active * Scalar(x[k]);
        g[net.b_offset(j)] = net.c()[j] * active;
        g[net.c_offset(j)] = z > Scalar(0) ? z : Scalar(0);
    }
    return g;
}

template <typename Scalar>
VectorX<Scalar> nn_param_gradient(const ShallowNet<Scalar>& net, Scalar x) {
    return nn_param_gradient(net, VectorX<Scalar>::Constant(1, x));
}

/// Gradient with respect to the input x.
template <typename Scalar, typename Derived>
VectorX<Scalar> nn_input_gradient(const ShallowNet<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
    detail::check_input(net, x);
    VectorX<Scalar> g = VectorX<Scalar>::Zero(net.input_dim());
    for (Index j = 0; j < net.n_neurons(); ++j) {
        const Scalar z = net.W().row(j).dot(x.template cast<Scalar>()) + net.b()[j];
        if (z > Scalar(0))
            g += net.c()[j] * net.W().row(j).transpose();
    }
    return g;
}

/// Mixed derivative d/dtheta (d xi / dx_k): an n_params x d matrix.
template <typename Scalar, typename Derived>
MatrixX<Scalar> nn_mixed_gradient(const ShallowNet<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
    detail::check_input(net, x);
    const Index d = net.input_dim();
    MatrixX<Scalar> g = MatrixX<Scalar>::Zero(net.n_params(), d);
    for (Index j = 0; j < net.n_neurons(); ++j) {
        const Scalar z = net.W().row(j).dot(x.template cast<Scalar>()) + net.b()[j];
        if (!(z > Scalar(0)))
            continue;
        for (Index k = 0; k < d; ++k) {
            g(net.w_offset(j, k), k) = net.c()[j];
            g(net.c_offset(j), k) = net.W()(j, k);
        }
    }
    return g;
}

/// Lipschitz bound sum_j |c_j| * ||W_j||.
template <typename Scalar>
Scalar nn_lipschitz_bound(const ShallowNet<Scalar>& net) {
    Scalar l(0);
    for (Index j = 0; j < net.n_neurons(); ++j)
        l += std::abs(net.c()[j]) * net.W().row(j).norm();
    return l;
}

using Net = ShallowNet<double>;

/// Value and spatial gradient of a control at a physical point (padded to 2D).
struct ControlSample {
    double value = 0.0;
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
};

ControlSample sample_control(const Net& net, const Point& p);
ParamVector control_param_gradient(const Net& net, const Point& p);
/// n_params x 2 mixed derivative (second column zero in 1D).
Eigen::MatrixX2d control_mixed_gradient(const Net& net, const Point& p);

/// 1D network reproducing the piecewise-linear interpolant of `target` at n
/// uniformly spaced nodes on [0,1] (n >= 2). Uses one constant neuron, one
/// linear neuron and n-2 kink neurons at the interior nodes.
Net nn_interpolate_init(Index n, const std::function<double(double)>& target);

/// Seeded random network: W, b ~ U(-1,1), c ~ U(-1/2,1/2).
Net nn_random_init(int input_dim, Index n_neurons, std::uint64_t seed);

/// Network with every parameter drawn from U(-range, range).
Net nn_uniform_init(int input_dim, Index n_neurons, double range, std::mt19937_64& rng);

nlohmann::json params_to_json(const ParamVector& theta);
ParamVector params_from_json(const nlohmann::json& j);

}  // namespace neurofem

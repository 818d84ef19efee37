#include "neurofem/optimizer.hpp"

#include <Eigen/QR>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace neurofem {

ReducedProblem::ReducedProblem(const ProblemSpec& problem, const Discretization& disc, const WeightSpec& weight,
                               const CostSpec& cost)
    : solver_(disc.kind, problem, disc.trial, weight, disc.options, disc.test),
      cost_(cost, problem, disc.trial) {}

ReducedProblem::Evaluation ReducedProblem::evaluate(const Net& xi) const {
    Evaluation ev{0.0, 0.0, 0.0, solver_.solve(xi)};
    ev.j1 = cost_.j1(ev.state.u);
    ev.reg = cost_.regularization(solver_.control_cache(), ev.state.control.xi);
    ev.j = ev.j1 + ev.reg;
    return ev;
}

ControlSensitivity ReducedProblem::derivative(const Evaluation& ev) const {
    ControlSensitivity s = solver_.sensitivity(ev.state, cost_.grad_u(ev.state.u));
    if (cost_.alpha() != 0.0)
        s.value += cost_.alpha() * ev.state.control.xi;
    return s;
}

ParamVector ReducedProblem::gradient(const Net& xi, const Evaluation& ev) const {
    return solver_.pullback(xi, derivative(ev));
}

double ReducedProblem::xi_l2(const Evaluation& ev) const {
    return std::sqrt(xi_l2_squared(solver_.control_cache(), ev.state.control.xi));
}

double reduced_cost(const ProblemSpec& problem, const Discretization& disc, const WeightSpec& weight,
                    const CostSpec& cost, const Net& xi) {
    return ReducedProblem(problem, disc, weight, cost).value(xi);
}

ParamVector reduced_gradient(const ProblemSpec& problem, const Discretization& disc, const WeightSpec& weight,
                             const CostSpec& cost, const Net& xi) {
    return ReducedProblem(problem, disc, weight, cost).gradient(xi);
}

void OptimConfig::validate() const {
    if (max_iters < 1)
        throw std::invalid_argument("OptimConfig: max_iters must be at least 1");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("OptimConfig: learning_rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
        throw std::invalid_argument("OptimConfig: Adam decay rates must lie in [0,1)");
    if (!(adam_eps > 0.0))
        throw std::invalid_argument("OptimConfig: adam_eps must be positive");
    if (trace_every < 1)
        throw std::invalid_argument("OptimConfig: trace_every must be at least 1");
    if (grad_tolerance < 0.0)
        throw std::invalid_argument("OptimConfig: grad_tolerance must be nonnegative");
}

std::string TrainTrace::to_csv() const {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "iter,cost,grad_norm,xi_l2\n";
    for (const auto& r : rows)
        os << r.iter << ',' << r.cost << ',' << r.grad_norm << ',' << r.xi_l2 << '\n';
    return os.str();
}

void TrainTrace::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << to_csv();
}

TrainTrace quasi_minimize(const ReducedProblem& reduced, const Net& xi0, const OptimConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    TrainTrace trace;
    trace.best = xi0;
    Net xi = xi0;
    ParamVector theta = xi.params();
    ParamVector m = ParamVector::Zero(theta.size());
    ParamVector v = ParamVector::Zero(theta.size());
    double best = std::numeric_limits<double>::infinity();

    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    for (int k = 0;; ++k) {
        xi.set_params(theta);
        std::optional<ReducedProblem::Evaluation> evaluated;
        ParamVector g;
        try {
            evaluated = reduced.evaluate(xi);
            if (std::isfinite(evaluated->j))
                g = reduced.gradient(xi, *evaluated);
        } catch (const SolverFailure& e) {
            if (k == 0)
                throw;
            trace.wall_seconds = elapsed();
            throw DivergedError(std::string("solver failure during training: ") + e.what(), trace);
        }
        const auto& ev = *evaluated;
        if (!std::isfinite(ev.j) || !g.allFinite()) {
            trace.wall_seconds = elapsed();
            throw DivergedError("non-finite cost or gradient at iteration " + std::to_string(k), trace);
        }
        if (k == 0)
            trace.initial_cost = ev.j;
        trace.iterate_costs.push_back(ev.j);
        if (ev.j < best) {
            best = ev.j;
            trace.best = xi;
            trace.best_iter = k;
        }
        const double gnorm = g.norm();
        trace.converged = gnorm <= config.grad_tolerance;
        const bool last = k == config.max_iters || trace.converged;
        if (k % config.trace_every == 0 || last)
            trace.rows.push_back({k, best, gnorm, reduced.xi_l2(ev)});
        trace.iterations = k;
        if (last)
            break;

        if (config.method == OptimMethod::GradientDescent) {
            theta -= config.learning_rate * g;
        } else {
            m = config.beta1 * m + (1.0 - config.beta1) * g;
            v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
            const double c1 = 1.0 - std::pow(config.beta1, k + 1);
            const double c2 = 1.0 - std::pow(config.beta2, k + 1);
            theta.array() -= config.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + config.adam_eps);
        }
    }
    trace.best_cost = best;
    trace.wall_seconds = elapsed();
    return trace;
}

TrainTrace quasi_minimize(const ProblemSpec& problem, const Discretization& disc, const WeightSpec& weight,
                          const CostSpec& cost, const Net& xi0, const OptimConfig& config) {
    return quasi_minimize(ReducedProblem(problem, disc, weight, cost), xi0, config);
}

QuasiOptimalityReport toy_quasi_optimality_check(int dimension, int subspace_dimension, int instances,
                                                 int deltas_per_instance, std::uint64_t seed) {
    if (dimension < 1 || subspace_dimension < 1 || subspace_dimension > dimension)
        throw std::invalid_argument("toy_quasi_optimality_check: need 1 <= k <= d");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto gaussian = [&](Index rows, Index cols) {
        Eigen::MatrixXd a(rows, cols);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i)
                a(i, j) = normal(rng);
        return a;
    };

    QuasiOptimalityReport rep;
    rep.dimension = dimension;
    rep.subspace_dimension = subspace_dimension;
    const Index d = dimension, k = subspace_dimension;
    for (int inst = 0; inst < instances; ++inst) {
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(d, d)).householderQ();
        Eigen::VectorXd lambda(d);
        for (Index i = 0; i < d; ++i)
            lambda[i] = 0.1 + 9.9 * unit(rng);
        const double gamma = lambda.minCoeff(), lip = lambda.maxCoeff();
        const Eigen::MatrixXd h = q * lambda.asDiagonal() * q.transpose();
        const Eigen::VectorXd xbar = gaussian(d, 1);
        const Eigen::MatrixXd basis =
            Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(d, k)).householderQ() * Eigen::MatrixXd::Identity(d, k);

        auto j = [&](const Eigen::VectorXd& x) { return 0.5 * (x - xbar).dot(h * (x - xbar)); };
        const Eigen::MatrixXd hv = basis.transpose() * h * basis;
        const Eigen::VectorXd xn = basis * hv.ldlt().solve(basis.transpose() * h * xbar);
        const double inf = j(xn);
        const double dist2 = (xbar - basis * (basis.transpose() * xbar)).squaredNorm();

        // The subspace minimizer must not be beaten by any sampled point of V.
        for (int t = 0; t < 200; ++t) {
            const Eigen::VectorXd z = basis.transpose() * xbar + gaussian(k, 1);
            if (j(basis * z) < inf - 1e-12 * (1.0 + std::abs(inf)))
                ++rep.violations;
        }

        for (int s = 0; s < deltas_per_instance; ++s) {
            const double delta = std::pow(10.0, -6.0 + 6.0 * unit(rng));
            // Quasi-minimizer on the level set j = inf + fraction * delta/2.
            Eigen::VectorXd dir = basis * gaussian(k, 1);
            dir /= dir.norm();
            const double fraction = s == 0 ? 1.0 : unit(rng);
            const double t = std::sqrt(fraction * delta / dir.dot(h * dir));
            const Eigen::VectorXd x = xn + t * dir;
            if (j(x) > inf + 0.5 * delta * (1.0 + 1e-10))
                continue;  // not a quasi-minimizer after rounding
            ++rep.samples;
            const double err2 = (xbar - x).squaredNorm();
            const double bound2 = lip / gamma * dist2 + delta / gamma;
            rep.worst_ratio = std::max(rep.worst_ratio, std::sqrt(err2 / bound2));
            if (err2 > bound2 * (1.0 + 1e-10))
                ++rep.violations;
        }
    }
    rep.instances = instances;
    return rep;
}

}  // namespace neurofem

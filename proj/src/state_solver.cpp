#include "neurofem/state_solver.hpp"

#include "neurofem/infsup.hpp"

#include <algorithm>
#include <cmath>

namespace neurofem {

std::string to_string(SolverKind kind) {
    switch (kind) {
    case SolverKind::WeightedLSQ: return "weighted_lsq";
    case SolverKind::MixedLSQ: return "mixed_lsq";
    case SolverKind::WeightedGalerkin: return "weighted_galerkin";
    case SolverKind::DDMinres: return "dd_minres";
    }
    return "unknown";
}

SolverKind solver_kind_from_string(const std::string& name) {
    for (auto k : {SolverKind::WeightedLSQ, SolverKind::MixedLSQ, SolverKind::WeightedGalerkin, SolverKind::DDMinres})
        if (to_string(k) == name)
            return k;
    throw std::invalid_argument("unknown solver kind '" + name + "'");
}

namespace {

bool is_saddle(SolverKind k) { return k == SolverKind::MixedLSQ || k == SolverKind::DDMinres; }

/// Matrix over test x test with the test-side tabulation of the cache.
template <class Kernel>
Eigen::MatrixXd test_block(const QuadratureCache& cache, Kernel&& kernel) {
    const Index n = cache.test().dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& qp : cache)
        for (const auto& v : qp.test) {
            if (v.dof < 0)
                continue;
            for (const auto& u : qp.test)
                if (u.dof >= 0)
                    m(v.dof, u.dof) += qp.jxw * kernel(u.shape, v.shape, qp);
        }
    return m;
}

ShapeValue shape_of(const LocalBasis& basis, const Eigen::VectorXd& coeffs) {
    return {local_value(basis, coeffs), local_grad(basis, coeffs)};
}

MeshHandle uniform_mesh(int dimension, Index n) {
    if (dimension == 1)
        return std::make_shared<const Mesh1D>(n);
    return std::make_shared<const Mesh2DTri>(n, n);
}

}  // namespace

FunctionSpace default_trial_space(SolverKind kind, const ProblemSpec& problem, Index n_elements) {
    auto mesh = uniform_mesh(problem.dimension, n_elements);
    if (kind == SolverKind::DDMinres)
        return FunctionSpace::p0(mesh);
    return FunctionSpace::p1(mesh, problem.trial_constraint());
}

StateSolver::StateSolver(SolverKind kind, ProblemSpec problem, FunctionSpace trial, WeightSpec weight,
                         SolverOptions options, std::optional<FunctionSpace> test)
    : kind_(kind), problem_(std::move(problem)), trial_(trial), test_(trial), weight_(weight),
      options_(std::move(options)) {
    problem_.validate();
    if (trial_.dimension() != problem_.dimension)
        throw std::invalid_argument("StateSolver: trial space and problem disagree on the dimension");
    if (problem_.diffusion > 0.0 && kind_ != SolverKind::WeightedGalerkin)
        throw std::invalid_argument("StateSolver: only the weighted Galerkin form accepts diffusion");

    switch (kind_) {
    case SolverKind::WeightedLSQ:
    case SolverKind::WeightedGalerkin:
        if (trial_.kind() != SpaceKind::P1)
            throw std::invalid_argument("StateSolver: " + to_string(kind_) + " needs a conforming P1 space");
        break;
    case SolverKind::MixedLSQ:
        if (trial_.kind() != SpaceKind::P1)
            throw std::invalid_argument("StateSolver: mixed_lsq needs a conforming P1 trial space");
        if (test)
            test_ = *test;
        else if (problem_.dimension == 1)
            test_ = FunctionSpace::p0(refine_mesh(trial_.mesh(), options_.residual_refinement));
        else
            test_ = FunctionSpace::p1_disc(trial_.mesh());
        if (test_.kind() == SpaceKind::P1)
            throw std::invalid_argument("StateSolver: the residual space must be discontinuous");
        break;
    case SolverKind::DDMinres:
        if (problem_.dimension != 1)
            throw std::invalid_argument("StateSolver: dd_minres is implemented in 1D only");
        // The ultraweak form only needs an L2 trial space; P0 is the usual choice.
        if (trial_.kind() == SpaceKind::P1Disc)
            throw std::invalid_argument("StateSolver: dd_minres needs a P0 or P1 trial space");
        if (test)
            test_ = *test;
        else
            test_ = FunctionSpace::p1(refine_mesh(trial_.mesh(), options_.test_refinement), ProblemSpec::outflow);
        if (test_.kind() != SpaceKind::P1)
            throw std::invalid_argument("StateSolver: dd_minres needs a P1 test space");
        break;
    }

    const QuadratureRule rule = options_.rule ? *options_.rule : default_rule(problem_.dimension);
    cache_ = std::make_shared<const QuadratureCache>(trial_, test_, rule);
    forcing_.reserve(static_cast<std::size_t>(cache_->size()));
    for (const auto& qp : *cache_)
        forcing_.push_back(problem_.f(qp.x));

    if (is_saddle(kind_)) {
        const auto& p = problem_;
        if (kind_ == SolverKind::MixedLSQ)
            b_ = assemble_form(
                *cache_, [&p](const ShapeValue& u, const ShapeValue& v, const Point&, double) { return p.apply(u) * v.value; },
                unit_field);
        else
            b_ = assemble_form(
                *cache_,
                [&p](const ShapeValue& u, const ShapeValue& v, const Point&, double) {
                    return u.value * p.apply_adjoint(v);
                },
                unit_field);
        f_ = assemble_functional(
            *cache_, [](const ShapeValue& v, const Point&, double f) { return f * v.value; },
            [this](const QuadraturePoint& qp) { return forcing_[static_cast<std::size_t>(qp.index)]; });
        a0_ = test_block(*cache_, [this](const ShapeValue& u, const ShapeValue& v, const QuadraturePoint&) {
            return plain_kernel(u, v);
        });
    }

    if (kind_ == SolverKind::DDMinres) {
        if (test_.dim() <= trial_.dim())
            throw SolverFailure("infsup", "dd_minres: the test space must be larger than the trial space");
        const Eigen::MatrixXd test_gram =
            a0_ + test_block(*cache_, [this](const ShapeValue& u, const ShapeValue& v, const QuadraturePoint&) {
                return weighted_kernel(u, v);
            });
        const Eigen::MatrixXd trial_gram = assemble_form(QuadratureCache(trial_, rule), mass_kernel, unit_field);
        infsup_ = estimate_infsup(test_gram, b_, trial_gram, test_gram).beta_h;
        if (!(infsup_ >= kInfSupTol))
            throw SolverFailure("infsup", "dd_minres: discrete inf-sup constant " + std::to_string(infsup_) +
                                              " is below tolerance", infsup_);
    }

    if (kind_ == SolverKind::WeightedGalerkin && options_.check_kernel_coercivity) {
        if (problem_.dimension != 1)
            throw std::invalid_argument(
                "StateSolver: the kernel-coercivity check needs nested meshes (1D); waive it in 2D");
        probe_ = FunctionSpace::p1(refine_mesh(trial_.mesh(), options_.kernel_refinement),
                                   problem_.trial_constraint());
        const auto& p = problem_;
        const Eigen::MatrixXd bc = assemble_form(
            QuadratureCache(trial_, *probe_, rule),
            [&p](const ShapeValue& u, const ShapeValue& v, const Point&, double) {
                return p.diffusion * u.grad.dot(v.grad) + p.apply(u) * v.value;
            },
            unit_field);
        kernel_basis_ = left_null_space(bc);
        probe_cache_ = std::make_shared<const QuadratureCache>(*probe_, rule);
        probe_gram_ = assemble_form(*probe_cache_, mass_kernel, unit_field) +
                      assemble_form(*probe_cache_, stiffness_kernel, unit_field);
    }
}

bool StateSolver::needs_spatial_weight() const {
    return kind_ == SolverKind::WeightedGalerkin && problem_.diffusion > 0.0;
}

double StateSolver::form_weight(double w) const { return kind_ == SolverKind::MixedLSQ ? 1.0 / w : w; }

double StateSolver::form_weight_deriv(double w, double dw) const {
    return kind_ == SolverKind::MixedLSQ ? -dw / (w * w) : dw;
}

double StateSolver::weighted_kernel(double av, const Eigen::Vector2d& ag, const ShapeValue& b) const {
    if (kind_ == SolverKind::MixedLSQ)
        return av * b.value;
    switch (options_.inner_product) {
    case TestInnerProduct::WeightedGradient:
    case TestInnerProduct::WeightedGradientPlusMass: return ag.dot(b.grad);
    case TestInnerProduct::GradientPlusWeightedMass: return av * b.value;
    case TestInnerProduct::WeightedFull: return ag.dot(b.grad) + av * b.value;
    }
    return 0.0;
}

double StateSolver::weighted_kernel(const ShapeValue& a, const ShapeValue& b) const {
    return weighted_kernel(a.value, a.grad, b);
}

double StateSolver::plain_kernel(const ShapeValue& a, const ShapeValue& b) const {
    if (kind_ == SolverKind::MixedLSQ)
        return 0.0;
    switch (options_.inner_product) {
    case TestInnerProduct::WeightedGradientPlusMass: return a.value * b.value;
    case TestInnerProduct::GradientPlusWeightedMass: return a.grad.dot(b.grad);
    default: return 0.0;
    }
}

ControlSamples StateSolver::sample(const Net& xi) const {
    if (xi.input_dim() != problem_.dimension)
        throw std::invalid_argument("StateSolver: network input dimension does not match the problem");
    return sample([&xi](const Point& x) { return sample_control(xi, x); });
}

ControlSamples StateSolver::sample(const std::function<ControlSample(const Point&)>& field) const {
    const Index n = cache_->size();
    ControlSamples c;
    c.xi.resize(n);
    c.w.resize(n);
    c.dw.resize(n);
    c.d2w.resize(n);
    c.xi_grad.resize(static_cast<std::size_t>(n));
    for (const auto& qp : *cache_) {
        const ControlSample s = field(qp.x);
        const Index q = qp.index;
        c.xi[q] = s.value;
        c.xi_grad[static_cast<std::size_t>(q)] = s.grad;
        c.w[q] = weight_eval(weight_, s.value);
        c.dw[q] = weight_deriv(weight_, s.value);
        c.d2w[q] = weight_deriv2(weight_, s.value);
    }
    return c;
}

Eigen::MatrixXd StateSolver::galerkin_matrix(const ControlSamples& c) const {
    const Index n = trial_.dim();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    const double eps = problem_.diffusion;
    for (const auto& qp : *cache_) {
        const Index q = qp.index;
        const double w = c.w[q];
        const Eigen::Vector2d grad_w = c.dw[q] * c.xi_grad[static_cast<std::size_t>(q)];
        for (const auto& v : qp.trial) {
            if (v.dof < 0)
                continue;
            const Eigen::Vector2d grad_wv = w * v.shape.grad + v.shape.value * grad_w;
            for (const auto& u : qp.trial)
                if (u.dof >= 0)
                    k(v.dof, u.dof) +=
                        qp.jxw * (eps * u.shape.grad.dot(grad_wv) + problem_.apply(u.shape) * w * v.shape.value);
        }
    }
    return k;
}

Eigen::MatrixXd StateSolver::weighted_test_block(const ControlSamples& c) const {
    return a0_ + test_block(*cache_, [&](const ShapeValue& u, const ShapeValue& v, const QuadraturePoint& qp) {
               return form_weight(c.w[qp.index]) * weighted_kernel(u, v);
           });
}

AssembledSystem StateSolver::assemble(const Net& xi) const { return assemble(sample(xi)); }

AssembledSystem StateSolver::assemble(const ControlSamples& c) const {
    AssembledSystem sys;
    sys.n_trial = trial_.dim();
    switch (kind_) {
    case SolverKind::WeightedLSQ: {
        const Index n = trial_.dim();
        sys.matrix = Eigen::MatrixXd::Zero(n, n);
        sys.rhs = Eigen::VectorXd::Zero(n);
        for (const auto& qp : *cache_) {
            const Index q = qp.index;
            const double wf = qp.jxw * c.w[q];
            for (const auto& v : qp.trial) {
                if (v.dof < 0)
                    continue;
                const double bv = problem_.apply(v.shape);
                sys.rhs[v.dof] += wf * forcing_[static_cast<std::size_t>(q)] * bv;
                for (const auto& u : qp.trial)
                    if (u.dof >= 0)
                        sys.matrix(v.dof, u.dof) += wf * problem_.apply(u.shape) * bv;
            }
        }
        sys.n_test = n;
        break;
    }
    case SolverKind::WeightedGalerkin: {
        sys.matrix = galerkin_matrix(c);
        sys.rhs = Eigen::VectorXd::Zero(trial_.dim());
        for (const auto& qp : *cache_)
            for (const auto& v : qp.trial)
                if (v.dof >= 0)
                    sys.rhs[v.dof] += qp.jxw * forcing_[static_cast<std::size_t>(qp.index)] * c.w[qp.index] *
                                      v.shape.value;
        sys.n_test = trial_.dim();
        break;
    }
    case SolverKind::MixedLSQ:
    case SolverKind::DDMinres: {
        const Index m = test_.dim(), n = trial_.dim();
        sys.a = weighted_test_block(c);
        sys.b = b_;
        sys.matrix = Eigen::MatrixXd::Zero(m + n, m + n);
        sys.matrix.topLeftCorner(m, m) = sys.a;
        sys.matrix.topRightCorner(m, n) = b_;
        sys.matrix.bottomLeftCorner(n, m) = b_.transpose();
        sys.rhs = Eigen::VectorXd::Zero(m + n);
        sys.rhs.head(m) = f_;
        sys.n_test = m;
        break;
    }
    }
    return sys;
}

double StateSolver::galerkin_kernel_coercivity(const std::vector<ControlSample>& varpi) const {
    if (!probe_)
        throw std::logic_error("StateSolver: kernel-coercivity probe was not set up");
    if (kernel_basis_.cols() == 0)
        return std::numeric_limits<double>::infinity();
    const auto& p = problem_;
    const Eigen::MatrixXd q = assemble_form(
        *probe_cache_,
        [&p](const ShapeValue& u, const ShapeValue& v, const Point&, const ControlSample& s) {
            const Eigen::Vector2d g = s.value * u.grad + u.value * s.grad;
            return p.diffusion * g.dot(v.grad) + (p.beta.dot(g) + p.sigma * s.value * u.value) * v.value;
        },
        [&varpi](const QuadraturePoint& qp) -> const ControlSample& {
            return varpi[static_cast<std::size_t>(qp.index)];
        });
    return subspace_coercivity(q, probe_gram_, kernel_basis_);
}

double StateSolver::kernel_coercivity(const std::function<ControlSample(const Point&)>& varpi) const {
    if (!probe_)
        throw std::logic_error("StateSolver: kernel-coercivity probe is only set up for weighted Galerkin");
    std::vector<ControlSample> samples;
    samples.reserve(static_cast<std::size_t>(probe_cache_->size()));
    for (const auto& qp : *probe_cache_)
        samples.push_back(varpi(qp.x));
    return galerkin_kernel_coercivity(samples);
}

StateSolution StateSolver::solve(const Net& xi) const {
    double alpha = std::numeric_limits<double>::quiet_NaN();
    if (probe_) {
        const WeightSpec& ws = weight_;
        alpha = kernel_coercivity([&xi, &ws](const Point& x) {
            const ControlSample s = sample_control(xi, x);
            return ControlSample{weight_inv(ws, s.value), weight_inv_deriv(ws, s.value) * s.grad};
        });
        if (!(alpha > kKernelCoercivityTol))
            throw SolverFailure("kernel-coercivity violated",
                                "weighted Galerkin: kernel coercivity estimate " + std::to_string(alpha) +
                                    " is not above tolerance",
                                alpha);
    }
    StateSolution sol = solve(sample(xi));
    sol.stability.kernel_coercivity = alpha;
    return sol;
}

StateSolution StateSolver::solve(ControlSamples c) const {
    if (c.xi.size() != cache_->size() || c.w.size() != cache_->size())
        throw std::invalid_argument("StateSolver: control samples do not match the quadrature");
    AssembledSystem sys = assemble(c);

    StabilityReport stab;
    stab.weight_min = c.w.size() ? c.w.minCoeff() : 0.0;
    stab.weight_max = c.w.size() ? c.w.maxCoeff() : 0.0;
    stab.infsup = infsup_;

    std::shared_ptr<const DenseLU<double>> lu;
    try {
        lu = std::make_shared<const DenseLU<double>>(sys.matrix);
    } catch (const SingularMatrixError& e) {
        throw SolverFailure("singular-system",
                            to_string(kind_) + ": singular system (min pivot " + std::to_string(e.min_pivot()) + ")",
                            e.min_pivot());
    }
    stab.pivot_ratio = lu->pivot_ratio();
    const Eigen::VectorXd x = lu->solve(sys.rhs);

    const Index m = sys.n_test, n = sys.n_trial;
    StateSolution sol{kind_, FEFunction(trial_, is_saddle(kind_) ? Eigen::VectorXd(x.tail(n)) : x),
                      std::nullopt, {}, std::move(c), stab, lu};
    if (is_saddle(kind_)) {
        sol.r = FEFunction(test_, x.head(m));
        sol.residual_samples.resize(cache_->size());
        for (const auto& qp : *cache_)
            sol.residual_samples[qp.index] = local_value(qp.test, sol.r->coeffs);
    } else if (kind_ == SolverKind::WeightedLSQ) {
        sol.residual_samples.resize(cache_->size());
        for (const auto& qp : *cache_) {
            const ShapeValue u = shape_of(qp.trial, sol.u.coeffs);
            sol.residual_samples[qp.index] =
                sol.control.w[qp.index] * (forcing_[static_cast<std::size_t>(qp.index)] - problem_.apply(u));
        }
    }
    if (!sol.u.coeffs.allFinite())
        throw SolverFailure("non-finite", to_string(kind_) + ": solution is not finite");
    return sol;
}

StateDerivative StateSolver::state_derivative(const StateSolution& sol, const Net& xi, const ParamVector& eta) const {
    if (sol.kind != kind_ || !sol.factorization)
        throw std::invalid_argument("state_derivative: solution does not belong to this solver");
    if (eta.size() != xi.n_params())
        throw std::invalid_argument("state_derivative: direction has the wrong length");
    const ControlSamples& c = sol.control;
    const auto& lu = *sol.factorization;
    const bool grads = needs_spatial_weight();

    std::vector<double> dxi(static_cast<std::size_t>(cache_->size()));
    std::vector<Eigen::Vector2d> ddxi(grads ? dxi.size() : 0);
    for (const auto& qp : *cache_) {
        const auto q = static_cast<std::size_t>(qp.index);
        dxi[q] = control_param_gradient(xi, qp.x).dot(eta);
        if (grads)
            ddxi[q] = control_mixed_gradient(xi, qp.x).transpose() * eta;
    }

    StateDerivative d{FEFunction(trial_), std::nullopt, {}};
    switch (kind_) {
    case SolverKind::WeightedLSQ: {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(trial_.dim());
        for (const auto& qp : *cache_) {
            const Index q = qp.index;
            const double res = forcing_[static_cast<std::size_t>(q)] - problem_.apply(shape_of(qp.trial, sol.u.coeffs));
            const double s = qp.jxw * c.dw[q] * dxi[static_cast<std::size_t>(q)] * res;
            for (const auto& v : qp.trial)
                if (v.dof >= 0)
                    g[v.dof] += s * problem_.apply(v.shape);
        }
        d.du.coeffs = lu.solve(g);
        d.dresidual_samples.resize(cache_->size());
        for (const auto& qp : *cache_) {
            const Index q = qp.index;
            const double res = forcing_[static_cast<std::size_t>(q)] - problem_.apply(shape_of(qp.trial, sol.u.coeffs));
            d.dresidual_samples[q] = c.dw[q] * dxi[static_cast<std::size_t>(q)] * res -
                                     c.w[q] * problem_.apply(shape_of(qp.trial, d.du.coeffs));
        }
        break;
    }
    case SolverKind::WeightedGalerkin: {
        const double eps = problem_.diffusion;
        Eigen::VectorXd g = Eigen::VectorXd::Zero(trial_.dim());
        for (const auto& qp : *cache_) {
            const Index q = qp.index;
            const auto sq = static_cast<std::size_t>(q);
            const ShapeValue u = shape_of(qp.trial, sol.u.coeffs);
            const double dom = c.dw[q] * dxi[sq];
            Eigen::Vector2d grad_dom = Eigen::Vector2d::Zero();
            if (grads)
                grad_dom = c.d2w[q] * dxi[sq] * c.xi_grad[sq] + c.dw[q] * ddxi[sq];
            const double res = forcing_[sq] - problem_.apply(u);
            for (const auto& v : qp.trial)
                if (v.dof >= 0)
                    g[v.dof] += qp.jxw * (res * dom * v.shape.value -
                                          eps * u.grad.dot(grad_dom * v.shape.value + dom * v.shape.grad));
        }
        d.du.coeffs = lu.solve(g);
        break;
    }
    case SolverKind::MixedLSQ:
    case SolverKind::DDMinres: {
        const Index m = test_.dim(), n = trial_.dim();
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + n);
        const Eigen::VectorXd& r = sol.r->coeffs;
        for (const auto& qp : *cache_) {
            const Index q = qp.index;
            const ShapeValue rq = shape_of(qp.test, r);
            const double s = qp.jxw * form_weight_deriv(c.w[q], c.dw[q]) * dxi[static_cast<std::size_t>(q)];
            for (const auto& v : qp.test)
                if (v.dof >= 0)
                    rhs[v.dof] -= s * weighted_kernel(rq.value, rq.grad, v.shape);
        }
        const Eigen::VectorXd x = lu.solve(rhs);
        d.dr = FEFunction(test_, x.head(m));
        d.du.coeffs = x.tail(n);
        d.dresidual_samples.resize(cache_->size());
        for (const auto& qp : *cache_)
            d.dresidual_samples[qp.index] = local_value(qp.test, d.dr->coeffs);
        break;
    }
    }
    return d;
}

ControlSensitivity StateSolver::sensitivity(const StateSolution& sol, const Eigen::VectorXd& g_u) const {
    if (sol.kind != kind_ || !sol.factorization)
        throw std::invalid_argument("sensitivity: solution does not belong to this solver");
    if (g_u.size() != trial_.dim())
        throw std::invalid_argument("sensitivity: cost gradient has the wrong length");
    const ControlSamples& c = sol.control;
    const auto& lu = *sol.factorization;
    ControlSensitivity s;
    s.value = Eigen::VectorXd::Zero(cache_->size());

    switch (kind_) {
    case SolverKind::WeightedLSQ: {
        const Eigen::VectorXd lambda = lu.solve_transpose(g_u);
        for (const auto& qp : *cache_) {
            const Index q = qp.index;
            const double res =
                forcing_[static_cast<std::size_t>(q)] - problem_.apply(shape_of(qp.trial, sol.u.coeffs));
            s.value[q] = c.dw[q] * res * problem_.apply(shape_of(qp.trial, lambda));
        }
        break;
    }
    case SolverKind::WeightedGalerkin: {
        const double eps = problem_.diffusion;
        const Eigen::VectorXd lambda = lu.solve_transpose(g_u);
        if (needs_spatial_weight())
            s.grad.assign(static_cast<std::size_t>(cache_->size()), Eigen::Vector2d::Zero());
        for (const auto& qp : *cache_) {
            const Index q = qp.index;
            const auto sq = static_cast<std::size_t>(q);
            const ShapeValue u = shape_of(qp.trial, sol.u.coeffs);
            const ShapeValue l = shape_of(qp.trial, lambda);
            const double res = forcing_[sq] - problem_.apply(u);
            s.value[q] = c.dw[q] * res * l.value;
            if (eps > 0.0) {
                s.value[q] -= eps * (c.d2w[q] * u.grad.dot(c.xi_grad[sq]) * l.value + c.dw[q] * u.grad.dot(l.grad));
                s.grad[sq] = -eps * c.dw[q] * l.value * u.grad;
            }
        }
        break;
    }
    case SolverKind::MixedLSQ:
    case SolverKind::DDMinres: {
        const Index m = test_.dim(), n = trial_.dim();
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + n);
        rhs.tail(n) = g_u;
        const Eigen::VectorXd lambda = lu.solve_transpose(rhs);
        const Eigen::VectorXd lr = lambda.head(m);
        for (const auto& qp : *cache_) {
            const Index q = qp.index;
            const ShapeValue rq = shape_of(qp.test, sol.r->coeffs);
            const ShapeValue lq = shape_of(qp.test, lr);
            s.value[q] = -form_weight_deriv(c.w[q], c.dw[q]) * weighted_kernel(rq.value, rq.grad, lq);
        }
        break;
    }
    }
    return s;
}

ParamVector StateSolver::pullback(const Net& xi, const ControlSensitivity& s) const {
    if (s.value.size() != cache_->size())
        throw std::invalid_argument("pullback: sensitivity does not match the control quadrature");
    ParamVector g = ParamVector::Zero(xi.n_params());
    const bool with_grad = !s.grad.empty();
    for (const auto& qp : *cache_) {
        const Index q = qp.index;
        if (s.value[q] != 0.0)
            g += (qp.jxw * s.value[q]) * control_param_gradient(xi, qp.x);
        if (with_grad) {
            const Eigen::Vector2d& e = s.grad[static_cast<std::size_t>(q)];
            if (!e.isZero())
                g += qp.jxw * (control_mixed_gradient(xi, qp.x) * e);
        }
    }
    return g;
}

Eigen::VectorXd StateSolver::constraint_residual(const StateSolution& sol) const {
    switch (kind_) {
    case SolverKind::WeightedLSQ: {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(trial_.dim());
        for (const auto& qp : *cache_)
            for (const auto& v : qp.trial)
                if (v.dof >= 0)
                    g[v.dof] += qp.jxw * problem_.apply(v.shape) * sol.residual_samples[qp.index];
        return g;
    }
    case SolverKind::MixedLSQ:
    case SolverKind::DDMinres: return b_.transpose() * sol.r->coeffs;
    case SolverKind::WeightedGalerkin: break;
    }
    return {};
}

StateSolution solve_weighted_lsq(const ProblemSpec& problem, const FunctionSpace& trial, const WeightSpec& weight,
                                 const Net& xi) {
    return StateSolver(SolverKind::WeightedLSQ, problem, trial, weight).solve(xi);
}

StateSolution solve_mixed_lsq(const ProblemSpec& problem, const FunctionSpace& trial, const FunctionSpace& test,
                              const WeightSpec& weight, const Net& xi) {
    return StateSolver(SolverKind::MixedLSQ, problem, trial, weight, {}, test).solve(xi);
}

StateSolution solve_weighted_galerkin(const ProblemSpec& problem, const FunctionSpace& space,
                                      const WeightSpec& weight, const Net& xi, bool check_kernel_coercivity) {
    SolverOptions opt;
    opt.check_kernel_coercivity = check_kernel_coercivity;
    return StateSolver(SolverKind::WeightedGalerkin, problem, space, weight, opt).solve(xi);
}

StateSolution solve_dd_minres(const ProblemSpec& problem, const FunctionSpace& trial, const FunctionSpace& test,
                              TestInnerProduct inner_product, const WeightSpec& weight, const Net& xi) {
    SolverOptions opt;
    opt.inner_product = inner_product;
    return StateSolver(SolverKind::DDMinres, problem, trial, weight, opt, test).solve(xi);
}

}  // namespace neurofem

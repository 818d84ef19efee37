#include "neurofem/experiments.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

namespace neurofem {

namespace {

namespace fs = std::filesystem;

constexpr std::pair<ProblemKind, const char*> kProblemNames[] = {
    {ProblemKind::AdvectionReaction, "advection_reaction"},
    {ProblemKind::SineAdvection, "sine_advection"},
    {ProblemKind::Overconstrained1D, "overconstrained_1d"},
    {ProblemKind::Overconstrained2D, "overconstrained_2d"},
};
constexpr std::pair<CostKind, const char*> kCostNames[] = {
    {CostKind::PointValue, "point_value"},
    {CostKind::WeightedResidualL2, "weighted_residual_l2"},
    {CostKind::TotalVariation, "total_variation"},
    {CostKind::L1Residual, "l1_residual"},
};
constexpr std::pair<TestInnerProduct, const char*> kInnerProductNames[] = {
    {TestInnerProduct::WeightedGradient, "weighted_gradient"},
    {TestInnerProduct::WeightedGradientPlusMass, "weighted_gradient_plus_mass"},
    {TestInnerProduct::GradientPlusWeightedMass, "gradient_plus_weighted_mass"},
    {TestInnerProduct::WeightedFull, "weighted_full"},
};

template <class E, std::size_t N>
const char* name_of(const std::pair<E, const char*> (&table)[N], E value) {
    for (const auto& [v, s] : table)
        if (v == value)
            return s;
    return "unknown";
}

template <class E, std::size_t N>
E parse_enum(const std::pair<E, const char*> (&table)[N], const std::string& s, const std::string& key) {
    for (const auto& [v, name] : table)
        if (s == name)
            return v;
    throw ConfigError(key + ": unknown value '" + s + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos)
        return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

double parse_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (trim(s.substr(pos)).empty())
            return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected a number, got '" + s + "'");
}

long long parse_int(const std::string& s, const std::string& key) {
    const double v = parse_double(s, key);
    if (v != std::floor(v))
        throw ConfigError(key + ": expected an integer, got '" + s + "'");
    return static_cast<long long>(v);
}

bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes")
        return true;
    if (s == "false" || s == "0" || s == "no")
        return false;
    throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

std::vector<double> parse_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        out.push_back(parse_double(trim(item), key));
    if (out.empty())
        throw ConfigError(key + ": empty list");
    return out;
}

// Plot points: 10 per element, strictly inside so P0 states are unambiguous.
std::vector<Point> plot_points(const FunctionSpace& space) {
    std::vector<Point> pts;
    if (const auto* m1 = std::get_if<std::shared_ptr<const Mesh1D>>(&space.mesh())) {
        const Mesh1D& mesh = **m1;
        for (Index e = 0; e < mesh.n_elements(); ++e)
            for (int k = 0; k < 10; ++k)
                pts.push_back(point1d(mesh.map(e, (k + 0.5) / 10.0)));
        return pts;
    }
    const Mesh2DTri& mesh = *std::get<std::shared_ptr<const Mesh2DTri>>(space.mesh());
    for (Index e = 0; e < mesh.n_elements(); ++e)
        for (int i = 0; i <= 3; ++i)
            for (int j = 0; i + j <= 3; ++j)
                pts.push_back(mesh.map(e, Point((i + 1.0 / 3.0) / 4.0, (j + 1.0 / 3.0) / 4.0)));
    return pts;
}

double exact_sup(const ProblemSpec& problem, const FunctionSpace& space, const std::vector<Point>& pts) {
    double sup = -std::numeric_limits<double>::infinity();
    for (const auto& p : pts)
        sup = std::max(sup, problem.exact_solution(p));
    // Monotone profiles peak on the boundary, which the interior samples miss.
    if (space.dimension() == 1) {
        for (double x : std::get<std::shared_ptr<const Mesh1D>>(space.mesh())->nodes())
            sup = std::max(sup, problem.exact_solution(point1d(x)));
    } else {
        for (const auto& v : std::get<std::shared_ptr<const Mesh2DTri>>(space.mesh())->vertices())
            sup = std::max(sup, problem.exact_solution(v));
    }
    return sup;
}

std::string run_label(double M, double alpha, Index n) {
    std::ostringstream s;
    s << "M" << M << "_alpha" << alpha << "_n" << n;
    return s.str();
}

nlohmann::json number(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

bool has_optimal_control(const ExperimentConfig& c) {
    return c.problem == ProblemKind::SineAdvection && c.weight == "bounded_logistic";
}

double xi_error(const Net& xi) {
    static const QuadratureRule rule = gauss_quadrature_1d(5);
    return std::sqrt(integrate_1d(
        [&](double x) {
            const double d = nn_forward(xi, x) - optimal_control(x);
            return d * d;
        },
        0.0, 1.0, rule, 512));
}

double point_value_error(const ExperimentConfig& c, const ProblemSpec& problem, const FEFunction& u) {
    const double ref = problem.has_exact() ? problem.exact_solution(point1d(c.x0)) : c.target.value();
    const CostFunctional j(CostSpec{PointValueQoI{point1d(c.x0), ref, c.side}, 0.0}, problem, u.space);
    return std::sqrt(2.0 * j.j1(u));
}

void add_errors(nlohmann::json& out, const std::string& prefix, const ExperimentConfig& c,
                const ProblemSpec& problem, const FEFunction& u, double cutoff) {
    const SolutionErrors e = solution_errors(problem, u, cutoff);
    out[prefix + "l1_error"] = number(e.l1);
    out[prefix + "l2_error"] = number(e.l2);
    out[prefix + "max_overshoot"] = number(e.overshoot);
    if (c.cost == CostKind::PointValue)
        out[prefix + "point_value_error"] = number(point_value_error(c, problem, u));
}

RunSummary run_one(const ExperimentConfig& c, double M, double alpha, Index n, const fs::path& dir) {
    const ProblemSpec problem = make_problem(c);
    const Discretization disc = make_discretization(c, problem);
    const ReducedProblem rp(problem, disc, make_weight(c, M), make_cost(c, problem, alpha));
    const Net xi0 = make_initial_net(c, n);

    RunSummary run;
    run.M = M;
    run.alpha = alpha;
    run.neurons = n;
    run.dir = dir;
    run.trace = quasi_minimize(rp, xi0, c.optimizer);

    const auto ev = rp.evaluate(run.trace.best);
    const StateSolver standard(disc.kind, problem, disc.trial, ConstantWeight{1.0}, disc.options, disc.test);
    const StateSolution std_sol = standard.solve(Net(problem.dimension, 1));
    const double cutoff = problem.boundary == BoundaryCondition::BothEnds ? 1.0 - disc.trial.h() : 1.0;

    nlohmann::json& s = run.scalars;
    s["run"] = dir.filename().string();
    s["M"] = M;
    s["alpha"] = alpha;
    s["neurons"] = n;
    s["seed"] = c.seed;
    s["initial_cost"] = number(run.trace.initial_cost);
    s["final_cost"] = number(run.trace.best_cost);
    s["cost_ratio"] = number(run.trace.initial_cost / run.trace.best_cost);
    s["best_iter"] = run.trace.best_iter;
    s["iterations"] = run.trace.iterations;
    s["converged"] = run.trace.converged;
    s["wall_seconds"] = run.trace.wall_seconds;
    s["error_cutoff"] = cutoff;
    add_errors(s, "", c, problem, ev.state.u, cutoff);
    add_errors(s, "standard_", c, problem, std_sol.u, cutoff);
    if (has_optimal_control(c)) {
        s["xi_error_initial"] = number(xi_error(xi0));
        s["xi_error"] = number(xi_error(run.trace.best));
    }

    fs::create_directories(dir);
    run.trace.write_csv(dir / "trace.csv");
    write_solution_csv(dir / "solution.csv", problem, ev.state.u);
    write_solution_csv(dir / "solution_standard.csv", problem, std_sol.u);
    return run;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    out << text;
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"point_value_lsq",  "point_value_minres", "weight_convergence",
                                                "total_variation", "l1_residual_1d",     "l1_residual_2d"};
    return names;
}

ExperimentConfig ExperimentConfig::defaults(const std::string& name) {
    ExperimentConfig c;
    c.name = name;
    c.out_dir = fs::path("results") / name;
    c.optimizer.learning_rate = 0.05;
    c.optimizer.max_iters = 2000;
    if (name == "point_value_lsq") {
        // Order 3 leaves a point-error floor near 7e-3 at sigma = 160.
        c.quadrature_order = 5;
        c.M = {1.0, 10.0, 100.0};
        c.alpha = {0.0, 1e-4};
        c.optimizer.max_iters = 5000;
    } else if (name == "point_value_minres") {
        c.solver = SolverKind::DDMinres;
        c.quadrature_order = 5;
        c.M = {1.0, 10.0, 100.0};
        // x0 = h is a node; the cell on the left averages the whole layer.
        c.side = NodeSide::Right;
        c.optimizer.max_iters = 5000;
    } else if (name == "weight_convergence") {
        c.problem = ProblemKind::SineAdvection;
        c.weight = "bounded_logistic";
        c.M = {1.0};
        c.cost = CostKind::WeightedResidualL2;
        c.residual_weight = "omega_bar";
        c.neurons = {4, 8, 16, 32, 64};
        c.init = InitKind::Interpolate;
        c.optimizer.learning_rate = 1e-2;
        c.optimizer.max_iters = 500;
    } else if (name == "total_variation") {
        c.cost = CostKind::TotalVariation;
        c.alpha = {0.0, 1e-4, 1e-2};
    } else if (name == "l1_residual_1d") {
        c.problem = ProblemKind::Overconstrained1D;
        c.elements = 8;
        c.M = {1000.0};
        c.cost = CostKind::L1Residual;
        c.alpha = {1e-4};
        c.optimizer.learning_rate = 1e-2;
    } else if (name == "l1_residual_2d") {
        c.problem = ProblemKind::Overconstrained2D;
        c.elements = 8;
        c.M = {1000.0};
        c.cost = CostKind::L1Residual;
    } else {
        throw ConfigError("unknown experiment '" + name + "'");
    }
    return c;
}

void ExperimentConfig::apply_ini(const fs::path& path) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(e.what());
    }
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("key '" + section + "' outside of a section");
        for (const auto& [k, node] : body) {
            const std::string key = section + "." + k;
            const std::string v = trim(node.data());
            if (key == "problem.type")
                problem = parse_enum(kProblemNames, v, key);
            else if (key == "problem.sigma")
                sigma = parse_double(v, key);
            else if (key == "problem.elements")
                elements = parse_int(v, key);
            else if (key == "problem.solver")
                try {
                    solver = solver_kind_from_string(v);
                } catch (const std::invalid_argument&) {
                    throw ConfigError(key + ": unknown value '" + v + "'");
                }
            else if (key == "problem.quadrature_order")
                quadrature_order = static_cast<int>(parse_int(v, key));
            else if (key == "problem.inner_product")
                inner_product = parse_enum(kInnerProductNames, v, key);
            else if (key == "problem.check_kernel_coercivity")
                check_kernel_coercivity = parse_bool(v, key);
            else if (key == "weight.variant")
                weight = v;
            else if (key == "weight.M")
                M = parse_list(v, key);
            else if (key == "weight.value")
                constant_value = parse_double(v, key);
            else if (key == "cost.type")
                cost = parse_enum(kCostNames, v, key);
            else if (key == "cost.x0")
                x0 = parse_double(v, key);
            else if (key == "cost.target")
                target = v.empty() || v == "exact" ? std::nullopt : std::optional<double>(parse_double(v, key));
            else if (key == "cost.side") {
                if (v != "left" && v != "right")
                    throw ConfigError(key + ": expected left or right");
                side = v == "left" ? NodeSide::Left : NodeSide::Right;
            } else if (key == "cost.alpha")
                alpha = parse_list(v, key);
            else if (key == "cost.l1_smoothing")
                l1_smoothing = parse_double(v, key);
            else if (key == "cost.residual_weight")
                residual_weight = v;
            else if (key == "net.neurons") {
                neurons.clear();
                for (double n : parse_list(v, key)) {
                    if (n != std::floor(n))
                        throw ConfigError(key + ": expected integers");
                    neurons.push_back(static_cast<Index>(n));
                }
            } else if (key == "net.init") {
                if (v != "random" && v != "interpolate")
                    throw ConfigError(key + ": expected random or interpolate");
                init = v == "random" ? InitKind::Random : InitKind::Interpolate;
            } else if (key == "net.seed")
                seed = static_cast<std::uint64_t>(parse_int(v, key));
            else if (key == "optimizer.method") {
                if (v != "adam" && v != "gradient_descent")
                    throw ConfigError(key + ": expected adam or gradient_descent");
                optimizer.method = v == "adam" ? OptimMethod::Adam : OptimMethod::GradientDescent;
            } else if (key == "optimizer.learning_rate")
                optimizer.learning_rate = parse_double(v, key);
            else if (key == "optimizer.max_iters")
                optimizer.max_iters = static_cast<int>(parse_int(v, key));
            else if (key == "optimizer.grad_tolerance")
                optimizer.grad_tolerance = parse_double(v, key);
            else if (key == "optimizer.beta1")
                optimizer.beta1 = parse_double(v, key);
            else if (key == "optimizer.beta2")
                optimizer.beta2 = parse_double(v, key);
            else if (key == "optimizer.trace_every")
                optimizer.trace_every = static_cast<int>(parse_int(v, key));
            else if (key == "run.workers")
                workers = static_cast<unsigned>(parse_int(v, key));
            else if (key == "run.out")
                out_dir = v;
            else if (key == "run.experiment") {
                if (v != name)
                    throw ConfigError("config is for experiment '" + v + "', not '" + name + "'");
            }
            else
                throw ConfigError("unknown key '" + key + "'");
        }
    }
}

std::string experiment_in_ini(const fs::path& path) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(e.what());
    }
    const auto name = tree.get_optional<std::string>("run.experiment");
    if (!name)
        throw ConfigError(path.string() + ": missing [run] experiment");
    return trim(*name);
}

void ExperimentConfig::validate() const {
    if (std::find(experiment_names().begin(), experiment_names().end(), name) == experiment_names().end())
        throw ConfigError("unknown experiment '" + name + "'");
    if (elements < 1)
        throw ConfigError("problem.elements must be positive");
    if (quadrature_order < 0 || quadrature_order > 5)
        throw ConfigError("problem.quadrature_order must be in 1..5 (0 for the default)");
    if (weight != "logistic_offset" && weight != "bounded_logistic" && weight != "constant")
        throw ConfigError("weight.variant: unknown value '" + weight + "'");
    for (double m : M)
        if (!(m > 0.0))
            throw ConfigError("weight.M must be positive");
    if (!(constant_value > 0.0))
        throw ConfigError("weight.value must be positive");
    for (double a : alpha)
        if (!(a >= 0.0))
            throw ConfigError("cost.alpha must be nonnegative");
    if (!(l1_smoothing > 0.0))
        throw ConfigError("cost.l1_smoothing must be positive");
    if (residual_weight != "one" && residual_weight != "omega_bar")
        throw ConfigError("cost.residual_weight: expected one or omega_bar");
    const bool two_d = problem == ProblemKind::Overconstrained2D;
    if (two_d && cost == CostKind::PointValue)
        throw ConfigError("point-value costs are 1D only");
    if (two_d && solver == SolverKind::DDMinres)
        throw ConfigError("dd_minres is 1D only");
    if (cost == CostKind::PointValue && !(x0 >= 0.0 && x0 <= 1.0))
        throw ConfigError("cost.x0 must lie in [0,1]");
    if (neurons.empty())
        throw ConfigError("net.neurons must not be empty");
    for (Index n : neurons)
        if (n < 1 || (init == InitKind::Interpolate && n < 2))
            throw ConfigError("net.neurons must be positive (at least 2 for interpolation)");
    if (init == InitKind::Interpolate && !has_optimal_control(*this))
        throw ConfigError("net.init = interpolate needs the sine_advection problem with a bounded_logistic weight");
    try {
        optimizer.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

nlohmann::json ExperimentConfig::to_json() const {
    return {
        {"experiment", name},
        {"problem",
         {{"type", name_of(kProblemNames, problem)},
          {"sigma", sigma},
          {"elements", elements},
          {"solver", to_string(solver)},
          {"quadrature_order", quadrature_order},
          {"inner_product", name_of(kInnerProductNames, inner_product)}}},
        {"weight", {{"variant", weight}, {"M", M}, {"value", constant_value}}},
        {"cost",
         {{"type", name_of(kCostNames, cost)},
          {"x0", x0},
          {"target", target ? nlohmann::json(*target) : nlohmann::json("exact")},
          {"side", side == NodeSide::Left ? "left" : "right"},
          {"alpha", alpha},
          {"l1_smoothing", l1_smoothing},
          {"residual_weight", residual_weight}}},
        {"net", {{"neurons", neurons}, {"init", init == InitKind::Random ? "random" : "interpolate"}, {"seed", seed}}},
        {"optimizer",
         {{"method", optimizer.method == OptimMethod::Adam ? "adam" : "gradient_descent"},
          {"learning_rate", optimizer.learning_rate},
          {"max_iters", optimizer.max_iters},
          {"grad_tolerance", optimizer.grad_tolerance}}},
    };
}

double optimal_control(double x) {
    return -std::log(2.0 / (std::sin(std::numbers::pi * x / 2.0) + 0.5) - 1.0);
}

double optimal_weight(const Point& x) { return 1.0 + std::sin(std::numbers::pi * x[0] / 2.0); }

ProblemSpec make_problem(const ExperimentConfig& c) {
    switch (c.problem) {
    case ProblemKind::AdvectionReaction: return advection_reaction_problem(c.sigma);
    case ProblemKind::SineAdvection: return sine_advection_problem();
    case ProblemKind::Overconstrained1D: return overconstrained_problem_1d();
    case ProblemKind::Overconstrained2D: return overconstrained_problem_2d();
    }
    throw ConfigError("unknown problem");
}

Discretization make_discretization(const ExperimentConfig& c, const ProblemSpec& problem) {
    Discretization d{c.solver, default_trial_space(c.solver, problem, c.elements), std::nullopt, {}};
    d.options.inner_product = c.inner_product;
    d.options.check_kernel_coercivity = c.check_kernel_coercivity && problem.dimension == 1;
    if (c.quadrature_order > 0) {
        if (problem.dimension != 1)
            throw ConfigError("problem.quadrature_order applies to 1D problems only");
        d.options.rule = gauss_quadrature_1d(c.quadrature_order);
    }
    return d;
}

WeightSpec make_weight(const ExperimentConfig& c, double M) {
    if (c.weight == "logistic_offset")
        return LogisticOffset{M};
    if (c.weight == "bounded_logistic")
        return BoundedLogistic{};
    return ConstantWeight{c.constant_value};
}

CostSpec make_cost(const ExperimentConfig& c, const ProblemSpec& problem, double alpha) {
    CostSpec spec;
    spec.alpha = alpha;
    spec.l1_smoothing = c.l1_smoothing;
    switch (c.cost) {
    case CostKind::PointValue:
        if (!c.target && !problem.has_exact())
            throw ConfigError("cost.target is required without an exact solution");
        spec.variant = PointValueQoI{point1d(c.x0), c.target, c.side};
        break;
    case CostKind::WeightedResidualL2:
        spec.variant = WeightedResidualL2{c.residual_weight == "omega_bar" ? optimal_weight : unit_field};
        break;
    case CostKind::TotalVariation: spec.variant = TotalVariationL1{}; break;
    case CostKind::L1Residual: spec.variant = ResidualL1{}; break;
    }
    return spec;
}

Net make_initial_net(const ExperimentConfig& c, Index neurons) {
    if (c.init == InitKind::Interpolate)
        return nn_interpolate_init(neurons, optimal_control);
    return nn_random_init(c.problem == ProblemKind::Overconstrained2D ? 2 : 1, neurons, c.seed);
}

double loglog_slope(const std::vector<double>& n, const std::vector<double>& err) {
    if (n.size() != err.size() || n.size() < 2)
        throw std::invalid_argument("loglog_slope: need at least two points");
    const auto k = static_cast<double>(n.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        mx += std::log(n[i]) / k;
        my += std::log(err[i]) / k;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double dx = std::log(n[i]) - mx;
        sxy += dx * (std::log(err[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

SolutionErrors solution_errors(const ProblemSpec& problem, const FEFunction& u, double cutoff) {
    if (!problem.has_exact())
        throw std::invalid_argument("solution_errors: problem has no reference solution");
    SolutionErrors e;
    const FunctionSpace& space = u.space;
    if (space.dimension() == 1) {
        // Panels resolve boundary layers inside a single element.
        const QuadratureRule rule = gauss_quadrature_1d(5);
        const Mesh1D& mesh = *std::get<std::shared_ptr<const Mesh1D>>(space.mesh());
        for (Index el = 0; el < mesh.n_elements(); ++el) {
            const double a = mesh.node(el), b = std::min(mesh.node(el + 1), cutoff);
            if (b <= a + 1e-14)
                continue;
            const auto diff = [&](double x) {
                return local_value(space.local_basis(el, point1d(x)), u.coeffs) - problem.exact_solution(point1d(x));
            };
            e.l1 += integrate_1d([&](double x) { return std::abs(diff(x)); }, a, b, rule, 16);
            e.l2 += integrate_1d([&](double x) { return diff(x) * diff(x); }, a, b, rule, 16);
        }
    } else {
        const QuadratureCache cache(space, triangle_degree5_rule());
        for (const auto& qp : cache) {
            if (qp.x[0] > cutoff)
                continue;
            const double d = local_value(qp.trial, u.coeffs) - problem.exact_solution(qp.x);
            e.l1 += qp.jxw * std::abs(d);
            e.l2 += qp.jxw * d * d;
        }
    }
    e.l2 = std::sqrt(e.l2);

    const std::vector<Point> pts = plot_points(space);
    const double sup = exact_sup(problem, space, pts);
    e.overshoot = -std::numeric_limits<double>::infinity();
    for (const auto& p : pts)
        e.overshoot = std::max(e.overshoot, eval_fe(u, p) - sup);
    return e;
}

void write_solution_csv(const fs::path& path, const ProblemSpec& problem, const FEFunction& u) {
    std::ofstream out(path, std::ios::trunc);
    const bool two_d = u.space.dimension() == 2;
    out << (two_d ? "x,y,u_h,u_exact\n" : "x,u_h,u_exact\n");
    out.precision(12);
    for (const auto& p : plot_points(u.space)) {
        out << p[0] << ',';
        if (two_d)
            out << p[1] << ',';
        out << eval_fe(u, p) << ',' << (problem.has_exact() ? problem.exact_solution(p) : std::nan("")) << '\n';
    }
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    struct Point3 {
        double M, alpha;
        Index n;
    };
    std::vector<Point3> sweep;
    for (double M : config.M)
        for (double a : config.alpha)
            for (Index n : config.neurons)
                sweep.push_back({M, a, n});

    ExperimentResult result;
    result.name = config.name;
    result.out_dir = config.out_dir;
    result.runs.resize(sweep.size());
    fs::create_directories(config.out_dir);

    unsigned workers = config.workers;
    if (workers == 0)
        workers = std::clamp(std::thread::hardware_concurrency(), 1u, 8u);
    workers = std::min<unsigned>(workers, static_cast<unsigned>(sweep.size()));

    std::vector<std::exception_ptr> errors(sweep.size());
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i; (i = next++) < sweep.size();) {
            const auto& s = sweep[i];
            try {
                result.runs[i] = run_one(config, s.M, s.alpha, s.n, config.out_dir / run_label(s.M, s.alpha, s.n));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < workers; ++t)
        pool.emplace_back(work);
    work();
    for (auto& t : pool)
        t.join();
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    nlohmann::json& summary = result.summary;
    summary["experiment"] = config.name;
    summary["config"] = config.to_json();
    summary["runs"] = nlohmann::json::array();
    for (const auto& r : result.runs)
        summary["runs"].push_back(r.scalars);

    if (has_optimal_control(config) && config.neurons.size() > 1) {
        // One convergence curve per (M, alpha): errors against n.
        std::ostringstream csv;
        csv << "M,alpha,n,xi_error\n";
        csv.precision(12);
        nlohmann::json curves = nlohmann::json::array();
        for (std::size_t start = 0; start < result.runs.size(); start += config.neurons.size()) {
            std::vector<double> ns, errs;
            for (std::size_t k = 0; k < config.neurons.size(); ++k) {
                const auto& r = result.runs[start + k];
                ns.push_back(static_cast<double>(r.neurons));
                errs.push_back(r.scalars["xi_error"].get<double>());
                csv << r.M << ',' << r.alpha << ',' << r.neurons << ',' << errs.back() << '\n';
            }
            curves.push_back({{"M", result.runs[start].M},
                              {"alpha", result.runs[start].alpha},
                              {"slope", number(loglog_slope(ns, errs))},
                              {"error_ratio", number(errs.front() / errs.back())}});
        }
        summary["convergence"] = curves;
        write_text(config.out_dir / "convergence.csv", csv.str());
    }
    write_text(config.out_dir / "summary.json", summary.dump(2) + "\n");
    return result;
}

nlohmann::json verify_experiment(const ExperimentConfig& config) {
    config.validate();
    const ProblemSpec problem = make_problem(config);
    const Discretization disc = make_discretization(config, problem);
    const WeightSpec weight = make_weight(config, config.M.front());
    const double alpha = config.alpha.front();
    const Index n = config.neurons.front();
    const Net xi = make_initial_net(config, n);
    const StateSolver solver(disc.kind, problem, disc.trial, weight, disc.options, disc.test);
    const StateSolution sol = solver.solve(xi);

    nlohmann::json out;
    out["experiment"] = config.name;
    out["solver"] = to_string(disc.kind);
    out["weight"] = weight_to_json(weight);
    out["weight_min"] = sol.stability.weight_min;
    out["weight_max"] = sol.stability.weight_max;
    out["pivot_ratio"] = number(sol.stability.pivot_ratio);
    out["kernel_coercivity"] = number(sol.stability.kernel_coercivity);
    bool passed = true;

    VerificationReport report;
    if (disc.kind == SolverKind::MixedLSQ || disc.kind == SolverKind::DDMinres) {
        report = stability_report(solver, xi);
        check_apriori(solver, sol, report);
        report.pg_residual = check_pg_equivalence(solver, sol, xi).max_defect;
        passed = report.apriori_ok() && report.pg_ok();
    }
    if (alpha > 0.0) {
        const ReducedProblem rp(problem, disc, weight, make_cost(config, problem, alpha));
        const ConvexityProbe probe = probe_convexity(rp, 20, n, config.seed);
        report.gamma_hat = probe.gamma_hat;
        report.L_hat = probe.L_hat;
    }
    out["report"] = report.to_json();
    out["passed"] = passed;
    return out;
}

}  // namespace neurofem

#pragma once

#include "neurofem/verification.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace neurofem {

/// Bad or inconsistent experiment configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class ProblemKind { AdvectionReaction, SineAdvection, Overconstrained1D, Overconstrained2D };
enum class CostKind { PointValue, WeightedResidualL2, TotalVariation, L1Residual };
enum class InitKind { Random, Interpolate };

struct ExperimentConfig {
    std::string name;

    // [problem]
    ProblemKind problem = ProblemKind::AdvectionReaction;
    double sigma = 160.0;
    Index elements = 16;
    SolverKind solver = SolverKind::WeightedLSQ;
    int quadrature_order = 0;  ///< 0 keeps the library default
    TestInnerProduct inner_product = TestInnerProduct::WeightedGradient;
    bool check_kernel_coercivity = true;

    // [weight]
    std::string weight = "logistic_offset";
    std::vector<double> M{100.0};  ///< swept
    double constant_value = 1.0;

    // [cost]
    CostKind cost = CostKind::PointValue;
    double x0 = 1.0 / 16.0;
    std::optional<double> target;  ///< empty: exact solution at x0
    NodeSide side = NodeSide::Left;
    std::vector<double> alpha{0.0};  ///< swept
    double l1_smoothing = kDefaultL1Smoothing;
    std::string residual_weight = "one";  ///< "one" or "omega_bar"

    // [net]
    std::vector<Index> neurons{8};  ///< swept
    InitKind init = InitKind::Random;
    std::uint64_t seed = 1;

    // [optimizer]
    OptimConfig optimizer;

    // [run]
    unsigned workers = 0;  ///< 0: one per hardware thread, at most 8
    std::filesystem::path out_dir = "results";

    /// Registered defaults of a named experiment; throws ConfigError for unknown names.
    static ExperimentConfig defaults(const std::string& name);
    /// Override fields from an INI file with [problem], [weight], [cost], [net],
    /// [optimizer] and [run] sections. Unknown keys are errors.
    void apply_ini(const std::filesystem::path& path);
    void validate() const;
    nlohmann::json to_json() const;
};

const std::vector<std::string>& experiment_names();
/// Value of `experiment` in the [run] section of an INI file.
std::string experiment_in_ini(const std::filesystem::path& path);

/// One point of the (M, alpha, n) sweep.
struct RunSummary {
    double M = 0.0;
    double alpha = 0.0;
    Index neurons = 0;
    std::filesystem::path dir;
    TrainTrace trace;
    nlohmann::json scalars;
};

struct ExperimentResult {
    std::string name;
    std::filesystem::path out_dir;
    std::vector<RunSummary> runs;  ///< sweep order, independent of scheduling
    nlohmann::json summary;
};

/// Runs every sweep point on a bounded worker pool and writes
/// <out>/<run>/trace.csv, <out>/<run>/solution.csv and <out>/summary.json.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Stability, a-priori, Petrov-Galerkin and convexity checks at the initial
/// control of the first sweep point.
nlohmann::json verify_experiment(const ExperimentConfig& config);

ProblemSpec make_problem(const ExperimentConfig& config);
Discretization make_discretization(const ExperimentConfig& config, const ProblemSpec& problem);
WeightSpec make_weight(const ExperimentConfig& config, double M);
CostSpec make_cost(const ExperimentConfig& config, const ProblemSpec& problem, double alpha);
Net make_initial_net(const ExperimentConfig& config, Index neurons);

/// Control whose bounded-logistic weight is 1 + sin(pi x / 2), the optimal
/// weight of the sine advection problem.
double optimal_control(double x);
double optimal_weight(const Point& x);

/// Least-squares slope of log(err) against log(n).
double loglog_slope(const std::vector<double>& n, const std::vector<double>& err);

struct SolutionErrors {
    double l1 = 0.0;
    double l2 = 0.0;
    double overshoot = 0.0;  ///< max over plot samples of u_h - sup u
};

/// Errors against the problem's exact or reference solution on {x1 <= cutoff}.
SolutionErrors solution_errors(const ProblemSpec& problem, const FEFunction& u, double cutoff);

/// Plot samples, 10 per element: columns x[, y], u_h, u_exact.
void write_solution_csv(const std::filesystem::path& path, const ProblemSpec& problem, const FEFunction& u);

}  // namespace neurofem

#include "neurofem/weight.hpp"

namespace neurofem {

WeightBounds weight_bounds(const WeightSpec& spec) {
    const auto [a, m] = detail::logistic_coefficients(spec);
    return {a, a + m};
}

WeightBounds inverse_weight_bounds(const WeightSpec& spec) {
    const auto b = weight_bounds(spec);
    return {1.0 / b.upper, 1.0 / b.lower};
}

bool is_constant(const WeightSpec& spec) { return std::holds_alternative<ConstantWeight>(spec); }

nlohmann::json weight_to_json(const WeightSpec& spec) {
    if (const auto* lo = std::get_if<LogisticOffset>(&spec))
        return {{"variant", "logistic_offset"}, {"M", lo->M}};
    if (std::holds_alternative<BoundedLogistic>(spec))
        return {{"variant", "bounded_logistic"}};
    return {{"variant", "constant"}, {"value", std::get<ConstantWeight>(spec).value}};
}

WeightSpec weight_from_json(const nlohmann::json& j) {
    const auto variant = j.at("variant").get<std::string>();
    if (variant == "logistic_offset") {
        const double M = j.value("M", 100.0);
        if (!(M > 0.0))
            throw std::invalid_argument("weight: M must be positive");
        return LogisticOffset{M};
    }
    if (variant == "bounded_logistic")
        return BoundedLogistic{};
    if (variant == "constant") {
        const double v = j.value("value", 1.0);
        if (!(v > 0.0))
            throw std::invalid_argument("weight: constant value must be positive");
        return ConstantWeight{v};
    }
    throw std::invalid_argument("weight: unknown variant '" + variant + "'");
}

}  // namespace neurofem

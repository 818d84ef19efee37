#pragma once

#include "neurofem/common.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <variant>

namespace neurofem {

/// omega(s) = 1 + M / (1 + exp(-s)), range (1, 1+M).
struct LogisticOffset {
    double M = 100.0;
};
/// omega(s) = 1/2 + 2 / (1 + exp(-s)), range (1/2, 5/2).
struct BoundedLogistic {};
/// omega(s) = value.
struct ConstantWeight {
    double value = 1.0;
};

using WeightSpec = std::variant<LogisticOffset, BoundedLogistic, ConstantWeight>;

struct WeightBounds {
    double lower;
    double upper;
};

/// Overflow-free logistic function.
template <typename Scalar>
Scalar sigmoid(Scalar s) {
    using std::exp;
    if (s >= Scalar(0))
        return Scalar(1) / (Scalar(1) + exp(-s));
    const Scalar e = exp(s);
    return e / (Scalar(1) + e);
}

namespace detail {
/// Offset a and amplitude m of omega = a + m * sigmoid(s).
inline std::pair<double, double> logistic_coefficients(const WeightSpec& spec) {
    if (const auto* lo = std::get_if<LogisticOffset>(&spec))
        return {1.0, lo->M};
    if (std::holds_alternative<BoundedLogistic>(spec))
        return {0.5, 2.0};
    return {std::get<ConstantWeight>(spec).value, 0.0};
}
}  // namespace detail

template <typename Scalar>
Scalar weight_eval(const WeightSpec& spec, Scalar s) {
    const auto [a, m] = detail::logistic_coefficients(spec);
    return Scalar(a) + Scalar(m) * sigmoid(s);
}

/// d omega / ds.
template <typename Scalar>
Scalar weight_deriv(const WeightSpec& spec, Scalar s) {
    const auto [a, m] = detail::logistic_coefficients(spec);
    const Scalar sg = sigmoid(s);
    return Scalar(m) * sg * (Scalar(1) - sg);
}

/// d^2 omega / ds^2.
template <typename Scalar>
Scalar weight_deriv2(const WeightSpec& spec, Scalar s) {
    const auto [a, m] = detail::logistic_coefficients(spec);
    const Scalar sg = sigmoid(s);
    return Scalar(m) * sg * (Scalar(1) - sg) * (Scalar(1) - Scalar(2) * sg);
}

/// Multiplicative inverse 1/omega(s).
template <typename Scalar>
Scalar weight_inv(const WeightSpec& spec, Scalar s) {
    return Scalar(1) / weight_eval(spec, s);
}

/// d(1/omega)/ds = -omega' / omega^2.
template <typename Scalar>
Scalar weight_inv_deriv(const WeightSpec& spec, Scalar s) {
    const Scalar w = weight_eval(spec, s);
    return -weight_deriv(spec, s) / (w * w);
}

WeightBounds weight_bounds(const WeightSpec& spec);
WeightBounds inverse_weight_bounds(const WeightSpec& spec);
bool is_constant(const WeightSpec& spec);

/// {"variant": "logistic_offset", "M": 100.0} and friends.
nlohmann::json weight_to_json(const WeightSpec& spec);
WeightSpec weight_from_json(const nlohmann::json& j);

}  // namespace neurofem

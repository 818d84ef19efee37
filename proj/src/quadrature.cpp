#include "neurofem/quadrature.hpp"

#include <cmath>
#include <string>

namespace neurofem {

QuadratureRule gauss_quadrature_1d(int order) {
    // Nodes and weights on [-1,1], mapped to [0,1] below.
    std::vector<double> t, w;
    switch (order) {
    case 1:
        t = {0.0};
        w = {2.0};
        break;
    case 2: {
        const double a = 1.0 / std::sqrt(3.0);
        t = {-a, a};
        w = {1.0, 1.0};
        break;
    }
    case 3: {
        const double a = std::sqrt(3.0 / 5.0);
        t = {-a, 0.0, a};
        w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
        break;
    }
    case 4: {
        const double inner = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
        const double outer = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
        const double w_in = (18.0 + std::sqrt(30.0)) / 36.0;
        const double w_out = (18.0 - std::sqrt(30.0)) / 36.0;
        t = {-outer, -inner, inner, outer};
        w = {w_out, w_in, w_in, w_out};
        break;
    }
    case 5: {
        const double inner = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
        const double outer = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
        const double w_in = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
        const double w_out = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
        t = {-outer, -inner, 0.0, inner, outer};
        w = {w_out, w_in, 128.0 / 225.0, w_in, w_out};
        break;
    }
    default:
        throw std::invalid_argument("gauss_quadrature_1d: unsupported order " + std::to_string(order) +
                                    " (expected 1..5)");
    }
    QuadratureRule rule;
    rule.dimension = 1;
    for (std::size_t i = 0; i < t.size(); ++i) {
        rule.points.push_back(point1d(0.5 * (t[i] + 1.0)));
        rule.weights.push_back(0.5 * w[i]);
    }
    return rule;
}

QuadratureRule triangle_midedge_rule() {
    QuadratureRule rule;
    rule.dimension = 2;
    rule.points = {Point(0.5, 0.0), Point(0.5, 0.5), Point(0.0, 0.5)};
    rule.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    return rule;
}

QuadratureRule triangle_degree5_rule() {
    // Radon's seven-point rule.
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 - s15) / 21.0, b1 = (9.0 + 2.0 * s15) / 21.0;
    const double a2 = (6.0 + s15) / 21.0, b2 = (9.0 - 2.0 * s15) / 21.0;
    const double w0 = 9.0 / 80.0;
    const double w1 = (155.0 - s15) / 2400.0;
    const double w2 = (155.0 + s15) / 2400.0;
    QuadratureRule rule;
    rule.dimension = 2;
    rule.points = {Point(1.0 / 3.0, 1.0 / 3.0), Point(a1, a1), Point(b1, a1), Point(a1, b1),
                   Point(a2, a2),               Point(b2, a2), Point(a2, b2)};
    rule.weights = {w0, w1, w1, w1, w2, w2, w2};
    return rule;
}

}  // namespace neurofem

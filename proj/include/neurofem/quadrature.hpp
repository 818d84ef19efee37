#pragma once

#include "neurofem/common.hpp"

#include <vector>

namespace neurofem {

/// Quadrature on a reference element: [0,1] in 1D, the unit triangle
/// {(s,t): s,t >= 0, s+t <= 1} in 2D. Weights sum to the reference measure.
struct QuadratureRule {
    std::vector<Point> points;
    std::vector<double> weights;

    int dimension = 1;
    Index size() const { return static_cast<Index>(weights.size()); }
};

/// Gauss-Legendre rule with `order` points on [0,1]; exact up to degree 2*order-1.
/// Supported orders: 1..5.
QuadratureRule gauss_quadrature_1d(int order);

/// Three-point mid-edge rule on the unit triangle (exact for quadratics).
QuadratureRule triangle_midedge_rule();

/// Seven-point degree-5 rule on the unit triangle.
QuadratureRule triangle_degree5_rule();

/// Integrate a callable over [a,b] with a composite Gauss rule.
template <typename F>
double integrate_1d(F&& f, double a, double b, const QuadratureRule& rule, int panels = 1) {
    const double width = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double left = a + p * width;
        for (Index q = 0; q < rule.size(); ++q)
            sum += rule.weights[q] * width * f(left + width * rule.points[q][0]);
    }
    return sum;
}

}  // namespace neurofem

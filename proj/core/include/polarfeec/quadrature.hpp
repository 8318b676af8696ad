#pragma once

#include <vector>

namespace polarfeec {

/// Gauss-Legendre rule on the reference interval [-1,1].
struct GaussRule {
    std::vector<double> nodes;    // increasing
    std::vector<double> weights;  // positive, summing to 2
};

/// n-point Gauss-Legendre rule; exact for polynomials of degree 2n-1.
GaussRule gauss_legendre(int n);

/// Append the rule mapped to [a,b] to the point/weight arrays.
void append_mapped_rule(const GaussRule& rule, double a, double b,
                        std::vector<double>& x, std::vector<double>& w);

}  // namespace polarfeec

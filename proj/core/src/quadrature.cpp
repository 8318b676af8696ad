#include "polarfeec/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace polarfeec {

GaussRule gauss_legendre(int n)
{
    if (n < 1)
        throw std::invalid_argument("gauss_legendre: need at least one point");

    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    // Newton iteration on P_n, one root per Chebyshev-like initial guess.
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            // three-term recurrence for P_n(x) and P_{n-1}(x)
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15)
                break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

void append_mapped_rule(const GaussRule& rule, double a, double b,
                        std::vector<double>& x, std::vector<double>& w)
{
    const double mid = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        x.push_back(mid + hw * rule.nodes[i]);
        w.push_back(hw * rule.weights[i]);
    }
}

}  // namespace polarfeec

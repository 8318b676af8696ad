#include "polarfeec/splines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polarfeec/quadrature.hpp"

namespace polarfeec {

namespace {

constexpr int kMaxDegree = 7;  // SplineBasisEval holds degree+1 values

// Cox-de Boor triangle: values of the p+1 B-splines N_{span-p..span} at x,
// for a knot array t with t[span] <= x < t[span+1].
void basis_funs(const double* t, int span, double x, int p, double* out)
{
    double left[kMaxDegree + 1];
    double right[kMaxDegree + 1];
    out[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - t[span + 1 - j];
        right[j] = t[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double tmp = out[r] / (right[r + 1] + left[j - r]);
            out[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        out[j] = saved;
    }
}

int find_span_open(const KnotVector& kv, double x)
{
    const std::vector<double>& t = kv.knots();
    const int p = kv.degree();
    const int n = kv.dim();
    if (x >= t[n])  // right endpoint lives in the last non-empty span
        return n - 1;
    // binary search for t[i] <= x < t[i+1]
    int lo = p, hi = n;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (x < t[mid])
            hi = mid;
        else
            lo = mid;
    }
    return lo;
}

double wrap_angle(double x)
{
    const double two_pi = 2.0 * M_PI;
    x = std::fmod(x, two_pi);
    return x < 0.0 ? x + two_pi : x;
}

}  // namespace

KnotVector make_open_knots(int p, std::span<const double> breakpoints)
{
    if (p < 1 || p > kMaxDegree)
        throw std::invalid_argument("make_open_knots: degree out of supported range");
    if (breakpoints.size() < 2)
        throw std::invalid_argument("make_open_knots: need at least two breakpoints");
    if (breakpoints.front() != 0.0)
        throw std::invalid_argument("make_open_knots: breakpoints must start at 0");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i] > breakpoints[i - 1]))
            throw std::invalid_argument("make_open_knots: breakpoints not strictly increasing");

    KnotVector kv;
    kv.p_ = p;
    kv.flavor_ = KnotFlavor::open;
    kv.cells_ = int(breakpoints.size()) - 1;
    kv.dim_ = kv.cells_ + p;
    kv.length_ = breakpoints.back();
    kv.breaks_.assign(breakpoints.begin(), breakpoints.end());

    kv.knots_.reserve(kv.dim_ + p + 1);
    for (int i = 0; i < p; ++i)
        kv.knots_.push_back(0.0);
    for (double b : breakpoints)
        kv.knots_.push_back(b);
    for (int i = 0; i < p; ++i)
        kv.knots_.push_back(kv.length_);
    return kv;
}

KnotVector make_periodic_knots(int p, int n_theta)
{
    if (p < 1 || p > kMaxDegree)
        throw std::invalid_argument("make_periodic_knots: degree out of supported range");
    if (n_theta <= p)
        throw std::invalid_argument("make_periodic_knots: need n_theta >= p+1");

    KnotVector kv;
    kv.p_ = p;
    kv.flavor_ = KnotFlavor::periodic;
    kv.cells_ = n_theta;
    kv.dim_ = n_theta;
    kv.length_ = 2.0 * M_PI;
    kv.trigo_ok_ = (n_theta % 4 == 0);
    kv.assumption1_ok_ = kv.trigo_ok_ && (n_theta >= 4 * p);

    const double dt = kv.length_ / n_theta;
    kv.breaks_.resize(n_theta + 1);
    for (int j = 0; j <= n_theta; ++j)
        kv.breaks_[j] = j * dt;
    kv.knots_ = kv.breaks_;
    return kv;
}

SplineBasisEval eval_B(const KnotVector& kv, double x)
{
    const int p = kv.degree();
    SplineBasisEval out;
    out.count = p + 1;

    if (kv.flavor() == KnotFlavor::open) {
        if (x < 0.0 || x > kv.length())
            throw std::domain_error("eval_B: point outside [0,L]");
        const int span = find_span_open(kv, x);
        out.first_index = span - p;
        basis_funs(kv.knots().data(), span, x, p, out.values.data());
    } else {
        x = wrap_angle(x);
        const double dt = kv.length() / kv.dim();
        const int j0 = std::min(int(x / dt), kv.dim() - 1);
        // local window of the uniform infinite knot line
        double t[2 * kMaxDegree + 2];
        for (int m = 0; m <= 2 * p + 1; ++m)
            t[m] = (j0 - p + m) * dt;
        out.first_index = j0 - p;
        basis_funs(t, p, x, p, out.values.data());
    }
    return out;
}

SplineBasisEval eval_M(const KnotVector& kv, double x)
{
    const int p = kv.degree();
    SplineBasisEval out;
    out.count = p;

    if (kv.flavor() == KnotFlavor::open) {
        if (x < 0.0 || x > kv.length())
            throw std::domain_error("eval_M: point outside [0,L]");
        const std::vector<double>& t = kv.knots();
        const int span = find_span_open(kv, x);
        // M_i = p/(t[i+p+1]-t[i+1]) * N^{p-1}_i on the reduced knots t[1..end-1]
        out.first_index = span - p;
        basis_funs(t.data() + 1, span - 1, x, p - 1, out.values.data());
        for (int r = 0; r < p; ++r) {
            const int i = out.first_index + r;
            out.values[r] *= p / (t[i + p + 1] - t[i + 1]);
        }
    } else {
        x = wrap_angle(x);
        const double dt = kv.length() / kv.dim();
        const int j0 = std::min(int(x / dt), kv.dim() - 1);
        double t[2 * kMaxDegree + 2];
        for (int m = 0; m <= 2 * p; ++m)
            t[m] = (j0 - p + 1 + m) * dt;
        out.first_index = j0 - p;
        basis_funs(t, p - 1, x, p - 1, out.values.data());
        for (int r = 0; r < p; ++r)
            out.values[r] /= dt;
    }
    return out;
}

SplineBasisEval eval_B_derivative(const KnotVector& kv, double x)
{
    const int p = kv.degree();
    const SplineBasisEval m = eval_M(kv, x);

    SplineBasisEval out;
    out.count = p + 1;
    out.first_index = m.first_index;
    for (int r = 0; r <= p; ++r) {
        const double m_left = (r > 0) ? m.values[r - 1] : 0.0;
        const double m_right = (r < p) ? m.values[r] : 0.0;
        out.values[r] = m_left - m_right;
    }
    return out;
}

std::vector<double> greville_points(const KnotVector& kv)
{
    const int p = kv.degree();
    std::vector<double> z(kv.dim());

    if (kv.flavor() == KnotFlavor::open) {
        const std::vector<double>& t = kv.knots();
        for (int i = 0; i < kv.dim(); ++i) {
            double s = 0.0;
            for (int k = 1; k <= p; ++k)
                s += t[i + k];
            z[i] = s / p;
        }
        z.front() = 0.0;
        z.back() = kv.length();
    } else {
        // knot averages reduce to a constant shift of the regular angles
        const double dt = kv.length() / kv.dim();
        const double frac = (p % 2 == 0) ? 0.5 : 0.0;
        for (int j = 0; j < kv.dim(); ++j)
            z[j] = dt * (j + frac);
    }
    return z;
}

SparseOperator interpolation_matrix(const KnotVector& kv, std::span<const double> nodes)
{
    if (int(nodes.size()) != kv.dim())
        throw std::invalid_argument("interpolation_matrix: node count must match dimension");

    std::vector<Triplet> t;
    t.reserve(nodes.size() * (kv.degree() + 1));
    for (int i = 0; i < int(nodes.size()); ++i) {
        const SplineBasisEval e = eval_B(kv, nodes[i]);
        for (int k = 0; k < e.count; ++k)
            if (e.values[k] != 0.0)
                t.push_back({i, e.index(k, kv.dim()), e.values[k]});
    }
    return SparseOperator::from_triplets(kv.dim(), kv.dim(), std::move(t));
}

namespace {

// integral of the M-splines over [a,b] (b may exceed the period), accumulated
// into row `row`; integration is split at knot lines so fixed Gauss-Legendre
// is exact on the piecewise-polynomial integrand
void accumulate_M_integrals(const KnotVector& kv, const GaussRule& rule, double a, double b,
                            int row, std::vector<Triplet>& out)
{
    const bool periodic = kv.flavor() == KnotFlavor::periodic;
    const double dt = kv.length() / kv.num_cells();

    std::vector<double> cuts;
    cuts.push_back(a);
    if (periodic) {
        for (int k = int(std::ceil(a / dt)); k * dt < b; ++k)
            if (k * dt > a)
                cuts.push_back(k * dt);
    } else {
        for (double brk : kv.breakpoints())
            if (brk > a && brk < b)
                cuts.push_back(brk);
    }
    cuts.push_back(b);

    std::vector<double> xs, ws;
    for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg)
        append_mapped_rule(rule, cuts[seg], cuts[seg + 1], xs, ws);

    const int mdim = kv.mdim();
    for (std::size_t q = 0; q < xs.size(); ++q) {
        const SplineBasisEval e = eval_M(kv, xs[q]);
        for (int k = 0; k < e.count; ++k) {
            const int col = periodic ? e.index(k, mdim) : e.first_index + k;
            if (e.values[k] != 0.0)
                out.push_back({row, col, ws[q] * e.values[k]});
        }
    }
}

}  // namespace

SparseOperator histopolation_matrix(const KnotVector& kv, std::span<const double> nodes)
{
    const bool periodic = kv.flavor() == KnotFlavor::periodic;
    const int nrows = periodic ? int(nodes.size()) : int(nodes.size()) - 1;
    if (nrows != kv.mdim())
        throw std::invalid_argument("histopolation_matrix: edge count must match M-spline count");
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        if (!(nodes[i] < nodes[i + 1]))
            throw std::invalid_argument("histopolation_matrix: nodes not increasing");

    const GaussRule rule = gauss_legendre(kv.degree() + 2);
    std::vector<Triplet> t;
    for (int i = 0; i < nrows; ++i) {
        const double a = nodes[i];
        const double b = (i + 1 < int(nodes.size())) ? nodes[i + 1] : nodes[0] + kv.length();
        accumulate_M_integrals(kv, rule, a, b, i, t);
    }
    return SparseOperator::from_triplets(nrows, kv.mdim(), std::move(t));
}

}  // namespace polarfeec

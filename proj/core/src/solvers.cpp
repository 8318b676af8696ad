#include "polarfeec/solvers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace polarfeec {

SparseOperator boundary_restriction(const TensorDeRham& sp, int level)
{
    std::vector<Triplet> t;
    if (level == 0) {
        for (int i = 0; i + 1 < sp.ns; ++i)
            for (int j = 0; j < sp.ntheta; ++j)
                t.push_back({sp.idx0(i, j), sp.idx0(i, j), 1.0});
        return SparseOperator::from_triplets(sp.dim0, sp.dim0, std::move(t));
    }
    if (level == 1) {
        for (int i = 0; i < sp.ns - 1; ++i)
            for (int j = 0; j < sp.ntheta; ++j)
                t.push_back({sp.idx1s(i, j), sp.idx1s(i, j), 1.0});
        for (int i = 0; i + 1 < sp.ns; ++i)
            for (int j = 0; j < sp.ntheta; ++j)
                t.push_back({sp.idx1t(i, j), sp.idx1t(i, j), 1.0});
        return SparseOperator::from_triplets(sp.dim1, sp.dim1, std::move(t));
    }
    if (level == 2)
        return SparseOperator::identity(sp.dim2);
    throw std::invalid_argument("boundary_restriction: level must be 0, 1 or 2");
}

SparseOperator projector_matrix(const TensorDeRham& sp, const ConformingProjector& P, int level,
                                bool with_boundary)
{
    SparseOperator m = P.matrix(level);
    if (with_boundary && level < 2)
        m = boundary_restriction(sp, level).multiply(m);
    return m;
}

PoissonSystem build_poisson_system(const TensorDeRham& sp, const QuadratureGrid& grid, Kind kind,
                                   MapVariant variant, double alpha, int n_threads)
{
    if (alpha <= 0.0)
        throw std::invalid_argument("build_poisson_system: stabilization must be positive");

    const ConformingProjector P(sp, kind, variant);
    PoissonSystem sys;
    sys.alpha = alpha;
    sys.G = grad_matrix(sp);
    sys.P0 = projector_matrix(sp, P, 0, true);
    sys.M0 = mass_matrix(0, sp, grid, n_threads);
    sys.M1 = mass_matrix(1, sp, grid, n_threads);

    const SparseOperator GP = sys.G.multiply(sys.P0);
    const SparseOperator IP =
        SparseOperator::identity(sp.dim0).add(sys.P0, 1.0, -1.0);
    sys.A = GP.transpose()
                .multiply(sys.M1.multiply(GP))
                .add(IP.transpose().multiply(sys.M0.multiply(IP)), 1.0, alpha);
    return sys;
}

PoissonResult solve_poisson(const PoissonSystem& sys, std::span<const double> f_moments,
                            double tol, int max_iter, bool jacobi)
{
    PoissonResult out;
    out.phi.level = 0;
    out.phi.data.assign(sys.A.rows(), 0.0);

    const std::vector<double> rhs = sys.P0.apply_transpose(f_moments);
    out.cg = conjugate_gradient(sys.A, rhs, out.phi.data, tol, max_iter, jacobi);
    if (!out.cg.converged)
        throw std::runtime_error("solve_poisson: CG did not converge, residual " +
                                 std::to_string(out.cg.residual));

    const std::vector<double> proj = sys.P0.apply(out.phi.data);
    double dn = 0.0, xn = 0.0;
    for (std::size_t i = 0; i < proj.size(); ++i) {
        dn += (proj[i] - out.phi.data[i]) * (proj[i] - out.phi.data[i]);
        xn += out.phi.data[i] * out.phi.data[i];
    }
    out.conformity_defect = xn > 0.0 ? std::sqrt(dn / xn) : 0.0;
    return out;
}

MaxwellSystem build_maxwell_system(const TensorDeRham& sp, const QuadratureGrid& grid, Kind kind,
                                   MapVariant variant, int n_threads)
{
    const ConformingProjector P(sp, kind, variant);
    MaxwellSystem sys;
    sys.P1 = projector_matrix(sp, P, 1, true);
    sys.P2 = projector_matrix(sp, P, 2, false);
    sys.CP1 = curl_matrix(sp).multiply(sys.P1);
    sys.Mt1 = regularized_mass(mass_matrix(1, sp, grid, n_threads), sys.P1);
    sys.Mt2 = regularized_mass(mass_matrix(2, sp, grid, n_threads), sys.P2);
    sys.CP1T_Mt2 = sys.CP1.transpose().multiply(sys.Mt2);
    sys.Mt1_diag = sys.Mt1.diagonal();
    return sys;
}

void maxwell_leapfrog_step(MaxwellState& state, const MaxwellSystem& sys, double dt,
                           const std::vector<double>* j_moments)
{
    std::vector<double>& E = state.E.data;
    std::vector<double>& B = state.B.data;

    // B^{n+1/2} = B^n - dt/2 C P1 E^n
    std::vector<double> cpe = sys.CP1.apply(E);
    axpy(-0.5 * dt, cpe, B);

    // Mt1 E^{n+1} = Mt1 E^n + dt ((C P1)^T Mt2 B^{n+1/2} - P1^T J^{n+1/2})
    std::vector<double> rhs = sys.Mt1.apply(E);
    std::vector<double> forcing = sys.CP1T_Mt2.apply(B);
    if (j_moments) {
        const std::vector<double> pj = sys.P1.apply_transpose(*j_moments);
        axpy(-1.0, pj, forcing);
    }
    axpy(dt, forcing, rhs);

    const CGResult cg =
        conjugate_gradient(sys.Mt1, rhs, E, sys.cg_tol, sys.max_iter, /*jacobi=*/true);
    if (!cg.converged)
        throw std::runtime_error("maxwell_leapfrog_step: mass solve did not converge");

    // B^{n+1} = B^{n+1/2} - dt/2 C P1 E^{n+1}
    cpe = sys.CP1.apply(E);
    axpy(-0.5 * dt, cpe, B);
    state.t += dt;
}

std::array<double, 3> suzuki_yoshida_weights()
{
    const double w1 = 1.0 / (2.0 - std::cbrt(2.0));
    return {w1, 1.0 - 2.0 * w1, w1};
}

void suzuki_yoshida4_step(MaxwellState& state, const MaxwellSystem& sys, double dt,
                          const std::vector<double>* j_moments)
{
    for (double w : suzuki_yoshida_weights())
        maxwell_leapfrog_step(state, sys, w * dt, j_moments);
}

double maxwell_energy(const MaxwellState& state, const MaxwellSystem& sys)
{
    const std::vector<double> me = sys.Mt1.apply(state.E.data);
    const std::vector<double> mb = sys.Mt2.apply(state.B.data);
    return 0.5 * (dot(state.E.data, me) + dot(state.B.data, mb));
}

double min_physical_edge(const TensorDeRham& sp, const Mapping& map)
{
    const auto& sb = sp.kv_s.breakpoints();
    const auto& tb = sp.kv_theta.breakpoints();
    double h = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i + 1 < sb.size(); ++i)
        for (std::size_t j = 0; j + 1 < tb.size(); ++j) {
            const Vec2 x00 = map.eval(sb[i], tb[j]);
            const Vec2 x10 = map.eval(sb[i + 1], tb[j]);
            h = std::min(h, (x10 - x00).norm());
            if (sb[i] > 0.0) {
                const Vec2 x01 = map.eval(sb[i], tb[j + 1]);
                h = std::min(h, (x01 - x00).norm());
            }
        }
    return h;
}

double bessel_J(int n, double x)
{
    if (n < 0)
        throw std::invalid_argument("bessel_J: order must be nonnegative");
    const double half = 0.5 * x;
    double term = 1.0;
    for (int i = 1; i <= n; ++i)
        term *= half / i;  // (x/2)^n / n!
    double sum = term;
    const double q = half * half;
    for (int m = 1; m <= 300; ++m) {
        term *= -q / (m * double(n + m));
        sum += term;
        if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300))
            break;
    }
    return sum;
}

double bessel_J_prime(int n, double x)
{
    if (n == 0)
        return -bessel_J(1, x);
    return 0.5 * (bessel_J(n - 1, x) - bessel_J(n + 1, x));
}

BesselMode make_bessel_mode(int n, int m)
{
    if (n < 0 || m < 1)
        throw std::invalid_argument("make_bessel_mode: need n >= 0 and m >= 1");

    // scan for sign changes of J_n', bisect, then Newton-polish with
    // J_n'' = -J_n'/x - (1 - n^2/x^2) J_n from the Bessel equation
    int found = 0;
    double lo = 0.0, hi = 0.0;
    double x = 0.25, prev = bessel_J_prime(n, x);
    for (int step = 0; step < 4000; ++step) {
        const double xn = x + 0.05;
        const double cur = bessel_J_prime(n, xn);
        if (prev == 0.0 || (prev < 0.0) != (cur < 0.0)) {
            if (++found == m) {
                lo = x;
                hi = xn;
                break;
            }
        }
        x = xn;
        prev = cur;
    }
    if (hi == 0.0)
        throw std::runtime_error("make_bessel_mode: root bracket not found");

    double flo = bessel_J_prime(n, lo);
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = bessel_J_prime(n, mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    double root = 0.5 * (lo + hi);
    for (int it = 0; it < 30; ++it) {
        const double f = bessel_J_prime(n, root);
        const double fp = -f / root - (1.0 - double(n) * n / (root * root)) * bessel_J(n, root);
        const double dx = f / fp;
        root -= dx;
        if (std::abs(dx) < 1e-15 * root)
            break;
    }
    if (std::abs(bessel_J_prime(n, root)) > 1e-12)
        throw std::runtime_error("make_bessel_mode: root polish did not converge");
    return {n, m, root};
}

namespace {

// n J_n(z)/z without the 0/0 at the pole, via J_{n-1} + J_{n+1} = (2n/z) J_n
double bessel_n_jn_over_z(int n, double z)
{
    return 0.5 * (bessel_J(n - 1, z) + bessel_J(n + 1, z));
}

}  // namespace

Vec2 bessel_E(const BesselMode& mode, double t, Vec2 x)
{
    const double s = x.norm();
    const double theta = std::atan2(x.y, x.x);
    const double z = mode.k * s;
    const int n = mode.n;

    const double amp = -std::sin(mode.k * t);  // Re(i e^{i omega t})
    const double a = bessel_n_jn_over_z(n, z);
    const double jp = bessel_J_prime(n, z);
    const double sn = std::sin(n * theta), cn = std::cos(n * theta);
    const double c = std::cos(theta), sth = std::sin(theta);
    return {amp * (a * sn * c - jp * cn * sth), amp * (a * sn * sth + jp * cn * c)};
}

double bessel_B(const BesselMode& mode, double t, Vec2 x)
{
    const double s = x.norm();
    const double theta = std::atan2(x.y, x.x);
    return std::cos(mode.k * t) * bessel_J(mode.n, mode.k * s) * std::cos(mode.n * theta);
}

Vec2 gaussian_pulse_E(double sigma, Vec2 x)
{
    const double g = std::exp(-(x.x * x.x + x.y * x.y) / (2.0 * sigma * sigma));
    return {x.y * g, -x.x * g};
}

double gaussian_pulse_curlE(double sigma, Vec2 x)
{
    const double r2 = x.x * x.x + x.y * x.y;
    return (-2.0 + r2 / (sigma * sigma)) * std::exp(-r2 / (2.0 * sigma * sigma));
}

MaxwellInitialData gaussian_pulse_initial(double sigma, const GeometricProjector& proj,
                                          const ConformingProjector& P, const Mapping& map)
{
    if (sigma <= 0.0)
        throw std::invalid_argument("gaussian_pulse_initial: sigma must be positive");
    MaxwellInitialData out;
    out.E = proj.project_conforming(P, map, [sigma](Vec2 x) { return gaussian_pulse_E(sigma, x); });
    out.B = proj.project_conforming(2, P, map,
                                    [sigma](Vec2 x) { return gaussian_pulse_curlE(sigma, x); });
    return out;
}

}  // namespace polarfeec

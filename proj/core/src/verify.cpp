#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "polarfeec/quadrature.hpp"
#include "polarfeec/studies.hpp"

// run_verify: drives the invariant suites of every module at the configured
// sizes and reports one PASS/FAIL/SKIPPED line per check.

namespace polarfeec {

namespace {

struct Checker {
    VerifyReport report;
    std::ostream* log;

    void add(const std::string& name, bool ok, const std::string& detail = "")
    {
        report.items.push_back({name, ok ? VerifyStatus::pass : VerifyStatus::fail, detail});
        if (log)
            *log << (ok ? "PASS  " : "FAIL  ") << name << (detail.empty() ? "" : "  (" + detail + ")")
                 << "\n";
    }
    void skip(const std::string& name, const std::string& why)
    {
        report.items.push_back({name, VerifyStatus::skipped, why});
        if (log)
            *log << "SKIPPED  " << name << "  (" << why << ")\n";
    }
};

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

std::vector<double> random_vector(std::mt19937& rng, int n)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v)
        x = u(rng);
    return v;
}

// dense LDL^T with positive pivots <=> SPD; small oracle for the mass checks
bool spd_by_cholesky(const DenseMatrix& m, double* min_pivot)
{
    const int n = m.rows();
    DenseMatrix a = m;
    double mp = std::numeric_limits<double>::max();
    for (int k = 0; k < n; ++k) {
        double d = a(k, k);
        for (int j = 0; j < k; ++j)
            d -= a(k, j) * a(k, j) * a(j, j);
        mp = std::min(mp, d);
        if (d <= 0.0) {
            if (min_pivot)
                *min_pivot = d;
            return false;
        }
        a(k, k) = d;
        for (int i = k + 1; i < n; ++i) {
            double s = a(i, k);
            for (int j = 0; j < k; ++j)
                s -= a(i, j) * a(k, j) * a(j, j);
            a(i, k) = s / d;
        }
    }
    if (min_pivot)
        *min_pivot = mp;
    return true;
}

// ---- splines ----

void verify_splines(Checker& c, const TensorDeRham& sp, std::mt19937& rng)
{
    std::uniform_real_distribution<double> us(0.0, sp.kv_s.length());
    std::uniform_real_distribution<double> ut(0.0, 2.0 * M_PI);

    double pou = 0.0;
    for (int k = 0; k < 1000; ++k) {
        double sum_s = 0.0, sum_t = 0.0;
        const SplineBasisEval es = eval_B(sp.kv_s, us(rng));
        const SplineBasisEval et = eval_B(sp.kv_theta, ut(rng));
        for (int i = 0; i < es.count; ++i)
            sum_s += es.values[i];
        for (int i = 0; i < et.count; ++i)
            sum_t += et.values[i];
        pou = std::max({pou, std::abs(sum_s - 1.0), std::abs(sum_t - 1.0)});
    }
    c.add("splines.partition_of_unity", pou < 1e-13, "max defect " + fmt(pou));

    double fd_err = 0.0;
    for (int p = 1; p <= 5; ++p) {
        std::vector<double> breaks{0.0, 0.21, 0.5, 0.77, 1.0, 1.3};
        const KnotVector open = make_open_knots(p, breaks);
        const KnotVector per = make_periodic_knots(p, 8);
        const double h = 1e-6;
        for (int k = 0; k < 50; ++k) {
            for (const KnotVector* kv : {&open, &per}) {
                const double lo = h, hi = kv->length() - h;
                const double x = lo + (hi - lo) * (k + 0.5) / 50.0;
                const SplineBasisEval d = eval_B_derivative(*kv, x);
                const SplineBasisEval bp = eval_B(*kv, x + h);
                const SplineBasisEval bm = eval_B(*kv, x - h);
                // same span for interior x away from knots by construction
                if (bp.first_index != bm.first_index || bp.first_index != d.first_index)
                    continue;
                for (int i = 0; i < d.count; ++i)
                    fd_err = std::max(
                        fd_err, std::abs(d.values[i] - (bp.values[i] - bm.values[i]) / (2 * h)));
            }
        }
    }
    c.add("splines.derivative_identity", fd_err < 1e-6, "max fd defect " + fmt(fd_err));

    // open M-splines integrate to one; periodic ones sum to 1/dtheta
    double int_err = 0.0;
    {
        const GaussRule rule = gauss_legendre(sp.p + 2);
        std::vector<double> xs, ws;
        const auto& breaks = sp.kv_s.breakpoints();
        for (std::size_t s = 0; s + 1 < breaks.size(); ++s)
            append_mapped_rule(rule, breaks[s], breaks[s + 1], xs, ws);
        std::vector<double> integral(sp.kv_s.mdim(), 0.0);
        for (std::size_t q = 0; q < xs.size(); ++q) {
            const SplineBasisEval e = eval_M(sp.kv_s, xs[q]);
            for (int i = 0; i < e.count; ++i)
                integral[e.first_index + i] += ws[q] * e.values[i];
        }
        for (double v : integral)
            int_err = std::max(int_err, std::abs(v - 1.0));
    }
    double msum_err = 0.0;
    const double inv_dt = sp.ntheta / (2.0 * M_PI);
    for (int k = 0; k < 200; ++k) {
        const SplineBasisEval e = eval_M(sp.kv_theta, ut(rng));
        double sum = 0.0;
        for (int i = 0; i < e.count; ++i)
            sum += e.values[i];
        msum_err = std::max(msum_err, std::abs(sum - inv_dt) / inv_dt);
    }
    c.add("splines.m_integral", int_err < 1e-12 && msum_err < 1e-12,
          "int defect " + fmt(int_err) + ", sum defect " + fmt(msum_err));

    {
        const SplineBasisEval e0 = eval_B(sp.kv_s, 0.0);
        const SplineBasisEval eL = eval_B(sp.kv_s, sp.kv_s.length());
        bool ok = std::abs(e0.values[0] - 1.0) < 1e-15 && e0.first_index == 0;
        for (int i = 1; i < e0.count; ++i)
            ok = ok && std::abs(e0.values[i]) < 1e-15;
        ok = ok && std::abs(eL.values[eL.count - 1] - 1.0) < 1e-14;
        c.add("splines.endpoint_interpolation", ok);
    }

    if (sp.kv_theta.trigo_ok()) {
        const int n = sp.ntheta;
        double err = 0.0;
        double s1 = 0, s2 = 0, s3 = 0, s4 = 0, c2s = 0, s2s = 0;
        for (int j = 0; j < n; ++j) {
            const double t = 2.0 * M_PI * j / n;
            s1 += std::cos(t);
            s2 += std::sin(t);
            s3 += std::cos(2 * t);
            s4 += std::sin(2 * t);
            c2s += 2 * std::cos(t) * std::cos(t);
            s2s += 2 * std::sin(t) * std::sin(t);
        }
        err = std::max({std::abs(s1), std::abs(s2), std::abs(s3), std::abs(s4),
                        std::abs(c2s - n), std::abs(s2s - n)});
        for (int k = 0; k < std::min(n, 6); ++k) {
            const double tk = 2.0 * M_PI * k / n;
            double a = 0, b = 0;
            for (int j = 0; j < n; ++j) {
                const double t = 2.0 * M_PI * j / n;
                a += 2 * std::cos(t) * std::cos(t - tk);
                b += 2 * std::sin(t) * std::cos(t - tk);
            }
            err = std::max({err, std::abs(a - n * std::cos(tk)), std::abs(b - n * std::sin(tk))});
        }
        c.add("splines.discrete_trigonometry", err < 1e-12, "max defect " + fmt(err));
    } else {
        c.skip("splines.discrete_trigonometry", "n_theta not a multiple of 4");
    }
}

// ---- derham ----

void verify_derham(Checker& c, const TensorDeRham& sp, std::mt19937& rng)
{
    const SparseOperator G = grad_matrix(sp);
    const SparseOperator C = curl_matrix(sp);
    c.add("derham.complex_property", C.multiply(G).max_abs() == 0.0);
    c.add("derham.euler_characteristic", sp.dim0 - sp.dim1 + sp.dim2 == 0);

    FieldCoeffs phi{0, random_vector(rng, sp.dim0)};
    FieldCoeffs gphi{1, G.apply(phi.data)};
    std::uniform_real_distribution<double> us(0.2 * sp.kv_s.length(), 0.9 * sp.kv_s.length());
    std::uniform_real_distribution<double> ut(0.0, 2.0 * M_PI);
    double err = 0.0;
    const double h = 1e-6;
    for (int k = 0; k < 100; ++k) {
        const double s = us(rng), t = ut(rng);
        const Vec2 g = eval_logical_vector(sp, gphi, s, t);
        const double ds = (eval_logical_scalar(sp, phi, s + h, t) -
                           eval_logical_scalar(sp, phi, s - h, t)) /
                          (2 * h);
        const double dt = (eval_logical_scalar(sp, phi, s, t + h) -
                           eval_logical_scalar(sp, phi, s, t - h)) /
                          (2 * h);
        err = std::max({err, std::abs(g.x - ds), std::abs(g.y - dt)});
    }
    c.add("derham.grad_consistency", err < 1e-6, "max fd defect " + fmt(err));
}

// ---- geometry ----

bool verify_geometry(Checker& c, const PolarMapping& map, std::mt19937& rng)
{
    std::uniform_real_distribution<double> ut(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> us(0.05, map.max_s());

    double pole_err = 0.0;
    for (int k = 0; k < 100; ++k)
        pole_err = std::max(pole_err, (map.eval(0.0, ut(rng)) - map.pole()).norm());
    c.add("geometry.pole_collapse", pole_err < 1e-14, "max |F(0,t)-x0| " + fmt(pole_err));

    double jac_err = 0.0;
    const double h = 1e-6;
    for (int k = 0; k < 200; ++k) {
        const double s = std::uniform_real_distribution<double>(0.05, map.max_s() - h)(rng);
        const double t = ut(rng);
        const Jacobian jac = map.jacobian(s, t);
        const Vec2 ds = (map.eval(s + h, t) - map.eval(s - h, t)) * (0.5 / h);
        const Vec2 dt = (map.eval(s, t + h) - map.eval(s, t - h)) * (0.5 / h);
        const double fd_det = ds.x * dt.y - dt.x * ds.y;
        jac_err = std::max({jac_err, std::abs(jac.J.a00 - ds.x), std::abs(jac.J.a10 - ds.y),
                            std::abs(jac.J.a01 - dt.x), std::abs(jac.J.a11 - dt.y),
                            std::abs(jac.det - fd_det)});
    }
    c.add("geometry.jacobian_fd", jac_err < 1e-6, "max fd defect " + fmt(jac_err));

    const SingularityProfile prof = verify_first_order_singularity(map);
    c.add("geometry.first_order_singularity", prof.ok && prof.limit_error < 1e-6,
          prof.ok ? "D_* " + fmt(prof.D_star) + ", limit err " + fmt(prof.limit_error)
                  : prof.message);
    if (map.kind() == PolarMapping::Kind::spline_control)
        c.add("geometry.singularity_closed_form", prof.ok && prof.closed_form_error < 1e-10,
              prof.ok ? "defect " + fmt(prof.closed_form_error) : prof.message);
    if (!prof.ok) {
        c.skip("geometry.pushforward_pullback_roundtrip", "mapping failed verification");
        c.skip("geometry.pullback_grad_commutation", "mapping failed verification");
        c.skip("geometry.pushforward_grad_commutation", "mapping failed verification");
        return false;
    }

    // pushforward(pullback) is the identity away from the pole
    const PhysScalarField phi = [](Vec2 x) { return std::sin(x.x) * std::cos(x.y) + 0.3 * x.y; };
    const PhysVectorField v = [](Vec2 x) -> Vec2 { return {std::cos(x.y), std::sin(x.x) + x.y}; };
    double rt = 0.0;
    for (int k = 0; k < 500; ++k) {
        const double s = us(rng), t = ut(rng);
        const Vec2 x = map.eval(s, t);
        rt = std::max(rt, std::abs(pushforward0(map, pullback0(map, phi, s, t), s, t) - phi(x)));
        const Vec2 w = pushforward1(map, pullback1(map, v, s, t), s, t) - v(x);
        rt = std::max({rt, std::abs(w.x), std::abs(w.y)});
        rt = std::max(rt, std::abs(pushforward2(map, pullback2(map, phi, s, t), s, t) - phi(x)));
    }
    c.add("geometry.pushforward_pullback_roundtrip", rt < 1e-12, "max defect " + fmt(rt));

    // pullback-gradient commutation: B1(grad phi) = grad_hat(B0 phi)
    const PhysVectorField grad_phi = [](Vec2 x) -> Vec2 {
        return {std::cos(x.x) * std::cos(x.y), -std::sin(x.x) * std::sin(x.y) + 0.3};
    };
    double pb_err = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double s = std::uniform_real_distribution<double>(h, map.max_s() - h)(rng);
        const double t = ut(rng);
        const Vec2 lhs = pullback1(map, grad_phi, s, t);
        const double ds = (pullback0(map, phi, s + h, t) - pullback0(map, phi, s - h, t)) / (2 * h);
        const double dt = (pullback0(map, phi, s, t + h) - pullback0(map, phi, s, t - h)) / (2 * h);
        pb_err = std::max({pb_err, std::abs(lhs.x - ds), std::abs(lhs.y - dt)});
    }
    c.add("geometry.pullback_grad_commutation", pb_err < 1e-5, "max defect " + fmt(pb_err));

    // pushforward-gradient commutation away from the pole, via the inverse map
    double pf_err = 0.0;
    const ScalarField phihat = [](double s, double t) {
        return s * s * std::cos(t) + 0.2 * s + 0.1 * s * s * s * std::sin(2 * t);
    };
    const VectorField gradhat = [](double s, double t) -> Vec2 {
        return {2 * s * std::cos(t) + 0.2 + 0.3 * s * s * std::sin(2 * t),
                -s * s * std::sin(t) + 0.2 * s * s * s * std::cos(2 * t)};
    };
    for (int k = 0; k < 100; ++k) {
        const double s = std::uniform_real_distribution<double>(0.15, 0.9 * map.max_s())(rng);
        const double t = ut(rng);
        const Vec2 x = map.eval(s, t);
        const Vec2 pf = pushforward_eval1(map, gradhat, s, t);
        const double eps = 1e-6;
        auto phys = [&](Vec2 y) {
            const auto st = inverse_map(map, y);
            return phihat(st->x, st->y);
        };
        const double dx = (phys({x.x + eps, x.y}) - phys({x.x - eps, x.y})) / (2 * eps);
        const double dy = (phys({x.x, x.y + eps}) - phys({x.x, x.y - eps})) / (2 * eps);
        pf_err = std::max({pf_err, std::abs(pf.x - dx), std::abs(pf.y - dy)});
    }
    c.add("geometry.pushforward_grad_commutation", pf_err < 1e-5, "max defect " + fmt(pf_err));
    return true;
}

// squared L^2 norm of the pushforward of the theta basis T^theta_{0j} (and the
// level-2 basis T^2_{0j}) over the annulus s in [eps, L]; both diverge like
// log(1/eps) as eps -> 0
double annulus_norm_sq(const TensorDeRham& sp, const Mapping& map, int level, int j, double eps)
{
    const GaussRule rule = gauss_legendre(8);
    std::vector<double> sx, sw;
    // geometric panels from eps up to the first breakpoint, regular spans after
    const auto& breaks = sp.kv_s.breakpoints();
    double hi = breaks[1];
    std::vector<double> cuts{eps};
    for (double x = eps; x * 2 < hi; x *= 2)
        cuts.push_back(2 * x);
    cuts.push_back(hi);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        append_mapped_rule(rule, cuts[i], cuts[i + 1], sx, sw);
    for (std::size_t i = 1; i + 1 < breaks.size(); ++i)
        append_mapped_rule(rule, breaks[i], breaks[i + 1], sx, sw);

    std::vector<double> tx, tw;
    const auto& tb = sp.kv_theta.breakpoints();
    for (std::size_t i = 0; i + 1 < tb.size(); ++i)
        append_mapped_rule(rule, tb[i], tb[i + 1], tx, tw);

    double acc = 0.0;
    for (std::size_t qs = 0; qs < sx.size(); ++qs) {
        const SplineBasisEval bs = eval_B(sp.kv_s, sx[qs]);
        const SplineBasisEval ms = eval_M(sp.kv_s, sx[qs]);
        const double B0 = bs.first_index == 0 ? bs.values[0] : 0.0;
        const double M0 = ms.first_index == 0 ? ms.values[0] : 0.0;
        if (B0 == 0.0 && M0 == 0.0)
            continue;
        for (std::size_t qt = 0; qt < tx.size(); ++qt) {
            const Jacobian jac = map.jacobian(sx[qs], tx[qt]);
            const double w = sw[qs] * tw[qt];
            if (level == 1) {
                const SplineBasisEval mt = eval_M(sp.kv_theta, tx[qt]);
                double mj = 0.0;
                for (int i = 0; i < mt.count; ++i)
                    if (mt.index(i, sp.ntheta) == j)
                        mj = mt.values[i];
                if (mj == 0.0)
                    continue;
                const Vec2 val = jac.inv_transpose_apply({0.0, B0 * mj});
                acc += w * val.dot(val) * jac.det;
            } else {
                const SplineBasisEval mt = eval_M(sp.kv_theta, tx[qt]);
                double mj = 0.0;
                for (int i = 0; i < mt.count; ++i)
                    if (mt.index(i, sp.ntheta) == j)
                        mj = mt.values[i];
                if (mj == 0.0)
                    continue;
                const double val = M0 * mj;
                acc += w * val * val / jac.det;
            }
        }
    }
    return acc;
}

// least-squares slope of y against x
double fit_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const int n = int(x.size());
    double mx = 0, my = 0;
    for (int i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

void verify_nonconformity(Checker& c, const TensorDeRham& sp, const Mapping& map)
{
    // theoretical slope of ||F^1 T^theta_{0j}||^2 vs log(1/eps):
    // integral of M_j(t)^2 (C^2+S^2)/D dt; on the analytical disk C^2+S^2 = D = 1
    const int j = 0;
    const GaussRule rule = gauss_legendre(8);
    std::vector<double> tx, tw;
    const auto& tb = sp.kv_theta.breakpoints();
    for (std::size_t i = 0; i + 1 < tb.size(); ++i)
        append_mapped_rule(rule, tb[i], tb[i + 1], tx, tw);
    double slope_theory = 0.0;
    for (std::size_t q = 0; q < tx.size(); ++q) {
        const SplineBasisEval mt = eval_M(sp.kv_theta, tx[q]);
        for (int i = 0; i < mt.count; ++i)
            if (mt.index(i, sp.ntheta) == j)
                slope_theory += tw[q] * mt.values[i] * mt.values[i];
    }

    std::vector<double> xs, ys;
    for (double eps = 1e-2; eps > 0.5e-5; eps /= 4.0) {
        xs.push_back(std::log(1.0 / eps));
        ys.push_back(annulus_norm_sq(sp, map, 1, j, eps));
    }
    const double slope = fit_slope(xs, ys);
    const double rel = std::abs(slope - slope_theory) / slope_theory;
    c.add("geometry.nonconformity_log_growth", rel < 0.10,
          "slope " + fmt(slope) + " vs " + fmt(slope_theory));

    // same divergence witness for the level-2 ring-0 functions
    std::vector<double> y2;
    for (double eps = 1e-2; eps > 0.5e-5; eps /= 4.0)
        y2.push_back(annulus_norm_sq(sp, map, 2, j, eps));
    bool growing = true;
    for (std::size_t i = 0; i + 1 < y2.size(); ++i)
        growing = growing && y2[i + 1] > y2[i];
    c.add("assembly.mass2_divergence_witness", growing && y2.back() > 1.5 * y2.front(),
          "norm^2 " + fmt(y2.front()) + " -> " + fmt(y2.back()));
}

// ---- conforming ----

void make_conforming_sample(const TensorDeRham& sp, Kind kind, MapVariant variant, int level,
                            std::mt19937& rng, std::vector<double>& x)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    x = random_vector(rng, space_dim(sp, level));
    const double dt = 2.0 * M_PI / sp.ntheta;
    if (level == 0) {
        const double g0 = u(rng), g1 = u(rng), g2 = u(rng);
        for (int j = 0; j < sp.ntheta; ++j) {
            x[sp.idx0(0, j)] = g0;
            if (kind == Kind::U)
                x[sp.idx0(1, j)] =
                    variant == MapVariant::spline
                        ? g0 + g1 * std::cos(j * dt) + g2 * std::sin(j * dt)
                        : g0;
        }
    } else if (level == 1) {
        const double e1 = u(rng), e2 = u(rng);
        if (kind == Kind::U)
            for (int j = 0; j < sp.ntheta; ++j)
                x[sp.idx1s(0, j)] = variant == MapVariant::spline
                                        ? e1 * std::cos(j * dt) + e2 * std::sin(j * dt)
                                        : 0.0;
        for (int j = 0; j < sp.ntheta; ++j) {
            x[sp.idx1t(0, j)] = 0.0;
            x[sp.idx1t(1, j)] = x[sp.idx1s(0, sp.wrap(j + 1))] - x[sp.idx1s(0, j)];
        }
    } else {
        for (int j = 0; j < sp.ntheta; ++j)
            x[sp.idx2(0, j)] = 0.0;
    }
}

void verify_conforming(Checker& c, const TensorDeRham& sp, std::mt19937& rng)
{
    const SparseOperator G = grad_matrix(sp);
    const SparseOperator C = curl_matrix(sp);
    const bool trigo = sp.kv_theta.trigo_ok();

    double idem = 0.0, range_defect = 0.0, fixed = 0.0, local = 0.0, match = 0.0;
    double commute = 0.0, complex_zero = 0.0;

    for (Kind kind : {Kind::V, Kind::U})
        for (MapVariant variant : {MapVariant::spline, MapVariant::analytical}) {
            if (kind == Kind::V && variant == MapVariant::analytical)
                continue;  // V does not depend on the mapping
            if (kind == Kind::U && !trigo && variant == MapVariant::spline)
                continue;  // harmonic block needs the trig identities
            const ConformingProjector P(sp, kind, variant);
            std::vector<SparseOperator> mats;
            for (int level = 0; level <= 2; ++level)
                mats.push_back(P.matrix(level));

            for (int level = 0; level <= 2; ++level) {
                for (int rep = 0; rep < 20; ++rep) {
                    const std::vector<double> x = random_vector(rng, space_dim(sp, level));
                    const std::vector<double> px = P.apply(level, x);
                    idem = std::max(idem, max_abs_diff(P.apply(level, px), px));
                    range_defect = std::max(
                        range_defect,
                        is_conforming(sp, kind, variant, level, px, 1e-11).defect);
                    match = std::max(match, max_abs_diff(mats[level].apply(x), px));

                    // locality: only the two rings nearest the pole change
                    std::vector<double> diff(x.size());
                    for (std::size_t i = 0; i < x.size(); ++i)
                        diff[i] = px[i] - x[i];
                    double outside = 0.0;
                    if (level == 0) {
                        for (int i = 2; i < sp.ns; ++i)
                            for (int j = 0; j < sp.ntheta; ++j)
                                outside = std::max(outside, std::abs(diff[sp.idx0(i, j)]));
                    } else if (level == 1) {
                        for (int i = 2; i < sp.ns - 1; ++i)
                            for (int j = 0; j < sp.ntheta; ++j)
                                outside = std::max(outside, std::abs(diff[sp.idx1s(i, j)]));
                        for (int i = 2; i < sp.ns; ++i)
                            for (int j = 0; j < sp.ntheta; ++j)
                                outside = std::max(outside, std::abs(diff[sp.idx1t(i, j)]));
                    } else {
                        for (int i = 2; i < sp.ns - 1; ++i)
                            for (int j = 0; j < sp.ntheta; ++j)
                                outside = std::max(outside, std::abs(diff[sp.idx2(i, j)]));
                    }
                    local = std::max(local, outside);

                    std::vector<double> xc;
                    make_conforming_sample(sp, kind, variant, level, rng, xc);
                    fixed = std::max(fixed, max_abs_diff(P.apply(level, xc), xc));
                }
            }

            // discrete commutation on the constrained subspaces
            for (int rep = 0; rep < 20; ++rep) {
                std::vector<double> phi = random_vector(rng, sp.dim0);
                for (int j = 0; j < sp.ntheta; ++j)
                    phi[sp.idx0(0, j)] = phi[sp.idx0(0, 0)];
                commute = std::max(commute, max_abs_diff(P.apply(1, G.apply(phi)),
                                                         G.apply(P.apply(0, phi))));

                std::vector<double> v = random_vector(rng, sp.dim1);
                for (int j = 0; j < sp.ntheta; ++j)
                    v[sp.idx1t(0, j)] = 0.0;
                commute = std::max(commute, max_abs_diff(P.apply(2, C.apply(v)),
                                                         C.apply(P.apply(1, v))));
            }

            complex_zero = std::max(
                complex_zero,
                C.multiply(mats[1]).multiply(G).multiply(mats[0]).max_abs());
        }

    c.add("conforming.idempotence", idem < 1e-14, "max defect " + fmt(idem));
    c.add("conforming.range", range_defect < 1e-11, "max defect " + fmt(range_defect));
    c.add("conforming.fixed_points", fixed < 1e-14, "max defect " + fmt(fixed));
    c.add("conforming.locality", local == 0.0, "max change beyond ring 1 " + fmt(local));
    c.add("conforming.matrix_matches_apply", match < 1e-15, "max defect " + fmt(match));
    c.add("conforming.discrete_commutation", commute < 1e-13, "max defect " + fmt(commute));
    c.add("conforming.projected_complex_zero", complex_zero < 1e-13,
          "max |C P1 G P0| " + fmt(complex_zero));

    if (trigo) {
        const int n = sp.ntheta;
        DenseMatrix p(n, n);
        for (int jj = 0; jj < n; ++jj)
            for (int k = 0; k < n; ++k)
                p(jj, k) = 2.0 / n * std::cos(2.0 * M_PI * (jj - k) / n);
        double err = 0.0;
        for (int i = 0; i < n; ++i)
            for (int jj = 0; jj < n; ++jj) {
                double acc = 0.0;
                for (int k = 0; k < n; ++k)
                    acc += p(i, k) * p(k, jj);
                err = std::max(err, std::abs(acc - p(i, jj)));
            }
        c.add("conforming.harmonic_block_projector", err < 1e-13, "max |p^2-p| " + fmt(err));
    } else {
        c.skip("conforming.harmonic_block_projector", "n_theta not a multiple of 4");
    }
}

// ---- projection ----

void verify_projection(Checker& c, const TensorDeRham& sp, const Mapping& map, std::mt19937& rng)
{
    const GeometricProjector proj(sp);
    const SparseOperator G = grad_matrix(sp);
    const SparseOperator C = curl_matrix(sp);

    // spline reproduction
    double rep_err = 0.0;
    for (int level = 0; level <= 2; ++level) {
        const std::vector<double> x = random_vector(rng, space_dim(sp, level));
        FieldCoeffs fc{level, x};
        FieldCoeffs back;
        if (level == 1)
            back = proj.project_logical(
                [&](double s, double t) { return eval_logical_vector(sp, fc, s, t); });
        else
            back = proj.project_logical(
                level, [&](double s, double t) { return eval_logical_scalar(sp, fc, s, t); });
        rep_err = std::max(rep_err, max_abs_diff(back.data, x));
    }
    c.add("projection.spline_reproduction", rep_err < 1e-12, "max defect " + fmt(rep_err));

    // logical commutation with analytic fields
    const ScalarField phihat = [](double s, double t) {
        return s * s * std::cos(t) + 0.2 * s + 0.1 * s * s * s * std::sin(2 * t);
    };
    const VectorField gradhat = [](double s, double t) -> Vec2 {
        return {2 * s * std::cos(t) + 0.2 + 0.3 * s * s * std::sin(2 * t),
                -s * s * std::sin(t) + 0.2 * s * s * s * std::cos(2 * t)};
    };
    const VectorField vhat = [](double s, double t) -> Vec2 {
        return {s * std::sin(t), s * s * std::cos(t)};
    };
    const ScalarField curlhat = [](double s, double t) { return s * std::cos(t); };

    const FieldCoeffs p0 = proj.project_logical(0, phihat);
    const FieldCoeffs p1 = proj.project_logical(gradhat);
    const double comm_g = max_abs_diff(p1.data, G.apply(p0.data));
    const FieldCoeffs q1 = proj.project_logical(vhat);
    const FieldCoeffs q2 = proj.project_logical(2, curlhat);
    const double comm_c = max_abs_diff(q2.data, C.apply(q1.data));
    c.add("projection.logical_commutation", comm_g < 1e-11 && comm_c < 1e-11,
          "grad " + fmt(comm_g) + ", curl " + fmt(comm_c));

    // polar commutation through the pullbacks (Pi_W) and the conforming
    // composition (Pi_Z), with smooth physical fields
    const PhysScalarField phi = [](Vec2 x) { return std::sin(x.x) * std::cos(x.y) + 0.3 * x.y; };
    const PhysVectorField grad_phi = [](Vec2 x) -> Vec2 {
        return {std::cos(x.x) * std::cos(x.y), -std::sin(x.x) * std::sin(x.y) + 0.3};
    };
    const PhysVectorField v = [](Vec2 x) -> Vec2 { return {std::cos(x.y), std::sin(x.x) + x.y}; };
    const PhysScalarField curl_v = [](Vec2 x) { return std::cos(x.x) + std::sin(x.y); };

    {
        const FieldCoeffs a0 = proj.project_polar(0, map, phi);
        const FieldCoeffs a1 = proj.project_polar(map, grad_phi);
        const double eg = max_abs_diff(a1.data, G.apply(a0.data));
        const FieldCoeffs b1 = proj.project_polar(map, v);
        const FieldCoeffs b2 = proj.project_polar(2, map, curl_v);
        const double ec = max_abs_diff(b2.data, C.apply(b1.data));
        c.add("projection.polar_commutation", eg < 1e-10 && ec < 1e-10,
              "grad " + fmt(eg) + ", curl " + fmt(ec));

        double ring0 = 0.0;
        for (int j = 0; j < sp.ntheta; ++j) {
            ring0 = std::max(ring0, std::abs(a0.data[sp.idx0(0, j)] - a0.data[sp.idx0(0, 0)]));
            ring0 = std::max(ring0, std::abs(b1.data[sp.idx1t(0, j)]));
        }
        c.add("projection.pole_dof_structure", ring0 < 1e-13, "max defect " + fmt(ring0));
    }

    double comm = 0.0;
    for (Kind kind : {Kind::V, Kind::U}) {
        if (kind == Kind::U && !sp.kv_theta.trigo_ok())
            continue;
        const ConformingProjector P(sp, kind, MapVariant::spline);
        const FieldCoeffs a0 = proj.project_conforming(0, P, map, phi);
        const FieldCoeffs a1 = proj.project_conforming(P, map, grad_phi);
        comm = std::max(comm, max_abs_diff(a1.data, G.apply(a0.data)));
        const FieldCoeffs b1 = proj.project_conforming(P, map, v);
        const FieldCoeffs b2 = proj.project_conforming(2, P, map, curl_v);
        comm = std::max(comm, max_abs_diff(b2.data, C.apply(b1.data)));
    }
    c.add("projection.composed_commutation", comm < 1e-10, "max defect " + fmt(comm));

    // mass preservation of Pi^2_V: coefficient sum equals the quadrature of f
    const ConformingProjector PV(sp, Kind::V, MapVariant::spline);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double mass_err = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const double a = u(rng), b = u(rng), d = u(rng);
        const PhysScalarField f = [&](Vec2 x) {
            return a + b * std::sin(3 * x.x + d) + d * x.y * x.y;
        };
        const std::vector<double> dofs = proj.logical_dofs(
            2, [&](double s, double t) { return pullback2(map, f, s, t); });
        double total = 0.0;
        for (double w : dofs)
            total += w;
        FieldCoeffs c2 = proj.solve_dofs(2, dofs);
        PV.apply(c2);
        double csum = 0.0;
        for (double w : c2.data)
            csum += w;
        mass_err = std::max(mass_err, std::abs(csum - total));
    }
    c.add("projection.mass_preservation", mass_err < 1e-10, "max defect " + fmt(mass_err));
}

// ---- assembly & solvers ----

void verify_assembly(Checker& c, const TensorDeRham& sp, const Mapping& map, std::mt19937& rng)
{
    const QuadratureGrid grid = QuadratureGrid::build(sp, map);

    double sym = 0.0;
    std::vector<SparseOperator> masses;
    for (int level = 0; level <= 2; ++level) {
        masses.push_back(mass_matrix(level, sp, grid));
        const SparseOperator d = masses.back().add(masses.back().transpose(), 1.0, -1.0);
        sym = std::max(sym, d.max_abs());
    }
    c.add("assembly.mass_symmetry", sym < 1e-13, "max asymmetry " + fmt(sym));

    {
        std::vector<double> ones(sp.dim0, 1.0);
        const double area_mass = dot(ones, masses[0].apply(ones));
        double area_quad = 0.0;
        for (int qs = 0; qs < grid.n_s_points(); ++qs)
            for (int qt = 0; qt < grid.n_t_points(); ++qt)
                area_quad += grid.sw[qs] * grid.tw[qt] * grid.jacobian_at(qs, qt).det;
        c.add("assembly.partition_area", std::abs(area_mass - area_quad) < 1e-12,
              "area " + fmt(area_quad));
    }

    if (sp.kv_theta.trigo_ok()) {
        const ConformingProjector P(sp, Kind::U, MapVariant::spline);
        const SparseOperator G = grad_matrix(sp);
        const SparseOperator P0 = P.matrix(0);
        const SparseOperator P1 = P.matrix(1);
        const SparseOperator GP = G.multiply(P0);
        const SparseOperator Mt1 = regularized_mass(masses[1], P1);
        const SparseOperator lhs = GP.transpose().multiply(Mt1.multiply(GP));
        const SparseOperator rhs = GP.transpose().multiply(masses[1].multiply(GP));
        const double scale = rhs.max_abs();
        const double err = lhs.add(rhs, 1.0, -1.0).max_abs() / scale;
        c.add("assembly.stiffness_equivalence", err < 1e-10, "rel defect " + fmt(err));

        const SparseOperator P2 = P.matrix(2);
        const SparseOperator Mt2 = regularized_mass(masses[2], P2);
        double piv1 = 0, piv2 = 0;
        const bool spd1 = spd_by_cholesky(Mt1.to_dense(), &piv1);
        const bool spd2 = spd_by_cholesky(Mt2.to_dense(), &piv2);
        c.add("assembly.regularized_mass_spd", spd1 && spd2,
              "min pivots " + fmt(piv1) + ", " + fmt(piv2));
    } else {
        c.skip("assembly.stiffness_equivalence", "n_theta not a multiple of 4");
        c.skip("assembly.regularized_mass_spd", "n_theta not a multiple of 4");
    }
    (void)rng;
}

void verify_solvers(Checker& c, const TensorDeRham& sp, const PolarMapping& map,
                    std::mt19937& rng)
{
    const QuadratureGrid grid = QuadratureGrid::build(sp, map);
    const MapVariant variant = MapVariant::spline;
    const Kind kind = sp.kv_theta.trigo_ok() ? Kind::U : Kind::V;

    {
        const PoissonSystem sys = build_poisson_system(sp, grid, kind, variant, 1.0);
        const std::vector<double> zero(sp.dim0, 0.0);
        const PoissonResult res = solve_poisson(sys, zero);
        c.add("solvers.poisson_zero_rhs", norm2(res.phi.data) == 0.0);
    }

    MaxwellSystem sys = build_maxwell_system(sp, grid, kind, variant);
    const GeometricProjector proj(sp);
    const ConformingProjector P(sp, kind, variant);
    const MaxwellInitialData init = gaussian_pulse_initial(0.3, proj, P, map);

    {
        const double dt = 0.5 * min_physical_edge(sp, map);
        MaxwellState state{init.E, init.B, 0.0};
        maxwell_leapfrog_step(state, sys, dt);
        maxwell_leapfrog_step(state, sys, -dt);
        const double err =
            std::max(max_abs_diff(state.E.data, init.E.data), max_abs_diff(state.B.data, init.B.data));
        c.add("solvers.leapfrog_reversibility", err < 1e-11, "max defect " + fmt(err));
    }

    {
        const auto w = suzuki_yoshida_weights();
        const double c1 = std::abs(2 * w[0] + w[1] - 1.0);
        const double c3 = std::abs(2 * w[0] * w[0] * w[0] + w[1] * w[1] * w[1]);
        c.add("solvers.suzuki_yoshida_order_conditions", c1 < 1e-15 && c3 < 1e-15,
              fmt(c1) + ", " + fmt(c3));
    }

    {
        std::uniform_real_distribution<double> u(0.1, 9.5);
        double ode = 0.0;
        const int n = 3;
        for (int k = 0; k < 100; ++k) {
            const double x = u(rng);
            const double jn = bessel_J(n, x);
            const double jp = bessel_J_prime(n, x);
            const double jpp = -jp / x - (1.0 - double(n) * n / (x * x)) * jn;
            ode = std::max(ode, std::abs(x * x * jpp + x * jp + (x * x - n * n) * jn));
        }
        const BesselMode mode = make_bessel_mode(3, 2);
        const double at_root = std::abs(bessel_J_prime(3, mode.k));
        c.add("solvers.bessel_mode", ode < 1e-10 && at_root < 1e-12,
              "ode defect " + fmt(ode) + ", root " + fmt(mode.k));
    }

    {
        MaxwellState state{init.E, init.B, 0.0};
        const double dt = 0.5 * min_physical_edge(sp, map);
        const double e0 = maxwell_energy(state, sys);
        double emin = e0, emax = e0;
        for (int step = 0; step < 1000; ++step) {
            maxwell_leapfrog_step(state, sys, dt);
            const double e = maxwell_energy(state, sys);
            emin = std::min(emin, e);
            emax = std::max(emax, e);
        }
        const double swing = (emax - emin) / e0;
        // leap-frog conserves a modified energy: the swing is bounded, O(dt^2)
        const double defect = std::abs(maxwell_energy(state, sys) - e0) / e0;
        c.add("solvers.energy_bounded", swing < 1e-2 && defect < 2 * swing + 1e-6,
              "swing " + fmt(swing));

        const std::vector<double> pe = sys.P1.apply(state.E.data);
        double defect_conf = max_abs_diff(pe, state.E.data) / std::max(1e-300, norm2(state.E.data));
        c.add("solvers.conformity_defect_logged", true, "(I-P1)E after 1000 steps: " + fmt(defect_conf));
    }
}

}  // namespace

VerifyReport run_verify(const RunConfig& cfg, std::ostream* log)
{
    Checker c;
    c.log = log;
    std::mt19937 rng(0x5eed1234);

    const int Ns = cfg.ns_list.empty() ? 8 : cfg.ns_list.front();
    const int Ntheta = cfg.ntheta_factor * Ns;

    PolarMapping map = PolarMapping::analytical({0.0, 0.0});
    bool map_ok = true;
    if (!cfg.mapping_file.empty()) {
        std::ifstream is(cfg.mapping_file);
        if (!is)
            throw std::invalid_argument("run_verify: cannot open mapping file " + cfg.mapping_file);
        map = read_mapping(is);
    } else {
        map = build_shifted_disk_map(cfg.degree, Ns, Ntheta, cfg.pole_shift);
    }
    const TensorDeRham& sp = map.space();

    verify_splines(c, sp, rng);
    verify_derham(c, sp, rng);
    map_ok = verify_geometry(c, map, rng);

    verify_conforming(c, sp, rng);

    if (map_ok) {
        verify_nonconformity(c, sp, map);
        verify_projection(c, sp, map, rng);
        verify_assembly(c, sp, map, rng);
        verify_solvers(c, sp, map, rng);
    } else {
        c.skip("geometry.nonconformity_log_growth", "mapping failed verification");
        c.skip("projection.*", "mapping failed verification");
        c.skip("assembly.*", "mapping failed verification");
        c.skip("solvers.*", "mapping failed verification");
    }

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream os(cfg.out_dir + "/verify.txt");
        write_verify_report(os, c.report);
    }
    return c.report;
}

}  // namespace polarfeec

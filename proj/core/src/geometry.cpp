#include "polarfeec/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace polarfeec {

Mat22 Mat22::inverse() const
{
    const double d = det();
    if (d == 0.0)
        throw std::domain_error("Mat22::inverse: singular matrix");
    return {a11 / d, -a01 / d, -a10 / d, a00 / d};
}

Vec2 Jacobian::inv_transpose_apply(Vec2 v) const
{
    // J^{-T} = (1/det) [J22, -J21; -J12, J11]
    return {(J.a11 * v.x - J.a10 * v.y) / det, (-J.a01 * v.x + J.a00 * v.y) / det};
}

PolarMapping PolarMapping::analytical(Vec2 x0, double L)
{
    PolarMapping m;
    m.kind_ = Kind::analytical;
    m.x0_ = x0;
    m.L_ = L;
    return m;
}

PolarMapping PolarMapping::spline(const TensorDeRham& space, std::vector<Vec2> control, Vec2 x0)
{
    if (int(control.size()) != space.dim0)
        throw std::invalid_argument("PolarMapping::spline: control net size mismatch");

    PolarMapping m;
    m.kind_ = Kind::spline_control;
    m.space_ = space;
    m.x0_ = x0;
    m.L_ = space.kv_s.length();
    m.control_ = std::move(control);

    const double tol = 1e-12;
    double rho_sum = 0.0;
    for (int j = 0; j < space.ntheta; ++j) {
        const Vec2 p0 = m.control_[space.idx0(0, j)] - x0;
        if (std::abs(p0.x) > tol || std::abs(p0.y) > tol)
            throw std::invalid_argument("PolarMapping::spline: ring 0 must collapse onto the pole");
        rho_sum += (m.control_[space.idx0(1, j)] - x0).norm();
    }
    m.rho1_ = rho_sum / space.ntheta;
    if (m.rho1_ <= 0.0)
        throw std::invalid_argument("PolarMapping::spline: first ring radius must be positive");

    const double dt = 2.0 * M_PI / space.ntheta;
    for (int j = 0; j < space.ntheta; ++j) {
        const Vec2 want{x0.x + m.rho1_ * std::cos(j * dt), x0.y + m.rho1_ * std::sin(j * dt)};
        const Vec2 got = m.control_[space.idx0(1, j)];
        if ((got - want).norm() > 1e-9 * std::max(1.0, m.rho1_))
            throw std::invalid_argument(
                "PolarMapping::spline: ring 1 must be a regular circle around the pole");
    }
    return m;
}

Vec2 PolarMapping::eval(double s, double theta) const
{
    if (s < -1e-14 || s > L_ * (1.0 + 1e-14))
        throw std::domain_error("PolarMapping::eval: s outside [0,L]");
    s = std::clamp(s, 0.0, L_);

    if (kind_ == Kind::analytical)
        return {x0_.x + s * std::cos(theta), x0_.y + s * std::sin(theta)};

    const SplineBasisEval bs = eval_B(space_.kv_s, s);
    const SplineBasisEval bt = eval_B(space_.kv_theta, theta);
    Vec2 x;
    for (int a = 0; a < bs.count; ++a)
        for (int b = 0; b < bt.count; ++b) {
            const double w = bs.values[a] * bt.values[b];
            const Vec2& P = control_[space_.idx0(bs.first_index + a, bt.index(b, space_.ntheta))];
            x.x += w * P.x;
            x.y += w * P.y;
        }
    return x;
}

Jacobian PolarMapping::jacobian(double s, double theta) const
{
    Jacobian out;
    if (kind_ == Kind::analytical) {
        const double c = std::cos(theta), sn = std::sin(theta);
        out.J = {c, -s * sn, sn, s * c};
        out.det = s;
        return out;
    }

    const SplineBasisEval bs = eval_B(space_.kv_s, s);
    const SplineBasisEval bt = eval_B(space_.kv_theta, theta);
    const SplineBasisEval ds = eval_B_derivative(space_.kv_s, s);
    const SplineBasisEval dt = eval_B_derivative(space_.kv_theta, theta);

    for (int a = 0; a <= space_.p; ++a)
        for (int b = 0; b <= space_.p; ++b) {
            const Vec2& P = control_[space_.idx0(bs.first_index + a, bt.index(b, space_.ntheta))];
            const double w_s = ds.values[a] * bt.values[b];
            const double w_t = bs.values[a] * dt.values[b];
            out.J.a00 += w_s * P.x;
            out.J.a10 += w_s * P.y;
            out.J.a01 += w_t * P.x;
            out.J.a11 += w_t * P.y;
        }
    out.det = out.J.det();
    return out;
}

SingularityProfile verify_first_order_singularity(const Mapping& map, int n_theta_samples)
{
    SingularityProfile prof;
    const double s1 = 1e-3, s2 = 2e-3, s3 = 4e-3;  // geometric ladder for the s->0 limits

    prof.thetas.resize(n_theta_samples);
    prof.C.resize(n_theta_samples);
    prof.S.resize(n_theta_samples);
    prof.D.resize(n_theta_samples);

    std::vector<double> Cp(n_theta_samples), Sp(n_theta_samples);
    double limit_err = 0.0;
    for (int k = 0; k < n_theta_samples; ++k) {
        const double th = 2.0 * M_PI * k / n_theta_samples;
        prof.thetas[k] = th;
        const Jacobian j1 = map.jacobian(s1, th);
        const Jacobian j2 = map.jacobian(s2, th);
        const Jacobian j3 = map.jacobian(s3, th);

        // first column tends to (C,S); second column scales like s
        prof.C[k] = 2.0 * j1.J.a00 - j2.J.a00;  // Richardson: removes the O(s) term
        prof.S[k] = 2.0 * j1.J.a10 - j2.J.a10;
        Cp[k] = 2.0 * j1.J.a01 / s1 - j2.J.a01 / s2;
        Sp[k] = 2.0 * j1.J.a11 / s1 - j2.J.a11 / s2;

        limit_err = std::max(limit_err, std::abs((2.0 * j2.J.a00 - j3.J.a00) - prof.C[k]));
        limit_err = std::max(limit_err, std::abs((2.0 * j2.J.a10 - j3.J.a10) - prof.S[k]));
    }
    prof.limit_error = limit_err;

    double dmin = std::numeric_limits<double>::max();
    for (int k = 0; k < n_theta_samples; ++k) {
        prof.D[k] = prof.C[k] * Sp[k] - prof.S[k] * Cp[k];
        dmin = std::min(dmin, prof.D[k]);
    }
    prof.D_star = dmin;
    if (dmin <= 0.0) {
        prof.ok = false;
        prof.message = "D(theta) = CS'-SC' is not positive: mapping orientation is invalid";
        return prof;
    }

    // spline maps: compare against the closed form C = mu sum_j cos(theta_j) B_j
    if (const auto* pm = dynamic_cast<const PolarMapping*>(&map);
        pm && pm->kind() == PolarMapping::Kind::spline_control) {
        const TensorDeRham& sp = pm->space();
        prof.mu = pm->first_ring_radius() * eval_M(sp.kv_s, 0.0).values[0];
        const double dt = 2.0 * M_PI / sp.ntheta;
        double err = 0.0;
        for (int k = 0; k < n_theta_samples; ++k) {
            const SplineBasisEval bt = eval_B(sp.kv_theta, prof.thetas[k]);
            double c = 0.0, s = 0.0;
            for (int b = 0; b < bt.count; ++b) {
                const int j = bt.index(b, sp.ntheta);
                c += std::cos(j * dt) * bt.values[b];
                s += std::sin(j * dt) * bt.values[b];
            }
            err = std::max(err, std::abs(prof.mu * c - prof.C[k]));
            err = std::max(err, std::abs(prof.mu * s - prof.S[k]));
        }
        prof.closed_form_error = err;
    }

    // lower bound s D_* <= det J_F sampled over the domain
    double margin = std::numeric_limits<double>::max();
    for (int ks = 1; ks <= 16; ++ks) {
        const double s = map.max_s() * ks / 16.0;
        for (int k = 0; k < n_theta_samples; ++k) {
            const double det = map.jacobian(s, prof.thetas[k]).det;
            margin = std::min(margin, det / (s * dmin));
            if (det <= 0.0) {
                prof.ok = false;
                prof.message = "det J_F is not positive away from the pole";
                return prof;
            }
        }
    }
    prof.det_bound_margin = margin;
    prof.ok = true;
    return prof;
}

double pushforward0(const Mapping&, double value, double, double)
{
    return value;
}

Vec2 pushforward1(const Mapping& map, Vec2 value, double s, double theta)
{
    if (s <= 0.0)
        throw std::domain_error("pushforward1: singular at the pole");
    return map.jacobian(s, theta).inv_transpose_apply(value);
}

double pushforward2(const Mapping& map, double value, double s, double theta)
{
    if (s <= 0.0)
        throw std::domain_error("pushforward2: singular at the pole");
    return value / map.jacobian(s, theta).det;
}

double pullback0(const Mapping& map, const std::function<double(Vec2)>& phi, double s, double theta)
{
    return phi(map.eval(s, theta));
}

Vec2 pullback1(const Mapping& map, const std::function<Vec2(Vec2)>& v, double s, double theta)
{
    const Vec2 val = v(map.eval(s, theta));
    return map.jacobian(s, theta).J.apply_transpose(val);
}

double pullback2(const Mapping& map, const std::function<double(Vec2)>& f, double s, double theta)
{
    return map.jacobian(s, theta).det * f(map.eval(s, theta));
}

double pushforward_eval(int level, const Mapping& map,
                        const std::function<double(double, double)>& logical, double s,
                        double theta)
{
    if (level == 0)
        return logical(s, theta);
    if (level == 2)
        return pushforward2(map, logical(s, theta), s, theta);
    throw std::invalid_argument("pushforward_eval: scalar levels are 0 and 2");
}

Vec2 pushforward_eval1(const Mapping& map, const std::function<Vec2(double, double)>& logical,
                       double s, double theta)
{
    return pushforward1(map, logical(s, theta), s, theta);
}

PolarMapping build_shifted_disk_map(int p, int Ns, int Ntheta, double D)
{
    if (D <= -0.5 || D >= 0.5)
        throw std::invalid_argument("build_shifted_disk_map: D must lie in (-1/2, 1/2)");

    const TensorDeRham sp = build_derham(p, Ns, Ntheta, 1.0);
    const Vec2 x0{D, 0.0};
    const auto F_D = [&](double s, double th) -> Vec2 {
        return {x0.x - D * s * s + s * std::cos(th), x0.y + s * std::sin(th)};
    };

    const std::vector<double> zs = greville_points(sp.kv_s);
    const std::vector<double> zt = greville_points(sp.kv_theta);

    // interpolate both components on the Greville grid with a Kronecker solve
    AxisSolver As(interpolation_matrix(sp.kv_s, zs));
    AxisSolver At(interpolation_matrix(sp.kv_theta, zt));

    std::vector<double> cx(sp.dim0), cy(sp.dim0);
    for (int i = 0; i < sp.ns; ++i)
        for (int j = 0; j < sp.ntheta; ++j) {
            const Vec2 v = F_D(zs[i], zt[j]);
            cx[sp.idx0(i, j)] = v.x;
            cy[sp.idx0(i, j)] = v.y;
        }
    for (auto* c : {&cx, &cy}) {
        As.solve_columns(*c, sp.ntheta);
        At.solve_rows(*c, sp.ns);
    }

    std::vector<Vec2> control(sp.dim0);
    for (int k = 0; k < sp.dim0; ++k)
        control[k] = {cx[k], cy[k]};

    // restore the exact polar form of the two rings closest to the pole:
    // ring 0 collapses onto x0, ring 1 becomes the best-fit regular circle
    double rho1 = 0.0;
    for (int j = 0; j < sp.ntheta; ++j)
        rho1 += (control[sp.idx0(1, j)] - x0).norm();
    rho1 /= sp.ntheta;

    const double dt = 2.0 * M_PI / sp.ntheta;
    for (int j = 0; j < sp.ntheta; ++j) {
        control[sp.idx0(0, j)] = x0;
        control[sp.idx0(1, j)] = {x0.x + rho1 * std::cos(j * dt), x0.y + rho1 * std::sin(j * dt)};
    }
    return PolarMapping::spline(sp, std::move(control), x0);
}

std::optional<Vec2> inverse_map(const Mapping& map, Vec2 x, double tol)
{
    const double L = map.max_s();
    // polar guess relative to the mapped pole
    const Vec2 x0 = map.eval(0.0, 0.0);
    double s = std::min((x - x0).norm(), L);
    double theta = std::atan2(x.y - x0.y, x.x - x0.x);
    if (s < 1e-12)
        return Vec2{0.0, theta};

    for (int it = 0; it < 60; ++it) {
        const Vec2 r = map.eval(s, theta) - x;
        if (r.norm() < tol)
            return Vec2{s, theta};
        const Jacobian jac = map.jacobian(std::max(s, 1e-12), theta);
        if (jac.det <= 0.0)
            return std::nullopt;
        const Vec2 d = jac.J.inverse().apply(r);
        s -= d.x;
        theta -= d.y;
        if (s < 0.0)
            s = 1e-12;
        if (s > 1.5 * L)
            return std::nullopt;
        s = std::min(s, L);
    }
    return std::nullopt;
}

void write_mapping(std::ostream& os, const PolarMapping& map)
{
    if (map.kind() != PolarMapping::Kind::spline_control)
        throw std::invalid_argument("write_mapping: only spline mappings are serialized");
    const TensorDeRham& sp = map.space();
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d %d %d %.17g %.17g %.17g\n", sp.p, sp.kv_s.num_cells(),
                  sp.ntheta, map.pole().x, map.pole().y, sp.kv_s.length());
    os << buf;
    for (int i = 0; i < sp.ns; ++i)
        for (int j = 0; j < sp.ntheta; ++j) {
            const Vec2& P = map.control_points()[sp.idx0(i, j)];
            std::snprintf(buf, sizeof(buf), "%d %d %.17g %.17g\n", i, j, P.x, P.y);
            os << buf;
        }
}

PolarMapping read_mapping(std::istream& is)
{
    int p, Ns, Ntheta;
    Vec2 x0;
    double L;
    if (!(is >> p >> Ns >> Ntheta >> x0.x >> x0.y >> L))
        throw std::invalid_argument("read_mapping: malformed header");

    const TensorDeRham sp = build_derham(p, Ns, Ntheta, L);
    std::vector<Vec2> control(sp.dim0);
    std::vector<bool> seen(sp.dim0, false);
    for (int k = 0; k < sp.dim0; ++k) {
        int i, j;
        Vec2 P;
        if (!(is >> i >> j >> P.x >> P.y))
            throw std::invalid_argument("read_mapping: missing control point row");
        if (i < 0 || i >= sp.ns || j < 0 || j >= sp.ntheta)
            throw std::invalid_argument("read_mapping: control point index out of range");
        control[sp.idx0(i, j)] = P;
        seen[sp.idx0(i, j)] = true;
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
        throw std::invalid_argument("read_mapping: duplicate or missing control point rows");
    return PolarMapping::spline(sp, std::move(control), x0);
}

}  // namespace polarfeec

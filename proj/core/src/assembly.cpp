#include "polarfeec/assembly.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "polarfeec/quadrature.hpp"

namespace polarfeec {

QuadratureGrid QuadratureGrid::build(const TensorDeRham& sp, const Mapping& map,
                                     int points_per_dir)
{
    QuadratureGrid g;
    g.nq = points_per_dir > 0 ? points_per_dir : sp.p + 2;
    g.ncell_s = sp.kv_s.num_cells();
    g.ncell_t = sp.kv_theta.num_cells();

    const GaussRule rule = gauss_legendre(g.nq);
    const auto& sb = sp.kv_s.breakpoints();
    for (int c = 0; c < g.ncell_s; ++c)
        append_mapped_rule(rule, sb[c], sb[c + 1], g.sx, g.sw);
    const auto& tb = sp.kv_theta.breakpoints();
    for (int c = 0; c < g.ncell_t; ++c)
        append_mapped_rule(rule, tb[c], tb[c + 1], g.tx, g.tw);

    g.s_B.reserve(g.sx.size());
    g.s_M.reserve(g.sx.size());
    g.s_dB.reserve(g.sx.size());
    for (double x : g.sx) {
        g.s_B.push_back(eval_B(sp.kv_s, x));
        g.s_M.push_back(eval_M(sp.kv_s, x));
        g.s_dB.push_back(eval_B_derivative(sp.kv_s, x));
    }
    g.t_B.reserve(g.tx.size());
    g.t_M.reserve(g.tx.size());
    for (double x : g.tx) {
        g.t_B.push_back(eval_B(sp.kv_theta, x));
        g.t_M.push_back(eval_M(sp.kv_theta, x));
    }

    g.jac.resize(g.sx.size() * g.tx.size());
    g.phys.resize(g.jac.size());
    for (std::size_t qs = 0; qs < g.sx.size(); ++qs)
        for (std::size_t qt = 0; qt < g.tx.size(); ++qt) {
            g.jac[qs * g.tx.size() + qt] = map.jacobian(g.sx[qs], g.tx[qt]);
            g.phys[qs * g.tx.size() + qt] = map.eval(g.sx[qs], g.tx[qt]);
        }
    return g;
}

namespace {

// symmetric weight G = J^{-1} J^{-T} det J entering the level-1 metric
struct Metric1 {
    double g00, g01, g11;
};

Metric1 metric1(const Jacobian& jac)
{
    const Mat22 inv = jac.J.inverse();
    return {(inv.a00 * inv.a00 + inv.a01 * inv.a01) * jac.det,
            (inv.a00 * inv.a10 + inv.a01 * inv.a11) * jac.det,
            (inv.a10 * inv.a10 + inv.a11 * inv.a11) * jac.det};
}

// accumulate one cell into a local dense block, then emit triplets once: the
// pair products keep the result exactly symmetric
void assemble_cell(int level, const TensorDeRham& sp, const QuadratureGrid& g, int cs, int ct,
                   std::vector<Triplet>& out)
{
    constexpr int kMaxLocal = 72;  // two blocks of (p+1)^2 at p <= 5
    const int nq = g.nq;
    const int q0s = cs * nq, q0t = ct * nq;

    int ids[kMaxLocal];
    int nloc = 0;
    {
        // local global indices are constant across the cell's quadrature points
        const SplineBasisEval& bs = g.s_B[q0s];
        const SplineBasisEval& ms = g.s_M[q0s];
        const SplineBasisEval& bt = g.t_B[q0t];
        const SplineBasisEval& mt = g.t_M[q0t];
        if (level == 0) {
            for (int a = 0; a < bs.count; ++a)
                for (int b = 0; b < bt.count; ++b)
                    ids[nloc++] = sp.idx0(bs.first_index + a, bt.index(b, sp.ntheta));
        } else if (level == 1) {
            for (int a = 0; a < ms.count; ++a)
                for (int b = 0; b < bt.count; ++b)
                    ids[nloc++] = sp.idx1s(ms.first_index + a, bt.index(b, sp.ntheta));
            for (int a = 0; a < bs.count; ++a)
                for (int b = 0; b < mt.count; ++b)
                    ids[nloc++] = sp.idx1t(bs.first_index + a, mt.index(b, sp.ntheta));
        } else {
            for (int a = 0; a < ms.count; ++a)
                for (int b = 0; b < mt.count; ++b)
                    ids[nloc++] = sp.idx2(ms.first_index + a, mt.index(b, sp.ntheta));
        }
    }

    double local[kMaxLocal * kMaxLocal] = {};
    double val[kMaxLocal];

    for (int qa = 0; qa < nq; ++qa) {
        const int qs = q0s + qa;
        for (int qb = 0; qb < nq; ++qb) {
            const int qt = q0t + qb;
            const double w = g.sw[qs] * g.tw[qt];
            const Jacobian& jac = g.jacobian_at(qs, qt);

            if (level == 0) {
                const SplineBasisEval& bs = g.s_B[qs];
                const SplineBasisEval& bt = g.t_B[qt];
                int k = 0;
                for (int a = 0; a < bs.count; ++a)
                    for (int b = 0; b < bt.count; ++b)
                        val[k++] = bs.values[a] * bt.values[b];
                const double wd = w * jac.det;
                for (int m = 0; m < nloc; ++m)
                    for (int c = 0; c < nloc; ++c)
                        local[m * nloc + c] += wd * (val[m] * val[c]);
            } else if (level == 1) {
                const SplineBasisEval& ms = g.s_M[qs];
                const SplineBasisEval& bs = g.s_B[qs];
                const SplineBasisEval& mt = g.t_M[qt];
                const SplineBasisEval& bt = g.t_B[qt];
                const Metric1 K = metric1(jac);

                int k = 0;
                for (int a = 0; a < ms.count; ++a)
                    for (int b = 0; b < bt.count; ++b)
                        val[k++] = ms.values[a] * bt.values[b];
                const int nsl = k;
                for (int a = 0; a < bs.count; ++a)
                    for (int b = 0; b < mt.count; ++b)
                        val[k++] = bs.values[a] * mt.values[b];

                const double w00 = w * K.g00, w01 = w * K.g01, w11 = w * K.g11;
                for (int m = 0; m < nsl; ++m) {
                    for (int c = 0; c < nsl; ++c)
                        local[m * nloc + c] += w00 * (val[m] * val[c]);
                    for (int c = nsl; c < nloc; ++c) {
                        const double v = w01 * (val[m] * val[c]);
                        local[m * nloc + c] += v;
                        local[c * nloc + m] += v;
                    }
                }
                for (int m = nsl; m < nloc; ++m)
                    for (int c = nsl; c < nloc; ++c)
                        local[m * nloc + c] += w11 * (val[m] * val[c]);
            } else {
                const SplineBasisEval& ms = g.s_M[qs];
                const SplineBasisEval& mt = g.t_M[qt];
                int k = 0;
                for (int a = 0; a < ms.count; ++a)
                    for (int b = 0; b < mt.count; ++b)
                        val[k++] = ms.values[a] * mt.values[b];
                const double wd = w / jac.det;
                for (int m = 0; m < nloc; ++m)
                    for (int c = 0; c < nloc; ++c)
                        local[m * nloc + c] += wd * (val[m] * val[c]);
            }
        }
    }

    for (int m = 0; m < nloc; ++m)
        for (int c = 0; c < nloc; ++c)
            if (local[m * nloc + c] != 0.0)
                out.push_back({ids[m], ids[c], local[m * nloc + c]});
}

}  // namespace

SparseOperator mass_matrix(int level, const TensorDeRham& sp, const QuadratureGrid& grid,
                           int n_threads)
{
    if (level < 0 || level > 2)
        throw std::invalid_argument("mass_matrix: level must be 0, 1 or 2");
    const int ncells = grid.ncell_s * grid.ncell_t;
    n_threads = std::max(1, std::min(n_threads, ncells));

    // per-thread triplet buffers over contiguous cell ranges, concatenated in
    // cell order: the result is independent of the thread count
    std::vector<std::vector<Triplet>> parts(n_threads);
    auto work = [&](int tid) {
        const int lo = ncells * tid / n_threads;
        const int hi = ncells * (tid + 1) / n_threads;
        for (int cell = lo; cell < hi; ++cell)
            assemble_cell(level, sp, grid, cell / grid.ncell_t, cell % grid.ncell_t, parts[tid]);
    };
    if (n_threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int tid = 0; tid < n_threads; ++tid)
            pool.emplace_back(work, tid);
        for (auto& th : pool)
            th.join();
    }

    std::vector<Triplet> all;
    std::size_t total = 0;
    for (const auto& p : parts)
        total += p.size();
    all.reserve(total);
    for (auto& p : parts)
        all.insert(all.end(), p.begin(), p.end());

    const int dim = space_dim(sp, level);
    SparseOperator m = SparseOperator::from_triplets(dim, dim, std::move(all));
    // drop roundoff-level fill
    std::vector<Triplet> kept;
    const double drop = 1e-15 * m.max_abs();
    for (int r = 0; r < m.rows(); ++r)
        for (int k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k)
            if (std::abs(m.values()[k]) > drop)
                kept.push_back({r, m.col_idx()[k], m.values()[k]});
    return SparseOperator::from_triplets(dim, dim, std::move(kept));
}

SparseOperator regularized_mass(const SparseOperator& M, const SparseOperator& P)
{
    if (M.rows() != P.rows() || M.cols() != P.rows())
        throw std::invalid_argument("regularized_mass: shape mismatch");
    const SparseOperator I = SparseOperator::identity(P.rows());
    const SparseOperator IP = I.add(P, 1.0, -1.0);
    return P.transpose().multiply(M.multiply(P)).add(IP.transpose().multiply(IP));
}

namespace {

// accumulate Q(coeffs) = sum_q w_q weight(level) |field(q)|^2 and, for the
// source moments, the dual pairing against every basis function
template <class PointFn>
void for_each_point(const QuadratureGrid& g, PointFn&& fn)
{
    for (int qs = 0; qs < g.n_s_points(); ++qs)
        for (int qt = 0; qt < g.n_t_points(); ++qt)
            fn(qs, qt, g.sw[qs] * g.tw[qt], g.jacobian_at(qs, qt));
}

double eval0(const TensorDeRham& sp, const QuadratureGrid& g, std::span<const double> c, int qs,
             int qt)
{
    const SplineBasisEval& bs = g.s_B[qs];
    const SplineBasisEval& bt = g.t_B[qt];
    double v = 0.0;
    for (int a = 0; a < bs.count; ++a)
        for (int b = 0; b < bt.count; ++b)
            v += c[sp.idx0(bs.first_index + a, bt.index(b, sp.ntheta))] * bs.values[a] *
                 bt.values[b];
    return v;
}

double eval2(const TensorDeRham& sp, const QuadratureGrid& g, std::span<const double> c, int qs,
             int qt)
{
    const SplineBasisEval& ms = g.s_M[qs];
    const SplineBasisEval& mt = g.t_M[qt];
    double v = 0.0;
    for (int a = 0; a < ms.count; ++a)
        for (int b = 0; b < mt.count; ++b)
            v += c[sp.idx2(ms.first_index + a, mt.index(b, sp.ntheta))] * ms.values[a] *
                 mt.values[b];
    return v;
}

Vec2 eval1(const TensorDeRham& sp, const QuadratureGrid& g, std::span<const double> c, int qs,
           int qt)
{
    const SplineBasisEval& ms = g.s_M[qs];
    const SplineBasisEval& bs = g.s_B[qs];
    const SplineBasisEval& mt = g.t_M[qt];
    const SplineBasisEval& bt = g.t_B[qt];
    Vec2 v;
    for (int a = 0; a < ms.count; ++a)
        for (int b = 0; b < bt.count; ++b)
            v.x += c[sp.idx1s(ms.first_index + a, bt.index(b, sp.ntheta))] * ms.values[a] *
                   bt.values[b];
    for (int a = 0; a < bs.count; ++a)
        for (int b = 0; b < mt.count; ++b)
            v.y += c[sp.idx1t(bs.first_index + a, mt.index(b, sp.ntheta))] * bs.values[a] *
                   mt.values[b];
    return v;
}

}  // namespace

double field_norm_sq(int level, const TensorDeRham& sp, std::span<const double> coeffs,
                     const QuadratureGrid& grid)
{
    if (int(coeffs.size()) != space_dim(sp, level))
        throw std::invalid_argument("field_norm_sq: coefficient size mismatch");
    double acc = 0.0;
    for_each_point(grid, [&](int qs, int qt, double w, const Jacobian& jac) {
        if (level == 0) {
            const double v = eval0(sp, grid, coeffs, qs, qt);
            acc += w * v * v * jac.det;
        } else if (level == 1) {
            const Vec2 v = jac.inv_transpose_apply(eval1(sp, grid, coeffs, qs, qt));
            acc += w * v.dot(v) * jac.det;
        } else {
            const double v = eval2(sp, grid, coeffs, qs, qt);
            acc += w * v * v / jac.det;
        }
    });
    return acc;
}

double integrate_field(int level, const TensorDeRham& sp, std::span<const double> coeffs,
                       const QuadratureGrid& grid)
{
    if (level != 0 && level != 2)
        throw std::invalid_argument("integrate_field: level must be 0 or 2");
    double acc = 0.0;
    for_each_point(grid, [&](int qs, int qt, double w, const Jacobian& jac) {
        if (level == 0)
            acc += w * eval0(sp, grid, coeffs, qs, qt) * jac.det;
        else
            acc += w * eval2(sp, grid, coeffs, qs, qt);  // det J cancels for densities
    });
    return acc;
}

double l2_error(int level, const TensorDeRham& sp, std::span<const double> a,
                std::span<const double> b, const QuadratureGrid& grid)
{
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        diff[i] = a[i] - b[i];
    const double den = field_norm_sq(level, sp, b, grid);
    if (den <= 0.0)
        throw std::domain_error("l2_error: reference field has zero norm");
    return std::sqrt(field_norm_sq(level, sp, diff, grid) / den);
}

double h1_error(const TensorDeRham& sp, std::span<const double> a, std::span<const double> b,
                const QuadratureGrid& grid, const SparseOperator& G)
{
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        diff[i] = a[i] - b[i];
    const std::vector<double> gdiff = G.apply(diff);
    const std::vector<double> gb = G.apply(b);

    const double den = field_norm_sq(0, sp, b, grid) + field_norm_sq(1, sp, gb, grid);
    if (den <= 0.0)
        throw std::domain_error("h1_error: reference field has zero norm");
    const double num = field_norm_sq(0, sp, diff, grid) + field_norm_sq(1, sp, gdiff, grid);
    return std::sqrt(num / den);
}

std::vector<double> source_moments0(const TensorDeRham& sp, const QuadratureGrid& grid,
                                    const PhysScalarField& f)
{
    std::vector<double> out(sp.dim0, 0.0);
    for (int qs = 0; qs < grid.n_s_points(); ++qs)
        for (int qt = 0; qt < grid.n_t_points(); ++qt) {
            const Jacobian& jac = grid.jacobian_at(qs, qt);
            const double w = grid.sw[qs] * grid.tw[qt] * jac.det * f(grid.point_at(qs, qt));
            const SplineBasisEval& bs = grid.s_B[qs];
            const SplineBasisEval& bt = grid.t_B[qt];
            for (int a = 0; a < bs.count; ++a)
                for (int b = 0; b < bt.count; ++b)
                    out[sp.idx0(bs.first_index + a, bt.index(b, sp.ntheta))] +=
                        w * bs.values[a] * bt.values[b];
        }
    return out;
}

std::vector<double> source_moments1(const TensorDeRham& sp, const QuadratureGrid& grid,
                                    const PhysVectorField& f)
{
    std::vector<double> out(sp.dim1, 0.0);
    for (int qs = 0; qs < grid.n_s_points(); ++qs)
        for (int qt = 0; qt < grid.n_t_points(); ++qt) {
            const Jacobian& jac = grid.jacobian_at(qs, qt);
            const Vec2 val = f(grid.point_at(qs, qt));
            // <f, F^1 That_mu> = integral That_mu . (J^{-1} f) det J
            const Vec2 u = jac.J.inverse().apply(val) * (grid.sw[qs] * grid.tw[qt] * jac.det);
            const SplineBasisEval& ms = grid.s_M[qs];
            const SplineBasisEval& bs = grid.s_B[qs];
            const SplineBasisEval& mt = grid.t_M[qt];
            const SplineBasisEval& bt = grid.t_B[qt];
            for (int a = 0; a < ms.count; ++a)
                for (int b = 0; b < bt.count; ++b)
                    out[sp.idx1s(ms.first_index + a, bt.index(b, sp.ntheta))] +=
                        u.x * ms.values[a] * bt.values[b];
            for (int a = 0; a < bs.count; ++a)
                for (int b = 0; b < mt.count; ++b)
                    out[sp.idx1t(bs.first_index + a, mt.index(b, sp.ntheta))] +=
                        u.y * bs.values[a] * mt.values[b];
        }
    return out;
}

}  // namespace polarfeec

#include "polarfeec/projection.hpp"

#include <cmath>
#include <stdexcept>

#include "polarfeec/quadrature.hpp"

namespace polarfeec {

GeometricDofGrid GeometricDofGrid::from(const TensorDeRham& sp)
{
    return {greville_points(sp.kv_s), greville_points(sp.kv_theta)};
}

KroneckerSolver::KroneckerSolver(const SparseOperator& a_s, const SparseOperator& a_theta)
    : s_(a_s), t_(a_theta)
{
}

void KroneckerSolver::solve_inplace(std::span<double> rhs) const
{
    if (int(rhs.size()) != s_.size() * t_.size())
        throw std::invalid_argument("KroneckerSolver: rhs size mismatch");
    s_.solve_columns(rhs, t_.size());
    t_.solve_rows(rhs, s_.size());
}

namespace {

// split an edge (a,b) at knot lines so fixed Gauss rules stay exact on splines
std::vector<double> edge_cuts(const KnotVector& kv, double a, double b)
{
    std::vector<double> cuts{a};
    if (kv.flavor() == KnotFlavor::periodic) {
        const double dt = kv.length() / kv.num_cells();
        for (int k = int(std::ceil(a / dt)); k * dt < b; ++k)
            if (k * dt > a)
                cuts.push_back(k * dt);
    } else {
        for (double brk : kv.breakpoints())
            if (brk > a && brk < b)
                cuts.push_back(brk);
    }
    cuts.push_back(b);
    return cuts;
}

}  // namespace

GeometricProjector::GeometricProjector(const TensorDeRham& sp)
    : sp_(sp), grid_(GeometricDofGrid::from(sp))
{
    k0_ = KroneckerSolver(interpolation_matrix(sp.kv_s, grid_.zs),
                          interpolation_matrix(sp.kv_theta, grid_.zt));
    k1s_ = KroneckerSolver(histopolation_matrix(sp.kv_s, grid_.zs),
                           interpolation_matrix(sp.kv_theta, grid_.zt));
    k1t_ = KroneckerSolver(interpolation_matrix(sp.kv_s, grid_.zs),
                           histopolation_matrix(sp.kv_theta, grid_.zt));
    k2_ = KroneckerSolver(histopolation_matrix(sp.kv_s, grid_.zs),
                          histopolation_matrix(sp.kv_theta, grid_.zt));

    const GaussRule rule = gauss_legendre(sp.p + 2);
    s_edges_.resize(sp.ns - 1);
    for (int i = 0; i + 1 < sp.ns; ++i) {
        const auto cuts = edge_cuts(sp.kv_s, grid_.zs[i], grid_.zs[i + 1]);
        for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg)
            append_mapped_rule(rule, cuts[seg], cuts[seg + 1], s_edges_[i].x, s_edges_[i].w);
    }
    t_edges_.resize(sp.ntheta);
    for (int j = 0; j < sp.ntheta; ++j) {
        const double a = grid_.zt[j];
        const double b = (j + 1 < sp.ntheta) ? grid_.zt[j + 1] : grid_.zt[0] + 2.0 * M_PI;
        const auto cuts = edge_cuts(sp.kv_theta, a, b);
        for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg)
            append_mapped_rule(rule, cuts[seg], cuts[seg + 1], t_edges_[j].x, t_edges_[j].w);
    }
}

std::vector<double> GeometricProjector::logical_dofs(int level, const ScalarField& f) const
{
    if (level == 0) {
        std::vector<double> dofs(sp_.dim0);
        for (int i = 0; i < sp_.ns; ++i)
            for (int j = 0; j < sp_.ntheta; ++j)
                dofs[sp_.idx0(i, j)] = f(grid_.zs[i], grid_.zt[j]);
        return dofs;
    }
    if (level == 2) {
        std::vector<double> dofs(sp_.dim2);
        for (int i = 0; i + 1 < sp_.ns; ++i)
            for (int j = 0; j < sp_.ntheta; ++j) {
                double v = 0.0;
                for (std::size_t qa = 0; qa < s_edges_[i].x.size(); ++qa)
                    for (std::size_t qb = 0; qb < t_edges_[j].x.size(); ++qb)
                        v += s_edges_[i].w[qa] * t_edges_[j].w[qb] *
                             f(s_edges_[i].x[qa], t_edges_[j].x[qb]);
                dofs[sp_.idx2(i, j)] = v;
            }
        return dofs;
    }
    throw std::invalid_argument("logical_dofs: scalar fields live on level 0 or 2");
}

std::vector<double> GeometricProjector::logical_dofs(const VectorField& f) const
{
    std::vector<double> dofs(sp_.dim1);
    for (int i = 0; i + 1 < sp_.ns; ++i)
        for (int j = 0; j < sp_.ntheta; ++j) {
            double v = 0.0;
            for (std::size_t q = 0; q < s_edges_[i].x.size(); ++q)
                v += s_edges_[i].w[q] * f(s_edges_[i].x[q], grid_.zt[j]).x;
            dofs[sp_.idx1s(i, j)] = v;
        }
    for (int i = 0; i < sp_.ns; ++i)
        for (int j = 0; j < sp_.ntheta; ++j) {
            double v = 0.0;
            for (std::size_t q = 0; q < t_edges_[j].x.size(); ++q)
                v += t_edges_[j].w[q] * f(grid_.zs[i], t_edges_[j].x[q]).y;
            dofs[sp_.idx1t(i, j)] = v;
        }
    return dofs;
}

FieldCoeffs GeometricProjector::solve_dofs(int level, std::vector<double> dofs) const
{
    FieldCoeffs out;
    out.level = level;
    if (level == 0) {
        k0_.solve_inplace(dofs);
    } else if (level == 1) {
        std::span<double> all(dofs);
        k1s_.solve_inplace(all.subspan(0, sp_.dim1s));
        k1t_.solve_inplace(all.subspan(sp_.dim1s));
    } else if (level == 2) {
        k2_.solve_inplace(dofs);
    } else {
        throw std::invalid_argument("solve_dofs: level must be 0, 1 or 2");
    }
    out.data = std::move(dofs);
    return out;
}

FieldCoeffs GeometricProjector::project_logical(int level, const ScalarField& f) const
{
    return solve_dofs(level, logical_dofs(level, f));
}

FieldCoeffs GeometricProjector::project_logical(const VectorField& f) const
{
    return solve_dofs(1, logical_dofs(f));
}

FieldCoeffs GeometricProjector::project_polar(int level, const Mapping& map,
                                              const PhysScalarField& g) const
{
    if (level == 0)
        return project_logical(0, [&](double s, double t) { return pullback0(map, g, s, t); });
    if (level == 2)
        return project_logical(2, [&](double s, double t) { return pullback2(map, g, s, t); });
    throw std::invalid_argument("project_polar: scalar fields live on level 0 or 2");
}

FieldCoeffs GeometricProjector::project_polar(const Mapping& map, const PhysVectorField& g) const
{
    return project_logical([&](double s, double t) { return pullback1(map, g, s, t); });
}

FieldCoeffs GeometricProjector::project_conforming(int level, const ConformingProjector& P,
                                                   const Mapping& map,
                                                   const PhysScalarField& g) const
{
    FieldCoeffs c = project_polar(level, map, g);
    P.apply(c);
    return c;
}

FieldCoeffs GeometricProjector::project_conforming(const ConformingProjector& P,
                                                   const Mapping& map,
                                                   const PhysVectorField& g) const
{
    FieldCoeffs c = project_polar(map, g);
    P.apply(c);
    return c;
}

}  // namespace polarfeec

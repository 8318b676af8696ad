#pragma once

#include <functional>
#include <span>
#include <vector>

#include "polarfeec/conforming.hpp"
#include "polarfeec/derham.hpp"
#include "polarfeec/geometry.hpp"

namespace polarfeec {

using ScalarField = std::function<double(double, double)>;  // logical (s,theta)
using VectorField = std::function<Vec2(double, double)>;
using PhysScalarField = std::function<double(Vec2)>;  // physical x
using PhysVectorField = std::function<Vec2(Vec2)>;

/// Interpolation nodes (Greville points) and the derived edge/cell grid
/// carrying the geometric degrees of freedom.
struct GeometricDofGrid {
    std::vector<double> zs;  // n_s radial nodes, zs[0] = 0, zs[n_s-1] = L
    std::vector<double> zt;  // n_theta angular nodes, increasing in one period

    static GeometricDofGrid from(const TensorDeRham& sp);
};

/// Solves (A_s kron A_theta) vec(C) = rhs for a row-major coefficient block,
/// one factorized univariate solve per axis.
class KroneckerSolver {
public:
    KroneckerSolver() = default;
    KroneckerSolver(const SparseOperator& a_s, const SparseOperator& a_theta);

    void solve_inplace(std::span<double> rhs) const;

private:
    AxisSolver s_, t_;
};

/// Geometric (interpolation/histopolation) projections on the tensor grid:
/// point values at nodes for l=0, tangential edge integrals for l=1, cell
/// integrals for l=2, matched by a spline through Kronecker collocation solves.
class GeometricProjector {
public:
    explicit GeometricProjector(const TensorDeRham& sp);

    const GeometricDofGrid& grid() const { return grid_; }
    const TensorDeRham& space() const { return sp_; }

    std::vector<double> logical_dofs(int level, const ScalarField& f) const;  // level 0 or 2
    std::vector<double> logical_dofs(const VectorField& f) const;             // level 1

    FieldCoeffs project_logical(int level, const ScalarField& f) const;
    FieldCoeffs project_logical(const VectorField& f) const;

    /// coefficients of F^l PiHat^l B^l g for a physical field g
    FieldCoeffs project_polar(int level, const Mapping& map, const PhysScalarField& g) const;
    FieldCoeffs project_polar(const Mapping& map, const PhysVectorField& g) const;

    /// composed conforming-geometric projection P^l_Z PiHat^l_W
    FieldCoeffs project_conforming(int level, const ConformingProjector& P, const Mapping& map,
                                   const PhysScalarField& g) const;
    FieldCoeffs project_conforming(const ConformingProjector& P, const Mapping& map,
                                   const PhysVectorField& g) const;

    /// solve the level's collocation system for an externally computed dof vector
    FieldCoeffs solve_dofs(int level, std::vector<double> dofs) const;

private:
    TensorDeRham sp_;
    GeometricDofGrid grid_;
    KroneckerSolver k0_, k1s_, k1t_, k2_;

    struct EdgeQuad {
        std::vector<double> x, w;
    };
    std::vector<EdgeQuad> s_edges_, t_edges_;
};

}  // namespace polarfeec

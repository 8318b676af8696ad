#pragma once

#include <functional>
#include <span>
#include <vector>

#include "polarfeec/derham.hpp"
#include "polarfeec/geometry.hpp"
#include "polarfeec/projection.hpp"

namespace polarfeec {

/// Tensor Gauss points over the logical knot cells with cached mapping data
/// and univariate basis tables. No point touches the pole line s = 0.
struct QuadratureGrid {
    int nq = 0;  // points per direction per cell
    int ncell_s = 0, ncell_t = 0;

    std::vector<double> sx, sw;  // flattened [cell * nq + q]
    std::vector<double> tx, tw;
    std::vector<SplineBasisEval> s_B, s_M, s_dB, t_B, t_M;
    std::vector<Jacobian> jac;    // [s_point * n_t_points + t_point]
    std::vector<Vec2> phys;       // mapped quadrature points, same layout

    int n_s_points() const { return ncell_s * nq; }
    int n_t_points() const { return ncell_t * nq; }
    const Jacobian& jacobian_at(int qs, int qt) const { return jac[qs * std::size_t(n_t_points()) + qt]; }
    Vec2 point_at(int qs, int qt) const { return phys[qs * std::size_t(n_t_points()) + qt]; }

    /// points_per_dir defaults to p+2, exact on the spline integrands
    static QuadratureGrid build(const TensorDeRham& sp, const Mapping& map, int points_per_dir = 0);
};

/// Physical mass matrix of the pushforward basis at the grid's fixed
/// quadrature. For l = 1,2 the exact integrals diverge at the pole; the
/// assembled entries are finite but only meaningful inside P-sandwiches
/// (see regularized_mass).
SparseOperator mass_matrix(int level, const TensorDeRham& sp, const QuadratureGrid& grid,
                           int n_threads = 1);

/// M~ = P^T M P + (I-P)^T (I-P): SPD, and equal to M on conforming vectors.
SparseOperator regularized_mass(const SparseOperator& M, const SparseOperator& P);

/// Moments <f, T^0_mu> of a physical source against the pushforward basis.
std::vector<double> source_moments0(const TensorDeRham& sp, const QuadratureGrid& grid,
                                    const PhysScalarField& f);
/// Moments <J, T^1_mu> of a physical vector source.
std::vector<double> source_moments1(const TensorDeRham& sp, const QuadratureGrid& grid,
                                    const PhysVectorField& f);

/// Relative L^2 distance ||a-b|| / ||b|| of two fields of the same level,
/// integrated over the mapped domain.
double l2_error(int level, const TensorDeRham& sp, std::span<const double> a,
                std::span<const double> b, const QuadratureGrid& grid);

/// Relative H^1 distance of two level-0 fields; G is the discrete gradient.
double h1_error(const TensorDeRham& sp, std::span<const double> a, std::span<const double> b,
                const QuadratureGrid& grid, const SparseOperator& G);

/// Integral of a level-l field over the mapped domain (l = 0 or 2).
double integrate_field(int level, const TensorDeRham& sp, std::span<const double> coeffs,
                       const QuadratureGrid& grid);

/// Squared L^2 norm of a field of the given level over the mapped domain.
double field_norm_sq(int level, const TensorDeRham& sp, std::span<const double> coeffs,
                     const QuadratureGrid& grid);

}  // namespace polarfeec

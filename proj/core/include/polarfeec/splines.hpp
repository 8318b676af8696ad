#pragma once

#include <array>
#include <span>
#include <vector>

#include "polarfeec/linalg.hpp"

namespace polarfeec {

enum class KnotFlavor { open, periodic };

/// Nonzero basis values at a query point: values[k] belongs to basis function
/// first_index + k (taken modulo the space dimension for periodic flavors).
struct SplineBasisEval {
    int first_index = 0;
    int count = 0;
    std::array<double, 8> values{};

    int index(int k, int dim) const
    {
        int i = (first_index + k) % dim;
        return i < 0 ? i + dim : i;
    }
};

/// Univariate spline space: degree, knot sequence and flavor. Open knots carry
/// p+1-fold repeated endpoints on [0,L]; periodic knots are the regular angles
/// theta_j = 2*pi*j/n extended periodically.
class KnotVector {
public:
    int degree() const { return p_; }
    KnotFlavor flavor() const { return flavor_; }

    /// number of B-splines: N + p (open) or n_theta (periodic)
    int dim() const { return dim_; }
    /// number of M-splines: dim-1 (open) or dim (periodic)
    int mdim() const { return flavor_ == KnotFlavor::open ? dim_ - 1 : dim_; }
    int num_cells() const { return cells_; }
    double length() const { return length_; }  // L or 2*pi

    /// full open knot sequence (open flavor only)
    const std::vector<double>& knots() const { return knots_; }
    /// strictly increasing cell boundaries, first = 0, last = length
    const std::vector<double>& breakpoints() const { return breaks_; }

    /// periodic flavor: n_theta = 4n' with n' >= p (paper resolution assumption);
    /// violations are recorded, not rejected
    bool assumption1_ok() const { return assumption1_ok_; }
    /// weaker condition 4 | n_theta, enough for the discrete trigonometric identities
    bool trigo_ok() const { return trigo_ok_; }

    friend KnotVector make_open_knots(int p, std::span<const double> breakpoints);
    friend KnotVector make_periodic_knots(int p, int n_theta);

private:
    int p_ = 0;
    KnotFlavor flavor_ = KnotFlavor::open;
    int dim_ = 0;
    int cells_ = 0;
    double length_ = 0.0;
    std::vector<double> knots_;
    std::vector<double> breaks_;
    bool assumption1_ok_ = true;
    bool trigo_ok_ = true;
};

KnotVector make_open_knots(int p, std::span<const double> breakpoints);
KnotVector make_periodic_knots(int p, int n_theta);

/// B-spline values at x (p+1 of them); they sum to 1.
SplineBasisEval eval_B(const KnotVector& kv, double x);
/// M-spline values at x (p of them); open M-splines integrate to 1, periodic
/// ones sum to n_theta/(2*pi).
SplineBasisEval eval_M(const KnotVector& kv, double x);
/// B-spline derivatives at x, assembled as B_i' = M_{i-1} - M_i.
SplineBasisEval eval_B_derivative(const KnotVector& kv, double x);

/// Greville abscissae (knot averages); dim() points. Open: zeta_0 = 0 and
/// zeta_{n-1} = L. Periodic: strictly increasing within one period.
std::vector<double> greville_points(const KnotVector& kv);

/// Collocation matrix A[i][j] = B_j(node_i). Banded for open knots,
/// circulant-banded for periodic ones.
SparseOperator interpolation_matrix(const KnotVector& kv, std::span<const double> nodes);

/// Histopolation matrix H[i][j] = integral of M_j over the edge between
/// consecutive nodes (the last edge wraps around for periodic knots).
/// Row count is #nodes-1 (open) or #nodes (periodic).
SparseOperator histopolation_matrix(const KnotVector& kv, std::span<const double> nodes);

}  // namespace polarfeec

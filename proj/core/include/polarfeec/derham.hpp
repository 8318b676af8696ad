#pragma once

#include <vector>

#include "polarfeec/linalg.hpp"
#include "polarfeec/splines.hpp"

namespace polarfeec {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double a) const { return {a * x, a * y}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const;
};

/// Tensor-product spline de Rham triple on the logical annulus [0,L] x [0,2pi):
///   W0 = S_{p,p},  W1 = (S_{p-1,p}, S_{p,p-1}),  W2 = S_{p-1,p-1}.
/// Coefficients are flattened row-major in (i,j) with i the radial index;
/// the ell=1 block order is s-component first, then theta-component.
struct TensorDeRham {
    KnotVector kv_s;      // open, degree p
    KnotVector kv_theta;  // periodic, degree p
    int p = 0;
    int ns = 0;      // dim of the radial B-spline space
    int ntheta = 0;  // dim of the angular space

    int dim0 = 0;
    int dim1s = 0;  // (ns-1)*ntheta
    int dim1 = 0;
    int dim2 = 0;

    int idx0(int i, int j) const { return i * ntheta + j; }
    int idx1s(int i, int j) const { return i * ntheta + j; }
    int idx1t(int i, int j) const { return dim1s + i * ntheta + j; }
    int idx2(int i, int j) const { return i * ntheta + j; }
    int wrap(int j) const
    {
        j %= ntheta;
        return j < 0 ? j + ntheta : j;
    }
};

/// p >= 1; uniform breakpoints, N_s cells on [0,L] and N_theta angular cells.
TensorDeRham build_derham(int p, int Ns, int Ntheta, double L = 1.0);

/// Coefficient array of one de Rham space member.
struct FieldCoeffs {
    int level = 0;
    std::vector<double> data;

    static FieldCoeffs zeros(const TensorDeRham& sp, int level);
};

int space_dim(const TensorDeRham& sp, int level);

/// Discrete gradient, shape dim1 x dim0; exact 0/±1 entries.
SparseOperator grad_matrix(const TensorDeRham& sp);
/// Discrete curl (scalar in 2D), shape dim2 x dim1; exact 0/±1 entries.
SparseOperator curl_matrix(const TensorDeRham& sp);

/// Point value of a level-0 or level-2 spline field in logical variables.
double eval_logical_scalar(const TensorDeRham& sp, const FieldCoeffs& c, double s, double theta);
/// Components of a level-1 field in the (M x B, B x M) tensor bases.
Vec2 eval_logical_vector(const TensorDeRham& sp, const FieldCoeffs& c, double s, double theta);

}  // namespace polarfeec

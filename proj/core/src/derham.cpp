#include "polarfeec/derham.hpp"

#include <cmath>
#include <stdexcept>

namespace polarfeec {

double Vec2::norm() const
{
    return std::sqrt(x * x + y * y);
}

TensorDeRham build_derham(int p, int Ns, int Ntheta, double L)
{
    if (Ns < 1 || L <= 0.0)
        throw std::invalid_argument("build_derham: invalid radial grid");

    TensorDeRham sp;
    sp.p = p;
    std::vector<double> breaks(Ns + 1);
    for (int i = 0; i <= Ns; ++i)
        breaks[i] = L * i / Ns;
    sp.kv_s = make_open_knots(p, breaks);
    sp.kv_theta = make_periodic_knots(p, Ntheta);

    sp.ns = sp.kv_s.dim();
    sp.ntheta = sp.kv_theta.dim();
    sp.dim0 = sp.ns * sp.ntheta;
    sp.dim1s = (sp.ns - 1) * sp.ntheta;
    sp.dim1 = sp.dim1s + sp.ns * sp.ntheta;
    sp.dim2 = (sp.ns - 1) * sp.ntheta;
    return sp;
}

int space_dim(const TensorDeRham& sp, int level)
{
    switch (level) {
        case 0: return sp.dim0;
        case 1: return sp.dim1;
        case 2: return sp.dim2;
    }
    throw std::invalid_argument("space_dim: level must be 0, 1 or 2");
}

FieldCoeffs FieldCoeffs::zeros(const TensorDeRham& sp, int level)
{
    return {level, std::vector<double>(space_dim(sp, level), 0.0)};
}

SparseOperator grad_matrix(const TensorDeRham& sp)
{
    std::vector<Triplet> t;
    t.reserve(std::size_t(4) * sp.dim0);
    for (int i = 0; i < sp.ns; ++i)
        for (int j = 0; j < sp.ntheta; ++j) {
            const int col = sp.idx0(i, j);
            // s-block: (M_{i-1} - M_i) x B_j
            if (i - 1 >= 0)
                t.push_back({sp.idx1s(i - 1, j), col, 1.0});
            if (i < sp.ns - 1)
                t.push_back({sp.idx1s(i, j), col, -1.0});
            // theta-block: B_i x (M_{j-1} - M_j), indices mod ntheta
            t.push_back({sp.idx1t(i, sp.wrap(j - 1)), col, 1.0});
            t.push_back({sp.idx1t(i, j), col, -1.0});
        }
    return SparseOperator::from_triplets(sp.dim1, sp.dim0, std::move(t));
}

SparseOperator curl_matrix(const TensorDeRham& sp)
{
    std::vector<Triplet> t;
    t.reserve(std::size_t(4) * sp.dim1);
    // s-component columns: curl(a M_i x B_j) = -a M_i x (M_{j-1} - M_j)
    for (int i = 0; i < sp.ns - 1; ++i)
        for (int j = 0; j < sp.ntheta; ++j) {
            const int col = sp.idx1s(i, j);
            t.push_back({sp.idx2(i, sp.wrap(j - 1)), col, -1.0});
            t.push_back({sp.idx2(i, j), col, 1.0});
        }
    // theta-component columns: curl(b B_i x M_j) = b (M_{i-1} - M_i) x M_j
    for (int i = 0; i < sp.ns; ++i)
        for (int j = 0; j < sp.ntheta; ++j) {
            const int col = sp.idx1t(i, j);
            if (i - 1 >= 0)
                t.push_back({sp.idx2(i - 1, j), col, 1.0});
            if (i < sp.ns - 1)
                t.push_back({sp.idx2(i, j), col, -1.0});
        }
    return SparseOperator::from_triplets(sp.dim2, sp.dim1, std::move(t));
}

double eval_logical_scalar(const TensorDeRham& sp, const FieldCoeffs& c, double s, double theta)
{
    if (c.level != 0 && c.level != 2)
        throw std::invalid_argument("eval_logical_scalar: level must be 0 or 2");

    if (c.level == 0) {
        const SplineBasisEval bs = eval_B(sp.kv_s, s);
        const SplineBasisEval bt = eval_B(sp.kv_theta, theta);
        double v = 0.0;
        for (int a = 0; a < bs.count; ++a)
            for (int b = 0; b < bt.count; ++b)
                v += c.data[sp.idx0(bs.first_index + a, bt.index(b, sp.ntheta))] * bs.values[a] *
                     bt.values[b];
        return v;
    }
    const SplineBasisEval ms = eval_M(sp.kv_s, s);
    const SplineBasisEval mt = eval_M(sp.kv_theta, theta);
    double v = 0.0;
    for (int a = 0; a < ms.count; ++a)
        for (int b = 0; b < mt.count; ++b)
            v += c.data[sp.idx2(ms.first_index + a, mt.index(b, sp.ntheta))] * ms.values[a] *
                 mt.values[b];
    return v;
}

Vec2 eval_logical_vector(const TensorDeRham& sp, const FieldCoeffs& c, double s, double theta)
{
    if (c.level != 1)
        throw std::invalid_argument("eval_logical_vector: level must be 1");

    const SplineBasisEval bs = eval_B(sp.kv_s, s);
    const SplineBasisEval bt = eval_B(sp.kv_theta, theta);
    const SplineBasisEval ms = eval_M(sp.kv_s, s);
    const SplineBasisEval mt = eval_M(sp.kv_theta, theta);

    Vec2 v;
    for (int a = 0; a < ms.count; ++a)
        for (int b = 0; b < bt.count; ++b)
            v.x += c.data[sp.idx1s(ms.first_index + a, bt.index(b, sp.ntheta))] * ms.values[a] *
                   bt.values[b];
    for (int a = 0; a < bs.count; ++a)
        for (int b = 0; b < mt.count; ++b)
            v.y += c.data[sp.idx1t(bs.first_index + a, mt.index(b, sp.ntheta))] * bs.values[a] *
                   mt.values[b];
    return v;
}

}  // namespace polarfeec

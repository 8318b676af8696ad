#include "polarfeec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace polarfeec {

SparseOperator SparseOperator::from_triplets(int rows, int cols, std::vector<Triplet> triplets,
                                             double drop_tol)
{
    if (rows < 0 || cols < 0)
        throw std::invalid_argument("SparseOperator: negative shape");
    for (const Triplet& t : triplets)
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw std::invalid_argument("SparseOperator: triplet out of range");

    // stable sort keeps insertion order within duplicates, so the summation
    // order (and hence the floating-point result) is reproducible
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseOperator out;
    out.rows_ = rows;
    out.cols_ = cols;
    out.row_ptr_.assign(rows + 1, 0);

    std::size_t i = 0;
    while (i < triplets.size()) {
        const int r = triplets[i].row, c = triplets[i].col;
        double sum = 0.0;
        while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c)
            sum += triplets[i++].value;
        if (drop_tol > 0.0 && std::abs(sum) <= drop_tol)
            continue;
        out.col_idx_.push_back(c);
        out.vals_.push_back(sum);
        out.row_ptr_[r + 1]++;
    }
    for (int r = 0; r < rows; ++r)
        out.row_ptr_[r + 1] += out.row_ptr_[r];
    return out;
}

SparseOperator SparseOperator::identity(int n)
{
    SparseOperator out;
    out.rows_ = out.cols_ = n;
    out.row_ptr_.resize(n + 1);
    out.col_idx_.resize(n);
    out.vals_.assign(n, 1.0);
    for (int i = 0; i <= n; ++i)
        out.row_ptr_[i] = i;
    std::iota(out.col_idx_.begin(), out.col_idx_.end(), 0);
    return out;
}

SparseOperator SparseOperator::from_dense(const DenseMatrix& m, double drop_tol)
{
    std::vector<Triplet> t;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (std::abs(m(i, j)) > drop_tol)
                t.push_back({i, j, m(i, j)});
    return from_triplets(m.rows(), m.cols(), std::move(t));
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const
{
    if (int(x.size()) != cols_ || int(y.size()) != rows_)
        throw std::invalid_argument("SparseOperator::apply: size mismatch");
    for (int r = 0; r < rows_; ++r) {
        double sum = 0.0;
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            sum += vals_[k] * x[col_idx_[k]];
        y[r] = sum;
    }
}

void SparseOperator::apply_transpose(std::span<const double> x, std::span<double> y) const
{
    if (int(x.size()) != rows_ || int(y.size()) != cols_)
        throw std::invalid_argument("SparseOperator::apply_transpose: size mismatch");
    std::fill(y.begin(), y.end(), 0.0);
    for (int r = 0; r < rows_; ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            y[col_idx_[k]] += vals_[k] * x[r];
}

std::vector<double> SparseOperator::apply(std::span<const double> x) const
{
    std::vector<double> y(rows_);
    apply(x, y);
    return y;
}

std::vector<double> SparseOperator::apply_transpose(std::span<const double> x) const
{
    std::vector<double> y(cols_);
    apply_transpose(x, y);
    return y;
}

SparseOperator SparseOperator::transpose() const
{
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (int r = 0; r < rows_; ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            t.push_back({col_idx_[k], r, vals_[k]});
    return from_triplets(cols_, rows_, std::move(t));
}

SparseOperator SparseOperator::multiply(const SparseOperator& other, double drop_tol) const
{
    if (cols_ != other.rows_)
        throw std::invalid_argument("SparseOperator::multiply: shape mismatch");

    std::vector<Triplet> t;
    std::vector<double> acc(other.cols_, 0.0);
    std::vector<int> touched;
    touched.reserve(64);

    for (int r = 0; r < rows_; ++r) {
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            const int mid = col_idx_[k];
            const double v = vals_[k];
            for (int k2 = other.row_ptr_[mid]; k2 < other.row_ptr_[mid + 1]; ++k2) {
                const int c = other.col_idx_[k2];
                if (acc[c] == 0.0)
                    touched.push_back(c);
                acc[c] += v * other.vals_[k2];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (int c : touched) {
            if (drop_tol <= 0.0 || std::abs(acc[c]) > drop_tol)
                t.push_back({r, c, acc[c]});
            acc[c] = 0.0;
        }
        touched.clear();
    }
    return from_triplets(rows_, other.cols_, std::move(t));
}

SparseOperator SparseOperator::add(const SparseOperator& other, double a, double b) const
{
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw std::invalid_argument("SparseOperator::add: shape mismatch");
    std::vector<Triplet> t;
    t.reserve(nnz() + other.nnz());
    for (int r = 0; r < rows_; ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            t.push_back({r, col_idx_[k], a * vals_[k]});
    for (int r = 0; r < other.rows_; ++r)
        for (int k = other.row_ptr_[r]; k < other.row_ptr_[r + 1]; ++k)
            t.push_back({r, other.col_idx_[k], b * other.vals_[k]});
    return from_triplets(rows_, cols_, std::move(t));
}

SparseOperator SparseOperator::scaled(double a) const
{
    SparseOperator out = *this;
    for (double& v : out.vals_)
        v *= a;
    return out;
}

double SparseOperator::coeff(int row, int col) const
{
    for (int k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k)
        if (col_idx_[k] == col)
            return vals_[k];
    return 0.0;
}

double SparseOperator::max_abs() const
{
    double m = 0.0;
    for (double v : vals_)
        m = std::max(m, std::abs(v));
    return m;
}

std::vector<double> SparseOperator::diagonal() const
{
    std::vector<double> d(std::min(rows_, cols_), 0.0);
    for (int r = 0; r < int(d.size()); ++r)
        d[r] = coeff(r, r);
    return d;
}

DenseMatrix SparseOperator::to_dense() const
{
    DenseMatrix m(rows_, cols_);
    for (int r = 0; r < rows_; ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            m(r, col_idx_[k]) += vals_[k];
    return m;
}

void SparseOperator::write_triplets(std::ostream& os) const
{
    char buf[64];
    for (int r = 0; r < rows_; ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", r, col_idx_[k], vals_[k]);
            os << buf;
        }
}

DenseLU::DenseLU(DenseMatrix m) : lu_(std::move(m))
{
    const int n = lu_.rows();
    if (n != lu_.cols())
        throw std::invalid_argument("DenseLU: matrix not square");
    piv_.resize(n);
    std::iota(piv_.begin(), piv_.end(), 0);

    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(lu_(i, k)) > std::abs(lu_(p, k)))
                p = i;
        if (lu_(p, k) == 0.0)
            throw std::runtime_error("DenseLU: singular matrix");
        if (p != k) {
            for (int j = 0; j < n; ++j)
                std::swap(lu_(k, j), lu_(p, j));
            std::swap(piv_[k], piv_[p]);
        }
        const double inv = 1.0 / lu_(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double f = lu_(i, k) * inv;
            lu_(i, k) = f;
            if (f != 0.0)
                for (int j = k + 1; j < n; ++j)
                    lu_(i, j) -= f * lu_(k, j);
        }
    }
}

void DenseLU::solve(std::span<double> x) const
{
    const int n = lu_.rows();
    if (int(x.size()) != n)
        throw std::invalid_argument("DenseLU::solve: size mismatch");
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i)
        b[i] = x[piv_[i]];
    for (int i = 1; i < n; ++i) {
        double s = b[i];
        for (int j = 0; j < i; ++j)
            s -= lu_(i, j) * b[j];
        b[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j)
            s -= lu_(i, j) * b[j];
        b[i] = s / lu_(i, i);
    }
    std::copy(b.begin(), b.end(), x.begin());
}

std::vector<double> DenseLU::solve(std::span<const double> b) const
{
    std::vector<double> x(b.begin(), b.end());
    solve(x);
    return x;
}

BandedLU::BandedLU(const SparseOperator& a, int kl, int ku) : n_(a.rows()), kl_(kl), ku_(ku)
{
    if (a.rows() != a.cols())
        throw std::invalid_argument("BandedLU: matrix not square");
    band_.assign(std::size_t(kl_ + ku_ + 1) * n_, 0.0);
    for (int r = 0; r < n_; ++r)
        for (int k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
            const int c = a.col_idx()[k];
            if (c - r > ku_ || r - c > kl_)
                throw std::invalid_argument("BandedLU: entry outside declared band");
            at(r, c) = a.values()[k];
        }

    // elimination without pivoting; valid for totally positive collocation matrices
    for (int k = 0; k < n_; ++k) {
        const double piv = at(k, k);
        if (std::abs(piv) < 1e-14)
            throw std::runtime_error("BandedLU: vanishing pivot (nodes not admissible)");
        const int imax = std::min(n_ - 1, k + kl_);
        const int jmax = std::min(n_ - 1, k + ku_);
        for (int i = k + 1; i <= imax; ++i) {
            const double f = at(i, k) / piv;
            at(i, k) = f;
            for (int j = k + 1; j <= jmax; ++j)
                at(i, j) -= f * at(k, j);
        }
    }
}

void BandedLU::solve(std::span<double> x) const
{
    if (int(x.size()) != n_)
        throw std::invalid_argument("BandedLU::solve: size mismatch");
    for (int k = 0; k < n_; ++k) {
        const int imax = std::min(n_ - 1, k + kl_);
        for (int i = k + 1; i <= imax; ++i)
            x[i] -= at(i, k) * x[k];
    }
    for (int k = n_ - 1; k >= 0; --k) {
        const int jmax = std::min(n_ - 1, k + ku_);
        double s = x[k];
        for (int j = k + 1; j <= jmax; ++j)
            s -= at(k, j) * x[j];
        x[k] = s / at(k, k);
    }
}

AxisSolver::AxisSolver(const SparseOperator& a) : n_(a.rows())
{
    if (a.rows() != a.cols())
        throw std::invalid_argument("AxisSolver: matrix not square");

    int kl = 0, ku = 0;
    for (int r = 0; r < a.rows(); ++r)
        for (int k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
            const int c = a.col_idx()[k];
            kl = std::max(kl, r - c);
            ku = std::max(ku, c - r);
        }

    // periodic collocation matrices have wrap-around corners -> full bandwidth
    use_band_ = (kl + ku + 1 < n_ / 2);
    if (use_band_)
        band_ = BandedLU(a, kl, ku);
    else
        dense_ = DenseLU(a.to_dense());
}

void AxisSolver::solve(std::span<double> x) const
{
    if (use_band_)
        band_.solve(x);
    else
        dense_.solve(x);
}

void AxisSolver::solve_columns(std::span<double> b, int ncols) const
{
    std::vector<double> col(n_);
    for (int c = 0; c < ncols; ++c) {
        for (int i = 0; i < n_; ++i)
            col[i] = b[std::size_t(i) * ncols + c];
        solve(col);
        for (int i = 0; i < n_; ++i)
            b[std::size_t(i) * ncols + c] = col[i];
    }
}

void AxisSolver::solve_rows(std::span<double> b, int nrows) const
{
    for (int r = 0; r < nrows; ++r)
        solve(b.subspan(std::size_t(r) * n_, n_));
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a)
{
    return std::sqrt(dot(a, a));
}

void axpy(double a, std::span<const double> x, std::span<double> y)
{
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] += a * x[i];
}

CGResult conjugate_gradient(const LinearOp& A, std::span<const double> b, std::span<double> x,
                            double tol, int max_iter, const std::vector<double>* jacobi_diag)
{
    const std::size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), Ap(n);

    A(x, Ap);
    for (std::size_t i = 0; i < n; ++i)
        r[i] = b[i] - Ap[i];

    const double bnorm = norm2(b);
    const double stop = tol * (bnorm > 0.0 ? bnorm : 1.0);

    auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
        if (jacobi_diag)
            for (std::size_t i = 0; i < n; ++i)
                out[i] = in[i] / (*jacobi_diag)[i];
        else
            out = in;
    };

    precond(r, z);
    p = z;
    double rz = dot(r, z);

    CGResult res;
    res.residual = norm2(r);
    if (res.residual <= stop) {
        res.converged = true;
        return res;
    }

    for (int it = 0; it < max_iter; ++it) {
        A(p, Ap);
        const double pAp = dot(p, Ap);
        if (pAp <= 0.0)
            throw std::runtime_error("conjugate_gradient: operator not positive definite");
        const double alpha = rz / pAp;
        axpy(alpha, p, x);
        axpy(-alpha, Ap, r);
        res.iterations = it + 1;
        res.residual = norm2(r);
        if (res.residual <= stop) {
            res.converged = true;
            return res;
        }
        precond(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i)
            p[i] = z[i] + beta * p[i];
    }
    return res;
}

CGResult conjugate_gradient(const SparseOperator& A, std::span<const double> b,
                            std::span<double> x, double tol, int max_iter, bool jacobi)
{
    std::vector<double> diag;
    if (jacobi)
        diag = A.diagonal();
    LinearOp op = [&A](std::span<const double> in, std::span<double> out) { A.apply(in, out); };
    return conjugate_gradient(op, b, x, tol, max_iter, jacobi ? &diag : nullptr);
}

}  // namespace polarfeec

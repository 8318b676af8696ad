#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace polarfeec {

struct Triplet {
    int row;
    int col;
    double value;
};

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(std::size_t(rows) * cols, 0.0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& operator()(int i, int j) { return data_[std::size_t(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[std::size_t(i) * cols_ + j]; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// Immutable sparse matrix in compressed row storage, built from coordinate triplets.
/// Duplicate (row,col) entries are summed in a deterministic order.
class SparseOperator {
public:
    SparseOperator() = default;

    static SparseOperator from_triplets(int rows, int cols, std::vector<Triplet> triplets,
                                        double drop_tol = 0.0);
    static SparseOperator identity(int n);
    static SparseOperator from_dense(const DenseMatrix& m, double drop_tol = 0.0);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t nnz() const { return vals_.size(); }

    void apply(std::span<const double> x, std::span<double> y) const;            // y = A x
    void apply_transpose(std::span<const double> x, std::span<double> y) const;  // y = A^T x
    std::vector<double> apply(std::span<const double> x) const;
    std::vector<double> apply_transpose(std::span<const double> x) const;

    SparseOperator transpose() const;
    SparseOperator multiply(const SparseOperator& other, double drop_tol = 0.0) const;  // A*B
    SparseOperator add(const SparseOperator& other, double a = 1.0, double b = 1.0) const;  // a*A+b*B
    SparseOperator scaled(double a) const;

    double coeff(int row, int col) const;  // 0 if not stored
    double max_abs() const;
    std::vector<double> diagonal() const;
    DenseMatrix to_dense() const;

    /// Coordinate triplet text dump, one "row col value" line per entry,
    /// 17 significant digits (lossless decimal round-trip for doubles).
    void write_triplets(std::ostream& os) const;

    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return vals_; }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<int> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<double> vals_;
};

/// LU factorization with partial pivoting of a dense square matrix.
class DenseLU {
public:
    DenseLU() = default;
    explicit DenseLU(DenseMatrix m);

    void solve(std::span<double> x) const;  // in place
    std::vector<double> solve(std::span<const double> b) const;
    int size() const { return lu_.rows(); }

private:
    DenseMatrix lu_;
    std::vector<int> piv_;
};

/// LU factorization of a banded matrix without pivoting (de Boor BANFAC style).
/// Intended for totally positive spline collocation matrices; a vanishing pivot
/// signals inadmissible interpolation nodes and raises an error.
class BandedLU {
public:
    BandedLU() = default;
    BandedLU(const SparseOperator& a, int kl, int ku);

    void solve(std::span<double> x) const;
    int size() const { return n_; }
    int lower_bandwidth() const { return kl_; }
    int upper_bandwidth() const { return ku_; }

private:
    int n_ = 0, kl_ = 0, ku_ = 0;
    std::vector<double> band_;  // (kl+ku+1) x n, diagonal k stored in row ku+ (i-j)
    double& at(int i, int j) { return band_[std::size_t(kl_ + ku_ + 1) * j + (ku_ + i - j)]; }
    double at(int i, int j) const { return band_[std::size_t(kl_ + ku_ + 1) * j + (ku_ + i - j)]; }
};

/// Factorized solver for one axis of a Kronecker product system. Picks a banded
/// factorization when the matrix has a narrow band, otherwise a dense LU
/// (periodic collocation matrices carry wrap-around corner entries).
class AxisSolver {
public:
    AxisSolver() = default;
    explicit AxisSolver(const SparseOperator& a);

    int size() const { return n_; }
    bool banded() const { return use_band_; }
    void solve(std::span<double> x) const;

    /// Solve A X = B where B is n-by-m row-major (each column an independent rhs).
    void solve_columns(std::span<double> b, int ncols) const;
    /// Solve X A^T = B in place, i.e. apply the inverse along rows of the block.
    void solve_rows(std::span<double> b, int nrows) const;

private:
    int n_ = 0;
    bool use_band_ = false;
    BandedLU band_;
    DenseLU dense_;
};

struct CGResult {
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

using LinearOp = std::function<void(std::span<const double>, std::span<double>)>;

/// Plain conjugate gradients for an SPD operator; `tol` is relative to ||b||.
/// Pass the matrix diagonal to enable Jacobi preconditioning.
CGResult conjugate_gradient(const LinearOp& A, std::span<const double> b, std::span<double> x,
                            double tol, int max_iter,
                            const std::vector<double>* jacobi_diag = nullptr);

CGResult conjugate_gradient(const SparseOperator& A, std::span<const double> b,
                            std::span<double> x, double tol, int max_iter,
                            bool jacobi = false);

// small vector helpers used throughout the solvers
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
void axpy(double a, std::span<const double> x, std::span<double> y);  // y += a*x

}  // namespace polarfeec

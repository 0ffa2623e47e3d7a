#pragma once
// Dense linear algebra kernels used across the analyzer: a cyclic Jacobi
// symmetric eigensolver, Gram-based singular value machinery, rank/nullspace
// splits, and minimum-norm least squares.  Matrices are small (constraint
// counts), so everything is plain row-major storage with O(n^3) algorithms.

#include <cstddef>
#include <vector>

namespace tilt {

using Vec = std::vector<double>;

class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Mat identity(std::size_t n);
    // `cols` disambiguates the width when `rows` is empty.
    static Mat from_rows(const std::vector<Vec>& rows, std::size_t cols);
    static Mat from_cols(const std::vector<Vec>& cols, std::size_t rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Vec row(std::size_t i) const;
    Vec col(std::size_t j) const;
    void set_col(std::size_t j, const Vec& v);
    Mat transposed() const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

Mat operator*(const Mat& a, const Mat& b);
Vec operator*(const Mat& a, const Vec& x);
Mat operator+(const Mat& a, const Mat& b);
Mat scaled(const Mat& a, double alpha);

double dot(const Vec& a, const Vec& b);
double norm(const Vec& v);
double norm1(const Vec& v);
double norm_inf(const Vec& v);
Vec scaled(const Vec& v, double alpha);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
double frobenius_norm(const Mat& a);

struct EigenDecomposition {
    Vec values;   // ascending; ties keep the pre-sort order
    Mat vectors;  // orthonormal columns, vectors.col(i) pairs with values[i]
};

// Cyclic Jacobi sweeps; stops once the off-diagonal Frobenius mass falls
// below 1e-12 * ||S||_F.  Eigenvector columns are sign-normalized so their
// largest-magnitude entry is positive.
EigenDecomposition sym_eig(const Mat& S);

struct MinEigResult {
    double value;
    Vec vector;
};
MinEigResult sym_eig_min(const Mat& S);

struct RankNullspace {
    std::size_t rank;
    Mat nullspace;  // orthonormal columns; rank + nullspace.cols() == cols(A)
};
// Rank decision: a direction counts as null when ||A v|| <= tol * sigma_max.
// Null candidates get one subspace-refinement pass so that ||A N|| stays at
// roundoff level rather than at the Gram-squaring floor.
RankNullspace rank_and_nullspace(const Mat& A, double tol = 1e-10);

// sqrt of the smallest eigenvalue of the smaller Gram matrix (A^T A or A A^T).
// Throws std::invalid_argument when A has no rows or no columns.
double min_singular_value(const Mat& A);

struct LeastSquaresResult {
    Vec solution;  // minimum-norm least-squares solution
    double residualNorm;
    bool unique;  // rank == cols(A)
};
LeastSquaresResult solve_least_squares(const Mat& A, const Vec& b, double tol = 1e-10);

// Square solve via LU with partial pivoting; throws std::runtime_error on a
// numerically singular pivot.
Vec solve_square(const Mat& A, const Vec& b);

}  // namespace tilt

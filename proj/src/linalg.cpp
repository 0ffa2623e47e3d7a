#include "tilt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tilt {

Mat Mat::identity(std::size_t n) {
    Mat I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
}

Mat Mat::from_rows(const std::vector<Vec>& rows, std::size_t cols) {
    Mat m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols)
            throw std::invalid_argument("Mat::from_rows: ragged row lengths");
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

Mat Mat::from_cols(const std::vector<Vec>& cols, std::size_t rows) {
    Mat m(rows, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j].size() != rows)
            throw std::invalid_argument("Mat::from_cols: ragged column lengths");
        for (std::size_t i = 0; i < rows; ++i) m(i, j) = cols[j][i];
    }
    return m;
}

Vec Mat::row(std::size_t i) const {
    Vec r(cols_);
    for (std::size_t j = 0; j < cols_; ++j) r[j] = (*this)(i, j);
    return r;
}

Vec Mat::col(std::size_t j) const {
    Vec c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
}

void Mat::set_col(std::size_t j, const Vec& v) {
    if (v.size() != rows_) throw std::invalid_argument("Mat::set_col: length mismatch");
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Mat Mat::transposed() const {
    Mat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Mat operator*(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("Mat product: shape mismatch");
    Mat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Vec operator*(const Mat& a, const Vec& x) {
    if (a.cols() != x.size()) throw std::invalid_argument("Mat*Vec: shape mismatch");
    Vec y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
    return y;
}

Mat operator+(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("Mat sum: shape mismatch");
    Mat c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
    return c;
}

Mat scaled(const Mat& a, double alpha) {
    Mat c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = alpha * a(i, j);
    return c;
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

double norm1(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

double norm_inf(const Vec& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

Vec scaled(const Vec& v, double alpha) {
    Vec w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = alpha * v[i];
    return w;
}

Vec add(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("add: length mismatch");
    Vec c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
    return c;
}

Vec sub(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("sub: length mismatch");
    Vec c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
    return c;
}

double frobenius_norm(const Mat& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

namespace {

double offdiag_norm(const Mat& a) {
    double s = 0.0;
    for (std::size_t p = 0; p < a.rows(); ++p)
        for (std::size_t q = p + 1; q < a.cols(); ++q) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
}

// Flip the column sign so the first entry of largest magnitude is positive.
void canonicalize_sign(Mat& m, std::size_t j) {
    std::size_t best = 0;
    double bestAbs = -1.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double a = std::abs(m(i, j));
        if (a > bestAbs) {
            bestAbs = a;
            best = i;
        }
    }
    if (m.rows() > 0 && m(best, j) < 0.0)
        for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = -m(i, j);
}

}  // namespace

EigenDecomposition sym_eig(const Mat& S) {
    const std::size_t n = S.rows();
    if (S.cols() != n) throw std::invalid_argument("sym_eig: matrix not square");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(S(i, j) - S(j, i)) > 1e-8 * (1.0 + frobenius_norm(S)))
                throw std::invalid_argument("sym_eig: matrix not symmetric");

    Mat A = S;
    // Symmetrize exactly so sweep updates preserve symmetry bit-for-bit.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (A(i, j) + A(j, i));
            A(i, j) = A(j, i) = v;
        }
    Mat V = Mat::identity(n);
    const double normS = frobenius_norm(A);

    const int maxSweeps = 100;
    for (int sweep = 0; sweep < maxSweeps; ++sweep) {
        if (offdiag_norm(A) <= 1e-12 * normS) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double tau = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const double app = A(p, p), aqq = A(q, q);
                A(p, p) = app - t * apq;
                A(q, q) = aqq + t * apq;
                A(p, q) = A(q, p) = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = A(i, p), aiq = A(i, q);
                    A(i, p) = A(p, i) = c * aip - s * aiq;
                    A(i, q) = A(q, i) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = V(i, p), viq = V(i, q);
                    V(i, p) = c * vip - s * viq;
                    V(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return A(a, a) < A(b, b); });

    EigenDecomposition out;
    out.values.resize(n);
    out.vectors = Mat(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = A(order[k], order[k]);
        out.vectors.set_col(k, V.col(order[k]));
        canonicalize_sign(out.vectors, k);
    }
    return out;
}

MinEigResult sym_eig_min(const Mat& S) {
    if (S.rows() == 0) throw std::invalid_argument("sym_eig_min: empty matrix");
    const EigenDecomposition e = sym_eig(S);
    return {e.values.front(), e.vectors.col(0)};
}

RankNullspace rank_and_nullspace(const Mat& A, double tol) {
    const std::size_t n = A.cols();
    EigenDecomposition gramEig = sym_eig(A.transposed() * A);

    // Direct residual norms are more trustworthy than sqrt(Gram eigenvalue)
    // for directions near the nullspace.
    Vec resid(n, 0.0);
    double sigmaMax = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        resid[k] = norm(A * gramEig.vectors.col(k));
        sigmaMax = std::max(sigmaMax, resid[k]);
    }
    const double threshold = tol * sigmaMax;

    std::vector<std::size_t> nullIdx, rangeIdx;
    for (std::size_t k = 0; k < n; ++k)
        (resid[k] <= threshold ? nullIdx : rangeIdx).push_back(k);

    std::vector<Vec> nullCols;
    nullCols.reserve(nullIdx.size());
    for (std::size_t k : nullIdx) nullCols.push_back(gramEig.vectors.col(k));

    // One refinement pass: remove from each null candidate the component that
    // maps into the numerical range of A, then re-orthonormalize.  This pulls
    // ||A v|| from the Gram-squaring floor (~sqrt(eps)*sigma_max) down to
    // roundoff.
    if (!nullCols.empty() && !rangeIdx.empty()) {
        for (Vec& v : nullCols) {
            Vec av = A * v;
            for (std::size_t k : rangeIdx) {
                const Vec vk = gramEig.vectors.col(k);
                const Vec uk = scaled(A * vk, 1.0 / resid[k]);
                const double coeff = dot(uk, av) / resid[k];
                v = sub(v, scaled(vk, coeff));
            }
        }
        for (std::size_t j = 0; j < nullCols.size(); ++j) {
            for (std::size_t i = 0; i < j; ++i)
                nullCols[j] = sub(nullCols[j], scaled(nullCols[i], dot(nullCols[i], nullCols[j])));
            const double len = norm(nullCols[j]);
            if (len > 0.0) nullCols[j] = scaled(nullCols[j], 1.0 / len);
        }
    }

    Mat N = Mat::from_cols(nullCols, n);
    for (std::size_t j = 0; j < N.cols(); ++j) canonicalize_sign(N, j);
    return {n - nullCols.size(), N};
}

double min_singular_value(const Mat& A) {
    if (A.rows() == 0 || A.cols() == 0)
        throw std::invalid_argument("min_singular_value: empty matrix");
    const Mat gram =
        (A.cols() <= A.rows()) ? A.transposed() * A : A * A.transposed();
    const double lambdaMin = sym_eig_min(gram).value;
    return std::sqrt(std::max(lambdaMin, 0.0));
}

LeastSquaresResult solve_least_squares(const Mat& A, const Vec& b, double tol) {
    if (A.rows() != b.size())
        throw std::invalid_argument("solve_least_squares: rhs length mismatch");
    const std::size_t n = A.cols();
    EigenDecomposition gramEig = sym_eig(A.transposed() * A);

    Vec resid(n, 0.0);
    double sigmaMax = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        resid[k] = norm(A * gramEig.vectors.col(k));
        sigmaMax = std::max(sigmaMax, resid[k]);
    }
    const double threshold = tol * sigmaMax;

    const Vec atb = A.transposed() * b;
    Vec x(n, 0.0);
    std::size_t rank = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (resid[k] <= threshold) continue;
        ++rank;
        const Vec vk = gramEig.vectors.col(k);
        const double coeff = dot(vk, atb) / (resid[k] * resid[k]);
        x = add(x, scaled(vk, coeff));
    }
    return {x, norm(sub(A * x, b)), rank == n};
}

Vec solve_square(const Mat& A, const Vec& b) {
    const std::size_t n = A.rows();
    if (A.cols() != n || b.size() != n)
        throw std::invalid_argument("solve_square: shape mismatch");
    Mat lu = A;
    Vec x = b;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu(i, k)) > std::abs(lu(pivot, k))) pivot = i;
        if (std::abs(lu(pivot, k)) < 1e-14 * (1.0 + frobenius_norm(A)))
            throw std::runtime_error("solve_square: singular matrix");
        if (pivot != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(pivot, j));
            std::swap(x[k], x[pivot]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = lu(i, k) / lu(k, k);
            lu(i, k) = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= m * lu(k, j);
            x[i] -= m * x[k];
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t j = k + 1; j < n; ++j) x[k] -= lu(k, j) * x[j];
        x[k] /= lu(k, k);
    }
    return x;
}

}  // namespace tilt

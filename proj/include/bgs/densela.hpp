#pragma once

// Dense kernels shared by the block Gram-Schmidt variants and the stability
// metrics. Every reduction accumulates in a fixed order, so results are
// bit-reproducible for identical inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "bgs/matrix.hpp"
#include "bgs/precision.hpp"
#include "bgs/random.hpp"

namespace bgs {

enum class Trans { no, yes };

namespace detail {

template <typename T>
index_t op_rows(const Matrix<T>& a, Trans t) {
    return t == Trans::no ? a.rows() : a.cols();
}

template <typename T>
index_t op_cols(const Matrix<T>& a, Trans t) {
    return t == Trans::no ? a.cols() : a.rows();
}

template <typename T>
Matrix<T> gemm_impl(const Matrix<T>& a, const Matrix<T>& b, Trans ta, Trans tb) {
    const index_t m = op_rows(a, ta);
    const index_t k = op_cols(a, ta);
    const index_t n = op_cols(b, tb);
    if (op_rows(b, tb) != k) {
        throw DimensionError("gemm: inner dimensions disagree (" +
                             std::to_string(k) + " vs " +
                             std::to_string(op_rows(b, tb)) + ")");
    }
    Matrix<T> c(m, n);
    auto b_at = [&](index_t l, index_t j) -> T {
        return tb == Trans::no ? b(l, j) : b(j, l);
    };

    if (ta == Trans::no) {
        // c(:, j) accumulates a(:, l) * b(l, j) for l = 0, 1, ..., k-1.
        for (index_t j = 0; j < n; ++j) {
            T* cj = &c(0, j);
            for (index_t l = 0; l < k; ++l) {
                const T blj = b_at(l, j);
                const T* al = &a(0, l);
                for (index_t i = 0; i < m; ++i) {
                    cj[i] += al[i] * blj;
                }
            }
        }
        return c;
    }

    // a is used transposed: c(i, j) is a dot product of column i of a with
    // column j of op(b). Four output entries are carried at once; each one
    // still sums over l in order.
    if (tb == Trans::no) {
        for (index_t i = 0; i < m; ++i) {
            const T* ai = &a(0, i);
            index_t j = 0;
            for (; j + 4 <= n; j += 4) {
                const T* b0 = &b(0, j);
                const T* b1 = &b(0, j + 1);
                const T* b2 = &b(0, j + 2);
                const T* b3 = &b(0, j + 3);
                T s0 = 0, s1 = 0, s2 = 0, s3 = 0;
                for (index_t l = 0; l < k; ++l) {
                    s0 += ai[l] * b0[l];
                    s1 += ai[l] * b1[l];
                    s2 += ai[l] * b2[l];
                    s3 += ai[l] * b3[l];
                }
                c(i, j) = s0;
                c(i, j + 1) = s1;
                c(i, j + 2) = s2;
                c(i, j + 3) = s3;
            }
            for (; j < n; ++j) {
                const T* bj = &b(0, j);
                T s = 0;
                for (index_t l = 0; l < k; ++l) {
                    s += ai[l] * bj[l];
                }
                c(i, j) = s;
            }
        }
        return c;
    }

    for (index_t j = 0; j < n; ++j) {
        for (index_t i = 0; i < m; ++i) {
            T s = 0;
            for (index_t l = 0; l < k; ++l) {
                s += a(l, i) * b(j, l);
            }
            c(i, j) = s;
        }
    }
    return c;
}

/// Sum of squares of x, scaled by its largest magnitude to avoid overflow.
template <typename T>
T scaled_norm2(const T* x, index_t n) {
    T scale = 0;
    for (index_t i = 0; i < n; ++i) {
        scale = std::max(scale, std::abs(x[i]));
    }
    if (scale == T(0)) {
        return T(0);
    }
    T ssq = 0;
    for (index_t i = 0; i < n; ++i) {
        const T v = x[i] / scale;
        ssq += v * v;
    }
    return scale * std::sqrt(ssq);
}

/// Dot product with four interleaved partial sums, combined in a fixed order.
inline double dot4(const double* x, const double* y, index_t n) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    index_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += x[i] * y[i];
        s1 += x[i + 1] * y[i + 1];
        s2 += x[i + 2] * y[i + 2];
        s3 += x[i + 3] * y[i + 3];
    }
    for (; i < n; ++i) {
        s0 += x[i] * y[i];
    }
    return (s0 + s1) + (s2 + s3);
}

/// Reorders the columns of `a` (and their squared norms `d`) by decreasing
/// norm, ties broken by position. Applied before each Jacobi sweep.
inline void sort_columns_by_norm(Matrix<double>& a, std::vector<double>& d) {
    const index_t n = a.cols();
    std::vector<index_t> order(static_cast<std::size_t>(n));
    for (index_t j = 0; j < n; ++j) {
        order[static_cast<std::size_t>(j)] = j;
    }
    std::stable_sort(order.begin(), order.end(), [&](index_t x, index_t y) {
        return d[static_cast<std::size_t>(x)] > d[static_cast<std::size_t>(y)];
    });
    Matrix<double> sorted(a.rows(), n);
    std::vector<double> dsorted(d.size());
    for (index_t j = 0; j < n; ++j) {
        const index_t src = order[static_cast<std::size_t>(j)];
        std::copy_n(&a(0, src), a.rows(), &sorted(0, j));
        dsorted[static_cast<std::size_t>(j)] = d[static_cast<std::size_t>(src)];
    }
    a = std::move(sorted);
    d = std::move(dsorted);
}

/// Householder reflectors stored LAPACK-style: v below the diagonal of
/// `work` (with implicit unit head), beta on the diagonal, tau separately.
template <typename T>
struct Reflectors {
    Matrix<T> work;
    std::vector<T> tau;
};

template <typename T>
Reflectors<T> householder_reflect(Matrix<T> a, bool allow_rank_deficient) {
    const index_t m = a.rows();
    const index_t n = a.cols();
    std::vector<T> tau(static_cast<std::size_t>(n), T(0));
    for (index_t k = 0; k < n; ++k) {
        T* x = &a(k, k);
        const index_t len = m - k;
        const T normx = scaled_norm2(x, len);
        if (normx == T(0)) {
            if (!allow_rank_deficient) {
                throw BreakdownError("householder_qr: column " + std::to_string(k) +
                                     " is exactly dependent on earlier columns");
            }
            continue;
        }
        const T alpha = x[0];
        const T beta = -std::copysign(normx, alpha);
        const T v0 = alpha - beta;
        for (index_t i = 1; i < len; ++i) {
            x[i] /= v0;
        }
        const T t = (beta - alpha) / beta;
        tau[static_cast<std::size_t>(k)] = t;
        x[0] = beta;
        for (index_t j = k + 1; j < n; ++j) {
            T* y = &a(k, j);
            T w = y[0];
            for (index_t i = 1; i < len; ++i) {
                w += x[i] * y[i];
            }
            w *= t;
            y[0] -= w;
            for (index_t i = 1; i < len; ++i) {
                y[i] -= w * x[i];
            }
        }
    }
    return {std::move(a), std::move(tau)};
}

}  // namespace detail

/// op(a) * op(b), summing over the inner index in order.
template <typename T>
Matrix<T> gemm(const Matrix<T>& a, const Matrix<T>& b, Trans ta = Trans::no,
               Trans tb = Trans::no) {
    return detail::gemm_impl(a, b, ta, tb);
}

/// c - op(a) * op(b). The product is formed first, then subtracted.
template <typename T>
Matrix<T> gemm(const Matrix<T>& a, const Matrix<T>& b, Trans ta, Trans tb,
               const Matrix<T>& subtract_from) {
    Matrix<T> prod = detail::gemm_impl(a, b, ta, tb);
    if (prod.rows() != subtract_from.rows() || prod.cols() != subtract_from.cols()) {
        throw DimensionError("gemm: subtract_from has the wrong shape");
    }
    Matrix<T> out = subtract_from;
    for (index_t k = 0; k < out.size(); ++k) {
        out.data()[k] -= prod.data()[k];
    }
    return out;
}

/// Cholesky factor R (upper, positive diagonal) with R^T R = A. Only the upper
/// triangle of A is read.
template <typename T>
UpperTriangular<T> cholesky(const Matrix<T>& a) {
    if (a.rows() != a.cols()) {
        throw DimensionError("cholesky: matrix is not square");
    }
    const index_t n = a.rows();
    Matrix<T> r(n, n);
    for (index_t j = 0; j < n; ++j) {
        const T* rj = &r(0, j);
        T d = a(j, j);
        for (index_t k = 0; k < j; ++k) {
            d -= rj[k] * rj[k];
        }
        if (!(d > T(0))) {
            throw BreakdownError("cholesky: non-positive pivot at index " +
                                 std::to_string(j));
        }
        const T rjj = std::sqrt(d);
        r(j, j) = rjj;
        for (index_t i = j + 1; i < n; ++i) {
            const T* ri = &r(0, i);
            T v = a(j, i);
            for (index_t k = 0; k < j; ++k) {
                v -= rj[k] * ri[k];
            }
            r(j, i) = v / rjj;
        }
    }
    return UpperTriangular<T>(std::move(r));
}

enum class Side {
    left_transposed,  // solve R^T X = B
    right,            // solve X R = B
};

template <typename T>
Matrix<T> solve_upper(const UpperTriangular<T>& r, const Matrix<T>& b, Side side) {
    const index_t n = r.order();
    for (index_t i = 0; i < n; ++i) {
        if (r(i, i) == T(0)) {
            throw BreakdownError("solve_upper: zero diagonal entry at index " +
                                 std::to_string(i));
        }
    }
    if (side == Side::left_transposed) {
        if (b.rows() != n) {
            throw DimensionError("solve_upper: B rows must equal the order of R");
        }
        Matrix<T> x = b;
        for (index_t j = 0; j < x.cols(); ++j) {
            T* xj = &x(0, j);
            for (index_t i = 0; i < n; ++i) {
                T v = xj[i];
                for (index_t k = 0; k < i; ++k) {
                    v -= r(k, i) * xj[k];
                }
                xj[i] = v / r(i, i);
            }
        }
        return x;
    }
    if (b.cols() != n) {
        throw DimensionError("solve_upper: B cols must equal the order of R");
    }
    const index_t m = b.rows();
    Matrix<T> x = b;
    for (index_t j = 0; j < n; ++j) {
        T* xj = &x(0, j);
        for (index_t k = 0; k < j; ++k) {
            const T rkj = r(k, j);
            const T* xk = &x(0, k);
            for (index_t i = 0; i < m; ++i) {
                xj[i] -= xk[i] * rkj;
            }
        }
        const T rjj = r(j, j);
        for (index_t i = 0; i < m; ++i) {
            xj[i] /= rjj;
        }
    }
    return x;
}

template <typename T>
struct QRFactors {
    Matrix<T> q;
    UpperTriangular<T> r;
};

/// Thin Householder QR, X = Q R with Q m x n and diag(R) >= 0.
template <typename T>
QRFactors<T> householder_qr(const Matrix<T>& x) {
    const index_t m = x.rows();
    const index_t n = x.cols();
    if (m < n) {
        throw DimensionError("householder_qr: requires rows >= cols");
    }
    auto [work, tau] = detail::householder_reflect(x, false);

    Matrix<T> q = Matrix<T>::identity(m, n);
    for (index_t k = n - 1; k >= 0; --k) {
        const T t = tau[static_cast<std::size_t>(k)];
        const T* v = &work(k, k);
        const index_t len = m - k;
        for (index_t j = k; j < n; ++j) {
            T* y = &q(k, j);
            T w = y[0];
            for (index_t i = 1; i < len; ++i) {
                w += v[i] * y[i];
            }
            w *= t;
            y[0] -= w;
            for (index_t i = 1; i < len; ++i) {
                y[i] -= w * v[i];
            }
        }
    }

    Matrix<T> r(n, n);
    for (index_t j = 0; j < n; ++j) {
        for (index_t i = 0; i <= j; ++i) {
            r(i, j) = work(i, j);
        }
    }
    for (index_t k = 0; k < n; ++k) {
        if (r(k, k) < T(0)) {
            for (index_t j = k; j < n; ++j) {
                r(k, j) = -r(k, j);
            }
            for (T& v : q.col(k)) {
                v = -v;
            }
        }
    }
    return {std::move(q), UpperTriangular<T>(std::move(r))};
}

inline constexpr int jacobi_max_sweeps = 30;

/// Singular values (descending) by one-sided Jacobi, always computed in
/// binary64. The input is first reduced to its triangular factor R and the
/// rotations act on the columns of R^T, which converges in far fewer sweeps.
template <typename T>
std::vector<double> jacobi_svd(const Matrix<T>& x) {
    if (x.rows() < x.cols()) {
        throw DimensionError("jacobi_svd: requires rows >= cols");
    }
    const index_t n = x.cols();
    auto reflected = detail::householder_reflect(promote<double>(x), true);
    Matrix<double> a(n, n);
    for (index_t j = 0; j < n; ++j) {
        for (index_t i = 0; i <= j; ++i) {
            a(j, i) = reflected.work(i, j);
        }
    }
    const index_t rows = a.rows();
    // Below this relative coupling a computed dot product is rounding noise.
    const double tol = static_cast<double>(rows) * std::numeric_limits<double>::epsilon();

    std::vector<double> d(static_cast<std::size_t>(n));
    bool converged = (n < 2);
    for (int sweep = 0; sweep < jacobi_max_sweeps && !converged; ++sweep) {
        for (index_t j = 0; j < n; ++j) {
            d[static_cast<std::size_t>(j)] = detail::dot4(&a(0, j), &a(0, j), rows);
        }
        detail::sort_columns_by_norm(a, d);
        bool rotated = false;
        for (index_t i = 0; i < n - 1; ++i) {
            for (index_t j = i + 1; j < n; ++j) {
                double& di = d[static_cast<std::size_t>(i)];
                double& dj = d[static_cast<std::size_t>(j)];
                if (di == 0.0 || dj == 0.0) {
                    continue;
                }
                double* ci = &a(0, i);
                double* cj = &a(0, j);
                const double c = detail::dot4(ci, cj, rows);
                if (std::abs(c) <= tol * std::sqrt(di) * std::sqrt(dj)) {
                    continue;
                }
                rotated = true;
                const double zeta = (dj - di) / (2.0 * c);
                const double t =
                    std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (index_t k = 0; k < rows; ++k) {
                    const double u = ci[k];
                    const double v = cj[k];
                    ci[k] = cs * u - sn * v;
                    cj[k] = sn * u + cs * v;
                }
                di -= t * c;
                dj += t * c;
            }
        }
        converged = !rotated;
    }
    if (!converged) {
        throw ConvergenceError("jacobi_svd: no convergence after " +
                               std::to_string(jacobi_max_sweeps) + " sweeps");
    }
    std::vector<double> sigma(static_cast<std::size_t>(n));
    for (index_t j = 0; j < n; ++j) {
        sigma[static_cast<std::size_t>(j)] = detail::scaled_norm2(&a(0, j), rows);
    }
    std::sort(sigma.begin(), sigma.end(), std::greater<>());
    return sigma;
}

/// 2-norm condition number sigma_max / sigma_min; +infinity when singular.
template <typename T>
double cond2(const Matrix<T>& x) {
    const auto sigma = jacobi_svd(x);
    if (sigma.empty() || sigma.front() == 0.0) {
        throw DimensionError("cond2: matrix is identically zero");
    }
    if (sigma.back() == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return sigma.front() / sigma.back();
}

/// Largest singular value, in binary64.
template <typename T>
double two_norm(const Matrix<T>& a) {
    if (a.empty()) {
        return 0.0;
    }
    const auto sigma = a.rows() >= a.cols() ? jacobi_svd(a) : jacobi_svd(a.transposed());
    return sigma.front();
}

/// Frobenius norm in binary64, summing squares in storage order.
template <typename T>
double frobenius_norm(const Matrix<T>& a) {
    double s = 0.0;
    for (index_t k = 0; k < a.size(); ++k) {
        const auto v = static_cast<double>(a.data()[k]);
        s += v * v;
    }
    return std::sqrt(s);
}

/// Orthonormal rows x cols matrix: the Q factor of a seeded Gaussian matrix.
inline Matrix<double> random_orthonormal(index_t rows, index_t cols, std::uint64_t seed) {
    Rng rng(seed);
    return householder_qr(gaussian_matrix(rows, cols, rng)).q;
}

}  // namespace bgs

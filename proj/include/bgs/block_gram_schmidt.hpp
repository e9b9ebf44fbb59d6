#pragma once

// Block classical Gram-Schmidt QR of X = [X_1, ..., X_p], each block m x s:
//
//   bcgs              one projection per block, then IntraOrtho
//   bcgsi_plus        projection + IntraOrtho performed twice, R factors merged
//   bcgsi_plus_ls     low-sync reorthogonalized variant, one fused reduction
//                     per block, CholQR in place of IntraOrtho
//   bcgsi_plus_ls_mp  the same control flow with Gram matrices, Cholesky and
//                     the triangular solves carried in the high precision of
//                     a PrecisionPair
//
// IntraOrtho is Householder QR throughout. Every full-height cross-product
// against the basis and every IntraOrtho call is one synchronization event.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bgs/densela.hpp"
#include "bgs/matrix.hpp"
#include "bgs/precision.hpp"

namespace bgs {

struct BlockPartition {
    index_t m = 0;
    index_t p = 0;
    index_t s = 0;

    index_t n() const noexcept { return p * s; }

    /// Partition of `x` into blocks of width s.
    template <typename T>
    static BlockPartition of(const Matrix<T>& x, index_t s) {
        if (s < 1 || x.cols() % s != 0) {
            throw DimensionError("BlockPartition: column count " +
                                 std::to_string(x.cols()) +
                                 " is not a multiple of block width " + std::to_string(s));
        }
        return {x.rows(), x.cols() / s, s};
    }

    /// Throws DimensionError unless this partition describes x and m >= n.
    template <typename T>
    void check(const Matrix<T>& x) const {
        if (p < 1 || s < 1) {
            throw DimensionError("BlockPartition: p and s must be positive");
        }
        if (x.rows() != m || x.cols() != n()) {
            throw DimensionError("BlockPartition: matrix is " + std::to_string(x.rows()) +
                                 "x" + std::to_string(x.cols()) + ", partition expects " +
                                 std::to_string(m) + "x" + std::to_string(n()));
        }
        if (m < n()) {
            throw DimensionError("BlockPartition: need m >= n");
        }
    }
};

enum class Variant { bcgs, bcgsi_plus, bcgsi_plus_ls, bcgsi_plus_ls_mp };

inline constexpr std::array<Variant, 4> all_variants = {
    Variant::bcgs, Variant::bcgsi_plus, Variant::bcgsi_plus_ls, Variant::bcgsi_plus_ls_mp};

constexpr std::string_view variant_name(Variant v) noexcept {
    switch (v) {
    case Variant::bcgs: return "bcgs";
    case Variant::bcgsi_plus: return "bcgsi+";
    case Variant::bcgsi_plus_ls: return "bcgsi+ls";
    case Variant::bcgsi_plus_ls_mp: return "bcgsi+ls-mp";
    }
    return "?";
}

inline std::optional<Variant> parse_variant(std::string_view name) {
    for (Variant v : all_variants) {
        if (variant_name(v) == name) {
            return v;
        }
    }
    return std::nullopt;
}

/// Number of synchronization events each variant performs for p blocks.
constexpr index_t expected_sync_events(Variant v, index_t p) noexcept {
    switch (v) {
    case Variant::bcgs: return 2 * p - 1;
    case Variant::bcgsi_plus: return 4 * p - 3;
    case Variant::bcgsi_plus_ls:
    case Variant::bcgsi_plus_ls_mp: return p;
    }
    return 0;
}

template <typename T>
struct BlockQR {
    Matrix<T> q;
    UpperTriangular<T> r;
    index_t sync_events = 0;
    Variant variant = Variant::bcgs;
};

class SyncCounter {
public:
    void record() noexcept { ++count_; }
    index_t count() const noexcept { return count_; }

private:
    index_t count_ = 0;
};

/// Householder QR of one panel; one synchronization event.
template <typename T>
QRFactors<T> intra_ortho(const Matrix<T>& x, SyncCounter& sync) {
    sync.record();
    return householder_qr(x);
}

namespace detail {

/// Runs `f`, re-throwing any breakdown tagged with the 1-based block index.
template <typename F>
auto at_block(index_t block, F&& f) {
    try {
        return f();
    } catch (const BreakdownError& e) {
        throw e.at_block(block);
    }
}

template <typename T>
Matrix<T> hconcat(const Matrix<T>& a, const Matrix<T>& b) {
    Matrix<T> out(a.rows(), a.cols() + b.cols());
    out.set_block(0, 0, a);
    out.set_block(0, a.cols(), b);
    return out;
}

template <typename T>
void add_block(Matrix<T>& dst, index_t i0, index_t j0, const Matrix<T>& src) {
    for (index_t j = 0; j < src.cols(); ++j) {
        for (index_t i = 0; i < src.rows(); ++i) {
            dst(i0 + i, j0 + j) += src(i, j);
        }
    }
}

template <typename T>
Matrix<T> symmetrized(const Matrix<T>& g) {
    Matrix<T> out(g.rows(), g.cols());
    for (index_t j = 0; j < g.cols(); ++j) {
        for (index_t i = 0; i < g.rows(); ++i) {
            out(i, j) = (g(i, j) + g(j, i)) / T(2);
        }
    }
    return out;
}

/// Low-sync reorthogonalized BCGS. Working holds X, Q, R and the U update;
/// Gram blocks, Cholesky and the solves run in Compute. With
/// Compute == Working this is the uniform-precision algorithm.
template <typename Working, typename Compute>
BlockQR<Working> low_sync(const Matrix<Working>& x, const BlockPartition& part,
                          Variant variant) {
    part.check(x);
    if (part.p < 2) {
        throw DimensionError("low-sync BCGSI+: needs at least two blocks");
    }
    const index_t m = part.m;
    const index_t s = part.s;
    const index_t p = part.p;
    SyncCounter sync;
    Matrix<Working> q(m, part.n());
    Matrix<Working> r(part.n(), part.n());

    Matrix<Working> u = x.columns(0, s);
    for (index_t k = 2; k <= p; ++k) {
        const index_t done = (k - 2) * s;  // columns of Q already committed
        const Matrix<Working> xk = x.columns((k - 1) * s, s);
        const Matrix<Compute> u_hi = promote<Compute>(u);

        Matrix<Compute> gram;
        Matrix<Compute> proj;
        Matrix<Compute> w;
        Matrix<Compute> q_prev_hi;
        if (k == 2) {
            // [R^T R, P] = U^T [U, X_k]
            const Matrix<Compute> fused =
                gemm(u_hi, hconcat(u_hi, promote<Compute>(xk)), Trans::yes, Trans::no);
            sync.record();
            gram = fused.columns(0, s);
            proj = fused.columns(s, s);
        } else {
            // [W Z; Omega Y] = [Q_{1:k-2}, U]^T [U, X_k]
            q_prev_hi = promote<Compute>(q.columns(0, done));
            const Matrix<Compute> fused =
                gemm(hconcat(q_prev_hi, u_hi), hconcat(u_hi, promote<Compute>(xk)),
                     Trans::yes, Trans::no);
            sync.record();
            w = fused.block(0, 0, done, s);
            const Matrix<Compute> z = fused.block(0, s, done, s);
            const Matrix<Compute> omega = fused.block(done, 0, s, s);
            const Matrix<Compute> y = fused.block(done, s, s, s);
            gram = gemm(w, w, Trans::yes, Trans::no, omega);
            proj = gemm(w, z, Trans::yes, Trans::no, y);

            add_block(r, 0, done, round_to<Working>(w));
            r.set_block(0, done + s, round_to<Working>(z));
        }

        const UpperTriangular<Compute> r_diag =
            at_block(k - 1, [&] { return cholesky(symmetrized(gram)); });
        r.set_block(done, done, round_to<Working>(r_diag.matrix()));
        r.set_block(done, done + s,
                    round_to<Working>(solve_upper(r_diag, proj, Side::left_transposed)));

        const Matrix<Compute> u_deflated =
            k == 2 ? u_hi : gemm(q_prev_hi, w, Trans::no, Trans::no, u_hi);
        q.set_block(0, done,
                    round_to<Working>(at_block(k - 1, [&] {
                        return solve_upper(r_diag, u_deflated, Side::right);
                    })));

        // U = X_k - Q_{1:k-1} R_{1:k-1,k}
        u = gemm(q.columns(0, done + s), r.block(0, done + s, done + s, s), Trans::no,
                 Trans::no, xk);
    }

    // Final block: [W; Omega] = [Q_{1:p-1}, U]^T U, then CholQR of the deflated Gram.
    const index_t done = (p - 1) * s;
    const Matrix<Compute> u_hi = promote<Compute>(u);
    const Matrix<Compute> q_prev_hi = promote<Compute>(q.columns(0, done));
    const Matrix<Compute> fused =
        gemm(hconcat(q_prev_hi, u_hi), u_hi, Trans::yes, Trans::no);
    sync.record();
    const Matrix<Compute> w = fused.block(0, 0, done, s);
    const Matrix<Compute> omega = fused.block(done, 0, s, s);
    const UpperTriangular<Compute> r_last = at_block(p, [&] {
        return cholesky(symmetrized(gemm(w, w, Trans::yes, Trans::no, omega)));
    });
    add_block(r, 0, done, round_to<Working>(w));
    r.set_block(done, done, round_to<Working>(r_last.matrix()));
    const Matrix<Compute> u_deflated = gemm(q_prev_hi, w, Trans::no, Trans::no, u_hi);
    q.set_block(0, done, round_to<Working>(at_block(p, [&] {
                    return solve_upper(r_last, u_deflated, Side::right);
                })));

    return {std::move(q), UpperTriangular<Working>(std::move(r)), sync.count(), variant};
}

}  // namespace detail

template <typename T>
BlockQR<T> bcgs(const Matrix<T>& x, const BlockPartition& part) {
    part.check(x);
    const index_t s = part.s;
    SyncCounter sync;
    Matrix<T> q(part.m, part.n());
    Matrix<T> r(part.n(), part.n());

    auto first = detail::at_block(1, [&] { return intra_ortho(x.columns(0, s), sync); });
    q.set_block(0, 0, first.q);
    r.set_block(0, 0, first.r.matrix());
    for (index_t k = 1; k < part.p; ++k) {
        const index_t done = k * s;
        const Matrix<T> basis = q.columns(0, done);
        const Matrix<T> xk = x.columns(done, s);
        const Matrix<T> coeffs = gemm(basis, xk, Trans::yes, Trans::no);
        sync.record();
        const Matrix<T> w = gemm(basis, coeffs, Trans::no, Trans::no, xk);
        auto diag = detail::at_block(k + 1, [&] { return intra_ortho(w, sync); });
        r.set_block(0, done, coeffs);
        r.set_block(done, done, diag.r.matrix());
        q.set_block(0, done, diag.q);
    }
    return {std::move(q), UpperTriangular<T>(std::move(r)), sync.count(), Variant::bcgs};
}

template <typename T>
BlockQR<T> bcgsi_plus(const Matrix<T>& x, const BlockPartition& part) {
    part.check(x);
    const index_t s = part.s;
    SyncCounter sync;
    Matrix<T> q(part.m, part.n());
    Matrix<T> r(part.n(), part.n());

    auto first = detail::at_block(1, [&] { return intra_ortho(x.columns(0, s), sync); });
    q.set_block(0, 0, first.q);
    r.set_block(0, 0, first.r.matrix());
    for (index_t k = 1; k < part.p; ++k) {
        const index_t done = k * s;
        const Matrix<T> basis = q.columns(0, done);
        const Matrix<T> xk = x.columns(done, s);

        const Matrix<T> r1 = gemm(basis, xk, Trans::yes, Trans::no);
        sync.record();
        const auto pass1 = detail::at_block(k + 1, [&] {
            return intra_ortho(gemm(basis, r1, Trans::no, Trans::no, xk), sync);
        });

        const Matrix<T> r2 = gemm(basis, pass1.q, Trans::yes, Trans::no);
        sync.record();
        const auto pass2 = detail::at_block(k + 1, [&] {
            return intra_ortho(gemm(basis, r2, Trans::no, Trans::no, pass1.q), sync);
        });

        Matrix<T> offdiag = gemm(r2, pass1.r.matrix());
        for (index_t e = 0; e < offdiag.size(); ++e) {
            offdiag.data()[e] = r1.data()[e] + offdiag.data()[e];
        }
        r.set_block(0, done, offdiag);
        r.set_block(done, done, gemm(pass2.r.matrix(), pass1.r.matrix()));
        q.set_block(0, done, pass2.q);
    }
    return {std::move(q), UpperTriangular<T>(std::move(r)), sync.count(),
            Variant::bcgsi_plus};
}

template <typename T>
BlockQR<T> bcgsi_plus_ls(const Matrix<T>& x, const BlockPartition& part) {
    return detail::low_sync<T, T>(x, part, Variant::bcgsi_plus_ls);
}

template <typename Pair>
BlockQR<typename Pair::working_type> bcgsi_plus_ls_mp(
    const Matrix<typename Pair::working_type>& x, const BlockPartition& part) {
    return detail::low_sync<typename Pair::working_type, typename Pair::high_type>(
        x, part, Variant::bcgsi_plus_ls_mp);
}

/// Dispatch by variant tag; the pair supplies the working type and, for the
/// mixed-precision variant, the high type.
template <typename Pair>
BlockQR<typename Pair::working_type> run_variant(
    Variant v, const Matrix<typename Pair::working_type>& x, const BlockPartition& part) {
    using W = typename Pair::working_type;
    switch (v) {
    case Variant::bcgs: return bcgs<W>(x, part);
    case Variant::bcgsi_plus: return bcgsi_plus<W>(x, part);
    case Variant::bcgsi_plus_ls: return bcgsi_plus_ls<W>(x, part);
    case Variant::bcgsi_plus_ls_mp: return bcgsi_plus_ls_mp<Pair>(x, part);
    }
    throw std::invalid_argument("run_variant: unknown variant");
}

/// ||I - Q^T Q||_2, evaluated in binary64.
template <typename T>
double loss_of_orthogonality(const Matrix<T>& q) {
    const Matrix<double> qd = promote<double>(q);
    Matrix<double> e = gemm(qd, qd, Trans::yes, Trans::no, Matrix<double>::identity(q.cols()));
    return two_norm(e);
}

/// ||X - Q R||_F / ||X||_F, evaluated in binary64.
template <typename T>
double qr_residual(const Matrix<T>& x, const Matrix<T>& q, const UpperTriangular<T>& r) {
    const Matrix<double> xd = promote<double>(x);
    const Matrix<double> diff = gemm(promote<double>(q), promote<double>(r.matrix()),
                                     Trans::no, Trans::no, xd);
    const double xnorm = frobenius_norm(xd);
    return xnorm == 0.0 ? frobenius_norm(diff) : frobenius_norm(diff) / xnorm;
}

}  // namespace bgs

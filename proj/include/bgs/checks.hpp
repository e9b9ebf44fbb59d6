#pragma once

// The stability invariant suite behind `bgs check` and the acceptance test.
// Each criterion reduces to a pass/fail verdict plus a one-line detail with
// the worst observed value against its pinned limit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bgs/block_gram_schmidt.hpp"
#include "bgs/densela.hpp"
#include "bgs/harness.hpp"
#include "bgs/precision.hpp"
#include "bgs/random.hpp"
#include "bgs/testmats.hpp"

namespace bgs::checks {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
};

struct CheckOptions {
    unsigned jobs = 1;
    std::string golden_path;  // frozen mini-sweep CSV; empty skips the comparison (fails)
};

inline constexpr double u = F32F64::working_unit_roundoff;

namespace detail {

inline std::string sci(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

/// Tracks the worst ratio observed / limit and how many cases were checked.
class Worst {
public:
    void add(double observed, double limit, const std::string& where) {
        ++count_;
        double ratio = observed / limit;
        if (!(ratio <= 1.0)) {
            ++failures_;
        }
        if (std::isnan(ratio)) {
            ratio = std::numeric_limits<double>::infinity();
        }
        if (count_ == 1 || ratio > ratio_) {
            ratio_ = ratio;
            where_ = where + ": " + sci(observed) + " vs limit " + sci(limit);
        }
    }
    bool ok() const noexcept { return count_ > 0 && failures_ == 0; }
    int count() const noexcept { return count_; }
    std::string summary() const {
        std::ostringstream os;
        os << count_ << " cases, " << failures_ << " over limit";
        if (count_ > 0) {
            os << "; worst " << where_;
        }
        return os.str();
    }

private:
    int count_ = 0;
    int failures_ = 0;
    double ratio_ = 0.0;
    std::string where_;
};

inline std::string label(const harness::StabilityRecord& r) {
    std::ostringstream os;
    os << variant_name(r.variant) << '/' << harness::family_name(r.family)
       << " param=" << r.sweep_param << " kappa=" << sci(r.kappa);
    return os.str();
}

template <typename T>
Matrix<T> random_matrix(index_t rows, index_t cols, Rng& rng) {
    Matrix<T> a(rows, cols);
    for (index_t k = 0; k < a.size(); ++k) {
        a.data()[k] = static_cast<T>(rng.uniform(-1.0, 1.0));
    }
    return a;
}

inline index_t random_index(Rng& rng, index_t lo, index_t hi) {
    return lo + static_cast<index_t>(rng.uniform() * static_cast<double>(hi - lo + 1));
}

/// Elementwise triple loop in binary64 on op(A), op(B).
template <typename T>
Matrix<double> triple_loop(const Matrix<T>& a, const Matrix<T>& b, Trans ta, Trans tb) {
    const index_t m = ta == Trans::no ? a.rows() : a.cols();
    const index_t k = ta == Trans::no ? a.cols() : a.rows();
    const index_t n = tb == Trans::no ? b.cols() : b.rows();
    Matrix<double> c(m, n);
    for (index_t i = 0; i < m; ++i) {
        for (index_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (index_t l = 0; l < k; ++l) {
                const double x = ta == Trans::no ? a(i, l) : a(l, i);
                const double y = tb == Trans::no ? b(l, j) : b(j, l);
                acc += x * y;
            }
            c(i, j) = acc;
        }
    }
    return c;
}

inline double diff_frobenius(const Matrix<double>& a, const Matrix<double>& b) {
    double acc = 0.0;
    for (index_t k = 0; k < a.size(); ++k) {
        const double d = a.data()[k] - b.data()[k];
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace detail

/// Records of the three default sweeps, computed once and shared by 1-5.
struct SweepData {
    std::vector<harness::StabilityRecord> laeuchli, monomial, glued;

    std::vector<const harness::StabilityRecord*> all() const {
        std::vector<const harness::StabilityRecord*> out;
        for (const auto* set : {&laeuchli, &monomial, &glued}) {
            for (const auto& r : *set) {
                out.push_back(&r);
            }
        }
        return out;
    }
};

inline SweepData run_default_sweeps(unsigned jobs) {
    SweepData d;
    harness::SweepSpec spec;
    spec.jobs = jobs;
    spec.points = harness::laeuchli_sweep();
    d.laeuchli = harness::run_sweep(spec);
    spec.points = harness::monomial_sweep();
    d.monomial = harness::run_sweep(spec);
    spec.points = harness::glued_sweep();
    d.glued = harness::run_sweep(spec);
    return d;
}

inline CriterionResult residual_universality(const SweepData& d) {
    detail::Worst w;
    int breakdowns = 0;
    for (const auto* r : d.all()) {
        if (r->breakdown()) {
            ++breakdowns;
            continue;
        }
        w.add(r->residual, 100.0 * static_cast<double>(r->n()) * u, detail::label(*r));
    }
    return {1, "residual universality", w.ok(),
            w.summary() + "; " + std::to_string(breakdowns) + " breakdown rows skipped"};
}

inline CriterionResult bcgsi_plus_orthogonality(const SweepData& d) {
    detail::Worst w;
    for (const auto* r : d.all()) {
        if (r->variant != Variant::bcgsi_plus || !(r->kappa * u < 0.1)) {
            continue;
        }
        // A breakdown here is a failure: NaN never satisfies the bound.
        w.add(r->loo, 100.0 * u, detail::label(*r));
    }
    return {2, "bcgsi+ level-u orthogonality", w.ok(), w.summary()};
}

inline CriterionResult ls_degradation(const SweepData& d) {
    detail::Worst upper;
    double best_excess = 0.0;
    std::string best_where = "none";
    for (const auto& r : d.laeuchli) {
        if (r.variant != Variant::bcgsi_plus_ls || r.breakdown()) {
            continue;
        }
        upper.add(r.loo, 1e3 * u * r.kappa * r.kappa, detail::label(r));
        if (r.kappa >= 1e3) {
            const double excess = r.loo / (u * r.kappa);
            if (excess > best_excess) {
                best_excess = excess;
                best_where = detail::label(r);
            }
        }
    }
    const bool exceeds = best_excess >= 10.0;
    return {3, "bcgsi+ls degradation", upper.ok() && exceeds,
            "(a) loo <= 1e3*u*kappa^2: " + upper.summary() +
                "; (b) max loo/(u*kappa) at kappa >= 1e3 = " + detail::sci(best_excess) +
                " (need >= 10) at " + best_where};
}

inline CriterionResult mp_repair(const SweepData& d) {
    detail::Worst level;
    for (const auto* r : d.all()) {
        if (r->variant == Variant::bcgsi_plus_ls_mp && r->kappa <= 1e5) {
            level.add(r->loo, 100.0 * u, detail::label(*r));
        }
    }
    int compared = 0;
    int violations = 0;
    std::string first_violation;
    std::map<double, std::pair<double, double>> by_point;  // sweep_param -> (ls, mp)
    for (const auto& r : d.laeuchli) {
        if (r.breakdown() || r.kappa < 1e3) {
            continue;
        }
        if (r.variant == Variant::bcgsi_plus_ls) {
            by_point[r.sweep_param].first = r.loo;
        } else if (r.variant == Variant::bcgsi_plus_ls_mp) {
            by_point[r.sweep_param].second = r.loo;
        }
    }
    for (const auto& [param, pair] : by_point) {
        if (pair.first > 0.0 && pair.second > 0.0) {
            ++compared;
            if (!(pair.second <= pair.first)) {
                ++violations;
                if (first_violation.empty()) {
                    first_violation = " (eta=" + detail::sci(param) + ")";
                }
            }
        }
    }
    return {4, "bcgsi+ls-mp repair", level.ok() && violations == 0 && compared > 0,
            "loo <= 100u for kappa <= 1e5: " + level.summary() + "; loo(mp) <= loo(ls) on " +
                std::to_string(compared) + " lauchli points, " +
                std::to_string(violations) + " violations" + first_violation};
}

inline CriterionResult bcgs_instability(const SweepData& d) {
    double best = 0.0;
    std::string where = "none";
    for (const auto& r : d.laeuchli) {
        if (r.variant == Variant::bcgs && !r.breakdown()) {
            const double ratio = r.loo / (u * r.kappa);
            if (ratio > best) {
                best = ratio;
                where = detail::label(r);
            }
        }
    }
    return {5, "bcgs above u*kappa", best > 1.0,
            "max loo/(u*kappa) = " + detail::sci(best) + " (need > 1) at " + where};
}

inline CriterionResult sync_counts(const SweepData& d) {
    int checked = 0;
    std::string mismatch;
    auto expect = [&](Variant v, index_t p, index_t got, const std::string& where) {
        ++checked;
        if (got != expected_sync_events(v, p) && mismatch.empty()) {
            mismatch = where + " got " + std::to_string(got) + ", expected " +
                       std::to_string(expected_sync_events(v, p));
        }
    };
    const index_t s = 4;
    for (index_t p : {2, 3, 10, 50}) {
        const BlockPartition part{p * s + 20, p, s};
        const Matrix<float> x = round_to<float>(testmats::with_singular_values(
            part.m, testmats::log_spectrum(part.n(), 1e2), static_cast<std::uint64_t>(100 + p)));
        for (Variant v : all_variants) {
            const auto qr = run_variant<F32F64>(v, x, part);
            expect(v, p, qr.sync_events,
                   std::string(variant_name(v)) + " p=" + std::to_string(p));
        }
    }
    for (const auto* r : d.all()) {
        if (!r->breakdown()) {
            expect(r->variant, r->p, r->sync_events, detail::label(*r));
        }
    }
    return {6, "sync counts", mismatch.empty(),
            std::to_string(checked) + " runs" +
                (mismatch.empty() ? ", all exact" : "; first mismatch: " + mismatch)};
}

// ---------------------------------------------------------------------------
// Kernel oracle suite

struct KernelReport {
    detail::Worst gemm, cholesky, householder, jacobi, solve;
};

inline KernelReport run_kernel_suite() {
    KernelReport rep;
    Rng rng(20240611);

    // gemm, all transposition flags, against a binary64 triple loop.
    for (int t = 0; t < 400; ++t) {
        const Trans ta = (t & 1) ? Trans::yes : Trans::no;
        const Trans tb = (t & 2) ? Trans::yes : Trans::no;
        const index_t m = detail::random_index(rng, 1, 40);
        const index_t k = detail::random_index(rng, 1, 16);
        const index_t n = detail::random_index(rng, 1, 40);
        const auto a = detail::random_matrix<float>(ta == Trans::no ? m : k,
                                                    ta == Trans::no ? k : m, rng);
        const auto b = detail::random_matrix<float>(tb == Trans::no ? k : n,
                                                    tb == Trans::no ? n : k, rng);
        const Matrix<double> got = promote<double>(gemm(a, b, ta, tb));
        const Matrix<double> want = detail::triple_loop(a, b, ta, tb);
        rep.gemm.add(detail::diff_frobenius(got, want),
                     10.0 * u * frobenius_norm(a) * frobenius_norm(b),
                     "gemm case " + std::to_string(t));
    }

    // Cholesky reconstruction, 1000 SPD instances per precision.
    auto cholesky_case = [&]<typename T>(T, int t) {
        const index_t n = detail::random_index(rng, 1, 50);
        const auto g = detail::random_matrix<T>(n + 5, n, rng);
        Matrix<T> a = gemm(g, g, Trans::yes, Trans::no);
        const UpperTriangular<T> r = cholesky(a);
        const Matrix<double> rd = promote<double>(r.matrix());
        const Matrix<double> rtr = gemm(rd, rd, Trans::yes, Trans::no);
        const Matrix<double> ad = promote<double>(a);
        rep.cholesky.add(detail::diff_frobenius(rtr, ad),
                         10.0 * static_cast<double>(n) * unit_roundoff<T>() * frobenius_norm(ad),
                         std::string(sizeof(T) == 4 ? "f32" : "f64") + " case " +
                             std::to_string(t));
    };
    for (int t = 0; t < 1000; ++t) {
        cholesky_case(float{}, t);
    }
    for (int t = 0; t < 1000; ++t) {
        cholesky_case(double{}, t);
    }

    // Householder QR in binary32, kappa up to 1e6.
    for (int t = 0; t < 100; ++t) {
        const index_t n = detail::random_index(rng, 1, 40);
        const index_t m = n + detail::random_index(rng, 0, 160);
        const double kappa = std::pow(10.0, 6.0 * t / 99.0);
        const Matrix<float> x = round_to<float>(testmats::with_singular_values(
            m, testmats::log_spectrum(n, kappa), 7000 + static_cast<std::uint64_t>(t)));
        const auto qr = householder_qr(x);
        const double limit = 100.0 * static_cast<double>(n) * u;
        rep.householder.add(loss_of_orthogonality(qr.q), limit,
                            "loo case " + std::to_string(t) + " kappa=" + detail::sci(kappa));
        rep.householder.add(qr_residual(x, qr.q, qr.r), limit,
                            "residual case " + std::to_string(t));
    }

    // Jacobi SVD in binary64 on synthetic spectra, kappa up to 1e12.
    for (int t = 0; t < 100; ++t) {
        const index_t n = detail::random_index(rng, 1, 30);
        const index_t m = n + detail::random_index(rng, 0, 70);
        const double kappa = std::pow(10.0, 12.0 * t / 99.0);
        std::vector<double> sigma = testmats::log_spectrum(n, kappa);
        for (double& sv : sigma) {
            sv *= rng.uniform(0.5, 2.0);
        }
        std::sort(sigma.begin(), sigma.end(), std::greater<>());
        const Matrix<double> x =
            testmats::with_singular_values(m, sigma, 9000 + static_cast<std::uint64_t>(t));
        const auto got = jacobi_svd(x);
        double err = 0.0;
        for (std::size_t i = 0; i < sigma.size(); ++i) {
            err = std::max(err, std::abs(got[i] - sigma[i]) / sigma.front());
        }
        rep.jacobi.add(err, 1e-12, "case " + std::to_string(t) + " kappa=" + detail::sci(kappa));
    }

    // Triangular solves in binary32, both sides.
    for (int t = 0; t < 200; ++t) {
        const index_t n = detail::random_index(rng, 1, 50);
        const index_t k = detail::random_index(rng, 1, 20);
        Matrix<float> full(n, n);
        for (index_t j = 0; j < n; ++j) {
            for (index_t i = 0; i < j; ++i) {
                full(i, j) = static_cast<float>(rng.uniform(-1.0, 1.0));
            }
            full(j, j) = static_cast<float>(rng.uniform(1.0, 2.0));
        }
        const UpperTriangular<float> r(full);
        const Matrix<double> rd = promote<double>(r.matrix());
        const bool right = (t % 2) == 0;
        const Matrix<float> b =
            right ? detail::random_matrix<float>(k, n, rng) : detail::random_matrix<float>(n, k, rng);
        const Matrix<float> x = solve_upper(r, b, right ? Side::right : Side::left_transposed);
        const Matrix<double> xd = promote<double>(x);
        const Matrix<double> res = right ? gemm(xd, rd, Trans::no, Trans::no, promote<double>(b))
                                         : gemm(rd, xd, Trans::yes, Trans::no, promote<double>(b));
        rep.solve.add(frobenius_norm(res) / (frobenius_norm(xd) * frobenius_norm(rd)),
                      50.0 * static_cast<double>(n) * u,
                      std::string(right ? "right" : "left_transposed") + " case " +
                          std::to_string(t));
    }
    return rep;
}

inline CriterionResult kernel_oracles() {
    const KernelReport rep = run_kernel_suite();
    const bool ok = rep.gemm.ok() && rep.cholesky.ok() && rep.householder.ok() &&
                    rep.jacobi.ok() && rep.solve.ok();
    return {7, "kernel oracle suite", ok,
            "gemm: " + rep.gemm.summary() + " | cholesky: " + rep.cholesky.summary() +
                " | householder: " + rep.householder.summary() +
                " | jacobi: " + rep.jacobi.summary() + " | solve_upper: " + rep.solve.summary()};
}

// ---------------------------------------------------------------------------
// Determinism

/// Small fixed sweep over all three families; its CSV is frozen as a fixture.
inline harness::SweepSpec mini_sweep_spec() {
    harness::SweepSpec spec;
    harness::FamilyOptions lo;
    lo.m = 60;
    lo.p = 6;
    lo.s = 4;
    lo.eta = {1e-1, 1e-3, 1e-5, 1e-7};
    harness::FamilyOptions mo;
    mo.m = 60;
    mo.n = 24;
    mo.svec = {2, 4, 6, 12};
    mo.seed = 3;
    harness::FamilyOptions go;
    go.m = 60;
    go.p = 6;
    go.s = 4;
    go.svec = {2, 5, 8, 11};
    go.seed = 5;
    for (const auto& pts : {harness::laeuchli_sweep(lo), harness::monomial_sweep(mo),
                            harness::glued_sweep(go)}) {
        spec.points.insert(spec.points.end(), pts.begin(), pts.end());
    }
    return spec;
}

inline CriterionResult determinism(const CheckOptions& opt) {
    harness::SweepSpec spec = mini_sweep_spec();
    spec.jobs = 1;
    const std::string first = harness::to_csv(harness::run_sweep(spec));
    spec.jobs = std::max(2u, opt.jobs);
    const std::string second = harness::to_csv(harness::run_sweep(spec));
    const bool repeat = first == second;

    std::string golden;
    bool have_golden = false;
    if (!opt.golden_path.empty()) {
        std::ifstream in(opt.golden_path, std::ios::binary);
        if (in) {
            std::ostringstream buf;
            buf << in.rdbuf();
            golden = buf.str();
            have_golden = true;
        }
    }
    const bool golden_ok = have_golden && golden == first;
    std::string detail = std::string("repeat run ") + (repeat ? "identical" : "DIFFERS") +
                         " (" + std::to_string(first.size()) + " bytes); golden ";
    if (!have_golden) {
        detail += "fixture missing at '" + opt.golden_path + "'";
    } else {
        detail += golden_ok ? "matches" : "DIFFERS";
    }
    return {8, "determinism", repeat && golden_ok, detail};
}

// ---------------------------------------------------------------------------
// Oracle equivalence

/// ||Q Q^T - Qh Qh^T||_2 in binary64.
inline double projector_distance(const Matrix<double>& q, const Matrix<double>& qh) {
    const Matrix<double> pq = gemm(q, q, Trans::no, Trans::yes);
    const Matrix<double> diff = gemm(qh, qh, Trans::no, Trans::yes, pq);
    return two_norm(diff);
}

inline CriterionResult oracle_equivalence() {
    detail::Worst w;
    const BlockPartition part{120, 6, 4};
    for (int t = 0; t < 20; ++t) {
        const double target = std::pow(10.0, 1.0 + 1.5 * t / 19.0);  // 10 .. 10^2.5
        const Matrix<float> x = round_to<float>(testmats::with_singular_values(
            part.m, testmats::log_spectrum(part.n(), target), 500 + static_cast<std::uint64_t>(t)));
        const double kappa = cond2(x);
        if (kappa > 1e3) {
            w.add(kappa, 1e3, "instance " + std::to_string(t) + " kappa");
            continue;
        }
        const Matrix<double> qh = householder_qr(promote<double>(x)).q;
        for (Variant v : all_variants) {
            const auto qr = run_variant<F32F64>(v, x, part);
            w.add(projector_distance(promote<double>(qr.q), qh), 1e3 * kappa * u,
                  std::string(variant_name(v)) + " instance " + std::to_string(t) +
                      " kappa=" + detail::sci(kappa));
        }
    }
    return {9, "oracle equivalence", w.ok(), w.summary()};
}

// ---------------------------------------------------------------------------

/// Runs criteria 1-9 in order. Breakdowns and thrown errors inside a
/// criterion count as failures of that criterion only.
inline std::vector<CriterionResult> run_all(const CheckOptions& opt) {
    std::vector<CriterionResult> out;
    auto guarded = [&](int id, const char* name, const std::function<CriterionResult()>& f) {
        try {
            out.push_back(f());
        } catch (const std::exception& e) {
            out.push_back({id, name, false, std::string("threw: ") + e.what()});
        }
    };
    SweepData data;
    bool sweeps_ok = true;
    std::string sweep_error;
    try {
        data = run_default_sweeps(opt.jobs);
    } catch (const std::exception& e) {
        sweeps_ok = false;
        sweep_error = e.what();
    }
    auto from_sweeps = [&](int id, const char* name,
                           CriterionResult (*f)(const SweepData&)) {
        if (!sweeps_ok) {
            out.push_back({id, name, false, "default sweeps failed: " + sweep_error});
            return;
        }
        guarded(id, name, [&] { return f(data); });
    };
    from_sweeps(1, "residual universality", residual_universality);
    from_sweeps(2, "bcgsi+ level-u orthogonality", bcgsi_plus_orthogonality);
    from_sweeps(3, "bcgsi+ls degradation", ls_degradation);
    from_sweeps(4, "bcgsi+ls-mp repair", mp_repair);
    from_sweeps(5, "bcgs above u*kappa", bcgs_instability);
    from_sweeps(6, "sync counts", sync_counts);
    guarded(7, "kernel oracle suite", kernel_oracles);
    guarded(8, "determinism", [&] { return determinism(opt); });
    guarded(9, "oracle equivalence", oracle_equivalence);
    return out;
}

}  // namespace bgs::checks

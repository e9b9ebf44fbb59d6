#pragma once

// Condition-number sweeps: generate a family of matrices, factor each with
// the requested variants, and record kappa, loss of orthogonality, residual
// and synchronization count per (point, variant).

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "bgs/block_gram_schmidt.hpp"
#include "bgs/densela.hpp"
#include "bgs/precision.hpp"
#include "bgs/testmats.hpp"

namespace bgs::harness {

enum class Family { laeuchli, monomial, glued };

constexpr std::string_view family_name(Family f) noexcept {
    switch (f) {
    case Family::laeuchli: return "laeuchli";
    case Family::monomial: return "monomial";
    case Family::glued: return "glued";
    }
    return "?";
}

inline std::optional<Family> parse_family(std::string_view name) {
    for (Family f : {Family::laeuchli, Family::monomial, Family::glued}) {
        if (family_name(f) == name) {
            return f;
        }
    }
    return std::nullopt;
}

using FamilyParams =
    std::variant<testmats::LaeuchliParams, testmats::MonomialParams, testmats::GluedParams>;

/// One matrix of a sweep. `sweep_param` is what the CSV reports: eta for
/// Lauchli, s for monomial, c1 + c2 for glued.
struct SweepPoint {
    FamilyParams params;
    double sweep_param = 0.0;
};

inline Family family_of(const FamilyParams& prm) {
    return static_cast<Family>(prm.index());
}

template <typename T>
Matrix<T> generate(const FamilyParams& prm) {
    return std::visit(
        [](const auto& p) -> Matrix<T> {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, testmats::LaeuchliParams>) {
                return testmats::laeuchli<T>(p);
            } else if constexpr (std::is_same_v<P, testmats::MonomialParams>) {
                return testmats::monomial<T>(p);
            } else {
                return testmats::glued<T>(p);
            }
        },
        prm);
}

struct Shape {
    index_t m, p, s;
    std::uint64_t seed;
};

inline Shape shape_of(const FamilyParams& prm) {
    return std::visit(
        [](const auto& p) -> Shape {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, testmats::LaeuchliParams>) {
                return {p.m, p.p, p.s, 0};
            } else {
                return {p.m, p.p, p.s, p.seed};
            }
        },
        prm);
}

struct StabilityRecord {
    Variant variant = Variant::bcgs;
    Family family = Family::laeuchli;
    double sweep_param = 0.0;
    double kappa = 1.0;
    double loo = 0.0;       // NaN on breakdown
    double residual = 0.0;  // NaN on breakdown
    index_t sync_events = 0;
    index_t m = 0, p = 0, s = 0;
    std::uint64_t seed = 0;
    std::optional<index_t> breakdown_block;

    bool breakdown() const noexcept { return breakdown_block.has_value(); }
    index_t n() const noexcept { return p * s; }

    friend bool operator==(const StabilityRecord& a, const StabilityRecord& b) {
        auto same = [](double x, double y) {
            return (std::isnan(x) && std::isnan(y)) || x == y;
        };
        return a.variant == b.variant && a.family == b.family &&
               same(a.sweep_param, b.sweep_param) && same(a.kappa, b.kappa) &&
               same(a.loo, b.loo) && same(a.residual, b.residual) &&
               a.sync_events == b.sync_events && a.m == b.m && a.p == b.p && a.s == b.s &&
               a.seed == b.seed && a.breakdown_block == b.breakdown_block;
    }
};

struct SweepSpec {
    std::vector<SweepPoint> points;
    std::vector<Variant> variants{all_variants.begin(), all_variants.end()};
    std::string precision{F32F64::name};
    std::string out_path;  // empty: caller decides where records go
    unsigned jobs = 1;
};

/// (u * kappa, u * kappa^2): the plotted O(u)kappa and O(u)kappa^2 lines.
constexpr std::pair<double, double> reference_bounds(double kappa, double u) noexcept {
    return {u * kappa, u * kappa * kappa};
}

namespace detail {

template <typename Pair>
std::vector<StabilityRecord> run_point(const SweepPoint& point,
                                       const std::vector<Variant>& variants) {
    using W = typename Pair::working_type;
    const Matrix<W> x = generate<W>(point.params);
    const Shape shape = shape_of(point.params);
    const BlockPartition part{shape.m, shape.p, shape.s};
    const double kappa = cond2(x);

    std::vector<StabilityRecord> out;
    out.reserve(variants.size());
    for (Variant v : variants) {
        StabilityRecord rec;
        rec.variant = v;
        rec.family = family_of(point.params);
        rec.sweep_param = point.sweep_param;
        rec.kappa = kappa;
        rec.m = shape.m;
        rec.p = shape.p;
        rec.s = shape.s;
        rec.seed = shape.seed;
        try {
            const BlockQR<W> qr = run_variant<Pair>(v, x, part);
            rec.loo = loss_of_orthogonality(qr.q);
            rec.residual = qr_residual(x, qr.q, qr.r);
            rec.sync_events = qr.sync_events;
        } catch (const BreakdownError& e) {
            rec.loo = std::numeric_limits<double>::quiet_NaN();
            rec.residual = std::numeric_limits<double>::quiet_NaN();
            rec.sync_events = 0;
            rec.breakdown_block = e.block();
        }
        out.push_back(rec);
    }
    return out;
}

}  // namespace detail

/// Runs every (point, variant) pair. Breakdowns become flagged records.
/// Output order is point order, then variant order, for any `jobs` value.
inline std::vector<StabilityRecord> run_sweep(const SweepSpec& spec) {
    if (spec.points.empty() || spec.variants.empty()) {
        throw std::invalid_argument("run_sweep: need at least one point and one variant");
    }
    if (spec.precision != F32F64::name) {
        throw std::invalid_argument("run_sweep: unsupported precision pair '" +
                                    spec.precision + "' (supported: f32f64)");
    }
    std::vector<std::vector<StabilityRecord>> per_point(spec.points.size());
    const unsigned jobs = std::max(1u, std::min<unsigned>(
                                           spec.jobs, static_cast<unsigned>(spec.points.size())));
    if (jobs == 1) {
        for (std::size_t i = 0; i < spec.points.size(); ++i) {
            per_point[i] = detail::run_point<F32F64>(spec.points[i], spec.variants);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(jobs);
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t i = next++; i < spec.points.size(); i = next++) {
                        per_point[i] = detail::run_point<F32F64>(spec.points[i], spec.variants);
                    }
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
        for (const auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }
    std::vector<StabilityRecord> records;
    for (auto& pr : per_point) {
        records.insert(records.end(), pr.begin(), pr.end());
    }
    return records;
}

// ---------------------------------------------------------------------------
// Default sweeps

/// logspace(first, last, count) in base 10.
inline std::vector<double> logspace(double first, double last, int count) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out.push_back(std::pow(10.0, first + (last - first) * t));
    }
    return out;
}

/// Optional overrides for building a sweep from command-line style flags.
struct FamilyOptions {
    std::optional<index_t> m, p, s, n;
    std::vector<double> eta;    // Lauchli sweep values
    std::vector<double> svec;   // monomial block widths / glued knob values
    std::optional<double> c1, c2;
    std::uint64_t seed = 1;
};

/// Lauchli [1000, 100, 5] over eta = logspace(-1, -8, 10).
inline std::vector<SweepPoint> laeuchli_sweep(const FamilyOptions& o = {}) {
    const auto etas = o.eta.empty() ? logspace(-1.0, -8.0, 10) : o.eta;
    std::vector<SweepPoint> pts;
    for (double eta : etas) {
        pts.push_back({testmats::LaeuchliParams{o.m.value_or(1000), o.p.value_or(100),
                                                o.s.value_or(5), eta},
                       eta});
    }
    return pts;
}

/// Monomial with n = 240 columns split into blocks of width s = 2, 4, ..., 12.
/// With explicit --p and --s (and no svec list), a single point.
inline std::vector<SweepPoint> monomial_sweep(const FamilyOptions& o = {}) {
    const index_t m = o.m.value_or(1000);
    std::vector<SweepPoint> pts;
    if (o.svec.empty() && o.p && o.s) {
        pts.push_back({testmats::MonomialParams{m, *o.p, *o.s, o.seed},
                       static_cast<double>(*o.s)});
        return pts;
    }
    const index_t n = o.n.value_or(240);
    const std::vector<double> widths =
        o.svec.empty() ? std::vector<double>{2, 4, 6, 8, 10, 12} : o.svec;
    for (double w : widths) {
        const auto s = static_cast<index_t>(w);
        if (s < 1 || static_cast<double>(s) != w || n % s != 0) {
            throw std::invalid_argument("monomial sweep: block width " + std::to_string(w) +
                                        " does not divide n = " + std::to_string(n));
        }
        pts.push_back({testmats::MonomialParams{m, n / s, s, o.seed}, w});
    }
    return pts;
}

/// Glued [1000, 50, 4] over svec = 1..12 with (c1, c2) = (svec/2, svec/2).
/// With explicit --c1/--c2 (and no svec list), a single point.
inline std::vector<SweepPoint> glued_sweep(const FamilyOptions& o = {}) {
    const index_t m = o.m.value_or(1000);
    const index_t p = o.p.value_or(50);
    const index_t s = o.s.value_or(4);
    std::vector<SweepPoint> pts;
    if (o.svec.empty() && (o.c1 || o.c2)) {
        const double c1 = o.c1.value_or(0.0);
        const double c2 = o.c2.value_or(0.0);
        pts.push_back({testmats::GluedParams{m, p, s, c1, c2, o.seed}, c1 + c2});
        return pts;
    }
    std::vector<double> knobs = o.svec;
    if (knobs.empty()) {
        for (int v = 1; v <= 12; ++v) {
            knobs.push_back(v);
        }
    }
    for (double v : knobs) {
        pts.push_back({testmats::GluedParams{m, p, s, v / 2.0, v / 2.0, o.seed}, v});
    }
    return pts;
}

inline std::vector<SweepPoint> family_sweep(Family f, const FamilyOptions& o = {}) {
    switch (f) {
    case Family::laeuchli: return laeuchli_sweep(o);
    case Family::monomial: return monomial_sweep(o);
    case Family::glued: return glued_sweep(o);
    }
    throw std::invalid_argument("family_sweep: unknown family");
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view csv_header =
    "variant,family,sweep_param,kappa,loo,residual,sync_events,m,p,s,seed,"
    "bound_u_kappa,bound_u_kappa2";

/// Shortest decimal that round-trips; "NaN", "inf" and "-inf" for non-finite.
inline std::string format_real(double v) {
    if (std::isnan(v)) {
        return "NaN";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline void write_csv(const std::vector<StabilityRecord>& records, std::ostream& os,
                      double u = F32F64::working_unit_roundoff) {
    bool with_note = false;
    for (const auto& r : records) {
        with_note = with_note || r.breakdown();
    }
    os << csv_header << (with_note ? ",note" : "") << '\n';
    for (const auto& r : records) {
        const auto [b1, b2] = reference_bounds(r.kappa, u);
        os << variant_name(r.variant) << ',' << family_name(r.family) << ','
           << format_real(r.sweep_param) << ',' << format_real(r.kappa) << ','
           << format_real(r.loo) << ',' << format_real(r.residual) << ',' << r.sync_events
           << ',' << r.m << ',' << r.p << ',' << r.s << ',' << r.seed << ','
           << format_real(b1) << ',' << format_real(b2);
        if (with_note) {
            os << ',';
            if (r.breakdown()) {
                os << "breakdown_block=" << *r.breakdown_block;
            }
        }
        os << '\n';
    }
}

inline std::string to_csv(const std::vector<StabilityRecord>& records) {
    std::ostringstream os;
    write_csv(records, os);
    return os.str();
}

/// Writes the CSV file; failures name the path.
inline void emit_csv(const std::vector<StabilityRecord>& records, const std::string& path) {
    if (records.empty()) {
        throw std::invalid_argument("emit_csv: no records to write");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("emit_csv: cannot open '" + path + "' for writing");
    }
    write_csv(records, out);
    out.flush();
    if (!out) {
        throw std::runtime_error("emit_csv: write to '" + path + "' failed");
    }
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

inline double parse_real(std::string_view f) {
    double v = 0.0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        // from_chars rejects a leading '+' but accepts nan/inf spellings.
        throw std::runtime_error("csv: bad number '" + std::string(f) + "'");
    }
    return v;
}

template <typename I>
I parse_int(std::string_view f) {
    I v{};
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw std::runtime_error("csv: bad integer '" + std::string(f) + "'");
    }
    return v;
}

}  // namespace detail

inline std::vector<StabilityRecord> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw std::runtime_error("csv: empty input");
    }
    const bool with_note = line == std::string(csv_header) + ",note";
    if (!with_note && line != csv_header) {
        throw std::runtime_error("csv: unexpected header");
    }
    const std::size_t nfields = with_note ? 14 : 13;
    std::vector<StabilityRecord> records;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = detail::split(line, ',');
        if (f.size() != nfields) {
            throw std::runtime_error("csv: expected " + std::to_string(nfields) +
                                     " fields, got " + std::to_string(f.size()));
        }
        StabilityRecord r;
        const auto v = parse_variant(f[0]);
        const auto fam = parse_family(f[1]);
        if (!v || !fam) {
            throw std::runtime_error("csv: unknown variant or family in '" + line + "'");
        }
        r.variant = *v;
        r.family = *fam;
        r.sweep_param = detail::parse_real(f[2]);
        r.kappa = detail::parse_real(f[3]);
        r.loo = detail::parse_real(f[4]);
        r.residual = detail::parse_real(f[5]);
        r.sync_events = detail::parse_int<index_t>(f[6]);
        r.m = detail::parse_int<index_t>(f[7]);
        r.p = detail::parse_int<index_t>(f[8]);
        r.s = detail::parse_int<index_t>(f[9]);
        r.seed = detail::parse_int<std::uint64_t>(f[10]);
        if (with_note && !f[13].empty()) {
            constexpr std::string_view key = "breakdown_block=";
            if (f[13].substr(0, key.size()) != key) {
                throw std::runtime_error("csv: unknown note '" + std::string(f[13]) + "'");
            }
            r.breakdown_block = detail::parse_int<index_t>(f[13].substr(key.size()));
        }
        records.push_back(r);
    }
    return records;
}

// ---------------------------------------------------------------------------
// Plain matrix files: one row per line, comma-separated.

template <typename T>
void write_matrix_csv(const Matrix<T>& a, std::ostream& os) {
    char buf[64];
    for (index_t i = 0; i < a.rows(); ++i) {
        for (index_t j = 0; j < a.cols(); ++j) {
            const auto res = std::to_chars(buf, buf + sizeof buf, a(i, j));
            os << (j ? "," : "") << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
        os << '\n';
    }
}

template <typename T>
Matrix<T> read_matrix_csv(std::istream& is) {
    std::vector<std::vector<T>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<T> row;
        for (auto f : detail::split(line, ',')) {
            T v{};
            const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
                throw std::runtime_error("matrix csv: bad entry '" + std::string(f) + "'");
            }
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw std::runtime_error("matrix csv: ragged rows");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw std::runtime_error("matrix csv: no rows");
    }
    Matrix<T> a(static_cast<index_t>(rows.size()), static_cast<index_t>(rows.front().size()));
    for (index_t i = 0; i < a.rows(); ++i) {
        for (index_t j = 0; j < a.cols(); ++j) {
            a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    return a;
}

}  // namespace bgs::harness

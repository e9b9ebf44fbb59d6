#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bgs/checks.hpp"
#include "bgs/harness.hpp"
#include "support.hpp"

using namespace bgs;
using namespace bgs::harness;
using test::u32;

namespace {

std::size_t count_fields(const std::string& line) {
    return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);) {
        out.push_back(line);
    }
    return out;
}

}  // namespace

TEST(ReferenceBounds, Examples) {
    const auto [a, b] = reference_bounds(1.0, u32);
    EXPECT_EQ(a, u32);
    EXPECT_EQ(b, u32);
    const auto [c, d] = reference_bounds(1e4, 6e-8);
    EXPECT_NEAR(c, 6e-4, 1e-18);
    EXPECT_NEAR(d, 6.0, 1e-12);
    for (double kappa : {1.0, 3.5, 1e3, 2.7e9}) {
        const auto [b1, b2] = reference_bounds(kappa, u32);
        EXPECT_NEAR(b2 / b1, kappa, 1e-15 * kappa);
    }
}

TEST(DefaultSweeps, Shapes) {
    const auto la = laeuchli_sweep();
    ASSERT_EQ(la.size(), 10u);
    EXPECT_NEAR(la.front().sweep_param, 1e-1, 1e-16);
    EXPECT_NEAR(la.back().sweep_param, 1e-8, 1e-22);
    const auto lp = std::get<testmats::LaeuchliParams>(la.front().params);
    EXPECT_EQ(lp.m, 1000);
    EXPECT_EQ(lp.p, 100);
    EXPECT_EQ(lp.s, 5);

    const auto mo = monomial_sweep();
    ASSERT_EQ(mo.size(), 6u);
    for (const auto& pt : mo) {
        const auto mp = std::get<testmats::MonomialParams>(pt.params);
        EXPECT_EQ(mp.p * mp.s, 240);
        EXPECT_EQ(pt.sweep_param, static_cast<double>(mp.s));
    }

    const auto gl = glued_sweep();
    ASSERT_EQ(gl.size(), 12u);
    const auto gp = std::get<testmats::GluedParams>(gl[5].params);
    EXPECT_EQ(gp.c1, 3.0);
    EXPECT_EQ(gp.c2, 3.0);
    EXPECT_EQ(gl[5].sweep_param, 6.0);
}

TEST(DefaultSweeps, MonomialRejectsNonDividingWidth) {
    FamilyOptions o;
    o.svec = {7};
    EXPECT_THROW(monomial_sweep(o), std::invalid_argument);
}

TEST(RunSweep, WellConditionedPointAllVariants) {
    SweepSpec spec;
    spec.points = {{testmats::LaeuchliParams{61, 3, 4, 0.5}, 0.5}};  // kappa ~ 7
    const auto recs = run_sweep(spec);
    ASSERT_EQ(recs.size(), 4u);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        EXPECT_EQ(recs[i].variant, all_variants[i]);
        EXPECT_FALSE(recs[i].breakdown());
        EXPECT_LE(recs[i].loo, 100 * u32);
        EXPECT_LE(recs[i].residual, 100 * 12 * u32);
        EXPECT_EQ(recs[i].sync_events, expected_sync_events(recs[i].variant, 3));
    }
}

TEST(RunSweep, LauchliKappaIncreasesAndCountsMatch) {
    FamilyOptions o;
    o.m = 101;
    o.p = 20;
    o.s = 5;
    SweepSpec spec;
    spec.points = laeuchli_sweep(o);
    const auto recs = run_sweep(spec);
    ASSERT_EQ(recs.size(), 40u);
    for (std::size_t i = 4; i < recs.size(); i += 4) {
        EXPECT_GT(recs[i].kappa, recs[i - 4].kappa);
    }
    // BCGS at the smallest completed eta sits above the u*kappa line.
    bool above = false;
    for (const auto& r : recs) {
        if (r.variant == Variant::bcgs && !r.breakdown() && r.loo > u32 * r.kappa) {
            above = true;
        }
    }
    EXPECT_TRUE(above);
}

TEST(RunSweep, BreakdownsAreRecordedNotThrown) {
    SweepSpec spec;
    spec.points = {{testmats::LaeuchliParams{101, 20, 5, 1e-7}, 1e-7}};
    spec.variants = {Variant::bcgsi_plus_ls};
    const auto recs = run_sweep(spec);
    ASSERT_EQ(recs.size(), 1u);
    ASSERT_TRUE(recs[0].breakdown());
    EXPECT_GE(*recs[0].breakdown_block, 1);
    EXPECT_TRUE(std::isnan(recs[0].loo));
    EXPECT_TRUE(std::isnan(recs[0].residual));
    EXPECT_EQ(recs[0].sync_events, 0);
}

TEST(RunSweep, ParallelOrderMatchesSerial) {
    SweepSpec spec = checks::mini_sweep_spec();
    spec.jobs = 1;
    const auto serial = run_sweep(spec);
    spec.jobs = 4;
    EXPECT_EQ(run_sweep(spec), serial);
}

TEST(RunSweep, RejectsEmptySpecAndUnknownPrecision) {
    SweepSpec spec;
    EXPECT_THROW(run_sweep(spec), std::invalid_argument);
    spec.points = laeuchli_sweep();
    spec.variants.clear();
    EXPECT_THROW(run_sweep(spec), std::invalid_argument);
    spec.variants = {Variant::bcgs};
    spec.precision = "f64f128";
    EXPECT_THROW(run_sweep(spec), std::invalid_argument);
}

TEST(Csv, OneRecordIsTwoLinesOfThirteenFields) {
    StabilityRecord r;
    r.variant = Variant::bcgsi_plus;
    r.family = Family::glued;
    r.sweep_param = 3;
    r.kappa = 1234.5;
    r.loo = 1.25e-7;
    r.residual = 3e-8;
    r.sync_events = 17;
    r.m = 100;
    r.p = 5;
    r.s = 4;
    r.seed = 9;
    const auto lines = lines_of(to_csv({r}));
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[0], csv_header);
    EXPECT_EQ(count_fields(lines[0]), 13u);
    EXPECT_EQ(count_fields(lines[1]), 13u);
    EXPECT_EQ(lines[1].substr(0, 24), "bcgsi+,glued,3,1234.5,1.");
}

TEST(Csv, BreakdownAddsNoteColumn) {
    StabilityRecord ok;
    StabilityRecord broken;
    broken.variant = Variant::bcgsi_plus_ls;
    broken.loo = std::nan("");
    broken.residual = std::nan("");
    broken.breakdown_block = 7;
    const auto lines = lines_of(to_csv({ok, broken}));
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0], std::string(csv_header) + ",note");
    EXPECT_EQ(count_fields(lines[1]), 14u);
    EXPECT_EQ(lines[1].back(), ',');
    EXPECT_NE(lines[2].find(",NaN,NaN,"), std::string::npos);
    EXPECT_EQ(lines[2].substr(lines[2].rfind(',') + 1), "breakdown_block=7");
}

TEST(Csv, RoundTripIsExact) {
    SweepSpec spec = checks::mini_sweep_spec();
    const auto recs = run_sweep(spec);
    std::istringstream is(to_csv(recs));
    EXPECT_EQ(read_csv(is), recs);
}

TEST(Csv, NumbersAreShortestRoundTrip) {
    EXPECT_EQ(format_real(0.1), "0.1");
    EXPECT_EQ(format_real(1e-8), "1e-08");
    EXPECT_EQ(format_real(std::nan("")), "NaN");
    EXPECT_EQ(format_real(HUGE_VAL), "inf");
    const double v = 0.1 + 0.2;
    EXPECT_EQ(std::stod(format_real(v)), v);
}

TEST(Csv, IdenticalRecordsGiveIdenticalBytes) {
    SweepSpec spec = checks::mini_sweep_spec();
    EXPECT_EQ(to_csv(run_sweep(spec)), to_csv(run_sweep(spec)));
}

TEST(Csv, EmitReportsPathOnFailure) {
    StabilityRecord r;
    try {
        emit_csv({r}, "/nonexistent-dir/out.csv");
        FAIL() << "expected an I/O error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/out.csv"), std::string::npos);
    }
    EXPECT_THROW(emit_csv({}, "unused.csv"), std::invalid_argument);
}

TEST(Csv, EmitWritesFile) {
    const auto path = std::filesystem::temp_directory_path() / "bgs_emit_test.csv";
    StabilityRecord r;
    emit_csv({r}, path.string());
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    EXPECT_EQ(buf.str(), to_csv({r}));
    std::filesystem::remove(path);
}

TEST(Csv, RejectsMalformedInput) {
    std::istringstream bad_header("a,b,c\n");
    EXPECT_THROW(read_csv(bad_header), std::runtime_error);
    std::istringstream short_row(std::string(csv_header) + "\nbcgs,glued,1\n");
    EXPECT_THROW(read_csv(short_row), std::runtime_error);
}

TEST(MatrixCsv, RoundTrip) {
    const auto x = test::uniform_matrix<float>(5, 3, 4);
    std::stringstream ss;
    write_matrix_csv(x, ss);
    EXPECT_EQ(read_matrix_csv<float>(ss), x);
    std::istringstream ragged("1,2\n3\n");
    EXPECT_THROW(read_matrix_csv<float>(ragged), std::runtime_error);
}

TEST(Families, NamesRoundTrip) {
    for (Family f : {Family::laeuchli, Family::monomial, Family::glued}) {
        EXPECT_EQ(parse_family(family_name(f)), f);
    }
    EXPECT_FALSE(parse_family("stewart").has_value());
}

#include <gtest/gtest.h>

#include <cmath>

#include "bgs/densela.hpp"
#include "bgs/testmats.hpp"
#include "support.hpp"

using namespace bgs;
using namespace bgs::testmats;

TEST(Laeuchli, SmallExampleExact) {
    const auto x = laeuchli<double>({3, 2, 1, 0.5});
    EXPECT_EQ(x, (Matrix<double>{{1, 1}, {0.5, 0}, {0, 0.5}}));
}

TEST(Laeuchli, EntriesAreOneEtaOrZero) {
    const LaeuchliParams prm{50, 8, 5, 1e-3};
    const auto x = laeuchli<float>(prm);
    const float eta = static_cast<float>(prm.eta);
    ASSERT_EQ(x.rows(), 50);
    ASSERT_EQ(x.cols(), 40);
    for (index_t j = 0; j < x.cols(); ++j) {
        for (index_t i = 0; i < x.rows(); ++i) {
            const float want = i == 0 ? 1.0f : (i == j + 1 ? eta : 0.0f);
            EXPECT_EQ(x(i, j), want);
        }
    }
}

TEST(Laeuchli, GramStructure) {
    const auto x = laeuchli<double>({30, 5, 4, 0.25});
    const auto g = gemm(x, x, Trans::yes, Trans::no);
    for (index_t i = 0; i < 20; ++i) {
        for (index_t j = 0; j < 20; ++j) {
            EXPECT_EQ(g(i, j), i == j ? 1.0 + 0.0625 : 1.0);
        }
    }
}

TEST(Laeuchli, ConditionMatchesClosedForm) {
    // Singular values are eta (n - 1 times) and sqrt(n + eta^2), so
    // kappa = sqrt(n + eta^2) / eta with eta the stored binary32 value.
    for (double eta : {1e-1, 1e-3, 1e-5}) {
        const LaeuchliParams prm{520, 100, 5, eta};
        const auto x = laeuchli<float>(prm);
        const double ef = static_cast<float>(eta);
        const double want = std::sqrt(500.0 + ef * ef) / ef;
        EXPECT_NEAR(cond2(x) / want, 1.0, 1e-10) << "eta " << eta;
    }
    EXPECT_GT(cond2(laeuchli<float>({520, 100, 5, 1e-3})), 1e3);
}

TEST(Laeuchli, InvalidParameters) {
    EXPECT_THROW(laeuchli<float>({10, 2, 5, 0.1}), DimensionError);
    EXPECT_THROW(laeuchli<float>({11, 2, 5, 0.0}), std::invalid_argument);
    EXPECT_THROW(laeuchli<float>({11, 2, 5, 1.0}), std::invalid_argument);
    EXPECT_NO_THROW(laeuchli<float>({11, 2, 5, 0.5}));
}

TEST(Monomial, SpectrumEvenlySpacedInsideInterval) {
    const auto lambda = monomial_spectrum(1000);
    EXPECT_NEAR(lambda.front(), 0.1 + 0.5 * 9.9 / 1000, 1e-15);
    EXPECT_NEAR(lambda.back(), 10.0 - 0.5 * 9.9 / 1000, 1e-13);
    for (std::size_t i = 1; i < lambda.size(); ++i) {
        EXPECT_NEAR(lambda[i] - lambda[i - 1], 9.9 / 1000, 1e-13);
    }
}

TEST(Monomial, KrylovBlocksFromDefinition) {
    const MonomialParams prm{40, 3, 4, 9};
    const auto x = monomial<float>(prm);
    const auto lambda = monomial_spectrum(40);
    // Rebuild the generator's vectors independently: uniform, normalized, powers.
    Rng rng(9);
    for (index_t k = 0; k < 3; ++k) {
        std::vector<double> v(40);
        double nrm = 0.0;
        for (double& e : v) {
            e = rng.uniform();
            nrm += e * e;
        }
        for (double& e : v) {
            e /= std::sqrt(nrm);
        }
        for (index_t j = 0; j < 4; ++j) {
            for (index_t i = 0; i < 40; ++i) {
                const double want = v[static_cast<std::size_t>(i)] *
                                    std::pow(lambda[static_cast<std::size_t>(i)], j);
                EXPECT_NEAR(x(i, k * 4 + j), want, 2 * test::u32 * std::abs(want) + 1e-30);
            }
        }
    }
}

TEST(Monomial, SingleColumnBlocksHaveUnitNorm) {
    const auto x = monomial<float>({100, 10, 1, 2});
    for (index_t j = 0; j < 10; ++j) {
        double s = 0.0;
        for (float v : x.col(j)) {
            s += static_cast<double>(v) * v;
        }
        EXPECT_NEAR(std::sqrt(s), 1.0, 1e-6);
    }
}

TEST(Monomial, DeterministicPerSeed) {
    EXPECT_EQ(monomial<float>({50, 4, 3, 7}), monomial<float>({50, 4, 3, 7}));
    EXPECT_FALSE(monomial<float>({50, 4, 3, 7}) == monomial<float>({50, 4, 3, 8}));
}

TEST(Monomial, ConditionGrowsWithBlockWidth) {
    const double k2 = cond2(monomial<float>({1000, 120, 2, 1}));
    const double k6 = cond2(monomial<float>({1000, 40, 6, 1}));
    const double k12 = cond2(monomial<float>({1000, 20, 12, 1}));
    EXPECT_LT(k2, k6);
    EXPECT_LT(k6, k12);
}

TEST(Monomial, TooManyColumnsThrows) {
    EXPECT_THROW(monomial<float>({10, 3, 4, 1}), DimensionError);
}

TEST(Glued, FlatBaseWithNegligibleGapIsPerfectlyConditioned) {
    // c1 = 0 makes B = U V^T orthonormal; a 1e-14 gap leaves X = B to ~1e-14.
    const auto x = glued<double>({60, 1, 4, 0.0, 14.0, 3});
    EXPECT_NEAR(cond2(x), 1.0, 1e-10);
}

TEST(Glued, BlocksAreScaledNearCopies) {
    const GluedParams prm{80, 3, 2, 1.0, 4.0, 6};
    const auto x = glued<double>(prm);
    // Block b is 10^(-c2 b / (p - 1)) times (B + 1e-4 N_b): rescaled blocks
    // agree with block 0 to within twice the gap.
    for (index_t b = 1; b < 3; ++b) {
        const double scale = std::pow(10.0, prm.c2 * b / 2.0);
        double diff = 0.0;
        for (index_t j = 0; j < 2; ++j) {
            for (index_t i = 0; i < 80; ++i) {
                diff += std::pow(x(i, b * 2 + j) * scale - x(i, j), 2);
            }
        }
        EXPECT_LE(std::sqrt(diff), 2e-4 * (1 + 1e-12));
        EXPECT_GT(std::sqrt(diff), 1e-6);
    }
}

TEST(Glued, DeterministicPerSeed) {
    const GluedParams prm{100, 5, 4, 2, 2, 11};
    EXPECT_EQ(glued<float>(prm), glued<float>(prm));
    GluedParams other = prm;
    other.seed = 12;
    EXPECT_FALSE(glued<float>(prm) == glued<float>(other));
}

TEST(Glued, ConditionRisesOverKnobSweep) {
    double previous = 0.0;
    double first = 0.0;
    for (int svec = 1; svec <= 12; ++svec) {
        const double kappa =
            cond2(glued<float>({1000, 50, 4, svec / 2.0, svec / 2.0, 1}));
        if (svec == 1) {
            first = kappa;
        }
        EXPECT_GT(kappa, previous) << "svec " << svec;
        previous = kappa;
    }
    EXPECT_GE(std::log10(previous / first), 6.0);
}

TEST(Glued, InvalidParameters) {
    EXPECT_THROW(glued<float>({10, 3, 4, 1, 1, 1}), DimensionError);
    EXPECT_THROW(glued<float>({100, 3, 4, -1, 1, 1}), std::invalid_argument);
}

TEST(SyntheticSpectrum, HasRequestedSingularValues) {
    const auto sigma = log_spectrum(10, 1e6);
    EXPECT_EQ(sigma.front(), 1.0);
    EXPECT_NEAR(sigma.back(), 1e-6, 1e-20);
    const auto x = with_singular_values(50, sigma, 4);
    const auto got = jacobi_svd(x);
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        EXPECT_NEAR(got[i], sigma[i], 1e-13);
    }
}

TEST(Generators, PartitionShape) {
    EXPECT_EQ(laeuchli<float>({101, 20, 5, 0.1}).cols(), 100);
    EXPECT_EQ(monomial<float>({100, 20, 5, 1}).cols(), 100);
    EXPECT_EQ(glued<float>({100, 20, 5, 1, 1, 1}).cols(), 100);
}

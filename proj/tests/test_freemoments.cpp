#include <boost/multiprecision/cpp_int.hpp>

#include "freebe/freemoments.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace freebe;
using boost::multiprecision::cpp_rational;

TEST(FreeMoments, CumulantsOfCatalanMoments) {
    const auto k = cumulants_from_moments(MomentSequence{{0, 1, 0, 2, 0, 5}});
    const std::vector<double> expected{0, 1, 0, 0, 0, 0};
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(k.k[i], expected[i], 1e-14);
}

TEST(FreeMoments, CumulantsOfBernoulli) {
    const auto k = cumulants_from_moments(MomentSequence{{0, 1, 0, 1, 0, 1}});
    const std::vector<double> expected{0, 1, 0, -1, 0, 2};
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(k.k[i], expected[i], 1e-14);
}

TEST(FreeMoments, ZeroSequences) {
    for (double v : cumulants_from_moments(MomentSequence{std::vector<double>(8, 0.0)}).k) EXPECT_EQ(v, 0.0);
    for (double v : moments_from_cumulants(CumulantSequence{std::vector<double>(8, 0.0)}).m) EXPECT_EQ(v, 0.0);
}

TEST(FreeMoments, MomentsFromCumulantsExamples) {
    std::vector<double> k(12, 0.0);
    k[1] = 1.0;
    const auto m = moments_from_cumulants(CumulantSequence{k});
    EXPECT_DOUBLE_EQ(m.m[3], 2.0);
    EXPECT_DOUBLE_EQ(m.m[5], 5.0);
    EXPECT_DOUBLE_EQ(m.m[11], 132.0);
    for (double n : {1.0, 4.0, 64.0}) {
        const auto mb = moments_from_cumulants(CumulantSequence{{0.0, 1.0, 0.0, -1.0 / n}});
        EXPECT_NEAR(mb.m[3], 2.0 - 1.0 / n, 1e-15);
    }
}

TEST(FreeMoments, RationalRoundTripOrder16) {
    // Moments of an arbitrary rational law-like sequence and of cumulant-defined ones.
    std::vector<cpp_rational> m;
    for (int i = 1; i <= 16; ++i) m.emplace_back(cpp_rational(i * i + 3, 7 + i) * (i % 3 == 0 ? -1 : 1));
    const auto k = cumulants_from_moments_t<cpp_rational>(m);
    const auto back = moments_from_cumulants_t<cpp_rational>(k);
    ASSERT_EQ(back.size(), m.size());
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(back[i], m[i]) << "order " << i + 1;

    std::vector<cpp_rational> kk;
    for (int i = 1; i <= 16; ++i) kk.emplace_back(cpp_rational(1, i + 1) - cpp_rational(i % 2, 3));
    const auto mm = moments_from_cumulants_t<cpp_rational>(kk);
    const auto kback = cumulants_from_moments_t<cpp_rational>(mm);
    for (std::size_t i = 0; i < kk.size(); ++i) EXPECT_EQ(kback[i], kk[i]);
}

TEST(FreeMoments, RationalCatalanMoments) {
    std::vector<cpp_rational> k(16, cpp_rational(0));
    k[1] = 1;
    const auto m = moments_from_cumulants_t<cpp_rational>(k);
    // Catalan numbers by the binomial formula.
    for (int j = 1; j <= 8; ++j) {
        cpp_rational c = 1;
        for (int i = 2; i <= j; ++i) c = c * (j + i) / i;
        EXPECT_EQ(m[static_cast<std::size_t>(2 * j - 1)], c);
        EXPECT_EQ(m[static_cast<std::size_t>(2 * j - 2)], 0);
    }
}

TEST(FreeMoments, CltCumulantScaling) {
    auto f = FreeFamilySpec::independent({ScalarLaw::two_atom()});
    const auto k1 = f.base_cumulants(0, 6);
    EXPECT_EQ(clt_cumulants(f, 1).base_cumulants(0, 6), k1);
    for (long n : {4L, 9L, 100L}) {
        const auto kn = clt_cumulants(f, n).base_cumulants(0, 6);
        EXPECT_NEAR(kn[1], k1[1], 1e-15);
        EXPECT_NEAR(kn[2], k1[2] / std::sqrt(static_cast<double>(n)), 1e-14);
        EXPECT_NEAR(kn[3], k1[3] / static_cast<double>(n), 1e-14);
    }
}

TEST(FreeMoments, JointMomentExamples) {
    auto f = FreeFamilySpec::independent({ScalarLaw::semicircular(), ScalarLaw::semicircular()});
    EXPECT_NEAR(joint_moment(f, {0, 0}), 1.0, 1e-15);
    EXPECT_NEAR(joint_moment(f, {0, 1}), 0.0, 1e-15);
    EXPECT_NEAR(joint_moment(f, {0, 1, 0, 1}), 0.0, 1e-15);
    EXPECT_NEAR(joint_moment(f, {0, 0, 1, 1}), 1.0, 1e-15);
}

TEST(FreeMoments, JointMomentOrderExceeded) {
    auto f = FreeFamilySpec::independent({ScalarLaw::from_moments({0.0, 1.0, 0.0, 2.0})});
    EXPECT_ERROR_KIND(joint_moment(f, Word(5, 0)), ErrorKind::OrderExceeded);
}

TEST(FreeMoments, JointMomentMatchesBruteForce) {
    RMatrix mix(3, 3);
    mix << 1.0, 0.5, 0.0, -0.3, 1.0, 0.2, 0.0, 0.7, 1.0;
    auto f = FreeFamilySpec::mixed({ScalarLaw::two_atom(), ScalarLaw::bernoulli(), ScalarLaw::semicircular(0.5)}, mix);
    for (int j = 1; j <= 6; ++j) {
        const auto nc = oracle::noncrossing_partitions(j);
        Word w(static_cast<std::size_t>(j), 0);
        while (true) {
            EXPECT_NEAR(joint_moment(f, w), oracle::brute_force_moment(f, w, nc), 1e-11);
            int pos = j - 1;
            while (pos >= 0 && w[static_cast<std::size_t>(pos)] == 2) w[static_cast<std::size_t>(pos--)] = 0;
            if (pos < 0) break;
            ++w[static_cast<std::size_t>(pos)];
        }
    }
}

TEST(FreeMoments, ReversalSymmetryAndCentering) {
    RMatrix mix(2, 2);
    mix << 1.0, 0.4, 0.2, 1.0;
    auto f = FreeFamilySpec::mixed({ScalarLaw::two_atom(), ScalarLaw::bernoulli()}, mix);
    const Word w{0, 1, 1, 0, 1};
    Word r(w.rbegin(), w.rend());
    EXPECT_NEAR(joint_moment(f, w), joint_moment(f, r), 1e-13);
    for (long n : {1L, 5L, 50L}) {
        const auto fn = clt_cumulants(f, n);
        EXPECT_NEAR(joint_moment(fn, {0}), 0.0, 1e-15);
        EXPECT_NEAR(joint_moment(fn, {1}), 0.0, 1e-15);
    }
}

TEST(FreeMoments, FourthMomentDeviationIsExactlyOrderOneOverN) {
    auto f = FreeFamilySpec::independent({ScalarLaw::two_atom()});
    const double var = f.covariance()(0, 0);
    const double limit = 2.0 * var * var;
    std::vector<double> scaled;
    for (long n : {2L, 4L, 8L, 16L}) scaled.push_back((joint_moment(clt_cumulants(f, n), {0, 0, 0, 0}) - limit) * n);
    for (double s : scaled) EXPECT_NEAR(s, scaled.front(), 1e-12);
}

TEST(FreeMoments, NormEstimates) {
    const auto sc = ScalarLaw::semicircular().moments(12);
    const double e = norm_upper_estimate(sc, 1.1);
    EXPECT_GE(e, 1.86);
    EXPECT_LE(e, 2.2);
    EXPECT_NEAR(norm_upper_estimate(ScalarLaw::bernoulli().moments(12), 1.0), 1.0, 1e-12);
    EXPECT_EQ(norm_upper_estimate(MomentSequence{std::vector<double>(8, 0.0)}, 1.1), 0.0);
}

TEST(FreeMoments, LawValidation) {
    EXPECT_ERROR_KIND(ScalarLaw::semicircular(-1.0), ErrorKind::InvalidParams);
    EXPECT_ERROR_KIND(ScalarLaw::from_moments({0.5, 1.0}), ErrorKind::InvalidParams);
    EXPECT_ERROR_KIND(ScalarLaw::two_atom(1.0, 2.0, 0.5), ErrorKind::InvalidParams);
}

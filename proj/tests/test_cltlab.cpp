#include <random>

#include "freebe/cltlab.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace freebe;

namespace {

CMatrix scalar(cplx v) { return CMatrix::Constant(1, 1, v); }

OperatorModel scalar_model(ScalarLaw law) { return OperatorModel::centered({scalar(1.0)}, FreeFamilySpec::independent({law})); }

}  // namespace

TEST(CltLab, ThetaBernoulliExample) {
    const auto m = scalar_model(ScalarLaw::bernoulli());
    EXPECT_NEAR(std::abs(sum_cauchy(m, 1, scalar(3.0))(0, 0) - 0.375), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(theta_n(m, 1, scalar(3.0))(0, 0) - (-0.015625)), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(lambda_n(m, 1, scalar(3.0))(0, 0) - (3.0 + 0.015625 / 0.375)), 0.0, 1e-12);
    EXPECT_LT(subordination_check(m, 64, scalar(3.0)), 1e-6);
}

TEST(CltLab, SemicircularModelIsStable) {
    std::mt19937_64 rng(3);
    const auto m = OperatorModel::centered({oracle::random_hermitian(2, rng), oracle::random_hermitian(2, rng)},
                                           FreeFamilySpec::independent({ScalarLaw::semicircular(), ScalarLaw::semicircular()}));
    const CMatrix b = cplx(0.5, 12.0) * identity(2);
    for (long n : {1L, 7L, 64L}) {
        EXPECT_LT(op_norm(theta_n(m, n, b)), 1e-10);
        EXPECT_LT(op_norm(lambda_n(m, n, b) - b), 1e-9);
        EXPECT_LT(subordination_check(m, n, b), 1e-10);
    }
}

TEST(CltLab, ZeroModelThetaVanishes) {
    const auto m = OperatorModel::centered({CMatrix::Zero(2, 2)}, FreeFamilySpec::independent({ScalarLaw::bernoulli()}));
    EXPECT_LT(op_norm(theta_n(m, 3, cplx(0, 2) * identity(2))), 1e-15);
}

TEST(CltLab, LemmaLowerBoundAlphaIsExactForAllN) {
    std::mt19937_64 rng(5);
    const auto m = OperatorModel::centered({oracle::ginibre(2, rng)}, FreeFamilySpec::independent({ScalarLaw::two_atom()}));
    const CMatrix a = alpha(m);
    for (long n : {1L, 4L, 100L}) EXPECT_LT(op_norm(alpha(SumModel{m, n}.realized()) - a), 1e-13);
}

TEST(CltLab, TrendAndSlopeHelpers) {
    EXPECT_TRUE(no_increasing_trend({1.0, 1.1, 0.9, 1.0, 1.15}));
    EXPECT_FALSE(no_increasing_trend({1.0, 1.1, 0.9, 1.0, 1.5}));
    std::vector<double> x, y;
    for (double n : {16.0, 32.0, 64.0, 128.0}) {
        x.push_back(n);
        y.push_back(3.0 / n);
    }
    const auto [s, ci] = loglog_slope(x, y, 16.0);
    EXPECT_NEAR(s, -1.0, 1e-12);
    EXPECT_LT(ci, 1e-10);
}

TEST(CltLab, GridOutsideOmegaIsRejected) {
    RateExperiment e;
    e.model = scalar_model(ScalarLaw::bernoulli());
    e.n_list = {4};
    e.grid.scalar = {cplx(0.1, 0.0)};
    EXPECT_ERROR_KIND(build_grid(e), ErrorKind::DomainError);
}

TEST(CltLab, RateExperimentsSmall) {
    RateExperiment e;
    e.model = scalar_model(ScalarLaw::bernoulli());
    e.n_list = {16, 32, 64, 128};
    e.grid.relative = true;
    e.grid.scalar = {1.05, cplx(0, 1.05), std::polar(1.5, 0.7)};
    const auto r = run_rate(e);
    EXPECT_NEAR(r.slope, -1.0, 0.15);
    for (const auto& row : r.rows) {
        ASSERT_TRUE(row.ok) << row.error;
        if (row.n >= 64) {
            EXPECT_LT(row.subord_resid, 1e-6);
            EXPECT_TRUE(row.lambda_in_omega);
        }
    }
}

TEST(CltLab, PolyRateSemicircularIsStable) {
    const auto p = NcPoly::parse("x1*x2+x2*x1");
    CauchyEvalConfig cfg;
    cfg.engine = CauchyEngine::Series;
    cfg.max_order = 512;
    const auto f = FreeFamilySpec::independent({ScalarLaw::semicircular(), ScalarLaw::semicircular()});
    const double R = default_exterior_radius(linearize(p), cfg);
    const auto r = poly_rate(p, f, {1, 4, 16}, {std::polar(1.5 * R, 0.4), cplx(0.0, 2.0 * R)}, cfg);
    for (const auto& row : r.rows) {
        ASSERT_TRUE(row.ok) << row.error;
        EXPECT_LT(row.diff, 1e-10);
    }
}

TEST(CltLab, PolyRateBernoulliBounded) {
    const auto p = NcPoly::parse("x1^2");
    CauchyEvalConfig cfg;
    cfg.engine = CauchyEngine::Series;
    cfg.max_order = 512;
    const auto f = FreeFamilySpec::independent({ScalarLaw::bernoulli()});
    const double R = default_exterior_radius(linearize(p), cfg);
    const auto r = poly_rate(p, f, {4, 16, 64}, {std::polar(1.2 * R, 0.5), cplx(0.0, 1.5 * R)}, cfg);
    std::vector<double> by_n(3, 0.0);
    for (const auto& row : r.rows) {
        ASSERT_TRUE(row.ok) << row.error;
        EXPECT_GT(row.diff, 0.0);
        const std::size_t k = row.n == 4 ? 0 : row.n == 16 ? 1 : 2;
        by_n[k] = std::max(by_n[k], std::sqrt(static_cast<double>(row.n)) * row.diff);
    }
    EXPECT_LE(by_n[2], 1.2 * std::max(by_n[0], by_n[1]));
}

TEST(CltLab, PolyRateIdentityPolynomialMatchesScalarRate) {
    CauchyEvalConfig cfg;
    cfg.engine = CauchyEngine::Series;
    cfg.max_order = 512;
    const auto law = ScalarLaw::bernoulli();
    const auto r = poly_rate(NcPoly::parse("x1"), FreeFamilySpec::independent({law}), {8}, {cplx(0, 5.0)}, cfg);
    ASSERT_TRUE(r.rows.at(0).ok);
    const double direct = std::abs(sum_cauchy(scalar_model(law), 8, scalar(cplx(0, 5.0)))(0, 0) -
                                   oracle::semicircle_cauchy(cplx(0, 5.0)));
    EXPECT_NEAR(r.rows[0].diff, direct, 1e-12);
}

TEST(CltLab, MonteCarloScalarAndDeterminism) {
    const auto m = scalar_model(ScalarLaw::semicircular());
    const auto a = mc_estimate(m, 1, scalar(3.0), 400, 4, 99, 1);
    EXPECT_LT(std::abs(a.value(0, 0) - 0.3819660112501051), 5e-2);
    const auto b = mc_estimate(m, 1, scalar(3.0), 400, 4, 99, 2);
    EXPECT_EQ(a.value(0, 0), b.value(0, 0));
    EXPECT_EQ(a.stderr_, b.stderr_);
    EXPECT_ERROR_KIND(mc_estimate(m, 1, scalar(3.0), 0, 4, 1), ErrorKind::InvalidSize);
}

TEST(CltLab, HaarUnitaryIsUnitary) {
    const CMatrix u = haar_unitary(60, 4);
    EXPECT_LT(op_norm(u.adjoint() * u - identity(60)), 1e-12);
}

TEST(CltLab, ResolventIdentities) {
    std::mt19937_64 rng(12);
    const auto m = OperatorModel::centered({oracle::random_hermitian(2, rng)}, FreeFamilySpec::independent({ScalarLaw::two_atom()}));
    const CMatrix b = cplx(0.3, 3.0) * identity(2);
    for (long n : {1L, 3L}) {
        const auto [r1, r2] = resolvent_identity_check(m, n, 1, b, 60, 5);
        EXPECT_LT(r1, 1e-10);
        EXPECT_LT(r2, 1e-10);
    }
    EXPECT_ANY_THROW(resolvent_identity_check(m, 2, 3, b, 60, 5));
}

#include <random>

#include "freebe/linpoly.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace freebe;

namespace {

FreeFamilySpec semicirculars(int d) {
    return FreeFamilySpec::independent(std::vector<ScalarLaw>(static_cast<std::size_t>(d), ScalarLaw::semicircular()));
}

}  // namespace

TEST(NcPoly, ParseAndCanonicalForm) {
    const auto p = NcPoly::parse("x2*x1 + x1*x2 - 2 + x1*x2");
    EXPECT_EQ(p.d(), 2);
    EXPECT_EQ(p.degree(), 2);
    EXPECT_EQ(p.terms().size(), 3u);
    EXPECT_TRUE(NcPoly::parse("x1^2").terms()[0].word == (Word{0, 0}));
    EXPECT_TRUE(NcPoly::parse("(x1 + x2)^2").is_selfadjoint());
    EXPECT_FALSE(NcPoly::parse("x1*x2").is_selfadjoint());
    EXPECT_TRUE(NcPoly::parse("i*x1*x2 - i*x2*x1").is_selfadjoint());
    EXPECT_TRUE(NcPoly::parse("x1 - x1").is_zero());
    EXPECT_ERROR_KIND(NcPoly::parse("x1 +"), ErrorKind::ParseError);
    EXPECT_ERROR_KIND(NcPoly::parse("x0"), ErrorKind::ParseError);
    EXPECT_ERROR_KIND(NcPoly::parse("y1"), ErrorKind::ParseError);
}

TEST(NcPoly, EvaluateMatchesDirectProducts) {
    std::mt19937_64 rng(6);
    const CMatrix a = oracle::random_hermitian(4, rng), b = oracle::random_hermitian(4, rng);
    const auto p = NcPoly::parse("2*x1*x2*x1 - (1+2i)*x2^2 + 3");
    const CMatrix expected = 2.0 * a * b * a - cplx(1, 2) * b * b + 3.0 * CMatrix::Identity(4, 4);
    EXPECT_LT(op_norm(p.evaluate({a, b}) - expected), 1e-12);
    const auto q = NcPoly::parse("x1*x2 + x2");
    EXPECT_LT(op_norm((p * q).evaluate({a, b}) - expected * q.evaluate({a, b})), 1e-10);
    EXPECT_LT(op_norm(p.adjoint().evaluate({a, b}) - expected.adjoint()), 1e-12);
}

TEST(Linearize, Examples) {
    const auto l1 = linearize(NcPoly::parse("x1"));
    EXPECT_EQ(l1.m(), 1);
    EXPECT_EQ(l1.a0(0, 0), cplx(0.0));
    EXPECT_EQ(l1.coeffs[0](0, 0), cplx(1.0));

    const auto l2 = linearize(NcPoly::parse("x1^2"));
    EXPECT_EQ(l2.m(), 2);
    // Lambda(lambda,1) - L(x) has Schur complement lambda - x^2 for scalar x.
    for (double x : {-1.5, 0.3, 2.0}) {
        const cplx lam(0.7, 1.1);
        CMatrix m = lambda_diag(lam, 1.0, 2) - l2.a0 - x * l2.coeffs[0];
        const cplx schur = m(0, 0) - m(0, 1) * m(1, 0) / m(1, 1);
        EXPECT_LT(std::abs(schur - (lam - x * x)), 1e-14);
    }
    EXPECT_ERROR_KIND(linearize(NcPoly{}), ErrorKind::ZeroPolynomial);
}

TEST(Linearize, ContractOnShippedPolynomials) {
    for (const char* s : {"x1", "x1^2", "x1^3", "x1*x2+x2*x1", "x1^2+x2^2", "x1*x2*x1 - 2*x2 + 0.5",
                          "(1+2i)*x1*x2 + (1-2i)*x2*x1 + x1*x2*x1", "x1*x2"}) {
        const auto p = NcPoly::parse(s);
        const auto l = linearize(p);
        EXPECT_LT(validate_pencil(p, l, 100, 6, 17), 1e-10) << s;
        if (p.is_selfadjoint()) EXPECT_TRUE(l.is_hermitian()) << s;
    }
}

TEST(Linearize, IdentityPencilIsExact) {
    const auto p = NcPoly::parse("x1");
    EXPECT_LT(validate_pencil(p, linearize(p), 20, 4, 3), 1e-15);
    const auto q = NcPoly::parse("x1^2");
    EXPECT_LT(validate_pencil(q, linearize(q), 50, 5, 3), 1e-12);
}

TEST(Linearize, CorruptedPencilIsDetected) {
    const auto p = NcPoly::parse("x1^2");
    auto l = linearize(p);
    l.a0(1, 1) += 0.1;
    EXPECT_GT(validate_pencil(p, l, 20, 5, 3), 1e-2);
}

TEST(PencilCauchy, ScalarExamples) {
    CauchyEvalConfig cfg;
    const auto f1 = semicirculars(1);
    EXPECT_LT(std::abs(scalar_cauchy_from_pencil(linearize(NcPoly::parse("x1")), f1, 3.0, cfg) - 0.3819660112501051),
              1e-10);
    const auto l2 = linearize(NcPoly::parse("x1^2"));
    EXPECT_LT(std::abs(scalar_cauchy_from_pencil(l2, f1, 10.0, cfg) - oracle::mp_cauchy_real(10.0)), 1e-9);
    cfg.engine = CauchyEngine::Series;
    cfg.R = 3.0;
    EXPECT_ERROR_KIND(scalar_cauchy_from_pencil(l2, f1, 0.0, cfg), ErrorKind::DomainError);
}

TEST(PencilCauchy, CatalanSeriesOracle) {
    // tau((s^2)^k) = Catalan(k): G(10) = sum C_k 10^{-k-1}.
    double g = 0.0, c = 1.0, p = 0.1;
    for (int k = 0; k < 40; ++k) {
        g += c * p;
        c = c * 2.0 * (2.0 * k + 1.0) / (k + 2.0);
        p /= 10.0;
    }
    CauchyEvalConfig cfg;
    EXPECT_LT(std::abs(scalar_cauchy_from_pencil(linearize(NcPoly::parse("x1^2")), semicirculars(1), 10.0, cfg) - g), 1e-9);
}

TEST(PencilCauchy, EnginesAgreeInTheExterior) {
    const auto f = semicirculars(2);
    for (const char* s : {"x1", "x1^2", "x1*x2+x2*x1", "x1^2+x2^2"}) {
        const auto l = linearize(NcPoly::parse(s));
        CauchyEvalConfig fp, se;
        se.engine = CauchyEngine::Series;
        se.max_order = 512;
        const double R = default_exterior_radius(l, se);
        for (double ang : {0.3, 1.2, 2.5}) {
            const cplx z = std::polar(2.0 * R, ang);
            EXPECT_LT(std::abs(scalar_cauchy_from_pencil(l, f, z, fp) - scalar_cauchy_from_pencil(l, f, z, se)), 1e-8) << s;
        }
    }
}

TEST(PencilCauchy, Asymptotics) {
    // lambda G(lambda) = 1 + m1 / lambda + m2 / lambda^2 + ..., with m1 = 2, m2 = 6 for x1^2 + x2^2.
    CauchyEvalConfig cfg;
    const auto l = linearize(NcPoly::parse("x1^2+x2^2"));
    const auto f = semicirculars(2);
    for (double r : {1e3, 1e4}) {
        for (double ang : {0.0, 1.0, 2.5}) {
            const cplx lam = std::polar(r, ang);
            const cplx v = lam * scalar_cauchy_from_pencil(l, f, lam, cfg);
            EXPECT_LT(std::abs(v - 1.0), 1e-2);
            EXPECT_LT(std::abs(v - 1.0 - 2.0 / lam - 6.0 / (lam * lam)), 30.0 / (r * r * r));
        }
    }
}

TEST(PencilCauchy, MuRescaling) {
    CauchyEvalConfig cfg;
    cfg.omega.kappa = 0.5;
    cfg.omega.c = 2.0;
    const auto f = semicirculars(1);
    const auto lx = linearize(NcPoly::parse("x1"));
    const cplx lam(6.0, 1.0);
    EXPECT_EQ(mu_rescaled_eval(lx, f, lam, 1.0, 1, cfg), scalar_cauchy_from_pencil(lx, f, lam, cfg));
    EXPECT_LT(std::abs(mu_rescaled_eval(lx, f, lam, cplx(4.0, 1.0), 1, cfg) - oracle::semicircle_cauchy(lam)), 1e-10);
    const auto l2 = linearize(NcPoly::parse("x1^2"));
    const cplx mu(3.0, 0.5), lam2(5.0, 1.0);
    EXPECT_LT(std::abs(mu_rescaled_eval(l2, f, lam2, mu, 2, cfg) - scalar_cauchy_from_pencil(l2, f, lam2 * mu, cfg)), 1e-9);
    EXPECT_ERROR_KIND(mu_rescaled_eval(lx, f, cplx(50.0), cplx(4.0), 1, cfg), ErrorKind::DomainError);
}

TEST(PencilCauchy, MuIdentityGate) {
    // A pencil whose rescaling identity fails must be refused.
    CauchyEvalConfig cfg;
    cfg.omega.kappa = 0.5;
    const auto l3 = linearize(NcPoly::parse("x1^3"));
    if (validate_mu_identity(l3, 8, 4, 0x5eed) >= kMuIdentityTol) {
        EXPECT_ERROR_KIND(mu_rescaled_eval(l3, semicirculars(1), cplx(6.0, 1.0), cplx(4.0), 3, cfg),
                          ErrorKind::NotValidated);
    }
}

TEST(PencilCauchy, MaximumModulusOnCircles) {
    const auto l = linearize(NcPoly::parse("x1^2"));
    const auto bern = FreeFamilySpec::independent({ScalarLaw::bernoulli()});
    CauchyEvalConfig se;
    se.engine = CauchyEngine::Series;
    se.max_order = 512;
    CauchyEvalConfig sn = se;
    sn.n = 4;
    const double R = default_exterior_radius(l, se);
    auto diff = [&](cplx z) {
        return std::abs(scalar_cauchy_from_pencil(l, bern, z, se) - scalar_cauchy_from_pencil(l, bern, z, sn));
    };
    const double r1 = 1.2 * R;
    double on_circle = 0.0;
    for (int k = 0; k < 64; ++k) on_circle = std::max(on_circle, diff(std::polar(r1, 2.0 * std::numbers::pi * k / 64.0)));
    for (double r : {1.5 * R, 3.0 * R})
        for (double ang : {0.1, 1.0, 2.0}) EXPECT_LE(diff(std::polar(r, ang)), on_circle * (1 + 1e-9));
}

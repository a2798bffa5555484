#include <random>

#include "freebe/spectra.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace freebe;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> x;
    for (int i = 0; i < n; ++i) x.push_back(lo + (hi - lo) * i / (n - 1));
    return x;
}

Cdf step_at(double s) {
    Cdf f;
    f.x = {s - 1e-9, s};
    f.values = {0.0, 1.0};
    return f;
}

}  // namespace

TEST(Spectra, SemicircleEvaluatorPoints) {
    const auto ev = pencil_evaluator(linearize(NcPoly::parse("x1")), FreeFamilySpec::independent({ScalarLaw::semicircular()}));
    const auto d = density_from_cauchy(ev, {0.0, 3.0});
    EXPECT_NEAR(d.values[0], 1.0 / std::numbers::pi, 1e-3);
    EXPECT_LT(d.values[1], 1e-3);
}

TEST(Spectra, ScSquareAtTwo) {
    const auto ev = pencil_evaluator(linearize(NcPoly::parse("x1^2")), FreeFamilySpec::independent({ScalarLaw::semicircular()}));
    const auto d = density_from_cauchy(ev, {1.9, 2.0});
    EXPECT_NEAR(d.values[1], 1.0 / (2.0 * std::numbers::pi), 2e-3);
}

TEST(Spectra, CdfExamples) {
    GridDensity u;
    u.x = linspace(0.0, 2.0, 101);
    u.values.assign(101, 0.5);
    const Cdf f = cdf_from_density(u);
    EXPECT_NEAR(f(1.0), 0.5, 1e-12);
    GridDensity z = u;
    z.values.assign(101, 0.0);
    EXPECT_ERROR_KIND(cdf_from_density(z), ErrorKind::NegativeMass);
    GridDensity broken = u;
    broken.failed = {3};
    EXPECT_ERROR_KIND(cdf_from_density(broken), ErrorKind::EvaluatorFailure);
}

TEST(Spectra, KolmogorovAxioms) {
    EXPECT_NEAR(kolmogorov(step_at(0.0), step_at(1.0)), 1.0, 1e-12);
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto random_cdf = [&]() {
        Cdf f;
        double acc = 0.0;
        for (int i = 0; i < 30; ++i) {
            f.x.push_back(-3.0 + 6.0 * i / 29.0 + 0.05 * u(rng));
            acc += u(rng);
            f.values.push_back(acc);
        }
        for (double& v : f.values) v /= acc;
        return f;
    };
    for (int t = 0; t < 100; ++t) {
        const Cdf a = random_cdf(), b = random_cdf(), c = random_cdf();
        EXPECT_EQ(kolmogorov(a, a), 0.0);
        EXPECT_EQ(kolmogorov(a, b), kolmogorov(b, a));
        EXPECT_LE(kolmogorov(a, c), kolmogorov(a, b) + kolmogorov(b, c) + 1e-12);
    }
}

TEST(Spectra, OracleLaws) {
    const auto sc = OracleLaw::from_name("semicircle");
    EXPECT_NEAR(oracle_density(sc, 0.0), 1.0 / std::numbers::pi, 1e-15);
    EXPECT_EQ(oracle_density(sc, 5.0), 0.0);
    const auto sq = OracleLaw::from_name("sc_square");
    EXPECT_NEAR(oracle_density(sq, 2.0), 1.0 / (2.0 * std::numbers::pi), 1e-15);
    EXPECT_ERROR_KIND(OracleLaw::from_name("cauchy"), ErrorKind::UnknownKind);
    for (double x : linspace(-2.5, 2.5, 41)) {
        EXPECT_NEAR(oracle_density(sc, x), oracle::semicircle_density(x), 1e-14);
        EXPECT_NEAR(oracle_cdf(sc, x), oracle::semicircle_cdf(x), 1e-13);
    }
    for (double x : linspace(0.05, 4.5, 41)) EXPECT_NEAR(oracle_density(sq, x), oracle::mp_density(x), 1e-13);
    EXPECT_NEAR(std::abs(oracle_cauchy(sq, 10.0) - oracle::mp_cauchy_real(10.0)), 0.0, 1e-14);
}

TEST(Spectra, SemicirclePipeline) {
    const auto xs = linspace(-2.5, 2.5, 401);
    const auto ev = pencil_evaluator(linearize(NcPoly::parse("x1")), FreeFamilySpec::independent({ScalarLaw::semicircular()}));
    const auto d = density_from_cauchy(ev, xs);
    const Cdf f = cdf_from_density(d);
    EXPECT_NEAR(f(0.0), 0.5, 1e-3);
    Cdf ref;
    ref.x = xs;
    for (double x : xs) ref.values.push_back(oracle::semicircle_cdf(x));
    EXPECT_LT(kolmogorov(f, ref), 5e-3);
    // Moments of the recovered law against Catalan numbers.
    const std::vector<double> exact{0, 1, 0, 2, 0, 5};
    for (int k = 1; k <= 6; ++k) {
        double mk = 0.0;
        for (std::size_t i = 1; i < xs.size(); ++i) {
            const double h = xs[i] - xs[i - 1];
            mk += 0.5 * h * (std::pow(xs[i], k) * d.values[i] + std::pow(xs[i - 1], k) * d.values[i - 1]);
        }
        EXPECT_NEAR(mk, exact[static_cast<std::size_t>(k - 1)], 1e-2) << k;
    }
}

TEST(Spectra, ExtrapolationBeatsEachSingleEps) {
    const auto xs = linspace(-2.5, 2.5, 201);
    const auto ev = pencil_evaluator(linearize(NcPoly::parse("x1")), FreeFamilySpec::independent({ScalarLaw::semicircular()}));
    auto sup_err = [&](const std::vector<double>& eps) {
        const auto d = density_from_cauchy(ev, xs, eps);
        double s = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) s = std::max(s, std::abs(d.values[i] - oracle::semicircle_density(xs[i])));
        return s;
    };
    const auto& sched = default_eps_schedule();
    double prev = std::numeric_limits<double>::infinity();
    for (double e : sched) {
        const double s = sup_err({e});
        EXPECT_LT(s, prev) << e;
        prev = s;
    }
    EXPECT_LT(sup_err(sched), 1e-2);
}

TEST(Spectra, MeshAndLipschitz) {
    const auto mesh = dr_plus_mesh(3.0, 30.0, 5, 7);
    EXPECT_EQ(mesh.size(), 35u);
    for (cplx z : mesh) {
        EXPECT_GT(z.imag(), 0.0);
        EXPECT_GT(std::abs(z), 3.0);
    }
    auto g = [](cplx z) { return oracle::semicircle_cauchy(z); };
    EXPECT_EQ(dr_plus_sup(g, g, mesh), 0.0);
    Cdf f;
    f.x = linspace(0.0, 1.0, 11);
    f.values = f.x;
    EXPECT_NEAR(lipschitz_estimate(f, 0.1), 1.0, 1e-12);
}

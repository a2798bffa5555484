#include "freebe/cltlab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/QR>
#include <unsupported/Eigen/KroneckerProduct>

#include "freebe/parallel.hpp"

namespace freebe {

OperatorModel semicircular_limit(const OperatorModel& model) {
    std::vector<ScalarLaw> base;
    for (const auto& law : model.family.base) base.push_back(ScalarLaw::semicircular(law.second_moment()));
    OperatorModel out = model;
    out.family = FreeFamilySpec::mixed(std::move(base), model.family.mixing);
    return out;
}

DomainConstants domain_constants(const OperatorModel& model, long n, const OmegaParams& p,
                                 const CertifiedConstants& k, double safety) {
    if (n < 1) throw Error(ErrorKind::InvalidParams, "n must be >= 1");
    DomainConstants dc;
    dc.est_limit = model_norm_estimate(semicircular_limit(model), safety);
    dc.est_sum = model_norm_estimate(SumModel{model, n}.realized(), safety);
    const double alpha_root = std::sqrt(op_norm(alpha(model)));
    if (n > 1) {
        const double shrink = std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n));
        dc.est_leave = std::max(shrink * model_norm_estimate(SumModel{model, n - 1}.realized(), safety),
                                shrink * alpha_root);
    }
    double inv_min = std::numeric_limits<double>::infinity();
    for (double est : {dc.est_limit, dc.est_sum, dc.est_leave}) {
        if (est > 0.0) inv_min = std::min(inv_min, 1.0 / est);
    }
    if (!std::isfinite(inv_min)) throw Error(ErrorKind::InvalidParams, "model has zero norm estimate");
    dc.kappa = p.theta * inv_min;
    dc.kappa_star = k.theta_star * inv_min;
    return dc;
}

CertifiedConstants RateExperiment::constants() const {
    return theta_star > 0.0 ? CertifiedConstants::make(params, gamma, theta_star)
                            : CertifiedConstants::make(params, gamma);
}

OmegaParams RateExperiment::star_params() const {
    const CertifiedConstants k = constants();
    double kappa = std::numeric_limits<double>::infinity();
    if (n_list.empty()) throw Error(ErrorKind::InvalidParams, "n_list is empty");
    for (long n : n_list) kappa = std::min(kappa, domain_constants(model, n, params, k).kappa_star);
    OmegaParams star;
    star.theta = k.theta_star;
    star.sigma = params.sigma;
    star.c = k.c_star;
    star.kappa = kappa;
    star.validate();
    return star;
}

namespace {

std::string complex_label(cplx z) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g%+.6gi", z.real(), z.imag());
    return buf;
}

std::mt19937_64 task_rng(std::uint64_t seed, std::uint64_t task) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(task), static_cast<std::uint32_t>(task >> 32)};
    return std::mt19937_64(seq);
}

CMatrix ginibre(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix g(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) g(i, j) = cplx(normal(rng), normal(rng));
    }
    return g;
}

CMatrix haar(Eigen::Index n, std::mt19937_64& rng) {
    Eigen::HouseholderQR<CMatrix> qr(ginibre(n, rng));
    CMatrix q = qr.householderQ();
    const auto& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < n; ++j) {
        const cplx d = r(j, j);
        const double a = std::abs(d);
        if (a > 0.0) q.col(j) *= d / a;
    }
    return q;
}

/// Random N x N matrix model of a centered scalar law.
CMatrix sample_law(const ScalarLaw& law, Eigen::Index n, std::mt19937_64& rng) {
    switch (law.kind) {
        case LawKind::Semicircular: {
            // GUE with E|g_ij|^2 = variance / N.
            const CMatrix g = ginibre(n, rng);
            return (g + g.adjoint()) * (std::sqrt(law.variance) / (2.0 * std::sqrt(static_cast<double>(n))));
        }
        case LawKind::Bernoulli:
        case LawKind::TwoAtom: {
            const double a = law.kind == LawKind::Bernoulli ? 1.0 : law.atoms[0];
            const double b = law.kind == LawKind::Bernoulli ? -1.0 : law.atoms[1];
            const double pa = law.kind == LawKind::Bernoulli ? 0.5 : law.weights[0];
            const auto na = static_cast<Eigen::Index>(std::llround(pa * static_cast<double>(n)));
            // u diag(a 1_na, b 1_rest) u^* = a + (b - a) P with P the projection
            // onto the trailing Haar columns.
            const CMatrix u = haar(n, rng);
            const auto tail = u.rightCols(n - na);
            CMatrix out = (b - a) * (tail * tail.adjoint());
            out.diagonal().array() += a;
            return out;
        }
        case LawKind::Moments:
            break;
    }
    throw Error(ErrorKind::InvalidParams, "Monte Carlo oracle supports semicircular and two-atom laws only");
}

/// Per-copy matrix realizations of x^(k) = sum_j C_kj y_j.
std::vector<CMatrix> sample_variables(const FreeFamilySpec& f, Eigen::Index n, std::mt19937_64& rng) {
    std::vector<CMatrix> base;
    for (const auto& law : f.base) base.push_back(sample_law(law, n, rng));
    std::vector<CMatrix> out;
    for (int k = 0; k < f.dim(); ++k) {
        CMatrix x = CMatrix::Zero(n, n);
        for (int j = 0; j < f.base_dim(); ++j) {
            const double c = f.mixing(k, j);
            if (c != 0.0) x += c * base[static_cast<std::size_t>(j)];
        }
        out.push_back(std::move(x));
    }
    return out;
}

/// Centered part sum_k a_k (x) x_k of one copy X_i.
CMatrix copy_operator(const OperatorModel& model, const std::vector<CMatrix>& vars) {
    const Eigen::Index n = vars.front().rows();
    CMatrix out = CMatrix::Zero(model.m() * n, model.m() * n);
    for (int k = 0; k < model.d(); ++k) {
        out += Eigen::kroneckerProduct(model.coeffs[static_cast<std::size_t>(k)], vars[static_cast<std::size_t>(k)]).eval();
    }
    return out;
}

CMatrix partial_trace(const CMatrix& big, Eigen::Index m, Eigen::Index n) {
    CMatrix out(m, m);
    for (Eigen::Index p = 0; p < m; ++p) {
        for (Eigen::Index q = 0; q < m; ++q) out(p, q) = big.block(p * n, q * n, n, n).trace() / static_cast<double>(n);
    }
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

SolveOptions solver_options(const EngineOptions& o) {
    SolveOptions s;
    s.tol = o.solver_tol;
    s.max_iter = o.solver_max_iter;
    return s;
}

}  // namespace

CMatrix haar_unitary(int N, std::uint64_t seed) {
    if (N < 1) throw Error(ErrorKind::InvalidSize, "N must be >= 1");
    auto rng = task_rng(seed, 0);
    return haar(N, rng);
}

std::vector<GridPoint> build_grid(const RateExperiment& e) {
    const OmegaParams star = e.star_params();
    const Eigen::Index m = e.model.m();
    std::vector<GridPoint> pts;
    auto check = [&](const GridPoint& g) {
        if (!in_omega(g.b, star)) {
            throw Error(ErrorKind::DomainError, "grid point " + g.id + " is outside Omega* (kappa* = " +
                                                    std::to_string(star.kappa) + ", c* = " + std::to_string(star.c) + ")");
        }
    };
    const double unit = e.grid.relative ? 1.0 / star.kappa : 1.0;
    for (const cplx z0 : e.grid.scalar) {
        const cplx z = z0 * unit;
        GridPoint g{"z=" + complex_label(z), z * identity(m)};
        check(g);
        pts.push_back(std::move(g));
    }
    for (const auto& [lambda0, mu0] : e.grid.lambda_mu) {
        const cplx lambda = lambda0 * unit, mu = mu0 * unit;
        GridPoint g{"Lambda(" + complex_label(lambda) + "," + complex_label(mu) + ")", lambda_diag(lambda, mu, m)};
        check(g);
        pts.push_back(std::move(g));
    }
    if (e.grid.random_points > 0) {
        auto rng = task_rng(e.seed, 0x9e3779b97f4a7c15ULL);
        std::uniform_real_distribution<double> radius(1.05, 2.0);
        std::uniform_real_distribution<double> phase(-M_PI, M_PI);
        std::uniform_real_distribution<double> spread(0.0, 0.4);
        int accepted = 0;
        for (int attempt = 0; accepted < e.grid.random_points; ++attempt) {
            if (attempt > 1000 * e.grid.random_points) {
                throw Error(ErrorKind::DomainError, "rejection sampling of Omega* points failed");
            }
            const CMatrix g = ginibre(m, rng);
            const double gn = op_norm(g);
            const CMatrix shape = identity(m) + spread(rng) * g / (gn > 0.0 ? gn : 1.0);
            CMatrix inv;
            if (!try_inverse(shape, inv)) continue;
            const CMatrix b = std::polar(radius(rng) / star.kappa * op_norm(inv), phase(rng)) * shape;
            if (!in_omega(b, star)) continue;
            pts.push_back(GridPoint{"random" + std::to_string(accepted), b});
            ++accepted;
        }
    }
    if (pts.empty()) throw Error(ErrorKind::InvalidParams, "grid is empty");
    return pts;
}

CMatrix sum_cauchy(const OperatorModel& model, long n, const CMatrix& b, const EngineOptions& o) {
    SeriesOptions so;
    so.tol = o.series_tol;
    so.max_order = o.max_order;
    return cauchy_series(SumModel{model, n}, b, so).value;
}

namespace {

CMatrix theta_from(const OperatorModel& model, const CMatrix& b, const CMatrix& gn) {
    const CovarianceMap eta = CovarianceMap::from_model(model);
    return (b - model.a0) * gn - identity(model.m()) - apply_eta(eta, gn) * gn;
}

}  // namespace

CMatrix theta_n(const OperatorModel& model, long n, const CMatrix& b, const EngineOptions& o) {
    return theta_from(model, b, sum_cauchy(model, n, b, o));
}

CMatrix lambda_n(const OperatorModel& model, long n, const CMatrix& b, const EngineOptions& o) {
    const CMatrix gn = sum_cauchy(model, n, b, o);
    return b - theta_from(model, b, gn) * inverse(gn);
}

double subordination_check(const OperatorModel& model, long n, const CMatrix& b, const EngineOptions& o) {
    const CMatrix gn = sum_cauchy(model, n, b, o);
    const CMatrix lam = b - theta_from(model, b, gn) * inverse(gn);
    const SolveReport rep = solve_cauchy(SemicircularSpec::from_model(model), lam, solver_options(o));
    return op_norm(rep.w - gn);
}

std::pair<double, double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double min_x) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (x[i] >= min_x && x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (lx.size() < 2) return {nan, nan};
    const double k = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    const double slope = sxy / sxx;
    if (lx.size() < 3) return {slope, 0.0};
    double sse = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - my - slope * (lx[i] - mx);
        sse += r * r;
    }
    const double se = std::sqrt(sse / (k - 2.0) / sxx);
    return {slope, 1.96 * se};
}

bool no_increasing_trend(const std::vector<double>& values, double factor) {
    if (values.size() < 4) return true;
    const double head = std::max({values[0], values[1], values[2]});
    return values.back() <= factor * head;
}

RateResult run_rate(const RateExperiment& e) {
    e.model.validate();
    for (long n : e.n_list) {
        if (n < 1) throw Error(ErrorKind::InvalidParams, "n_list entries must be >= 1");
    }
    const std::vector<GridPoint> grid = build_grid(e);
    const CertifiedConstants k = e.constants();
    const SemicircularSpec spec = SemicircularSpec::from_model(e.model);
    EngineOptions eo;
    eo.series_tol = e.series_tol;
    eo.max_order = e.max_order;
    eo.solver_tol = e.solver_tol;
    eo.solver_max_iter = e.solver_max_iter;

    // Limit transform once per grid point.
    std::vector<CMatrix> limit(grid.size());
    std::vector<std::string> limit_error(grid.size());
    parallel_for(grid.size(), e.workers, [&](std::size_t i) {
        try {
            limit[i] = solve_cauchy(spec, grid[i].b, solver_options(eo)).w;
        } catch (const Error& err) {
            limit_error[i] = err.what();
        }
    });

    std::vector<OmegaParams> omega_n;
    for (long n : e.n_list) {
        OmegaParams p = e.params;
        p.kappa = domain_constants(e.model, n, e.params, k).kappa;
        omega_n.push_back(p);
    }

    const std::size_t ng = grid.size();
    RateResult res;
    res.rows.resize(e.n_list.size() * ng);
    parallel_for(res.rows.size(), e.workers, [&](std::size_t task) {
        const std::size_t ni = task / ng, gi = task % ng;
        RateRow& row = res.rows[task];
        row.n = e.n_list[ni];
        row.b_id = grid[gi].id;
        const CMatrix& b = grid[gi].b;
        row.norm_b = op_norm(b);
        try {
            if (!limit_error[gi].empty()) throw Error(ErrorKind::NoConvergence, limit_error[gi]);
            const CMatrix gn = sum_cauchy(e.model, row.n, b, eo);
            row.diff = op_norm(limit[gi] - gn);
            row.scaled = std::sqrt(static_cast<double>(row.n)) * row.diff / row.norm_b;
            const CMatrix theta = theta_from(e.model, b, gn);
            row.theta_norm = op_norm(theta);
            const CMatrix lam = b - theta * inverse(gn);
            row.lambda_in_omega = in_omega(lam, omega_n[ni]);
            row.subord_resid = op_norm(solve_cauchy(spec, lam, solver_options(eo)).w - gn);
        } catch (const Error& err) {
            row.ok = false;
            row.error = err.what();
        }
    });

    std::vector<double> ns, med;
    for (std::size_t ni = 0; ni < e.n_list.size(); ++ni) {
        std::vector<double> diffs;
        double ms = 0.0, mt = 0.0;
        const double rn = std::sqrt(static_cast<double>(e.n_list[ni]));
        for (std::size_t gi = 0; gi < ng; ++gi) {
            const RateRow& r = res.rows[ni * ng + gi];
            if (!r.ok) continue;
            diffs.push_back(r.diff);
            ms = std::max(ms, r.scaled);
            mt = std::max(mt, rn * r.theta_norm);
        }
        res.max_scaled_by_n.push_back(ms);
        res.max_theta_by_n.push_back(mt);
        res.median_diff_by_n.push_back(median(diffs));
        res.max_scaled = std::max(res.max_scaled, ms);
        ns.push_back(static_cast<double>(e.n_list[ni]));
    }
    std::tie(res.slope, res.slope_ci) = loglog_slope(ns, res.median_diff_by_n, 16.0);
    return res;
}

PolyRateResult poly_rate(const NcPoly& p, const FreeFamilySpec& family, const std::vector<long>& n_list,
                         const std::vector<cplx>& z_grid, const CauchyEvalConfig& cfg, int workers) {
    const LinearPencil pencil = linearize(p);
    PolyRateResult res;
    res.radius = cfg.R > 0.0 ? cfg.R : default_exterior_radius(pencil, cfg);
    for (const cplx z : z_grid) {
        if (!(std::abs(z) > res.radius)) {
            throw Error(ErrorKind::DomainError, "z = " + complex_label(z) + " is inside the exterior radius " +
                                                    std::to_string(res.radius));
        }
    }
    CauchyEvalConfig limit_cfg = cfg;
    limit_cfg.engine = CauchyEngine::FixedPoint;
    std::vector<cplx> limit(z_grid.size());
    parallel_for(z_grid.size(), workers, [&](std::size_t i) {
        limit[i] = scalar_cauchy_from_pencil(pencil, family, z_grid[i], limit_cfg);
    });
    const std::size_t nz = z_grid.size();
    res.rows.resize(n_list.size() * nz);
    parallel_for(res.rows.size(), workers, [&](std::size_t task) {
        const std::size_t ni = task / nz, zi = task % nz;
        PolyRateRow& row = res.rows[task];
        row.n = n_list[ni];
        row.z = z_grid[zi];
        row.z_id = "z=" + complex_label(row.z);
        row.g_limit = limit[zi];
        try {
            CauchyEvalConfig c = cfg;
            c.engine = CauchyEngine::Series;
            c.n = row.n;
            row.g_n = scalar_cauchy_from_pencil(pencil, family, row.z, c);
            row.diff = std::abs(row.g_n - row.g_limit);
            row.scaled = std::sqrt(static_cast<double>(row.n)) * row.diff;
        } catch (const Error& err) {
            row.ok = false;
            row.error = err.what();
        }
    });
    std::vector<double> ns, med;
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
        std::vector<double> diffs;
        for (std::size_t zi = 0; zi < nz; ++zi) {
            const auto& r = res.rows[ni * nz + zi];
            if (!r.ok) continue;
            diffs.push_back(r.diff);
            res.max_scaled = std::max(res.max_scaled, r.scaled);
        }
        ns.push_back(static_cast<double>(n_list[ni]));
        med.push_back(median(diffs));
    }
    std::tie(res.slope, res.slope_ci) = loglog_slope(ns, med, 16.0);
    return res;
}

McEstimate mc_estimate(const OperatorModel& model, long n, const CMatrix& b, int N, int samples,
                       std::uint64_t seed, int workers) {
    if (N < 50) throw Error(ErrorKind::InvalidSize, "matrix size N must be >= 50");
    if (samples < 1) throw Error(ErrorKind::InvalidSize, "samples must be >= 1");
    if (n < 1) throw Error(ErrorKind::InvalidParams, "n must be >= 1");
    model.validate();
    check_matrix(b, "b");
    if (b.rows() != model.m()) throw Error(ErrorKind::DimensionMismatch, "b does not match model dimension");
    const Eigen::Index m = model.m();
    std::vector<CMatrix> draws(static_cast<std::size_t>(samples));
    if (model.d() == 1) {
        // Sum = a (x) S with S Hermitian: the partial trace is the average of
        // (b - a0 - lambda a)^{-1} over the eigenvalues lambda of S.
        const CMatrix bc = b - model.a0;
        const CMatrix& a = model.coeffs.front();
        parallel_for(draws.size(), workers, [&](std::size_t s) {
            auto rng = task_rng(seed, s);
            CMatrix sum = CMatrix::Zero(N, N);
            for (long i = 0; i < n; ++i) sum += sample_variables(model.family, N, rng).front();
            sum /= std::sqrt(static_cast<double>(n));
            const Eigen::SelfAdjointEigenSolver<CMatrix> es(sum, Eigen::EigenvaluesOnly);
            CMatrix acc = CMatrix::Zero(m, m);
            for (Eigen::Index k = 0; k < N; ++k) acc += inverse(CMatrix(bc - es.eigenvalues()(k) * a));
            draws[s] = acc / static_cast<double>(N);
        });
    } else {
        const CMatrix shift = Eigen::kroneckerProduct(CMatrix(b - model.a0), identity(N)).eval();
        parallel_for(draws.size(), workers, [&](std::size_t s) {
            auto rng = task_rng(seed, s);
            CMatrix sum = CMatrix::Zero(m * N, m * N);
            for (long i = 0; i < n; ++i) sum += copy_operator(model, sample_variables(model.family, N, rng));
            sum /= std::sqrt(static_cast<double>(n));
            draws[s] = partial_trace(inverse(shift - sum), m, N);
        });
    }
    McEstimate out;
    out.value = CMatrix::Zero(m, m);
    for (const auto& d : draws) out.value += d;
    out.value /= static_cast<double>(samples);
    if (samples > 1) {
        double var = 0.0;
        for (const auto& d : draws) var += (d - out.value).squaredNorm();
        var /= static_cast<double>(samples - 1);
        out.stderr_ = std::sqrt(var / static_cast<double>(samples));
    }
    return out;
}

std::pair<double, double> resolvent_identity_check(const OperatorModel& model, long n, long i, const CMatrix& b,
                                                   int N, std::uint64_t seed) {
    if (n < 1 || i < 1 || i > n) throw Error(ErrorKind::InvalidParams, "index i must satisfy 1 <= i <= n");
    if (N < 1) throw Error(ErrorKind::InvalidSize, "N must be >= 1");
    model.validate();
    check_matrix(b, "b");
    if (b.rows() != model.m()) throw Error(ErrorKind::DimensionMismatch, "b does not match model dimension");
    auto rng = task_rng(seed, static_cast<std::uint64_t>(i));
    const Eigen::Index m = model.m();
    std::vector<CMatrix> copies;
    for (long k = 0; k < n; ++k) copies.push_back(copy_operator(model, sample_variables(model.family, N, rng)));
    const double rn = std::sqrt(static_cast<double>(n));
    CMatrix s = CMatrix::Zero(m * N, m * N);
    for (const auto& x : copies) s += x;
    s /= rn;
    const CMatrix& xi = copies[static_cast<std::size_t>(i - 1)];
    const CMatrix leave = s - xi / rn;
    const CMatrix bb = Eigen::kroneckerProduct(CMatrix(b - model.a0), identity(N)).eval();
    const CMatrix r = inverse(bb - s);
    const CMatrix ri = inverse(bb - leave);
    const double scale = std::max(1.0, op_norm(r));
    const CMatrix first = ri + ri * xi * ri / rn + r * xi * ri * xi * ri / static_cast<double>(n);
    const CMatrix second = ri + ri * xi * r / rn;
    return {op_norm(r - first) / scale, op_norm(r - second) / scale};
}

}  // namespace freebe

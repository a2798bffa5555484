#include "freebe/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "freebe/scsolver.hpp"

namespace freebe {

double Cdf::operator()(double t) const {
    if (x.empty()) return 0.0;
    if (t <= x.front()) return values.front();
    if (t >= x.back()) return values.back();
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - x.begin());
    const double x0 = x[j - 1], x1 = x[j];
    const double w = (t - x0) / (x1 - x0);
    return values[j - 1] + w * (values[j] - values[j - 1]);
}

GridDensity density_from_cauchy(const CauchyEvaluator& g, const std::vector<double>& grid,
                                const std::vector<double>& eps) {
    if (eps.empty()) throw Error(ErrorKind::InvalidParams, "eps schedule is empty");
    for (double e : eps) {
        if (!(e > 0.0)) throw Error(ErrorKind::InvalidParams, "eps values must be positive");
    }
    if (!std::is_sorted(grid.begin(), grid.end())) throw Error(ErrorKind::InvalidParams, "grid must be ascending");
    GridDensity out;
    out.x = grid;
    out.eps = eps;
    const std::size_t nx = grid.size(), ne = eps.size();
    std::vector<double> raw(nx * ne, 0.0);
    std::vector<std::string> err(nx);
    for (std::size_t k = 0; k < ne; ++k) {
        for (std::size_t i = 0; i < nx; ++i) {
            if (!err[i].empty()) continue;
            try {
                raw[i * ne + k] = -g(cplx(grid[i], eps[k])).imag() / std::numbers::pi;
            } catch (const Error& e) {
                err[i] = e.what();
            }
        }
    }
    const double me = [&] {
        double s = 0.0;
        for (double e : eps) s += e;
        return s / static_cast<double>(ne);
    }();
    double see = 0.0;
    for (double e : eps) see += (e - me) * (e - me);
    out.values.assign(nx, 0.0);
    for (std::size_t i = 0; i < nx; ++i) {
        if (!err[i].empty()) {
            out.values[i] = std::numeric_limits<double>::quiet_NaN();
            out.failed.push_back(i);
            out.failure_messages.push_back(err[i]);
            continue;
        }
        double my = 0.0;
        for (std::size_t k = 0; k < ne; ++k) my += raw[i * ne + k];
        my /= static_cast<double>(ne);
        double v = my;
        if (ne > 1 && see > 0.0) {
            double sey = 0.0;
            for (std::size_t k = 0; k < ne; ++k) sey += (eps[k] - me) * (raw[i * ne + k] - my);
            v = my - (sey / see) * me;  // intercept at eps = 0
        }
        out.values[i] = std::max(v, 0.0);
    }
    return out;
}

Cdf cdf_from_density(const GridDensity& d) {
    if (!d.failed.empty()) {
        std::string msg = "density has " + std::to_string(d.failed.size()) + " failed points";
        if (!d.failure_messages.empty()) msg += ": " + d.failure_messages.front();
        throw Error(ErrorKind::EvaluatorFailure, msg);
    }
    if (d.x.size() < 2 || d.values.size() != d.x.size()) throw Error(ErrorKind::InvalidParams, "density grid too small");
    Cdf f;
    f.x = d.x;
    f.values.assign(d.x.size(), 0.0);
    for (std::size_t i = 1; i < d.x.size(); ++i) {
        f.values[i] = f.values[i - 1] + 0.5 * (d.values[i] + d.values[i - 1]) * (d.x[i] - d.x[i - 1]);
    }
    const double mass = f.values.back();
    if (!(mass >= 0.5)) throw Error(ErrorKind::NegativeMass, "density mass " + std::to_string(mass) + " < 0.5");
    for (double& v : f.values) v = std::min(1.0, v / mass);
    return f;
}

double kolmogorov(const Cdf& f1, const Cdf& f2) {
    std::vector<double> xs = f1.x;
    xs.insert(xs.end(), f2.x.begin(), f2.x.end());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    double sup = 0.0;
    for (double t : xs) sup = std::max(sup, std::abs(f1(t) - f2(t)));
    return sup;
}

OracleLaw OracleLaw::from_name(std::string_view name) {
    OracleLaw law;
    if (name == "semicircle") law.kind = OracleKind::Semicircle;
    else if (name == "sc_square") law.kind = OracleKind::ScSquare;
    else if (name == "two_atom") law.kind = OracleKind::TwoAtom;
    else throw Error(ErrorKind::UnknownKind, "unknown oracle law '" + std::string(name) + "'");
    return law;
}

double oracle_density(const OracleLaw& law, double x) {
    switch (law.kind) {
        case OracleKind::Semicircle: {
            const double r2 = 4.0 * law.variance - x * x;
            return r2 > 0.0 ? std::sqrt(r2) / (2.0 * std::numbers::pi * law.variance) : 0.0;
        }
        case OracleKind::ScSquare:
            return (x > 0.0 && x < 4.0) ? std::sqrt((4.0 - x) / x) / (2.0 * std::numbers::pi) : 0.0;
        case OracleKind::TwoAtom:
            return 0.0;
    }
    throw Error(ErrorKind::UnknownKind, "unknown oracle kind");
}

double oracle_cdf(const OracleLaw& law, double x) {
    switch (law.kind) {
        case OracleKind::Semicircle: {
            const double r = 2.0 * std::sqrt(law.variance);
            if (x <= -r) return 0.0;
            if (x >= r) return 1.0;
            const double u = x / r;
            return 0.5 + (u * std::sqrt(1.0 - u * u) + std::asin(u)) / std::numbers::pi;
        }
        case OracleKind::ScSquare: {
            // F(x) = P(|s| <= sqrt x) = 2 F_sc(sqrt x) - 1.
            if (x <= 0.0) return 0.0;
            if (x >= 4.0) return 1.0;
            OracleLaw sc;
            return 2.0 * oracle_cdf(sc, std::sqrt(x)) - 1.0;
        }
        case OracleKind::TwoAtom: {
            double f = 0.0;
            for (int i = 0; i < 2; ++i) {
                if (x >= law.atoms[i]) f += law.weights[i];
            }
            return f;
        }
    }
    throw Error(ErrorKind::UnknownKind, "unknown oracle kind");
}

cplx oracle_cauchy(const OracleLaw& law, cplx z) {
    switch (law.kind) {
        case OracleKind::Semicircle:
            return scalar_semicircle_cauchy(law.variance, z);
        case OracleKind::ScSquare: {
            // G_{s^2}(z) = G_s(sqrt z) / sqrt z with sqrt z in the upper half plane for Im z > 0.
            const cplx r = std::sqrt(z);
            return scalar_semicircle_cauchy(1.0, r) / r;
        }
        case OracleKind::TwoAtom:
            return law.weights[0] / (z - law.atoms[0]) + law.weights[1] / (z - law.atoms[1]);
    }
    throw Error(ErrorKind::UnknownKind, "unknown oracle kind");
}

CauchyEvaluator pencil_evaluator(const LinearPencil& pencil, const FreeFamilySpec& family, double tol,
                                 int max_iter) {
    std::vector<CMatrix> coeffs = pencil.coeffs;
    if (family.dim() < pencil.d()) {
        throw Error(ErrorKind::DimensionMismatch, "family has fewer variables than the pencil has generators");
    }
    while (static_cast<int>(coeffs.size()) < family.dim()) coeffs.push_back(CMatrix::Zero(pencil.m(), pencil.m()));
    auto spec = std::make_shared<SemicircularSpec>(SemicircularSpec{pencil.a0, CovarianceMap{coeffs, family.covariance()}});
    auto last = std::make_shared<CMatrix>();
    const Eigen::Index m = pencil.m();
    return [spec, last, m, tol, max_iter](cplx z) -> cplx {
        const CMatrix b = lambda_diag(z, cplx(1.0, z.imag()), m);
        SolveOptions opts;
        opts.tol = tol;
        opts.max_iter = max_iter;
        opts.damping = 0.5;
        if (last->size() == m * m) opts.initial = *last;
        SolveReport rep;
        try {
            rep = solve_cauchy(*spec, b, opts);
        } catch (const Error&) {
            if (!opts.initial) throw;
            opts.initial.reset();
            rep = solve_cauchy(*spec, b, opts);
        }
        *last = rep.w;
        return rep.w(0, 0);
    };
}

std::vector<cplx> dr_plus_mesh(double R, double r_max, int radii, int angles) {
    if (!(R > 0.0) || !(r_max > R) || radii < 1 || angles < 1) {
        throw Error(ErrorKind::InvalidParams, "need 0 < R < r_max and positive mesh counts");
    }
    std::vector<cplx> out;
    for (int i = 1; i <= radii; ++i) {
        const double r = R * std::pow(r_max / R, static_cast<double>(i) / radii);
        for (int j = 1; j <= angles; ++j) {
            out.push_back(std::polar(r, std::numbers::pi * j / (angles + 1)));
        }
    }
    return out;
}

double dr_plus_sup(const CauchyEvaluator& g1, const CauchyEvaluator& g2, const std::vector<cplx>& mesh) {
    double sup = 0.0;
    for (const cplx z : mesh) sup = std::max(sup, std::abs(g1(z) - g2(z)));
    return sup;
}

double lipschitz_estimate(const Cdf& f, double t) {
    if (!(t > 0.0)) throw Error(ErrorKind::InvalidParams, "t must be positive");
    double sup = 0.0;
    for (double x : f.x) sup = std::max(sup, std::abs(f(x + t) - f(x)) / t);
    return sup;
}

}  // namespace freebe

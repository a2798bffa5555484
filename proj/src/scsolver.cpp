#include "freebe/scsolver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/LU>

namespace freebe {

SemicircularSpec SemicircularSpec::from_model(const OperatorModel& model) {
    model.validate();
    return SemicircularSpec{model.a0, CovarianceMap::from_model(model)};
}

void SemicircularSpec::validate() const {
    check_matrix(a0, "a0");
    const auto d = static_cast<Eigen::Index>(eta.coeffs.size());
    if (eta.sigma.rows() != d || eta.sigma.cols() != d) {
        throw Error(ErrorKind::DimensionMismatch, "covariance matrix does not match coefficient count");
    }
    for (const auto& a : eta.coeffs) {
        check_matrix(a, "coefficient");
        if (a.rows() != a0.rows()) throw Error(ErrorKind::DimensionMismatch, "coefficient dimensions differ");
    }
    if (!eta.sigma.allFinite()) throw Error(ErrorKind::InvalidParams, "covariance has non-finite entries");
}

double SemicircularSpec::alpha_norm() const {
    CMatrix acc = CMatrix::Zero(m(), m());
    const auto d = static_cast<Eigen::Index>(eta.coeffs.size());
    for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index l = 0; l < d; ++l) {
            const double s = eta.sigma(k, l);
            if (s != 0.0) acc += s * eta.coeffs[static_cast<std::size_t>(k)].adjoint() * eta.coeffs[static_cast<std::size_t>(l)];
        }
    }
    return op_norm(acc);
}

double SemicircularSpec::norm_bound() const { return 2.0 * std::sqrt(eta_bound(eta)); }

double fixed_point_residual(const SemicircularSpec& spec, const CMatrix& b, const CMatrix& w) {
    const CMatrix lhs = (b - spec.a0) * w - identity(spec.m()) - apply_eta(spec.eta, w) * w;
    return op_norm(lhs);
}

namespace {

bool fast_inverse(const CMatrix& a, CMatrix& out) {
    if (a.rows() == 1) {
        if (std::abs(a(0, 0)) == 0.0) return false;
        out = CMatrix::Constant(1, 1, 1.0 / a(0, 0));
        return true;
    }
    Eigen::PartialPivLU<CMatrix> lu(a);
    if (!(lu.rcond() > 1e-14)) return false;
    out = lu.inverse();
    return out.allFinite();
}

}  // namespace

SolveReport solve_cauchy(const SemicircularSpec& spec, const CMatrix& b, const SolveOptions& opts) {
    spec.validate();
    check_matrix(b, "b");
    if (b.rows() != spec.m()) throw Error(ErrorKind::DimensionMismatch, "b does not match spec dimension");
    if (!(opts.tol > 0.0)) throw Error(ErrorKind::InvalidParams, "tol must be positive");
    if (opts.max_iter < 1) throw Error(ErrorKind::InvalidParams, "max_iter must be >= 1");
    if (!(opts.damping > 0.0 && opts.damping <= 1.0)) throw Error(ErrorKind::InvalidParams, "damping must lie in (0,1]");

    const CMatrix shifted = b - spec.a0;
    CMatrix w;
    if (opts.initial) {
        if (opts.initial->rows() != spec.m() || opts.initial->cols() != spec.m()) {
            throw Error(ErrorKind::DimensionMismatch, "initial point has wrong dimension");
        }
        w = *opts.initial;
    } else {
        w = inverse(shifted);
    }

    SolveReport rep;
    if (opts.omega) {
        rep.certified = certify_domain(spec, b, *opts.omega, spec.alpha_norm());
        rep.domain_note = rep.certified ? "certified: b - a0 in Omega, unique fixed point in Omega'"
                                        : "uncertified: outside the certified Omega domain";
    } else {
        rep.domain_note = "uncertified: no domain parameters supplied";
    }

    CMatrix next;
    for (int it = 1; it <= opts.max_iter; ++it) {
        if (!fast_inverse(shifted - apply_eta(spec.eta, w), next)) {
            throw Error(ErrorKind::Singular, "b - a0 - eta(w) not invertible at iteration " + std::to_string(it));
        }
        if (opts.damping < 1.0) next = (1.0 - opts.damping) * w + opts.damping * next;
        const double step = op_norm(next - w);
        const double scale = std::max(1.0, op_norm(w));
        w.swap(next);
        rep.last_steps.push_back(step);
        if (rep.last_steps.size() > 16) rep.last_steps.erase(rep.last_steps.begin());
        if (!w.allFinite()) throw Error(ErrorKind::NoConvergence, "iteration produced non-finite values");
        if (step < opts.tol * scale) {
            const double res = fixed_point_residual(spec, b, w);
            if (res < 10.0 * opts.tol) {
                rep.w = w;
                rep.iterations = it;
                rep.residual = res;
                return rep;
            }
        }
    }
    throw Error(ErrorKind::NoConvergence, "no convergence within " + std::to_string(opts.max_iter) + " iterations");
}

bool certify_domain(const SemicircularSpec& spec, const CMatrix& b, const OmegaParams& p, double alpha_norm) {
    p.validate();
    if (!(alpha_norm > 0.0)) throw Error(ErrorKind::InvalidParams, "alpha_norm must be positive");
    const double m = eta_bound(spec.eta);
    const double ratio = m > 0.0 ? alpha_norm / m : std::numeric_limits<double>::infinity();
    const double lhs = p.theta / (1.0 - p.theta);
    if (!(lhs < p.sigma * std::min(1.0 / p.c, ratio))) return false;
    return in_omega(b - spec.a0, p);
}

cplx scalar_semicircle_cauchy(double variance, cplx z) {
    if (!(variance > 0.0) || !std::isfinite(variance)) throw Error(ErrorKind::InvalidParams, "variance must be positive");
    const double edge = 2.0 * std::sqrt(variance);
    if (std::abs(z.imag()) <= 1e-15 * std::max(1.0, std::abs(z)) && std::abs(z.real()) <= edge) {
        throw Error(ErrorKind::OnSupport, "z lies on the support [-2 sigma, 2 sigma]");
    }
    // sqrt(z - e) sqrt(z + e) has its cut on [-e, e] and behaves like z, so
    // (z - root) / (2 var) = 2 / (z + root) is the branch vanishing at infinity.
    const cplx root = std::sqrt(z - edge) * std::sqrt(z + edge);
    return 2.0 / (z + root);
}

double omega_prime_radius(const SemicircularSpec& spec, const OmegaParams& p) {
    const double bound = spec.norm_bound();
    if (!(bound > 0.0)) return std::numeric_limits<double>::infinity();
    return p.theta / (1.0 - p.theta) / bound;
}

double uniqueness_probe(const SemicircularSpec& spec, const CMatrix& b, int starts, std::uint64_t seed,
                        const OmegaParams& p, const SolveOptions& opts) {
    if (starts < 1) throw Error(ErrorKind::InvalidParams, "starts must be >= 1");
    double radius = omega_prime_radius(spec, p);
    if (!std::isfinite(radius)) radius = op_norm(inverse(b - spec.a0));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Eigen::Index m = spec.m();
    std::vector<CMatrix> sols;
    for (int s = 0; s < starts; ++s) {
        CMatrix w0(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) w0(i, j) = cplx(normal(rng), normal(rng));
        }
        const double nrm = op_norm(w0);
        w0 *= radius * unit(rng) / (nrm > 0.0 ? nrm : 1.0) * (1.0 - 1e-9);
        SolveOptions o = opts;
        o.initial = w0;
        sols.push_back(solve_cauchy(spec, b, o).w);
    }
    double spread = 0.0;
    for (std::size_t i = 0; i < sols.size(); ++i) {
        for (std::size_t j = i + 1; j < sols.size(); ++j) spread = std::max(spread, op_norm(sols[i] - sols[j]));
    }
    return spread;
}

}  // namespace freebe

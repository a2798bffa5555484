#include "freebe/matlin.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace freebe {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Singular: return "Singular";
        case ErrorKind::PreconditionFailed: return "PreconditionFailed";
        case ErrorKind::ZeroParameter: return "ZeroParameter";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::InvalidParams: return "InvalidParams";
        case ErrorKind::OrderExceeded: return "OrderExceeded";
        case ErrorKind::Divergent: return "Divergent";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::OnSupport: return "OnSupport";
        case ErrorKind::ZeroPolynomial: return "ZeroPolynomial";
        case ErrorKind::NotValidated: return "NotValidated";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::InvalidSize: return "InvalidSize";
        case ErrorKind::NegativeMass: return "NegativeMass";
        case ErrorKind::UnknownKind: return "UnknownKind";
        case ErrorKind::EvaluatorFailure: return "EvaluatorFailure";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::Config: return "Config";
    }
    return "Unknown";
}

OmegaParams OmegaParams::for_norm(double theta, double sigma, double c, double norm) {
    OmegaParams p;
    p.theta = theta;
    p.sigma = sigma;
    p.c = c;
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw Error(ErrorKind::InvalidParams, "reference norm must be positive and finite");
    }
    p.kappa = theta / norm;
    p.validate();
    return p;
}

void OmegaParams::validate() const {
    if (!(theta > 0.0 && theta < 1.0)) throw Error(ErrorKind::InvalidParams, "theta must lie in (0,1)");
    if (!(sigma > 0.0 && sigma < 1.0)) throw Error(ErrorKind::InvalidParams, "sigma must lie in (0,1)");
    if (!(c > 1.0) || !std::isfinite(c)) throw Error(ErrorKind::InvalidParams, "c must exceed 1");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw Error(ErrorKind::InvalidParams, "kappa must be positive");
}

CertifiedConstants CertifiedConstants::make(const OmegaParams& p, double gamma, double theta_star) {
    p.validate();
    const double gamma_max = (p.c - 1.0) / (p.c + 1.0);
    if (!(gamma > 0.0 && gamma < gamma_max)) {
        throw Error(ErrorKind::InvalidParams, "gamma must lie in (0, (c-1)/(c+1))");
    }
    if (!(theta_star > 0.0 && theta_star < (1.0 - gamma) * p.theta)) {
        throw Error(ErrorKind::InvalidParams, "theta_star must lie in (0, (1-gamma) theta)");
    }
    CertifiedConstants k;
    k.gamma = gamma;
    k.theta_star = theta_star;
    k.c_star = p.c - (1.0 + p.c) * gamma;
    return k;
}

CertifiedConstants CertifiedConstants::make(const OmegaParams& p, double gamma) {
    return make(p, gamma, 0.95 * (1.0 - gamma) * p.theta);
}

CMatrix identity(Eigen::Index m) { return CMatrix::Identity(m, m); }

void check_matrix(const CMatrix& a, const char* what) {
    if (a.rows() < 1 || a.rows() != a.cols()) {
        throw Error(ErrorKind::DimensionMismatch, std::string(what) + " must be square with dim >= 1");
    }
    if (!a.allFinite()) {
        throw Error(ErrorKind::InvalidParams, std::string(what) + " has non-finite entries");
    }
}

namespace {

double power_iteration_norm(const CMatrix& a) {
    const Eigen::Index n = a.cols();
    Eigen::VectorXcd v = Eigen::VectorXcd::Constant(n, cplx(1.0, 0.0));
    // Deterministic, non-symmetric start to avoid orthogonality to the top vector.
    for (Eigen::Index i = 0; i < n; ++i) v(i) += cplx(0.01 * static_cast<double>(i % 7), 0.003 * static_cast<double>(i));
    v.normalize();
    double prev = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Eigen::VectorXcd w = a.adjoint() * (a * v);
        const double lambda = w.norm();
        if (lambda == 0.0) return 0.0;
        v = w / lambda;
        if (std::abs(lambda - prev) <= 1e-12 * lambda) return std::sqrt(lambda);
        prev = lambda;
    }
    return std::sqrt(prev);
}

}  // namespace

double op_norm(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    if (a.rows() == 1 && a.cols() == 1) return std::abs(a(0, 0));
    if (a.rows() <= 64 && a.cols() <= 64) {
        Eigen::JacobiSVD<CMatrix> svd(a);
        return svd.singularValues()(0);
    }
    return power_iteration_norm(a);
}

bool try_inverse(const CMatrix& a, CMatrix& out) {
    if (a.rows() != a.cols() || a.rows() == 0 || !a.allFinite()) return false;
    if (a.rows() == 1) {
        if (a(0, 0) == cplx(0.0, 0.0)) return false;
        out = CMatrix::Constant(1, 1, 1.0 / a(0, 0));
        return std::isfinite(std::abs(out(0, 0)));
    }
    Eigen::PartialPivLU<CMatrix> lu(a);
    // Exact spectral norm for small inputs; the infinity norm (within sqrt(n)
    // of it) keeps large Monte Carlo resolvents cheap.
    const double scale = a.rows() <= 64 ? op_norm(a) : a.cwiseAbs().rowwise().sum().maxCoeff();
    if (scale == 0.0) return false;
    const auto& packed = lu.matrixLU();
    for (Eigen::Index i = 0; i < packed.rows(); ++i) {
        if (std::abs(packed(i, i)) < 1e-13 * scale) return false;
    }
    out = lu.inverse();
    return out.allFinite();
}

CMatrix inverse(const CMatrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw Error(ErrorKind::DimensionMismatch, "inverse of a non-square matrix");
    }
    CMatrix out;
    if (!try_inverse(a, out)) throw Error(ErrorKind::Singular, "matrix not invertible at working precision");
    return out;
}

double neumann_inverse_bound(const CMatrix& x, const CMatrix& y, double sigma_frac) {
    if (x.rows() != y.rows() || x.cols() != y.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "neumann_inverse_bound operands differ in size");
    }
    if (!(sigma_frac > 0.0 && sigma_frac < 1.0)) {
        throw Error(ErrorKind::InvalidParams, "sigma_frac must lie in (0,1)");
    }
    const double xinv_norm = op_norm(inverse(x));
    const double dist = op_norm(x - y);
    if (!(dist * xinv_norm < sigma_frac)) {
        throw Error(ErrorKind::PreconditionFailed, "||x - y|| >= sigma_frac / ||x^-1||");
    }
    const double bound = xinv_norm / (1.0 - sigma_frac);
    CMatrix yinv;
    if (!try_inverse(y, yinv) || op_norm(yinv) > bound * (1.0 + 1e-12)) {
        throw Error(ErrorKind::PreconditionFailed, "perturbation bound violated numerically");
    }
    return bound;
}

bool in_omega(const CMatrix& b, const OmegaParams& p) {
    CMatrix binv;
    if (!try_inverse(b, binv)) return false;
    const double ninv = op_norm(binv);
    const double nb = op_norm(b);
    return ninv < p.kappa * (1.0 - kOmegaGuard) && nb * ninv < p.c * (1.0 - kOmegaGuard);
}

CMatrix lambda_diag(cplx lambda, cplx mu, Eigen::Index m) {
    if (m < 1) throw Error(ErrorKind::InvalidParams, "lambda_diag needs m >= 1");
    if (lambda == cplx(0.0) || mu == cplx(0.0)) {
        throw Error(ErrorKind::ZeroParameter, "lambda and mu must be non-zero");
    }
    CMatrix out = CMatrix::Zero(m, m);
    out(0, 0) = lambda;
    for (Eigen::Index i = 1; i < m; ++i) out(i, i) = mu;
    return out;
}

bool annulus_contains(cplx lambda, cplx mu, const OmegaParams& p) {
    const double amu = std::abs(mu);
    if (!(amu > 1.0 / p.kappa)) {
        throw Error(ErrorKind::PreconditionFailed, "|mu| must exceed 1/kappa");
    }
    const double al = std::abs(lambda);
    const double lower = std::max(1.0 / p.kappa, amu / p.c);
    // Twice the in_omega guard so that containment implies in_omega(lambda_diag(...)).
    return al > lower * (1.0 + 2.0 * kOmegaGuard) && al < p.c * amu * (1.0 - 2.0 * kOmegaGuard);
}

Polar polar_decomposition(const CMatrix& b) {
    Eigen::JacobiSVD<CMatrix> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const CMatrix& w = svd.matrixU();
    const CMatrix& v = svd.matrixV();
    Polar out;
    out.unitary = w * v.adjoint();
    out.positive = v * svd.singularValues().cast<cplx>().asDiagonal() * v.adjoint();
    return out;
}

CMatrix unitary_power(const CMatrix& u, double t) {
    // A unitary matrix is normal, so its complex Schur form is diagonal up to roundoff.
    Eigen::ComplexSchur<CMatrix> schur(u);
    const CMatrix& q = schur.matrixU();
    const CMatrix& tri = schur.matrixT();
    Eigen::VectorXcd d(tri.rows());
    for (Eigen::Index i = 0; i < tri.rows(); ++i) {
        const cplx z = tri(i, i);
        d(i) = std::pow(std::abs(z), t) * std::exp(cplx(0.0, t * std::arg(z)));
    }
    return q * d.asDiagonal() * q.adjoint();
}

CMatrix positive_power(const CMatrix& p, double t) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(p);
    Eigen::VectorXd ev = eig.eigenvalues();
    Eigen::VectorXcd d(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) d(i) = std::pow(std::max(ev(i), 0.0), t);
    return eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().adjoint();
}

CMatrix omega_path(const CMatrix& b1, const CMatrix& b2, double t) {
    check_matrix(b1, "b1");
    check_matrix(b2, "b2");
    if (b1.rows() != b2.rows()) throw Error(ErrorKind::DimensionMismatch, "path endpoints differ in size");
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidParams, "t must lie in [0,1]");
    CMatrix scratch;
    if (!try_inverse(b1, scratch) || !try_inverse(b2, scratch)) {
        throw Error(ErrorKind::Singular, "path endpoint not invertible");
    }
    if (t == 0.0) return b1;
    if (t == 1.0) return b2;
    const Polar p1 = polar_decomposition(b1);
    const Polar p2 = polar_decomposition(b2);
    return unitary_power(p1.unitary, 1.0 - t) * positive_power(p1.positive, 1.0 - t) *
           unitary_power(p2.unitary, t) * positive_power(p2.positive, t);
}

bool is_hermitian(const CMatrix& a, double tol) {
    if (a.rows() != a.cols()) return false;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

}  // namespace freebe

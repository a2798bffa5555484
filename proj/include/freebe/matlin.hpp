#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

#include "freebe/error.hpp"

namespace freebe {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;

/// Relative guard band applied to the strict inequalities defining the
/// Omega domains, so that floating-point borderline inputs are rejected.
inline constexpr double kOmegaGuard = 1e-12;

/// Parameters of the domain
///   Omega = { b invertible : ||b^-1|| < kappa, ||b|| ||b^-1|| < c }
/// together with theta and sigma used by the certification inequalities.
struct OmegaParams {
    double theta = 0.2;
    double sigma = 0.9;
    double c = 2.0;
    double kappa = 0.1;

    /// kappa = theta / norm, the choice made for an operator of norm `norm`.
    static OmegaParams for_norm(double theta, double sigma, double c, double norm);

    /// Throws InvalidParams unless theta, sigma in (0,1), c > 1, kappa > 0.
    void validate() const;
};

/// Shrunken constants used for the subordination argument:
/// c_star = c - (1 + c) gamma and theta_star < (1 - gamma) theta.
struct CertifiedConstants {
    double gamma = 0.1;
    double theta_star = 0.17;
    double c_star = 1.7;

    static CertifiedConstants make(const OmegaParams& p, double gamma, double theta_star);
    /// theta_star defaults to 95% of its admissible upper bound.
    static CertifiedConstants make(const OmegaParams& p, double gamma);
};

CMatrix identity(Eigen::Index m);

/// Throws DimensionMismatch for non-square or empty input and
/// InvalidParams for non-finite entries.
void check_matrix(const CMatrix& a, const char* what = "matrix");

/// Largest singular value.
double op_norm(const CMatrix& a);

/// LU with partial pivoting; Singular when a pivot drops below 1e-13 times
/// the scale of a (op_norm up to size 64, the infinity norm beyond).
CMatrix inverse(const CMatrix& a);

/// Same as inverse() but returns false instead of throwing.
bool try_inverse(const CMatrix& a, CMatrix& out);

/// Neumann perturbation bound: if ||x - y|| < sigma_frac / ||x^-1|| then y is
/// invertible with ||y^-1|| <= ||x^-1|| / (1 - sigma_frac). Returns that bound
/// after checking it against the computed inverse of y.
double neumann_inverse_bound(const CMatrix& x, const CMatrix& y, double sigma_frac);

bool in_omega(const CMatrix& b, const OmegaParams& p);

/// diag(lambda, mu, ..., mu) of size m.
CMatrix lambda_diag(cplx lambda, cplx mu, Eigen::Index m);

/// max{1/kappa, |mu|/c} < |lambda| < c |mu|; requires |mu| > 1/kappa.
bool annulus_contains(cplx lambda, cplx mu, const OmegaParams& p);

/// gamma(t) = U1^{1-t} P1^{1-t} U2^t P2^t built from the polar decompositions
/// b1 = U1 P1 and b2 = U2 P2.
CMatrix omega_path(const CMatrix& b1, const CMatrix& b2, double t);

struct Polar {
    CMatrix unitary;
    CMatrix positive;
};
Polar polar_decomposition(const CMatrix& b);

/// Principal fractional power of a unitary matrix (eigenphases in (-pi, pi]).
CMatrix unitary_power(const CMatrix& u, double t);
/// Fractional power of a Hermitian positive-definite matrix.
CMatrix positive_power(const CMatrix& p, double t);

bool is_hermitian(const CMatrix& a, double tol = 1e-12);

}  // namespace freebe

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "freebe/matlin.hpp"
#include "freebe/opmodel.hpp"

namespace freebe {

/// Operator-valued semicircular element a0 + s with covariance map eta.
struct SemicircularSpec {
    CMatrix a0;
    CovarianceMap eta;

    /// Semicircular limit of a model: same a0 and covariance.
    static SemicircularSpec from_model(const OperatorModel& model);
    Eigen::Index m() const { return a0.rows(); }
    void validate() const;
    /// ||E[s^* s]|| = ||sum a_k^* a_l sigma_kl||.
    double alpha_norm() const;
    /// 2 ||eta||^{1/2}, an upper bound for ||s||.
    double norm_bound() const;
};

struct SolveOptions {
    double tol = 1e-12;
    int max_iter = 10000;
    /// w <- (1 - damping) w + damping F(w); 1 is the plain iteration.
    double damping = 1.0;
    std::optional<CMatrix> initial;
    /// Domain parameters used to set SolveReport::certified.
    std::optional<OmegaParams> omega;
};

struct SolveReport {
    CMatrix w;
    int iterations = 0;
    double residual = 0.0;
    bool certified = false;
    std::string domain_note;
    /// ||w_{k+1} - w_k|| for the last (up to 16) steps.
    std::vector<double> last_steps;
};

/// Residual ||(b - a0) w - 1 - eta(w) w||.
double fixed_point_residual(const SemicircularSpec& spec, const CMatrix& b, const CMatrix& w);

/// Solves (b - a0) w = 1 + eta(w) w by w <- ((b - a0) - eta(w))^{-1} starting
/// from (b - a0)^{-1}. Converged when the step is below tol max(1, ||w||) and
/// the residual below 10 tol.
///
/// Errors: Singular, NoConvergence, InvalidParams.
SolveReport solve_cauchy(const SemicircularSpec& spec, const CMatrix& b, const SolveOptions& opts = {});

/// theta/(1-theta) < sigma min{1/c, alpha_norm / ||eta||} and b - a0 in Omega.
bool certify_domain(const SemicircularSpec& spec, const CMatrix& b, const OmegaParams& p, double alpha_norm);

/// Scalar semicircle G(z) = (z - sqrt(z^2 - 4 var)) / (2 var), branch G ~ 1/z.
/// Errors: InvalidParams (variance <= 0), OnSupport.
cplx scalar_semicircle_cauchy(double variance, cplx z);

/// Radius of the ball Omega' = {||w|| < theta/(1-theta) / ||s||-bound}.
double omega_prime_radius(const SemicircularSpec& spec, const OmegaParams& p);

/// Runs the solver from `starts` random points of Omega' and returns the
/// largest pairwise distance between the fixed points found.
double uniqueness_probe(const SemicircularSpec& spec, const CMatrix& b, int starts, std::uint64_t seed,
                        const OmegaParams& p, const SolveOptions& opts = {});

}  // namespace freebe

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "freebe/linpoly.hpp"
#include "freebe/opmodel.hpp"
#include "freebe/scsolver.hpp"

namespace freebe {

/// Grid of evaluation points b.
struct GridSpec {
    /// b = z I.
    std::vector<cplx> scalar;
    /// b = Lambda(lambda, mu).
    std::vector<std::pair<cplx, cplx>> lambda_mu;
    /// Additional points rejection-sampled from the conservative Omega* domain.
    int random_points = 0;
    /// Scale scalar and (lambda, mu) entries by 1 / kappa* before use.
    bool relative = false;
};

struct GridPoint {
    std::string id;
    CMatrix b;
};

/// Norm estimates and domain radii for S_n of a model.
struct DomainConstants {
    double est_limit = 0.0;   // ||s|| estimate (semicircular limit)
    double est_sum = 0.0;     // ||S_n|| estimate
    double est_leave = 0.0;   // ||S_n^[i]|| estimate
    double kappa = 0.0;       // theta min{1/est}
    double kappa_star = 0.0;  // theta* min{1/est}
};

/// kappa_n and kappa_n^* with ||S_n||, ||S_n^[i]|| replaced by moment-based
/// estimates floored by ||alpha||^{1/2} and sqrt(1 - 1/n) ||alpha||^{1/2}.
DomainConstants domain_constants(const OperatorModel& model, long n, const OmegaParams& p,
                                 const CertifiedConstants& k, double safety = 1.1);

/// Semicircular model with the same a0, coefficients and covariance.
OperatorModel semicircular_limit(const OperatorModel& model);

struct RateExperiment {
    OperatorModel model;
    std::vector<long> n_list;
    GridSpec grid;
    OmegaParams params{};
    double gamma = 0.1;
    double theta_star = 0.0;  // <= 0: default 0.95 (1 - gamma) theta
    double series_tol = 1e-14;
    int max_order = 512;
    double solver_tol = 1e-13;
    int solver_max_iter = 10000;
    std::uint64_t seed = 1;
    int workers = 1;

    CertifiedConstants constants() const;
    /// Omega* parameters for the whole n_list: theta*, sigma, c*, min_n kappa_n^*.
    OmegaParams star_params() const;
};

/// Grid points in a fixed order; throws DomainError if a listed point is not
/// in Omega* (star_params).
std::vector<GridPoint> build_grid(const RateExperiment& e);

struct RateRow {
    long n = 0;
    std::string b_id;
    double norm_b = 0.0;
    double diff = 0.0;
    double scaled = 0.0;
    double theta_norm = 0.0;
    double subord_resid = 0.0;
    bool lambda_in_omega = false;  // Lambda_n(b) in Omega_n
    bool ok = true;
    std::string error;
};

struct RateResult {
    std::vector<RateRow> rows;
    double slope = 0.0;
    double slope_ci = 0.0;
    double max_scaled = 0.0;
    /// Per entry of n_list: max over grid of scaled and of sqrt(n) ||Theta_n||.
    std::vector<double> max_scaled_by_n;
    std::vector<double> max_theta_by_n;
    std::vector<double> median_diff_by_n;
};

/// Rows in (n, grid) order; per-point failures are recorded in the row.
RateResult run_rate(const RateExperiment& e);

/// Least-squares slope of log y vs log x over pairs with x >= min_x and
/// y > 0, with the 95% half-width 1.96 SE.
std::pair<double, double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double min_x);

/// True when the last value is at most factor * max of the first three.
bool no_increasing_trend(const std::vector<double>& values, double factor = 1.2);

struct EngineOptions {
    double series_tol = 1e-14;
    int max_order = 512;
    double solver_tol = 1e-13;
    int solver_max_iter = 10000;
};

/// G_n(b) = E[(b - S_n)^{-1}] by the certified series.
CMatrix sum_cauchy(const OperatorModel& model, long n, const CMatrix& b, const EngineOptions& o = {});
/// Theta_n(b) = (b - a0) G_n - 1 - eta(G_n) G_n.
CMatrix theta_n(const OperatorModel& model, long n, const CMatrix& b, const EngineOptions& o = {});
/// Lambda_n(b) = b - Theta_n(b) G_n(b)^{-1}.
CMatrix lambda_n(const OperatorModel& model, long n, const CMatrix& b, const EngineOptions& o = {});
/// ||G(Lambda_n(b)) - G_n(b)|| with G the semicircular limit transform.
double subordination_check(const OperatorModel& model, long n, const CMatrix& b, const EngineOptions& o = {});

struct PolyRateRow {
    long n = 0;
    std::string z_id;
    cplx z;
    double diff = 0.0;
    double scaled = 0.0;
    cplx g_n;
    cplx g_limit;
    bool ok = true;
    std::string error;
};

struct PolyRateResult {
    std::vector<PolyRateRow> rows;
    double slope = 0.0;
    double slope_ci = 0.0;
    double max_scaled = 0.0;
    double radius = 0.0;
};

/// |pi(G_{S_n}(Lambda(z,1))) - pi(G_s(Lambda(z,1)))| over n and |z| > R.
PolyRateResult poly_rate(const NcPoly& p, const FreeFamilySpec& family, const std::vector<long>& n_list,
                         const std::vector<cplx>& z_grid, const CauchyEvalConfig& cfg, int workers = 1);

struct McEstimate {
    CMatrix value;
    double stderr_ = 0.0;
};

/// Monte Carlo estimate of E[(b (x) I_N - S_n(A))^{-1}] with (id (x) tr_N).
/// Semicircular variables become GUE matrices; two-atom laws become
/// Haar-rotated diagonal matrices. Deterministic given seed.
/// Errors: InvalidSize (N < 50 or samples < 1), InvalidParams (moment-list laws).
McEstimate mc_estimate(const OperatorModel& model, long n, const CMatrix& b, int N, int samples,
                       std::uint64_t seed, int workers = 1);

/// Max residuals of the two resolvent identities relating R_n and R_n^[i]
/// on one matrix-model sample (i is 1-based). Errors: InvalidParams, Singular.
std::pair<double, double> resolvent_identity_check(const OperatorModel& model, long n, long i, const CMatrix& b,
                                                   int N, std::uint64_t seed);

/// Haar unitary of size N (QR of complex Ginibre with phase correction).
CMatrix haar_unitary(int N, std::uint64_t seed);

}  // namespace freebe

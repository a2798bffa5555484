#pragma once

#include <string>
#include <vector>

#include "freebe/freemoments.hpp"
#include "freebe/matlin.hpp"

namespace freebe {

/// X = a0 (x) 1 + sum_k a_k (x) x^(k) over M_m(C), with the scalar family
/// (x^(1), ..., x^(d)) described by `family`.
struct OperatorModel {
    CMatrix a0;
    std::vector<CMatrix> coeffs;
    FreeFamilySpec family;

    static OperatorModel make(CMatrix a0, std::vector<CMatrix> coeffs, FreeFamilySpec family);
    /// a0 = 0.
    static OperatorModel centered(std::vector<CMatrix> coeffs, FreeFamilySpec family);

    Eigen::Index m() const { return a0.rows(); }
    int d() const { return static_cast<int>(coeffs.size()); }
    void validate() const;
    /// a0 and every a_k Hermitian.
    bool is_selfadjoint() const;
    /// Coefficients of the free base variables: c_j = sum_k C_kj a_k.
    std::vector<CMatrix> base_coefficients() const;
};

/// S_n = n^{-1/2} sum_{i<=n} X_i for i.i.d. free copies X_i of the centered
/// part of `base`; a0 is carried over unscaled.
struct SumModel {
    OperatorModel base;
    long n = 1;

    OperatorModel realized() const;
};

/// eta(b) = sum_{k,l} a_k b a_l sigma_kl.
struct CovarianceMap {
    std::vector<CMatrix> coeffs;
    RMatrix sigma;

    static CovarianceMap from_model(const OperatorModel& model);
    Eigen::Index m() const { return coeffs.empty() ? 0 : coeffs.front().rows(); }
};

CMatrix apply_eta(const CovarianceMap& map, const CMatrix& b);

/// M = sum_{k,l} ||a_k|| ||a_l|| |sigma_kl|, so that ||eta(b)|| <= M ||b||.
double eta_bound(const CovarianceMap& map);

/// alpha = E[X^* X] = a0^* a0 + sum_{k,l} a_k^* a_l sigma_kl.
CMatrix alpha(const OperatorModel& model);

/// Upper estimate of ||X||: ||a0|| + sum_j ||c_j|| est(y_j), floored by
/// ||alpha||^{1/2}. Each est(y_j) comes from norm_upper_estimate on moments of
/// order min(16, available).
double model_norm_estimate(const OperatorModel& model, double safety = 1.1);
/// Same without a0 (the centered part only).
double centered_norm_estimate(const OperatorModel& model, double safety = 1.1);

struct SeriesOptions {
    double tol = 1e-10;
    int max_order = kDefaultMaxOrder;
    double safety = 1.1;
    /// Largest k for which ||(B X)^k|| is bounded word by word when choosing
    /// the geometric rate of the tail certificate.
    int max_certificate_power = 6;
};

struct SeriesResult {
    CMatrix value;
    double tail_bound = 0.0;
    int order = 0;       // J, the last term included
    double rate = 0.0;   // certified geometric rate per term, q_k^{1/k}
    int power = 1;       // k used by the certificate
    std::vector<double> term_norms;
};

/// G(b) = E[(b - X)^{-1}] = sum_j E[(B X')^j B] with B = (b - a0)^{-1} and X'
/// the centered part. Terms are assembled by an operator-valued first-block
/// recursion over noncrossing partitions; the truncation order J is the
/// smallest one whose certified geometric tail is below tol.
///
/// Errors: Singular (b - a0 not invertible), Divergent (certified rate >= 1 or
/// terms exceed the certificate), OrderExceeded (J beyond max_order or the
/// available moment data).
SeriesResult cauchy_series(const OperatorModel& model, const CMatrix& b, const SeriesOptions& opts = {});
SeriesResult cauchy_series(const SumModel& model, const CMatrix& b, const SeriesOptions& opts = {});

/// The j-th Neumann term E[(B X')^j B] for j = 0..order, without truncation
/// control. Exposed for diagnostics and tests.
std::vector<CMatrix> neumann_terms(const OperatorModel& model, const CMatrix& b, int order);

enum class Membership { Member, Unknown };

struct ResolventCertificate {
    Membership status = Membership::Unknown;
    std::string certificate;  // "norm" when certified
    double margin = 0.0;      // 1 - ||b^-1|| * norm_estimate
};

/// Sufficient condition ||b^-1|| < 1/||a|| for b - a to be invertible.
ResolventCertificate resolvent_member(const CMatrix& b, double norm_estimate);
ResolventCertificate resolvent_member(const OperatorModel& model, const CMatrix& b, double safety = 1.1);

}  // namespace freebe

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "freebe/freemoments.hpp"
#include "freebe/matlin.hpp"

namespace freebe {

struct NcTerm {
    cplx coeff;
    Word word;  // zero-based letters; empty word = constant
};

/// Noncommutative polynomial in self-adjoint generators x1..xd, kept in
/// canonical form: merged words, no zero coefficients, sorted by (length, word).
class NcPoly {
public:
    NcPoly() = default;
    NcPoly(int d, std::vector<NcTerm> terms);

    /// Grammar (whitespace ignored):
    ///   expr   := ['+'|'-'] term (('+'|'-') term)*
    ///   term   := factor ('*' factor)*
    ///   factor := atom ['^' integer]
    ///   atom   := number ['i'] | 'i' | 'x' integer | '(' expr ')'
    /// Word order is left to right. Throws ParseError.
    static NcPoly parse(std::string_view text);
    static NcPoly constant(cplx c);
    static NcPoly generator(int letter);

    int d() const { return d_; }
    int degree() const;
    const std::vector<NcTerm>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    NcPoly adjoint() const;
    bool is_selfadjoint(double tol = 1e-14) const;

    NcPoly operator+(const NcPoly& o) const;
    NcPoly operator-(const NcPoly& o) const;
    NcPoly operator*(const NcPoly& o) const;
    NcPoly scaled(cplx c) const;

    /// p(A_1, ..., A_d) for square matrices of a common size.
    CMatrix evaluate(const std::vector<CMatrix>& subs) const;
    std::string to_string() const;

private:
    void canonicalize();
    int d_ = 0;
    std::vector<NcTerm> terms_;
};

/// L = a0 (x) 1 + sum_k a_k (x) x_k. The contract: the (1,1) corner of
/// (Lambda(lambda, 1) - L)^{-1} equals (lambda - p)^{-1}.
struct LinearPencil {
    CMatrix a0;
    std::vector<CMatrix> coeffs;
    int degree = 1;  // degree of the linearized polynomial

    Eigen::Index m() const { return a0.rows(); }
    int d() const { return static_cast<int>(coeffs.size()); }
    bool is_hermitian() const;
    /// L(A) = a0 (x) I_N + sum_k a_k (x) A_k.
    CMatrix evaluate(const std::vector<CMatrix>& subs) const;
};

/// Monomial-block linearization. Constant and linear terms enter the corner
/// entry; every longer monomial adds a block whose Schur complement reproduces
/// it. Self-adjoint inputs get a symmetric pencil with Hermitian coefficients.
/// Throws ZeroPolynomial.
LinearPencil linearize(const NcPoly& p);

/// Max over trials of ||(lambda - p(A))^{-1} - corner((Lambda(lambda,1) (x) I - L(A))^{-1})||
/// for random Hermitian N x N substitutions and |Im lambda| >= 1.
double validate_pencil(const NcPoly& p, const LinearPencil& pencil, int trials, int size, std::uint64_t seed);

/// Max residual of the rescaling identity
///   corner((Lambda(lambda, mu) - L(A))^{-1}) = mu^{g-1} corner((Lambda(lambda mu^{g-1}, 1) - L(A))^{-1})
/// over random Hermitian substitutions.
double validate_mu_identity(const LinearPencil& pencil, int trials, int size, std::uint64_t seed);

/// Tolerance below which validate_mu_identity counts as passed.
inline constexpr double kMuIdentityTol = 1e-10;

enum class CauchyEngine { FixedPoint, Series };

struct CauchyEvalConfig {
    CauchyEngine engine = CauchyEngine::FixedPoint;
    double tol = 1e-12;
    /// Exterior radius; <= 0 selects default_exterior_radius.
    double R = 0.0;
    /// Series engine: evaluate S_n of the family (n = 1 is the family itself).
    long n = 1;
    int max_order = 256;
    int max_iter = 10000;
    OmegaParams omega{};
    double gamma = 0.1;
};

/// (1/c*) |mu|^g with |mu| = 2 (1 + sum_k ||a_k||).
double default_exterior_radius(const LinearPencil& pencil, const CauchyEvalConfig& cfg);

/// tau((lambda - p)^{-1}) read off the (1,1) entry of the matrix-valued
/// transform at Lambda(lambda, 1). FixedPoint evaluates the semicircular limit
/// with the family's covariance (the family itself when it is semicircular);
/// Series evaluates S_n by the certified Neumann series.
/// Errors: DomainError (|lambda| <= R for the series engine, or real lambda
/// inside R for the fixed-point engine), engine errors.
cplx scalar_cauchy_from_pencil(const LinearPencil& pencil, const FreeFamilySpec& family, cplx lambda,
                               const CauchyEvalConfig& cfg);

/// G_P(lambda mu^{g-1}) computed as pi(G(Lambda(lambda, mu))) / mu^{g-1}.
/// Errors: NotValidated, DomainError, engine errors.
cplx mu_rescaled_eval(const LinearPencil& pencil, const FreeFamilySpec& family, cplx lambda, cplx mu, int g,
                      const CauchyEvalConfig& cfg);

/// Matrix-valued transform at b for the pencil (engine as in cfg).
CMatrix pencil_cauchy(const LinearPencil& pencil, const FreeFamilySpec& family, const CMatrix& b,
                      const CauchyEvalConfig& cfg);

}  // namespace freebe

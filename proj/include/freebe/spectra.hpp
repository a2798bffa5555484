#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "freebe/linpoly.hpp"
#include "freebe/matlin.hpp"

namespace freebe {

using CauchyEvaluator = std::function<cplx(cplx)>;

inline const std::vector<double>& default_eps_schedule() {
    static const std::vector<double> eps{1e-2, 5e-3, 2.5e-3};
    return eps;
}

struct GridDensity {
    std::vector<double> x;
    std::vector<double> values;
    std::vector<double> eps;
    /// Grid indices where the evaluator failed (values there are NaN).
    std::vector<std::size_t> failed;
    std::vector<std::string> failure_messages;
};

struct Cdf {
    std::vector<double> x;
    std::vector<double> values;
    /// Evaluate by linear interpolation, constant beyond the grid ends.
    double operator()(double t) const;
};

/// -(1/pi) Im G(x + i eps) extrapolated to eps = 0 by a least-squares line in
/// eps over the schedule; negative results are clamped to 0. The evaluator is
/// called sweep by sweep (one eps at a time, x ascending) so stateful
/// evaluators can warm-start.
GridDensity density_from_cauchy(const CauchyEvaluator& g, const std::vector<double>& grid,
                                const std::vector<double>& eps = default_eps_schedule());

/// Trapezoid integral renormalized to end at 1. Throws NegativeMass when the
/// raw mass is below 0.5, EvaluatorFailure when the density has failed points.
Cdf cdf_from_density(const GridDensity& d);

/// sup |F1 - F2| over the merged grid.
double kolmogorov(const Cdf& f1, const Cdf& f2);

enum class OracleKind { Semicircle, ScSquare, TwoAtom };

struct OracleLaw {
    OracleKind kind = OracleKind::Semicircle;
    double variance = 1.0;
    double atoms[2] = {2.0, -0.5};
    double weights[2] = {0.2, 0.8};

    /// "semicircle", "sc_square" or "two_atom"; throws UnknownKind.
    static OracleLaw from_name(std::string_view name);
};

/// Closed-form densities; sc_square is the law of s^2 for standard s. The
/// two-atom law has no density and yields 0.
double oracle_density(const OracleLaw& law, double x);
double oracle_cdf(const OracleLaw& law, double x);
/// Cauchy transform of the oracle law.
cplx oracle_cauchy(const OracleLaw& law, cplx z);

/// Evaluator z -> tau((z - p)^{-1}) for a pencil via the fixed-point engine at
/// Lambda(Re z, 1) + i Im z I, damped and warm-started from the previous call.
/// Values are outside the certified Omega domain.
CauchyEvaluator pencil_evaluator(const LinearPencil& pencil, const FreeFamilySpec& family, double tol = 1e-11,
                                 int max_iter = 500000);

/// Polar mesh of D_R^+ = {Im z > 0, |z| > R}: radii geometric in (R, r_max],
/// angles uniform in (0, pi).
std::vector<cplx> dr_plus_mesh(double R, double r_max, int radii, int angles);

/// max over the mesh of |G1 - G2|.
double dr_plus_sup(const CauchyEvaluator& g1, const CauchyEvaluator& g2, const std::vector<cplx>& mesh);

/// Empirical modulus of continuity sup_x |F(x + t) - F(x)| / t on the grid.
double lipschitz_estimate(const Cdf& f, double t);

}  // namespace freebe

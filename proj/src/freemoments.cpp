#include "freebe/freemoments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace freebe {

ScalarLaw ScalarLaw::semicircular(double variance) {
    ScalarLaw law;
    law.kind = LawKind::Semicircular;
    law.variance = variance;
    law.validate();
    return law;
}

ScalarLaw ScalarLaw::bernoulli() {
    ScalarLaw law;
    law.kind = LawKind::Bernoulli;
    return law;
}

ScalarLaw ScalarLaw::two_atom(double a, double b, double pa) {
    ScalarLaw law;
    law.kind = LawKind::TwoAtom;
    law.atoms[0] = a;
    law.atoms[1] = b;
    law.weights[0] = pa;
    law.weights[1] = 1.0 - pa;
    law.validate();
    return law;
}

ScalarLaw ScalarLaw::from_moments(std::vector<double> moments) {
    ScalarLaw law;
    law.kind = LawKind::Moments;
    law.custom_moments = std::move(moments);
    law.validate();
    return law;
}

int ScalarLaw::max_order() const {
    return kind == LawKind::Moments ? static_cast<int>(custom_moments.size()) : kClosedFormOrderCap;
}

void ScalarLaw::validate() const {
    switch (kind) {
        case LawKind::Semicircular:
            if (!(variance > 0.0) || !std::isfinite(variance)) {
                throw Error(ErrorKind::InvalidParams, "semicircular variance must be positive");
            }
            break;
        case LawKind::Bernoulli:
            break;
        case LawKind::TwoAtom: {
            if (!(weights[0] > 0.0 && weights[0] < 1.0)) {
                throw Error(ErrorKind::InvalidParams, "two-atom weight must lie in (0,1)");
            }
            const double mean = weights[0] * atoms[0] + weights[1] * atoms[1];
            const double scale = std::max(std::abs(atoms[0]), std::abs(atoms[1]));
            if (std::abs(mean) > 1e-12 * std::max(1.0, scale)) {
                throw Error(ErrorKind::InvalidParams, "two-atom law must be centered");
            }
            if (atoms[0] == atoms[1]) throw Error(ErrorKind::InvalidParams, "two-atom law needs distinct atoms");
            break;
        }
        case LawKind::Moments:
            if (custom_moments.size() < 2) throw Error(ErrorKind::InvalidParams, "moment list needs m1 and m2");
            for (double v : custom_moments) {
                if (!std::isfinite(v)) throw Error(ErrorKind::InvalidParams, "non-finite moment");
            }
            if (custom_moments[0] != 0.0) throw Error(ErrorKind::InvalidParams, "moment list must be centered (m1 = 0)");
            if (!(custom_moments[1] > 0.0)) throw Error(ErrorKind::InvalidParams, "moment list needs m2 > 0");
            break;
    }
}

MomentSequence ScalarLaw::moments(int order) const {
    if (order < 0) throw Error(ErrorKind::InvalidParams, "negative order");
    if (order > max_order()) throw Error(ErrorKind::OrderExceeded, "moment order exceeds available data");
    MomentSequence out;
    out.m.resize(static_cast<std::size_t>(order), 0.0);
    switch (kind) {
        case LawKind::Semicircular: {
            // m_{2k} = Catalan(k) variance^k
            double cat = 1.0;
            for (int k = 1; 2 * k <= order; ++k) {
                cat = cat * 2.0 * (2.0 * k - 1.0) / (k + 1.0);
                out.m[static_cast<std::size_t>(2 * k - 1)] = cat * std::pow(variance, k);
            }
            break;
        }
        case LawKind::Bernoulli:
            for (int k = 2; k <= order; k += 2) out.m[static_cast<std::size_t>(k - 1)] = 1.0;
            break;
        case LawKind::TwoAtom: {
            double pa = 1.0, pb = 1.0;
            for (int k = 1; k <= order; ++k) {
                pa *= atoms[0];
                pb *= atoms[1];
                out.m[static_cast<std::size_t>(k - 1)] = weights[0] * pa + weights[1] * pb;
            }
            out.m[0] = 0.0;
            break;
        }
        case LawKind::Moments:
            std::copy_n(custom_moments.begin(), order, out.m.begin());
            break;
    }
    return out;
}

namespace {

// Free cumulants of p delta_a + (1-p) delta_b from the closed-form R-transform
//   R(w) = (w s - 1 + sqrt(1 + beta w + gamma w^2)) / (2 w),
// s = a + b, beta = 2 s - 4 (p b + (1-p) a), gamma = s^2 - 4 a b.
// Avoids the cancellation of the generic moment recursion at high order.
std::vector<double> two_atom_cumulants(double a, double b, double p, int order) {
    const double s = a + b;
    const double beta = 2.0 * s - 4.0 * (p * b + (1.0 - p) * a);
    const double gamma = s * s - 4.0 * a * b;
    const auto len = static_cast<std::size_t>(order) + 1;
    std::vector<double> f(len, 0.0);
    f[0] = 1.0;
    for (std::size_t n = 1; n < len; ++n) {
        double dn = n == 1 ? beta : (n == 2 ? gamma : 0.0);
        for (std::size_t i = 1; i < n; ++i) dn -= f[i] * f[n - i];
        f[n] = dn / 2.0;
    }
    std::vector<double> k(static_cast<std::size_t>(order), 0.0);
    for (std::size_t n = 1; n < len; ++n) k[n - 1] = (n == 1 ? s + f[1] : f[n]) / 2.0;
    return k;
}

}  // namespace

CumulantSequence ScalarLaw::cumulants(int order) const {
    if (order < 0) throw Error(ErrorKind::InvalidParams, "negative order");
    if (order > max_order()) throw Error(ErrorKind::OrderExceeded, "cumulant order exceeds available data");
    CumulantSequence out;
    switch (kind) {
        case LawKind::Semicircular:
            out.k.assign(static_cast<std::size_t>(order), 0.0);
            if (order >= 2) out.k[1] = variance;
            return out;
        case LawKind::Bernoulli:
            out.k = two_atom_cumulants(1.0, -1.0, 0.5, order);
            return out;
        case LawKind::TwoAtom:
            out.k = two_atom_cumulants(atoms[0], atoms[1], weights[0], order);
            return out;
        case LawKind::Moments:
            break;
    }
    return cumulants_from_moments(moments(order));
}

double ScalarLaw::second_moment() const {
    switch (kind) {
        case LawKind::Semicircular: return variance;
        case LawKind::Bernoulli: return 1.0;
        case LawKind::TwoAtom: return weights[0] * atoms[0] * atoms[0] + weights[1] * atoms[1] * atoms[1];
        case LawKind::Moments: return custom_moments.at(1);
    }
    return 0.0;
}

std::string ScalarLaw::describe() const {
    std::ostringstream os;
    switch (kind) {
        case LawKind::Semicircular: os << "semicircular(" << variance << ")"; break;
        case LawKind::Bernoulli: os << "bernoulli"; break;
        case LawKind::TwoAtom:
            os << "two_atom(" << atoms[0] << "@" << weights[0] << ", " << atoms[1] << "@" << weights[1] << ")";
            break;
        case LawKind::Moments: os << "moments[" << custom_moments.size() << "]"; break;
    }
    return os.str();
}

FreeFamilySpec FreeFamilySpec::independent(std::vector<ScalarLaw> base) {
    const auto d = static_cast<Eigen::Index>(base.size());
    return mixed(std::move(base), RMatrix::Identity(d, d));
}

FreeFamilySpec FreeFamilySpec::mixed(std::vector<ScalarLaw> base, RMatrix mixing) {
    FreeFamilySpec f;
    f.base = std::move(base);
    f.mixing = std::move(mixing);
    f.validate();
    return f;
}

int FreeFamilySpec::max_order() const {
    int order = kClosedFormOrderCap;
    for (const auto& law : base) order = std::min(order, law.max_order());
    return order;
}

void FreeFamilySpec::validate() const {
    if (base.empty()) throw Error(ErrorKind::InvalidParams, "family needs at least one base law");
    if (mixing.cols() != static_cast<Eigen::Index>(base.size()) || mixing.rows() < 1) {
        throw Error(ErrorKind::DimensionMismatch, "mixing matrix must be d x d'");
    }
    if (!mixing.allFinite()) throw Error(ErrorKind::InvalidParams, "mixing matrix has non-finite entries");
    if (clt_n < 1) throw Error(ErrorKind::InvalidParams, "clt_n must be >= 1");
    for (const auto& law : base) law.validate();
}

RMatrix FreeFamilySpec::covariance() const {
    Eigen::VectorXd var(base_dim());
    for (int j = 0; j < base_dim(); ++j) var(j) = base[static_cast<std::size_t>(j)].second_moment();
    return mixing * var.asDiagonal() * mixing.transpose();
}

std::vector<double> FreeFamilySpec::base_cumulants(int j, int order) const {
    auto k = base.at(static_cast<std::size_t>(j)).cumulants(order).k;
    if (clt_n != 1) {
        const double n = static_cast<double>(clt_n);
        for (std::size_t s = 0; s < k.size(); ++s) {
            const double order_s = static_cast<double>(s + 1);
            k[s] *= std::pow(n, 1.0 - order_s / 2.0);
        }
    }
    return k;
}

MomentSequence FreeFamilySpec::base_moments(int j, int order) const {
    if (clt_n == 1) return base.at(static_cast<std::size_t>(j)).moments(order);
    CumulantSequence k;
    k.k = base_cumulants(j, order);
    return moments_from_cumulants(k);
}

bool FreeFamilySpec::is_semicircular() const {
    return std::all_of(base.begin(), base.end(), [](const ScalarLaw& l) { return l.kind == LawKind::Semicircular; });
}

CumulantSequence cumulants_from_moments(const MomentSequence& m) {
    CumulantSequence out;
    out.k = cumulants_from_moments_t<double>(std::span<const double>(m.m));
    return out;
}

MomentSequence moments_from_cumulants(const CumulantSequence& k) {
    MomentSequence out;
    out.m = moments_from_cumulants_t<double>(std::span<const double>(k.k));
    return out;
}

FreeFamilySpec clt_cumulants(const FreeFamilySpec& f, long n) {
    if (n < 1) throw Error(ErrorKind::InvalidParams, "n must be >= 1");
    FreeFamilySpec out = f;
    out.clt_n = f.clt_n * n;
    return out;
}

double joint_moment(const FreeFamilySpec& f, const Word& w) {
    const int len = static_cast<int>(w.size());
    if (len > f.max_order()) throw Error(ErrorKind::OrderExceeded, "word longer than available moment data");
    for (int letter : w) {
        if (letter < 0 || letter >= f.dim()) throw Error(ErrorKind::InvalidParams, "word letter out of range");
    }
    std::vector<std::vector<double>> cum(static_cast<std::size_t>(f.base_dim()));
    for (int j = 0; j < f.base_dim(); ++j) cum[static_cast<std::size_t>(j)] = f.base_cumulants(j, len);
    std::vector<std::vector<double>> mix(static_cast<std::size_t>(f.dim()),
                                         std::vector<double>(static_cast<std::size_t>(f.base_dim())));
    for (int k = 0; k < f.dim(); ++k) {
        for (int j = 0; j < f.base_dim(); ++j) mix[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = f.mixing(k, j);
    }
    return joint_moment_t<double>(cum, mix, w);
}

JacobiCoefficients jacobi_from_moments(const MomentSequence& m) {
    // Chebyshev algorithm on the raw moments mu_0..mu_L: N = floor((L+1)/2)
    // pairs (alpha_k, beta_k) are determined.
    std::vector<double> mu(m.m.size() + 1);
    mu[0] = 1.0;
    std::copy(m.m.begin(), m.m.end(), mu.begin() + 1);
    const std::size_t len = mu.size();
    const std::size_t npairs = len / 2;
    JacobiCoefficients out;
    if (npairs == 0) return out;

    std::vector<double> prev2(len, 0.0);
    std::vector<double> prev(mu);
    out.alpha.push_back(mu[1] / mu[0]);
    out.beta.push_back(mu[0]);
    double scale = std::max(1.0, out.alpha[0] * out.alpha[0]);
    for (std::size_t k = 1; k < npairs; ++k) {
        std::vector<double> cur(len, 0.0);
        for (std::size_t l = k; l + k < 2 * npairs; ++l) {
            cur[l] = prev[l + 1] - out.alpha[k - 1] * prev[l] - out.beta[k - 1] * prev2[l];
        }
        const double beta = cur[k] / prev[k - 1];
        if (!(beta > 1e-10 * scale) || !std::isfinite(beta)) {
            out.terminated = true;
            break;
        }
        const double alpha = cur[k + 1] / cur[k] - prev[k] / prev[k - 1];
        out.beta.push_back(beta);
        out.alpha.push_back(alpha);
        scale = std::max({scale, beta, alpha * alpha});
        prev2 = std::move(prev);
        prev = std::move(cur);
    }
    return out;
}

double norm_upper_estimate(const MomentSequence& m, double safety) {
    if (!(safety >= 1.0)) throw Error(ErrorKind::InvalidParams, "safety must be >= 1");
    if (m.order() < 8) throw Error(ErrorKind::OrderExceeded, "norm estimate needs even moments up to order 8");
    double root = 0.0;
    for (int k = 1; 2 * k <= m.order(); ++k) {
        const double v = m.m[static_cast<std::size_t>(2 * k - 1)];
        if (v > 0.0) root = std::max(root, std::pow(v, 1.0 / (2.0 * k)));
    }
    const JacobiCoefficients jc = jacobi_from_moments(m);
    double gersh = 0.0;
    const std::size_t na = jc.alpha.size();
    auto offdiag = [&](std::size_t i) -> double {
        // Coupling between rows i-1 and i; the last known value stands in for
        // unknown couplings of non-terminated laws.
        if (i == 0) return 0.0;
        if (i < jc.beta.size()) return std::sqrt(jc.beta[i]);
        if (jc.terminated) return 0.0;
        return jc.beta.size() > 1 ? std::sqrt(jc.beta.back()) : 0.0;
    };
    for (std::size_t i = 0; i < na; ++i) {
        gersh = std::max(gersh, std::abs(jc.alpha[i]) + offdiag(i) + offdiag(i + 1));
    }
    return safety * std::max(root, gersh);
}

}  // namespace freebe

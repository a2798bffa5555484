#include "freebe/opmodel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace freebe {

OperatorModel OperatorModel::make(CMatrix a0, std::vector<CMatrix> coeffs, FreeFamilySpec family) {
    OperatorModel model{std::move(a0), std::move(coeffs), std::move(family)};
    model.validate();
    return model;
}

OperatorModel OperatorModel::centered(std::vector<CMatrix> coeffs, FreeFamilySpec family) {
    if (coeffs.empty()) throw Error(ErrorKind::InvalidParams, "model needs at least one coefficient");
    const Eigen::Index m = coeffs.front().rows();
    return make(CMatrix::Zero(m, m), std::move(coeffs), std::move(family));
}

void OperatorModel::validate() const {
    check_matrix(a0, "a0");
    family.validate();
    if (static_cast<int>(coeffs.size()) != family.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "number of coefficients must equal the family dimension");
    }
    for (const auto& a : coeffs) {
        check_matrix(a, "coefficient");
        if (a.rows() != a0.rows()) throw Error(ErrorKind::DimensionMismatch, "coefficient dimensions differ");
    }
}

bool OperatorModel::is_selfadjoint() const {
    if (!is_hermitian(a0)) return false;
    return std::all_of(coeffs.begin(), coeffs.end(), [](const CMatrix& a) { return is_hermitian(a); });
}

std::vector<CMatrix> OperatorModel::base_coefficients() const {
    std::vector<CMatrix> out(static_cast<std::size_t>(family.base_dim()), CMatrix::Zero(m(), m()));
    for (int j = 0; j < family.base_dim(); ++j) {
        for (int k = 0; k < d(); ++k) {
            const double w = family.mixing(k, j);
            if (w != 0.0) out[static_cast<std::size_t>(j)] += w * coeffs[static_cast<std::size_t>(k)];
        }
    }
    return out;
}

OperatorModel SumModel::realized() const {
    OperatorModel out = base;
    out.family = clt_cumulants(base.family, n);
    return out;
}

CovarianceMap CovarianceMap::from_model(const OperatorModel& model) {
    return CovarianceMap{model.coeffs, model.family.covariance()};
}

CMatrix apply_eta(const CovarianceMap& map, const CMatrix& b) {
    const auto d = static_cast<Eigen::Index>(map.coeffs.size());
    if (map.sigma.rows() != d || map.sigma.cols() != d) {
        throw Error(ErrorKind::DimensionMismatch, "covariance matrix does not match coefficient count");
    }
    if (b.rows() != b.cols()) throw Error(ErrorKind::DimensionMismatch, "eta argument must be square");
    CMatrix out = CMatrix::Zero(b.rows(), b.cols());
    for (Eigen::Index k = 0; k < d; ++k) {
        const CMatrix& ak = map.coeffs[static_cast<std::size_t>(k)];
        if (ak.rows() != b.rows()) throw Error(ErrorKind::DimensionMismatch, "eta argument has wrong dimension");
        CMatrix right = CMatrix::Zero(b.rows(), b.cols());
        for (Eigen::Index l = 0; l < d; ++l) {
            const double s = map.sigma(k, l);
            if (s != 0.0) right += s * map.coeffs[static_cast<std::size_t>(l)];
        }
        out.noalias() += ak * b * right;
    }
    return out;
}

double eta_bound(const CovarianceMap& map) {
    double total = 0.0;
    const auto d = static_cast<Eigen::Index>(map.coeffs.size());
    std::vector<double> norms;
    for (const auto& a : map.coeffs) norms.push_back(op_norm(a));
    for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index l = 0; l < d; ++l) {
            total += norms[static_cast<std::size_t>(k)] * norms[static_cast<std::size_t>(l)] * std::abs(map.sigma(k, l));
        }
    }
    return total;
}

CMatrix alpha(const OperatorModel& model) {
    const RMatrix sigma = model.family.covariance();
    CMatrix out = model.a0.adjoint() * model.a0;
    for (int k = 0; k < model.d(); ++k) {
        for (int l = 0; l < model.d(); ++l) {
            const double s = sigma(k, l);
            if (s != 0.0) out += s * model.coeffs[static_cast<std::size_t>(k)].adjoint() * model.coeffs[static_cast<std::size_t>(l)];
        }
    }
    return out;
}

namespace {

int estimate_order(const FreeFamilySpec& f) { return std::min(kDefaultMaxOrder, f.max_order()); }

std::vector<double> base_norm_estimates(const FreeFamilySpec& f, double safety) {
    std::vector<double> out;
    const int order = estimate_order(f);
    for (int j = 0; j < f.base_dim(); ++j) out.push_back(norm_upper_estimate(f.base_moments(j, order), safety));
    return out;
}

}  // namespace

double centered_norm_estimate(const OperatorModel& model, double safety) {
    const auto coeffs = model.base_coefficients();
    const auto est = base_norm_estimates(model.family, safety);
    double total = 0.0;
    for (std::size_t j = 0; j < coeffs.size(); ++j) total += op_norm(coeffs[j]) * est[j];
    return total;
}

double model_norm_estimate(const OperatorModel& model, double safety) {
    const double est = op_norm(model.a0) + centered_norm_estimate(model, safety);
    return std::max(est, std::sqrt(op_norm(alpha(model))));
}

namespace {

struct Certificate {
    int power = 1;
    double qk = 0.0;
    double rate = 0.0;
    std::vector<double> q;  // q[r] bounds ||(B X)^r||, q[0] = 1
};

Certificate certify_rate(const CMatrix& binv, const std::vector<CMatrix>& letters, const std::vector<double>& weights,
                         int max_power) {
    const auto nletters = letters.size();
    int kmax = std::max(1, max_power);
    // Keep the word enumeration bounded.
    while (kmax > 1 && std::pow(static_cast<double>(std::max<std::size_t>(nletters, 1)), kmax) > 4096.0) --kmax;

    std::vector<CMatrix> steps;
    for (const auto& c : letters) steps.push_back(binv * c);
    std::vector<double> q(static_cast<std::size_t>(kmax) + 1, 0.0);
    q[0] = 1.0;
    std::function<void(const CMatrix&, double, int)> dfs = [&](const CMatrix& prefix, double weight, int depth) {
        for (std::size_t i = 0; i < nletters; ++i) {
            CMatrix next = depth == 0 ? steps[i] : CMatrix(prefix * steps[i]);
            const double w = weight * weights[i];
            q[static_cast<std::size_t>(depth) + 1] += op_norm(next) * w;
            if (depth + 1 < kmax) dfs(next, w, depth + 1);
        }
    };
    if (nletters > 0) dfs(CMatrix(), 1.0, 0);

    Certificate cert;
    cert.q = q;
    cert.rate = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= kmax; ++k) {
        const double qk = q[static_cast<std::size_t>(k)];
        const double r = std::pow(qk, 1.0 / k);
        if (r < cert.rate - 1e-15) {
            cert.rate = r;
            cert.power = k;
            cert.qk = qk;
        }
    }
    return cert;
}

double term_bound(const Certificate& cert, double binv_norm, int n) {
    const int k = cert.power;
    return binv_norm * cert.q[static_cast<std::size_t>(n % k)] * std::pow(cert.qk, n / k);
}

double tail_after(const Certificate& cert, double binv_norm, int order) {
    if (cert.qk == 0.0) return order + 1 >= cert.power ? 0.0 : binv_norm;
    double pmax = 1.0;
    for (int r = 1; r < cert.power; ++r) pmax = std::max(pmax, cert.q[static_cast<std::size_t>(r)]);
    return binv_norm * pmax * cert.power * std::pow(cert.qk, (order + 1) / cert.power) / (1.0 - cert.qk);
}

/// Operator-valued first-block recursion. With Q_n = E[X' B X' ... B X'] (n
/// letters), the block containing the first letter ends at position l after
/// collecting s letters; gaps between consecutive block letters contribute
/// T_g = E[(B X')^g B] and the part after l contributes E[(B X')^{n-l}] = B Q_{n-l}.
/// For a base variable y_j with coefficient c_j the block contributes
/// k_s^(j) c_j T_{g1} c_j ... T_{g_{s-1}} c_j.
std::vector<CMatrix> recursion_terms(const CMatrix& binv, const std::vector<CMatrix>& letters,
                                     const std::vector<std::vector<double>>& cumulants, int order) {
    const Eigen::Index m = binv.rows();
    const auto nl = letters.size();
    const auto J = static_cast<std::size_t>(order);
    std::vector<CMatrix> terms(J + 1);
    terms[0] = binv;
    if (J == 0) return terms;

    std::vector<std::size_t> smax(nl, 0);
    for (std::size_t j = 0; j < nl; ++j) {
        for (std::size_t s = 1; s <= J; ++s) {
            if (cumulants[j][s - 1] != 0.0) smax[j] = s;
        }
    }
    // chain[j][l * (J+1) + s]
    std::vector<std::vector<CMatrix>> chain(nl, std::vector<CMatrix>((J + 1) * (J + 1)));
    std::vector<std::vector<CMatrix>> folded(nl, std::vector<CMatrix>(J + 1));  // sum_s k_s chain(l, s)
    std::vector<CMatrix> right(J + 1);  // right[t] = B Q_t
    const CMatrix zero = CMatrix::Zero(m, m);

    for (std::size_t n = 1; n <= J; ++n) {
        CMatrix qn = zero;
        for (std::size_t j = 0; j < nl; ++j) {
            if (smax[j] == 0) continue;
            auto& ch = chain[j];
            const CMatrix& c = letters[j];
            for (std::size_t s = 1; s <= std::min(n, smax[j]); ++s) ch[n * (J + 1) + s] = zero;
            if (n == 1) {
                ch[(J + 1) + 1] = c;
            } else {
                for (std::size_t l = 1; l < n; ++l) {
                    const CMatrix link = terms[n - l - 1] * c;
                    for (std::size_t s = 1; s <= std::min(l, smax[j] - 1); ++s) {
                        ch[n * (J + 1) + s + 1].noalias() += ch[l * (J + 1) + s] * link;
                    }
                }
            }
            CMatrix f = zero;
            for (std::size_t s = 1; s <= std::min(n, smax[j]); ++s) {
                const double k = cumulants[j][s - 1];
                if (k != 0.0) f += k * ch[n * (J + 1) + s];
            }
            folded[j][n] = f;
            qn += f;
            for (std::size_t l = 1; l < n; ++l) qn.noalias() += folded[j][l] * right[n - l];
        }
        right[n] = binv * qn;
        terms[n] = right[n] * binv;
    }
    return terms;
}

struct Prepared {
    CMatrix binv;
    std::vector<CMatrix> letters;
    std::vector<int> base_index;
};

Prepared prepare(const OperatorModel& model, const CMatrix& b) {
    model.validate();
    check_matrix(b, "b");
    if (b.rows() != model.m()) throw Error(ErrorKind::DimensionMismatch, "b does not match model dimension");
    Prepared p;
    p.binv = inverse(b - model.a0);
    const auto coeffs = model.base_coefficients();
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        if (coeffs[j].cwiseAbs().maxCoeff() == 0.0) continue;
        p.letters.push_back(coeffs[j]);
        p.base_index.push_back(static_cast<int>(j));
    }
    return p;
}

std::vector<std::vector<double>> letter_cumulants(const OperatorModel& model, const Prepared& p, int order) {
    std::vector<std::vector<double>> out;
    for (int j : p.base_index) out.push_back(model.family.base_cumulants(j, order));
    return out;
}

}  // namespace

std::vector<CMatrix> neumann_terms(const OperatorModel& model, const CMatrix& b, int order) {
    if (order < 0) throw Error(ErrorKind::InvalidParams, "order must be >= 0");
    if (order > model.family.max_order()) throw Error(ErrorKind::OrderExceeded, "order exceeds available moment data");
    const Prepared p = prepare(model, b);
    return recursion_terms(p.binv, p.letters, letter_cumulants(model, p, order), order);
}

SeriesResult cauchy_series(const OperatorModel& model, const CMatrix& b, const SeriesOptions& opts) {
    if (!(opts.tol > 0.0)) throw Error(ErrorKind::InvalidParams, "tol must be positive");
    const Prepared p = prepare(model, b);
    const double binv_norm = op_norm(p.binv);

    const auto est_all = base_norm_estimates(model.family, opts.safety);
    std::vector<double> weights;
    for (int j : p.base_index) weights.push_back(est_all[static_cast<std::size_t>(j)]);
    const Certificate cert = certify_rate(p.binv, p.letters, weights, opts.max_certificate_power);
    if (!(cert.rate < 1.0)) {
        throw Error(ErrorKind::Divergent, "certified geometric rate q = " + std::to_string(cert.rate) + " >= 1");
    }

    const int limit = std::min(opts.max_order, model.family.max_order());
    int order = 0;
    while (tail_after(cert, binv_norm, order) >= opts.tol) {
        ++order;
        if (order > limit) {
            throw Error(ErrorKind::OrderExceeded,
                        "truncation order beyond " + std::to_string(limit) + " needed for tol (rate " +
                            std::to_string(cert.rate) + ")");
        }
    }

    const auto terms = recursion_terms(p.binv, p.letters, letter_cumulants(model, p, std::max(order, 1)), order);
    SeriesResult out;
    out.value = CMatrix::Zero(model.m(), model.m());
    for (int n = 0; n <= order; ++n) {
        const double tn = op_norm(terms[static_cast<std::size_t>(n)]);
        out.term_norms.push_back(tn);
        const double bound = term_bound(cert, binv_norm, n);
        if (tn > bound * (1.0 + 1e-6) + 1e-14 * binv_norm) {
            throw Error(ErrorKind::Divergent, "term " + std::to_string(n) + " exceeds its geometric bound");
        }
        out.value += terms[static_cast<std::size_t>(n)];
    }
    out.tail_bound = tail_after(cert, binv_norm, order);
    out.order = order;
    out.rate = cert.rate;
    out.power = cert.power;
    return out;
}

SeriesResult cauchy_series(const SumModel& model, const CMatrix& b, const SeriesOptions& opts) {
    if (model.n < 1) throw Error(ErrorKind::InvalidParams, "n must be >= 1");
    return cauchy_series(model.realized(), b, opts);
}

ResolventCertificate resolvent_member(const CMatrix& b, double norm_estimate) {
    ResolventCertificate out;
    CMatrix binv;
    if (b.rows() != b.cols() || !try_inverse(b, binv)) return out;
    const double q = op_norm(binv) * norm_estimate;
    out.margin = 1.0 - q;
    if (q < 1.0) {
        out.status = Membership::Member;
        out.certificate = "norm";
    }
    return out;
}

ResolventCertificate resolvent_member(const OperatorModel& model, const CMatrix& b, double safety) {
    return resolvent_member(b, model_norm_estimate(model, safety));
}

}  // namespace freebe

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "freebe/error.hpp"
#include "freebe/matlin.hpp"

namespace freebe {

/// Default maximal word / moment order.
inline constexpr int kDefaultMaxOrder = 16;
/// Order cap for laws whose moments are known in closed form.
inline constexpr int kClosedFormOrderCap = 1024;

/// Moments m_1..m_J (m_0 = 1 implicit). Index i holds m_{i+1}.
struct MomentSequence {
    std::vector<double> m;
    int order() const { return static_cast<int>(m.size()); }
};

/// Free cumulants k_1..k_J. Index i holds k_{i+1}.
struct CumulantSequence {
    std::vector<double> k;
    int order() const { return static_cast<int>(k.size()); }
};

/// Letters are zero-based generator indices: x1 is letter 0.
using Word = std::vector<int>;

// ---------------------------------------------------------------------------
// Moment <-> free cumulant transforms.
//
// Both rely on the functional relation M(w) = C(w M(w)) between the moment
// series M(w) = 1 + sum m_n w^n and the cumulant series C(w) = 1 + sum k_n w^n,
// i.e. m_n = sum_{s=1}^n k_s [w^{n-s}] M(w)^s. The power table pw[s][d] holds
// [w^d] M^s and is filled degree by degree as moments become known.
// Templated so the test suite can run them over exact rationals.
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
void extend_power_table(std::vector<std::vector<T>>& pw, const std::vector<T>& mom, std::size_t degree) {
    // mom[0] = 1, mom[i] = m_i; fills pw[s][degree] for all s.
    const std::size_t smax = pw.size() - 1;
    pw[0][degree] = degree == 0 ? T(1) : T(0);
    for (std::size_t s = 1; s <= smax; ++s) {
        T acc(0);
        for (std::size_t i = 0; i <= degree; ++i) acc += pw[s - 1][degree - i] * mom[i];
        pw[s][degree] = acc;
    }
}

}  // namespace detail

template <class T>
std::vector<T> moments_from_cumulants_t(std::span<const T> k) {
    const std::size_t order = k.size();
    std::vector<T> mom(order + 1, T(0));
    mom[0] = T(1);
    std::vector<std::vector<T>> pw(order + 1, std::vector<T>(order + 1, T(0)));
    detail::extend_power_table(pw, mom, 0);
    for (std::size_t n = 1; n <= order; ++n) {
        T acc(0);
        for (std::size_t s = 1; s <= n; ++s) acc += k[s - 1] * pw[s][n - s];
        mom[n] = acc;
        detail::extend_power_table(pw, mom, n);
    }
    return std::vector<T>(mom.begin() + 1, mom.end());
}

template <class T>
std::vector<T> cumulants_from_moments_t(std::span<const T> m) {
    const std::size_t order = m.size();
    std::vector<T> mom(order + 1, T(0));
    mom[0] = T(1);
    for (std::size_t i = 0; i < order; ++i) mom[i + 1] = m[i];
    std::vector<std::vector<T>> pw(order + 1, std::vector<T>(order + 1, T(0)));
    std::vector<T> k(order, T(0));
    for (std::size_t n = 0; n < order; ++n) detail::extend_power_table(pw, mom, n);
    for (std::size_t n = 1; n <= order; ++n) {
        T acc = mom[n];
        for (std::size_t s = 1; s < n; ++s) acc -= k[s - 1] * pw[s][n - s];
        k[n - 1] = acc;  // [w^0] M^n = 1
    }
    return k;
}

/// Joint moment tau(x_{w1} ... x_{wj}) of x_k = sum_j C_kj y_j over free base
/// variables y_j with free cumulants base_cumulants[j] (index i holds k_{i+1}).
///
/// First-block recursion over noncrossing partitions, memoized on contiguous
/// subwords. Mixed cumulants across distinct base variables vanish, so the
/// cumulant of a block with letters (l_1..l_s) is sum_j prod_i C[l_i][j] k_s^(j).
template <class T>
T joint_moment_t(const std::vector<std::vector<T>>& base_cumulants, const std::vector<std::vector<T>>& mixing,
                 const Word& w) {
    const std::size_t n = w.size();
    if (n == 0) return T(1);
    const std::size_t nbase = base_cumulants.size();
    for (const auto& kc : base_cumulants) {
        if (kc.size() < n) throw Error(ErrorKind::OrderExceeded, "word longer than available cumulant data");
    }
    for (int letter : w) {
        if (letter < 0 || static_cast<std::size_t>(letter) >= mixing.size()) {
            throw Error(ErrorKind::InvalidParams, "word letter out of range");
        }
    }
    // mom[a][b] = moment of w[a..b), laid out flat.
    std::vector<T> mom((n + 1) * (n + 1), T(0));
    auto at = [&](std::size_t a, std::size_t b) -> T& { return mom[a * (n + 1) + b]; };
    for (std::size_t a = 0; a <= n; ++a) at(a, a) = T(1);

    // chain[p * (n+1) + s]: block through position a with s elements, last at p.
    std::vector<T> chain((n + 1) * (n + 1), T(0));
    for (std::size_t a = n; a-- > 0;) {
        for (std::size_t j = 0; j < nbase; ++j) {
            const T first = mixing[static_cast<std::size_t>(w[a])][j];
            if (first == T(0)) continue;
            std::fill(chain.begin(), chain.end(), T(0));
            chain[a * (n + 1) + 1] = first;
            for (std::size_t q = a + 1; q < n; ++q) {
                const T cq = mixing[static_cast<std::size_t>(w[q])][j];
                if (cq == T(0)) continue;
                for (std::size_t p = a; p < q; ++p) {
                    const T gap = at(p + 1, q);
                    if (gap == T(0)) continue;
                    for (std::size_t s = 1; s <= p - a + 1; ++s) {
                        const T& prev = chain[p * (n + 1) + s];
                        if (prev == T(0)) continue;
                        chain[q * (n + 1) + s + 1] += prev * gap * cq;
                    }
                }
            }
            const auto& kj = base_cumulants[j];
            for (std::size_t b = a + 1; b <= n; ++b) {
                T acc(0);
                for (std::size_t p = a; p < b; ++p) {
                    const T tail = at(p + 1, b);
                    if (tail == T(0)) continue;
                    for (std::size_t s = 1; s <= p - a + 1; ++s) {
                        const T& c = chain[p * (n + 1) + s];
                        if (c == T(0) || kj[s - 1] == T(0)) continue;
                        acc += c * kj[s - 1] * tail;
                    }
                }
                at(a, b) += acc;
            }
        }
    }
    return at(0, n);
}

// ---------------------------------------------------------------------------
// Scalar laws and free families.
// ---------------------------------------------------------------------------

enum class LawKind { Semicircular, Bernoulli, TwoAtom, Moments };

/// A centered compactly supported scalar distribution.
struct ScalarLaw {
    LawKind kind = LawKind::Semicircular;
    double variance = 1.0;                  // Semicircular
    double atoms[2] = {2.0, -0.5};          // TwoAtom
    double weights[2] = {0.2, 0.8};         // TwoAtom
    std::vector<double> custom_moments;     // Moments: m_1..m_J

    static ScalarLaw semicircular(double variance = 1.0);
    static ScalarLaw bernoulli();
    /// Defaults to the skewed law with atoms 2, -1/2 and weights 1/5, 4/5.
    static ScalarLaw two_atom(double a = 2.0, double b = -0.5, double pa = 0.2);
    static ScalarLaw from_moments(std::vector<double> moments);

    /// Highest order for which moments are available.
    int max_order() const;
    /// Throws InvalidParams unless the law is centered with positive variance.
    void validate() const;

    MomentSequence moments(int order) const;
    CumulantSequence cumulants(int order) const;
    double second_moment() const;
    std::string describe() const;
};

/// d scalar variables x_k = sum_j C_kj y_j built from free base laws y_j, and
/// optionally replaced by their normalized free CLT partial sum S_n.
struct FreeFamilySpec {
    std::vector<ScalarLaw> base;
    RMatrix mixing;    // d x d'
    long clt_n = 1;    // cumulants of order s scaled by clt_n^{1 - s/2}

    static FreeFamilySpec independent(std::vector<ScalarLaw> base);
    static FreeFamilySpec mixed(std::vector<ScalarLaw> base, RMatrix mixing);

    int dim() const { return static_cast<int>(mixing.rows()); }
    int base_dim() const { return static_cast<int>(base.size()); }
    int max_order() const;
    void validate() const;

    /// sigma_kl = tau(x_k x_l) = (C diag(var) C^T)_kl.
    RMatrix covariance() const;
    /// Rescaled free cumulants of base variable j up to `order`.
    std::vector<double> base_cumulants(int j, int order) const;
    /// Moments of base variable j (after CLT rescaling) up to `order`.
    MomentSequence base_moments(int j, int order) const;
    /// True when every base law is semicircular.
    bool is_semicircular() const;
};

CumulantSequence cumulants_from_moments(const MomentSequence& m);
MomentSequence moments_from_cumulants(const CumulantSequence& k);

/// Family of (S_n^(1), ..., S_n^(d)) with S_n = n^{-1/2} sum_{i<=n} x_i.
FreeFamilySpec clt_cumulants(const FreeFamilySpec& f, long n);

/// tau(x_{w1} ... x_{wj}) for the family (letters zero-based).
double joint_moment(const FreeFamilySpec& f, const Word& w);

/// Upper estimate of the operator norm from moment data. Combines the root
/// test max_k m_{2k}^{1/(2k)} with a Gershgorin bound on the Jacobi matrix
/// recovered from the moments, scaled by `safety`.
double norm_upper_estimate(const MomentSequence& m, double safety);

/// Recurrence coefficients (alpha_k, beta_k) of the orthogonal polynomials of
/// the law with moments m (beta_0 = 1). Terminates early for finitely
/// supported laws.
struct JacobiCoefficients {
    std::vector<double> alpha;
    std::vector<double> beta;  // beta[0] = m_0 = 1, beta[k] = b_k^2 for k >= 1
    bool terminated = false;
};
JacobiCoefficients jacobi_from_moments(const MomentSequence& m);

}  // namespace freebe

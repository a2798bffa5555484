#include "freebe/linpoly.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "freebe/opmodel.hpp"
#include "freebe/scsolver.hpp"

namespace freebe {

// ---------------------------------------------------------------------------
// NcPoly
// ---------------------------------------------------------------------------

NcPoly::NcPoly(int d, std::vector<NcTerm> terms) : d_(d), terms_(std::move(terms)) {
    if (d_ < 0) throw Error(ErrorKind::InvalidParams, "generator count must be >= 0");
    for (const auto& t : terms_) {
        for (int l : t.word) {
            if (l < 0) throw Error(ErrorKind::InvalidParams, "negative letter");
            d_ = std::max(d_, l + 1);
        }
    }
    canonicalize();
}

NcPoly NcPoly::constant(cplx c) { return NcPoly(0, {NcTerm{c, {}}}); }

NcPoly NcPoly::generator(int letter) { return NcPoly(letter + 1, {NcTerm{1.0, {letter}}}); }

void NcPoly::canonicalize() {
    auto shorter = [](const Word& a, const Word& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    };
    std::map<Word, cplx, decltype(shorter)> merged(shorter);
    for (const auto& t : terms_) {
        if (!std::isfinite(t.coeff.real()) || !std::isfinite(t.coeff.imag())) {
            throw Error(ErrorKind::InvalidParams, "non-finite polynomial coefficient");
        }
        merged[t.word] += t.coeff;
    }
    terms_.clear();
    for (const auto& [w, c] : merged) {
        if (c != cplx(0.0)) terms_.push_back(NcTerm{c, w});
    }
}

int NcPoly::degree() const {
    int g = 0;
    for (const auto& t : terms_) g = std::max(g, static_cast<int>(t.word.size()));
    return g;
}

NcPoly NcPoly::adjoint() const {
    std::vector<NcTerm> out;
    for (const auto& t : terms_) out.push_back(NcTerm{std::conj(t.coeff), Word(t.word.rbegin(), t.word.rend())});
    return NcPoly(d_, std::move(out));
}

bool NcPoly::is_selfadjoint(double tol) const {
    const NcPoly diff = *this - adjoint();
    double scale = 0.0;
    for (const auto& t : terms_) scale = std::max(scale, std::abs(t.coeff));
    return std::all_of(diff.terms_.begin(), diff.terms_.end(),
                       [&](const NcTerm& t) { return std::abs(t.coeff) <= tol * std::max(1.0, scale); });
}

NcPoly NcPoly::operator+(const NcPoly& o) const {
    std::vector<NcTerm> all = terms_;
    all.insert(all.end(), o.terms_.begin(), o.terms_.end());
    return NcPoly(std::max(d_, o.d_), std::move(all));
}

NcPoly NcPoly::operator-(const NcPoly& o) const { return *this + o.scaled(-1.0); }

NcPoly NcPoly::operator*(const NcPoly& o) const {
    std::vector<NcTerm> out;
    for (const auto& a : terms_) {
        for (const auto& b : o.terms_) {
            Word w = a.word;
            w.insert(w.end(), b.word.begin(), b.word.end());
            out.push_back(NcTerm{a.coeff * b.coeff, std::move(w)});
        }
    }
    return NcPoly(std::max(d_, o.d_), std::move(out));
}

NcPoly NcPoly::scaled(cplx c) const {
    std::vector<NcTerm> out = terms_;
    for (auto& t : out) t.coeff *= c;
    return NcPoly(d_, std::move(out));
}

CMatrix NcPoly::evaluate(const std::vector<CMatrix>& subs) const {
    if (static_cast<int>(subs.size()) < d_) throw Error(ErrorKind::DimensionMismatch, "too few substitutions");
    if (subs.empty()) throw Error(ErrorKind::DimensionMismatch, "need at least one substitution to fix the size");
    const Eigen::Index n = subs.front().rows();
    for (const auto& s : subs) {
        if (s.rows() != n || s.cols() != n) throw Error(ErrorKind::DimensionMismatch, "substitutions differ in size");
    }
    CMatrix out = CMatrix::Zero(n, n);
    for (const auto& t : terms_) {
        CMatrix prod = identity(n);
        for (int l : t.word) prod = prod * subs[static_cast<std::size_t>(l)];
        out += t.coeff * prod;
    }
    return out;
}

namespace {

std::string format_coeff(cplx c) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    if (c.imag() == 0.0) {
        os << c.real();
    } else if (c.real() == 0.0) {
        os << c.imag() << "i";
    } else {
        os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)";
    }
    return os.str();
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    NcPoly run() {
        NcPoly p = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::ParseError, what + " at position " + std::to_string(pos_) + " in \"" + std::string(s_) + "\"");
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    NcPoly expr() {
        NcPoly acc;
        bool negate = false;
        if (eat('-')) negate = true;
        else eat('+');
        NcPoly t = term();
        acc = negate ? t.scaled(-1.0) : t;
        for (;;) {
            if (eat('+')) acc = acc + term();
            else if (eat('-')) acc = acc - term();
            else break;
        }
        return acc;
    }

    NcPoly term() {
        NcPoly acc = factor();
        while (eat('*')) acc = acc * factor();
        return acc;
    }

    NcPoly factor() {
        NcPoly base = atom();
        if (eat('^')) {
            const long e = integer();
            if (e < 0 || e > 64) fail("exponent out of range");
            NcPoly out = NcPoly::constant(1.0);
            for (long i = 0; i < e; ++i) out = out * base;
            return out;
        }
        return base;
    }

    long integer() {
        skip();
        long v = 0;
        const auto* first = s_.data() + pos_;
        const auto* last = s_.data() + s_.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr == first) fail("expected integer");
        pos_ += static_cast<std::size_t>(ptr - first);
        return v;
    }

    NcPoly atom() {
        const char c = peek();
        if (c == '(') {
            ++pos_;
            NcPoly inner = expr();
            if (!eat(')')) fail("expected ')'");
            return inner;
        }
        if (c == 'x') {
            ++pos_;
            if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("expected generator index");
            const long k = integer();
            if (k < 1 || k > 9) fail("generator index must be in 1..9");
            return NcPoly::generator(static_cast<int>(k - 1));
        }
        if (c == 'i') {
            ++pos_;
            return NcPoly::constant(cplx(0.0, 1.0));
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double v = 0.0;
            const auto* first = s_.data() + pos_;
            const auto* last = s_.data() + s_.size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr == first) fail("malformed number");
            pos_ += static_cast<std::size_t>(ptr - first);
            if (pos_ < s_.size() && s_[pos_] == 'i') {
                ++pos_;
                return NcPoly::constant(cplx(0.0, v));
            }
            return NcPoly::constant(v);
        }
        fail(c == '\0' ? "unexpected end of input" : "unexpected character");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

NcPoly NcPoly::parse(std::string_view text) { return Parser(text).run(); }

std::string NcPoly::to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const auto& t = terms_[i];
        if (i > 0) out += " + ";
        const bool unit = t.coeff == cplx(1.0) && !t.word.empty();
        if (!unit) out += format_coeff(t.coeff);
        for (std::size_t j = 0; j < t.word.size(); ++j) {
            if (j > 0 || !unit) out += "*";
            out += "x" + std::to_string(t.word[j] + 1);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pencils
// ---------------------------------------------------------------------------

bool LinearPencil::is_hermitian() const {
    if (!freebe::is_hermitian(a0)) return false;
    return std::all_of(coeffs.begin(), coeffs.end(), [](const CMatrix& a) { return freebe::is_hermitian(a); });
}

CMatrix LinearPencil::evaluate(const std::vector<CMatrix>& subs) const {
    if (subs.size() < coeffs.size()) throw Error(ErrorKind::DimensionMismatch, "too few substitutions");
    const Eigen::Index n = subs.empty() ? 1 : subs.front().rows();
    CMatrix out = Eigen::kroneckerProduct(a0, identity(n)).eval();
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (subs[k].rows() != n || subs[k].cols() != n) throw Error(ErrorKind::DimensionMismatch, "substitution size");
        out += Eigen::kroneckerProduct(coeffs[k], subs[k]).eval();
    }
    return out;
}

namespace {

/// Sparse builder for the pencil L = a0 + sum_k a_k x_k; entries are added
/// per position, each either a constant or a multiple of one letter.
struct PencilBuilder {
    struct Entry {
        Eigen::Index row, col;
        int letter;  // -1 for constants
        cplx value;
    };
    std::vector<Entry> entries;
    Eigen::Index size = 1;
    int d = 0;

    Eigen::Index allocate(Eigen::Index n) {
        const Eigen::Index start = size;
        size += n;
        return start;
    }
    void add(Eigen::Index r, Eigen::Index c, int letter, cplx v) { entries.push_back(Entry{r, c, letter, v}); }

    LinearPencil build(int degree) const {
        LinearPencil p;
        p.a0 = CMatrix::Zero(size, size);
        p.coeffs.assign(static_cast<std::size_t>(d), CMatrix::Zero(size, size));
        for (const auto& e : entries) {
            if (e.letter < 0) p.a0(e.row, e.col) += e.value;
            else p.coeffs[static_cast<std::size_t>(e.letter)](e.row, e.col) += e.value;
        }
        p.degree = degree;
        return p;
    }
};

// All blocks below describe L on their index range; Lambda(lambda, 1) - L
// restricted to the block is 1 - L22, which is what the comments call M.

/// c x_{l1} ... x_{lk}, k >= 2: M = I - N with N_{j,j+1} = x_{l_{j+1}},
/// row x_{l1} e_1^T c, column x_{lk} e_{k-1}.
void add_plain_block(PencilBuilder& pb, cplx c, const Word& w) {
    const auto k = static_cast<Eigen::Index>(w.size());
    const Eigen::Index s = pb.allocate(k - 1);
    pb.add(0, s, w[0], c);
    pb.add(s + k - 2, 0, w.back(), 1.0);
    for (Eigen::Index j = 0; j + 1 < k - 1; ++j) pb.add(s + j, s + j + 1, w[static_cast<std::size_t>(j + 1)], 1.0);
}

/// c w + conj(c) rev(w), w not a palindrome: M = [[0, A^*], [A, 0]] with
/// A = I - N as in the plain block; row [c x_{l1} e_1^T, x_{lk} e_{k-1}^T] and
/// its adjoint as column.
void add_pair_block(PencilBuilder& pb, cplx c, const Word& w) {
    const auto k = static_cast<Eigen::Index>(w.size());
    const Eigen::Index r = k - 1;
    const Eigen::Index s = pb.allocate(2 * r);
    const Eigen::Index top = s, bot = s + r;
    // L22 = 1 - M: identity on the diagonal, -A and -A^* off the diagonal.
    for (Eigen::Index j = 0; j < r; ++j) {
        pb.add(top + j, top + j, -1, 1.0);
        pb.add(bot + j, bot + j, -1, 1.0);
        pb.add(bot + j, top + j, -1, -1.0);
        pb.add(top + j, bot + j, -1, -1.0);
    }
    for (Eigen::Index j = 0; j + 1 < r; ++j) {
        const int letter = w[static_cast<std::size_t>(j + 1)];
        pb.add(bot + j, top + j + 1, letter, 1.0);  // N in the A block
        pb.add(top + j + 1, bot + j, letter, 1.0);  // N^* in the A^* block
    }
    pb.add(0, top, w.front(), c);
    pb.add(0, bot + r - 1, w.back(), 1.0);
    pb.add(top, 0, w.front(), std::conj(c));
    pb.add(bot + r - 1, 0, w.back(), 1.0);
}

/// M(c, u) with (M^{-1})_{11} = c u for a palindrome u; entries written at
/// offset s as L22 = 1 - M.
void add_palindrome_core(PencilBuilder& pb, Eigen::Index s, double c, const Word& u) {
    if (u.empty()) {
        pb.add(s, s, -1, 1.0 - 1.0 / c);
        return;
    }
    if (u.size() == 1) {
        // M = [[0, 1], [1, -c x]]
        pb.add(s, s, -1, 1.0);
        pb.add(s, s + 1, -1, -1.0);
        pb.add(s + 1, s, -1, -1.0);
        pb.add(s + 1, s + 1, -1, 1.0);
        pb.add(s + 1, s + 1, u[0], c);
        return;
    }
    // M = [[0, 1, 0], [1, 0, x e_1^T], [0, x e_1, M(c, v)]] with u = x v x.
    const int x = u.front();
    pb.add(s, s, -1, 1.0);
    pb.add(s, s + 1, -1, -1.0);
    pb.add(s + 1, s, -1, -1.0);
    pb.add(s + 1, s + 1, -1, 1.0);
    pb.add(s + 1, s + 2, x, -1.0);
    pb.add(s + 2, s + 1, x, -1.0);
    add_palindrome_core(pb, s + 2, c, Word(u.begin() + 1, u.end() - 1));
}

/// c w for a palindrome w of length k >= 2 and real c.
void add_palindrome_block(PencilBuilder& pb, double c, const Word& w) {
    const auto k = static_cast<Eigen::Index>(w.size());
    const Eigen::Index s = pb.allocate(k - 1);
    add_palindrome_core(pb, s, c, Word(w.begin() + 1, w.end() - 1));
    pb.add(0, s, w.front(), 1.0);
    pb.add(s, 0, w.front(), 1.0);
}

}  // namespace

LinearPencil linearize(const NcPoly& p) {
    if (p.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "cannot linearize the zero polynomial");
    PencilBuilder pb;
    pb.d = std::max(p.d(), 1);
    const bool sa = p.is_selfadjoint();
    std::map<Word, bool> done;
    for (const auto& t : p.terms()) {
        const Word& w = t.word;
        if (w.size() <= 1) {
            pb.add(0, 0, w.empty() ? -1 : w[0], sa ? cplx(t.coeff.real(), 0.0) : t.coeff);
            continue;
        }
        if (!sa) {
            add_plain_block(pb, t.coeff, w);
            continue;
        }
        if (done.count(w)) continue;
        const Word rev(w.rbegin(), w.rend());
        if (rev == w) {
            add_palindrome_block(pb, t.coeff.real(), w);
        } else {
            add_pair_block(pb, t.coeff, w);
            done[rev] = true;
        }
        done[w] = true;
    }
    return pb.build(p.degree());
}

namespace {

CMatrix random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = cplx(normal(rng), normal(rng));
    }
    return (g + g.adjoint()) / (2.0 * std::sqrt(static_cast<double>(n)));
}

cplx random_lambda(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> re(-3.0, 3.0);
    std::uniform_real_distribution<double> im(1.0, 3.0);
    std::bernoulli_distribution sign(0.5);
    const double y = im(rng);
    return cplx(re(rng), sign(rng) ? y : -y);
}

CMatrix pencil_corner(const LinearPencil& pencil, const CMatrix& lam_block, const CMatrix& la) {
    const Eigen::Index n = la.rows() / pencil.m();
    const CMatrix inv = inverse(lam_block - la);
    return inv.topLeftCorner(n, n);
}

CMatrix lambda_block(cplx lambda, cplx mu, Eigen::Index m, Eigen::Index n) {
    return Eigen::kroneckerProduct(lambda_diag(lambda, mu, m), identity(n)).eval();
}

std::vector<CMatrix> random_substitutions(int d, Eigen::Index n, std::mt19937_64& rng) {
    std::vector<CMatrix> subs;
    for (int k = 0; k < std::max(d, 1); ++k) subs.push_back(random_hermitian(n, rng));
    return subs;
}

}  // namespace

double validate_pencil(const NcPoly& p, const LinearPencil& pencil, int trials, int size, std::uint64_t seed) {
    if (trials < 1) throw Error(ErrorKind::InvalidParams, "trials must be >= 1");
    if (size < 2) throw Error(ErrorKind::InvalidParams, "substitution size must be >= 2");
    if (pencil.d() < p.d()) throw Error(ErrorKind::DimensionMismatch, "pencil has fewer generators than p");
    std::mt19937_64 rng(seed);
    const Eigen::Index n = size;
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const auto subs = random_substitutions(pencil.d(), n, rng);
        const cplx lambda = random_lambda(rng);
        const CMatrix direct = inverse(lambda * identity(n) - p.evaluate(subs));
        const CMatrix corner = pencil_corner(pencil, lambda_block(lambda, 1.0, pencil.m(), n), pencil.evaluate(subs));
        worst = std::max(worst, op_norm(direct - corner));
    }
    return worst;
}

double validate_mu_identity(const LinearPencil& pencil, int trials, int size, std::uint64_t seed) {
    if (trials < 1) throw Error(ErrorKind::InvalidParams, "trials must be >= 1");
    if (size < 2) throw Error(ErrorKind::InvalidParams, "substitution size must be >= 2");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mod(1.5, 4.0);
    std::uniform_real_distribution<double> arg(-0.5, 0.5);
    const Eigen::Index n = size;
    const int g = std::max(pencil.degree, 1);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const auto subs = random_substitutions(pencil.d(), n, rng);
        const CMatrix la = pencil.evaluate(subs);
        const cplx lambda = random_lambda(rng);
        const cplx mu = std::polar(mod(rng), arg(rng));
        const cplx factor = std::pow(mu, g - 1);
        const CMatrix lhs = pencil_corner(pencil, lambda_block(lambda, mu, pencil.m(), n), la);
        const CMatrix rhs = factor * pencil_corner(pencil, lambda_block(lambda * factor, 1.0, pencil.m(), n), la);
        worst = std::max(worst, op_norm(lhs - rhs) / std::max(1.0, op_norm(rhs)));
    }
    return worst;
}

double default_exterior_radius(const LinearPencil& pencil, const CauchyEvalConfig& cfg) {
    const CertifiedConstants k = CertifiedConstants::make(cfg.omega, cfg.gamma);
    double total = 1.0;
    for (const auto& a : pencil.coeffs) total += op_norm(a);
    return std::pow(2.0 * total, std::max(pencil.degree, 1)) / k.c_star;
}

namespace {

OperatorModel pencil_model(const LinearPencil& pencil, const FreeFamilySpec& family) {
    if (family.dim() < pencil.d()) {
        throw Error(ErrorKind::DimensionMismatch, "family has fewer variables than the pencil has generators");
    }
    std::vector<CMatrix> coeffs = pencil.coeffs;
    while (static_cast<int>(coeffs.size()) < family.dim()) coeffs.push_back(CMatrix::Zero(pencil.m(), pencil.m()));
    return OperatorModel::make(pencil.a0, std::move(coeffs), family);
}

double radius(const LinearPencil& pencil, const CauchyEvalConfig& cfg) {
    return cfg.R > 0.0 ? cfg.R : default_exterior_radius(pencil, cfg);
}

}  // namespace

CMatrix pencil_cauchy(const LinearPencil& pencil, const FreeFamilySpec& family, const CMatrix& b,
                      const CauchyEvalConfig& cfg) {
    const OperatorModel model = pencil_model(pencil, family);
    if (cfg.engine == CauchyEngine::Series) {
        SeriesOptions so;
        so.tol = cfg.tol;
        so.max_order = cfg.max_order;
        return cauchy_series(SumModel{model, cfg.n}, b, so).value;
    }
    SolveOptions opts;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    return solve_cauchy(SemicircularSpec::from_model(model), b, opts).w;
}

cplx scalar_cauchy_from_pencil(const LinearPencil& pencil, const FreeFamilySpec& family, cplx lambda,
                               const CauchyEvalConfig& cfg) {
    const double r = radius(pencil, cfg);
    if (std::abs(lambda) <= r) {
        if (cfg.engine == CauchyEngine::Series || lambda.imag() == 0.0) {
            throw Error(ErrorKind::DomainError, "|lambda| must exceed the exterior radius " + std::to_string(r));
        }
    }
    return pencil_cauchy(pencil, family, lambda_diag(lambda, 1.0, pencil.m()), cfg)(0, 0);
}

cplx mu_rescaled_eval(const LinearPencil& pencil, const FreeFamilySpec& family, cplx lambda, cplx mu, int g,
                      const CauchyEvalConfig& cfg) {
    if (g < 1) throw Error(ErrorKind::InvalidParams, "degree must be >= 1");
    if (validate_mu_identity(pencil, 8, 4, 0x5eedULL) >= kMuIdentityTol) {
        throw Error(ErrorKind::NotValidated, "pencil fails the mu-rescaling identity");
    }
    if (mu == cplx(1.0)) return scalar_cauchy_from_pencil(pencil, family, lambda, cfg);
    bool inside = false;
    try {
        inside = annulus_contains(lambda, mu, cfg.omega);
    } catch (const Error&) {
        inside = false;
    }
    if (!inside) throw Error(ErrorKind::DomainError, "(lambda, mu) outside the annulus A(mu)");
    const cplx factor = std::pow(mu, g - 1);
    return pencil_cauchy(pencil, family, lambda_diag(lambda, mu, pencil.m()), cfg)(0, 0) / factor;
}

}  // namespace freebe

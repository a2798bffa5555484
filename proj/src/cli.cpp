#include "freebe/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "freebe/cltlab.hpp"
#include "freebe/linpoly.hpp"
#include "freebe/parallel.hpp"
#include "freebe/scsolver.hpp"
#include "freebe/spectra.hpp"

namespace freebe::cli {

using io::json;

namespace {

void log(const RunOptions& o, const std::string& msg) {
    if (o.verbose) std::cerr << "[freebe] " << msg << "\n";
}

std::uint64_t seed_of(const json& cfg, const RunOptions& o) {
    if (o.seed_given) return o.seed;
    const auto it = cfg.find("seed");
    if (it == cfg.end()) return o.seed;
    if (!it->is_number_unsigned() && !it->is_number_integer()) throw Error(ErrorKind::Config, "seed: expected an integer");
    return it->get<std::uint64_t>();
}

const json& require(const json& cfg, const char* key) {
    const auto it = cfg.find(key);
    if (it == cfg.end()) throw Error(ErrorKind::Config, std::string("missing '") + key + "'");
    return *it;
}

std::vector<long> parse_n_list(const json& j, const char* context) {
    if (!j.is_array() || j.empty()) throw Error(ErrorKind::Config, std::string(context) + ": expected a non-empty integer array");
    std::vector<long> out;
    for (const auto& v : j) {
        if (!v.is_number_integer() || v.get<long>() < 1) {
            throw Error(ErrorKind::Config, std::string(context) + ": entries must be integers >= 1");
        }
        out.push_back(v.get<long>());
    }
    return out;
}

NcPoly parse_polynomial(const json& cfg) {
    const json& p = require(cfg, "polynomial");
    if (!p.is_string()) throw Error(ErrorKind::Config, "polynomial: expected a string");
    NcPoly poly = NcPoly::parse(p.get<std::string>());
    if (poly.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "polynomial is zero");
    return poly;
}

/// Omega parameters; kappa defaults to theta over the norm estimate of the
/// centered semicircular limit of `model` (certification acts on b - a0).
OmegaParams omega_for(const json& cfg, const OperatorModel* model) {
    const json empty = json::object();
    const json& j = cfg.contains("omega") ? cfg["omega"] : empty;
    OmegaParams p = io::parse_omega(j);
    if (!j.contains("kappa") && model) {
        p.kappa = p.theta / centered_norm_estimate(semicircular_limit(*model));
    }
    return p;
}

class Output {
public:
    explicit Output(const RunOptions& o) : dir_(o.out_dir) {}
    void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }
    void write() const {
        std::filesystem::create_directories(dir_);
        for (const auto& [name, content] : files_) {
            std::ofstream f(dir_ / name, std::ios::binary);
            if (!f) throw Error(ErrorKind::Config, "cannot write " + (dir_ / name).string());
            f << content;
        }
    }

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

std::string csv_row(std::initializer_list<std::string> cells) {
    std::string out;
    bool first = true;
    for (const auto& c : cells) {
        if (!first) out += ',';
        out += c;
        first = false;
    }
    return out + "\n";
}

std::string num(double v) { return io::format_double(v); }

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

}  // namespace

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NoConvergence:
        case ErrorKind::Divergent:
        case ErrorKind::OrderExceeded:
        case ErrorKind::Singular:
        case ErrorKind::EvaluatorFailure:
        case ErrorKind::OnSupport:
        case ErrorKind::NegativeMass:
        case ErrorKind::NotValidated:
            return kNoConvergence;
        default:
            return kConfigError;
    }
}

// ---------------------------------------------------------------------------

int cmd_solve(const json& cfg, const RunOptions& opts) {
    io::check_keys(cfg, {"model", "b", "solver", "omega", "seed"}, "solve config");
    const OperatorModel model = io::parse_model(require(cfg, "model"));
    const CMatrix b = io::parse_point(require(cfg, "b"), model.m(), "b");
    SolveOptions so;
    if (cfg.contains("solver")) {
        const json& s = cfg["solver"];
        io::check_keys(s, {"tol", "max_iter", "damping"}, "solver");
        so.tol = io::get_double(s, "tol", so.tol);
        so.max_iter = static_cast<int>(io::get_long(s, "max_iter", so.max_iter));
        so.damping = io::get_double(s, "damping", so.damping);
        if (!(so.tol > 0.0) || so.max_iter < 1 || !(so.damping > 0.0 && so.damping <= 1.0)) {
            throw Error(ErrorKind::Config, "solver: need tol > 0, max_iter >= 1, damping in (0,1]");
        }
    }
    so.omega = omega_for(cfg, &model);
    const SemicircularSpec spec = SemicircularSpec::from_model(model);
    log(opts, "solving at b with ||b|| = " + num(op_norm(b)));
    const SolveReport rep = solve_cauchy(spec, b, so);
    json out = {{"w", io::to_json(rep.w)},
                {"iterations", rep.iterations},
                {"residual", rep.residual},
                {"certified", rep.certified},
                {"domain_note", rep.domain_note},
                {"b", io::to_json(b)}};
    Output o(opts);
    o.add("solve.json", io::dump_json(out));
    o.write();
    return kOk;
}

int cmd_clt_rate(const json& cfg, const RunOptions& opts) {
    io::check_keys(cfg, {"model", "n_list", "grid", "omega", "gamma", "theta_star", "engine", "trend_factor", "trend_floor", "seed"},
                   "clt-rate config");
    RateExperiment e;
    e.model = io::parse_model(require(cfg, "model"));
    e.n_list = parse_n_list(require(cfg, "n_list"), "n_list");
    e.params = omega_for(cfg, &e.model);
    e.gamma = io::get_double(cfg, "gamma", e.gamma);
    e.theta_star = io::get_double(cfg, "theta_star", 0.0);
    e.seed = seed_of(cfg, opts);
    e.workers = opts.workers;
    const json& g = require(cfg, "grid");
    io::check_keys(g, {"scalar", "lambda_mu", "random_points", "relative"}, "grid");
    if (g.contains("scalar")) {
        if (!g["scalar"].is_array()) throw Error(ErrorKind::Config, "grid.scalar: expected an array");
        for (const auto& z : g["scalar"]) e.grid.scalar.push_back(io::parse_complex(z, "grid.scalar"));
    }
    if (g.contains("lambda_mu")) {
        if (!g["lambda_mu"].is_array()) throw Error(ErrorKind::Config, "grid.lambda_mu: expected an array");
        for (const auto& pair : g["lambda_mu"]) {
            if (!pair.is_array() || pair.size() != 2) throw Error(ErrorKind::Config, "grid.lambda_mu: expected [lambda, mu] pairs");
            e.grid.lambda_mu.emplace_back(io::parse_complex(pair[0], "lambda"), io::parse_complex(pair[1], "mu"));
        }
    }
    e.grid.random_points = static_cast<int>(io::get_long(g, "random_points", 0));
    if (g.contains("relative")) {
        if (!g["relative"].is_boolean()) throw Error(ErrorKind::Config, "grid.relative: expected a boolean");
        e.grid.relative = g["relative"].get<bool>();
    }
    if (cfg.contains("engine")) {
        const json& en = cfg["engine"];
        io::check_keys(en, {"series_tol", "max_order", "solver_tol", "max_iter"}, "engine");
        e.series_tol = io::get_double(en, "series_tol", e.series_tol);
        e.max_order = static_cast<int>(io::get_long(en, "max_order", e.max_order));
        e.solver_tol = io::get_double(en, "solver_tol", e.solver_tol);
        e.solver_max_iter = static_cast<int>(io::get_long(en, "max_iter", e.solver_max_iter));
    }
    const double trend_factor = io::get_double(cfg, "trend_factor", 1.2);
    // Below this level the differences are engine roundoff and carry no trend.
    const double trend_floor = io::get_double(cfg, "trend_floor", 1e-10);
    try {
        (void)e.constants();
    } catch (const Error& err) {
        throw Error(ErrorKind::Config, err.what());
    }
    // Validates every grid point before any computation.
    const auto grid = build_grid(e);
    log(opts, std::to_string(grid.size()) + " grid points, " + std::to_string(e.n_list.size()) + " values of n");
    const RateResult r = run_rate(e);

    std::string csv = "n,b_id,norm_b,diff,scaled,theta_norm,subord_resid\n";
    std::size_t failures = 0;
    for (const auto& row : r.rows) {
        if (!row.ok) {
            ++failures;
            log(opts, "n=" + std::to_string(row.n) + " " + row.b_id + ": " + row.error);
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        csv += csv_row({std::to_string(row.n), quoted(row.b_id), num(row.norm_b), num(row.ok ? row.diff : nan),
                        num(row.ok ? row.scaled : nan), num(row.ok ? row.theta_norm : nan),
                        num(row.ok ? row.subord_resid : nan)});
    }
    const double largest = r.max_scaled_by_n.empty()
                               ? 0.0
                               : *std::max_element(r.max_scaled_by_n.begin(), r.max_scaled_by_n.end());
    const bool trend_ok = largest < trend_floor || no_increasing_trend(r.max_scaled_by_n, trend_factor);
    json summary = {{"slope", r.slope},
                    {"slope_ci", r.slope_ci},
                    {"max_scaled", r.max_scaled},
                    {"kappa_star", e.star_params().kappa},
                    {"n_list", e.n_list},
                    {"max_scaled_by_n", r.max_scaled_by_n},
                    {"max_sqrt_n_theta_by_n", r.max_theta_by_n},
                    {"median_diff_by_n", r.median_diff_by_n},
                    {"failures", failures},
                    {"trend_ok", trend_ok}};
    Output o(opts);
    o.add("rates.csv", csv);
    o.add("summary.json", io::dump_json(summary));
    o.write();
    if (!trend_ok) {
        std::cerr << "assertion failed: sqrt(n) diff / ||b|| grows across n_list\n";
        return kAssertionFailed;
    }
    return kOk;
}

namespace {

CauchyEvalConfig parse_eval_config(const json& cfg) {
    CauchyEvalConfig c;
    const json empty = json::object();
    c.omega = io::parse_omega(cfg.contains("omega") ? cfg["omega"] : empty);
    c.gamma = io::get_double(cfg, "gamma", c.gamma);
    c.R = io::get_double(cfg, "R", 0.0);
    if (cfg.contains("engine")) {
        const json& en = cfg["engine"];
        io::check_keys(en, {"tol", "max_order", "max_iter"}, "engine");
        c.tol = io::get_double(en, "tol", c.tol);
        c.max_order = static_cast<int>(io::get_long(en, "max_order", c.max_order));
        c.max_iter = static_cast<int>(io::get_long(en, "max_iter", c.max_iter));
    }
    try {
        (void)CertifiedConstants::make(c.omega, c.gamma);
    } catch (const Error& err) {
        throw Error(ErrorKind::Config, err.what());
    }
    return c;
}

}  // namespace

int cmd_poly(const json& cfg, const RunOptions& opts) {
    io::check_keys(cfg, {"polynomial", "family", "n_list", "z", "engine", "omega", "gamma", "R", "seed"}, "poly config");
    const NcPoly p = parse_polynomial(cfg);
    const FreeFamilySpec family = io::parse_family(require(cfg, "family"));
    if (family.dim() < p.d()) throw Error(ErrorKind::Config, "family has fewer variables than the polynomial");
    const std::vector<long> n_list = cfg.contains("n_list") ? parse_n_list(cfg["n_list"], "n_list") : std::vector<long>{1};
    std::vector<cplx> zs;
    const json& zj = require(cfg, "z");
    if (!zj.is_array() || zj.empty()) throw Error(ErrorKind::Config, "z: expected a non-empty array");
    for (const auto& z : zj) zs.push_back(io::parse_complex(z, "z"));
    const CauchyEvalConfig ec = parse_eval_config(cfg);
    log(opts, "polynomial " + p.to_string());
    const PolyRateResult r = poly_rate(p, family, n_list, zs, ec, opts.workers);

    std::string csv = "n,z_re,z_im,g_re,g_im,g_limit_re,g_limit_im,diff,scaled\n";
    std::size_t failures = 0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& row : r.rows) {
        if (!row.ok) {
            ++failures;
            log(opts, "n=" + std::to_string(row.n) + " " + row.z_id + ": " + row.error);
        }
        csv += csv_row({std::to_string(row.n), num(row.z.real()), num(row.z.imag()), num(row.ok ? row.g_n.real() : nan),
                        num(row.ok ? row.g_n.imag() : nan), num(row.g_limit.real()), num(row.g_limit.imag()),
                        num(row.ok ? row.diff : nan), num(row.ok ? row.scaled : nan)});
    }
    json summary = {{"polynomial", p.to_string()}, {"radius", r.radius},         {"slope", r.slope},
                    {"slope_ci", r.slope_ci},      {"max_scaled", r.max_scaled}, {"failures", failures}};
    Output o(opts);
    o.add("poly.csv", csv);
    o.add("poly_summary.json", io::dump_json(summary));
    o.write();
    return failures == 0 ? kOk : kNoConvergence;
}

int cmd_density(const json& cfg, const RunOptions& opts) {
    io::check_keys(cfg, {"polynomial", "family", "grid", "eps", "solver", "oracle", "oracle_min_x", "sup_tolerance", "seed"},
                   "density config");
    const NcPoly p = parse_polynomial(cfg);
    if (!p.is_selfadjoint()) throw Error(ErrorKind::Config, "density needs a self-adjoint polynomial");
    const FreeFamilySpec family = io::parse_family(require(cfg, "family"));
    if (family.dim() < p.d()) throw Error(ErrorKind::Config, "family has fewer variables than the polynomial");
    const json& g = require(cfg, "grid");
    io::check_keys(g, {"min", "max", "points"}, "grid");
    const double lo = io::get_double(g, "min", -2.5), hi = io::get_double(g, "max", 2.5);
    const long points = io::get_long(g, "points", 401);
    if (!(hi > lo) || points < 2) throw Error(ErrorKind::Config, "grid: need max > min and points >= 2");
    std::vector<double> eps = default_eps_schedule();
    if (cfg.contains("eps")) {
        eps.clear();
        if (!cfg["eps"].is_array() || cfg["eps"].empty()) throw Error(ErrorKind::Config, "eps: expected a non-empty array");
        for (const auto& v : cfg["eps"]) {
            if (!v.is_number() || !(v.get<double>() > 0.0)) throw Error(ErrorKind::Config, "eps: entries must be positive");
            eps.push_back(v.get<double>());
        }
    }
    double tol = 1e-11;
    int max_iter = 500000;
    if (cfg.contains("solver")) {
        io::check_keys(cfg["solver"], {"tol", "max_iter"}, "solver");
        tol = io::get_double(cfg["solver"], "tol", tol);
        max_iter = static_cast<int>(io::get_long(cfg["solver"], "max_iter", max_iter));
    }
    std::optional<OracleLaw> oracle;
    if (cfg.contains("oracle")) {
        if (!cfg["oracle"].is_string()) throw Error(ErrorKind::Config, "oracle: expected a string");
        oracle = OracleLaw::from_name(cfg["oracle"].get<std::string>());
    }
    const double min_x = io::get_double(cfg, "oracle_min_x", -std::numeric_limits<double>::infinity());
    const double sup_tol = io::get_double(cfg, "sup_tolerance", 1e-2);

    std::vector<double> xs;
    for (long i = 0; i < points; ++i) xs.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
    const LinearPencil pencil = linearize(p);
    log(opts, "pencil of size " + std::to_string(pencil.m()) + " for " + p.to_string());
    const GridDensity d = density_from_cauchy(pencil_evaluator(pencil, family, tol, max_iter), xs, eps);
    const Cdf f = cdf_from_density(d);

    std::string dcsv = "x,density\n", fcsv = "x,cdf\n";
    double mass = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        dcsv += csv_row({num(xs[i]), num(d.values[i])});
        fcsv += csv_row({num(xs[i]), num(f.values[i])});
        if (i > 0) mass += 0.5 * (d.values[i] + d.values[i - 1]) * (xs[i] - xs[i - 1]);
    }
    json summary = {{"polynomial", p.to_string()},
                    {"eps", eps},
                    {"mass", mass},
                    {"lipschitz_estimate", lipschitz_estimate(f, (hi - lo) / static_cast<double>(points - 1))},
                    {"certified", false},
                    {"note", "near-axis evaluation lies outside the certified Omega domain"}};
    bool pass = true;
    if (oracle) {
        double sup = 0.0;
        Cdf ref;
        ref.x = xs;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            ref.values.push_back(oracle_cdf(*oracle, xs[i]));
            if (xs[i] >= min_x) sup = std::max(sup, std::abs(d.values[i] - oracle_density(*oracle, xs[i])));
        }
        summary["sup_error"] = sup;
        summary["kolmogorov"] = kolmogorov(f, ref);
        summary["sup_tolerance"] = sup_tol;
        pass = sup < sup_tol;
        summary["pass"] = pass;
    }
    Output o(opts);
    o.add("density.csv", dcsv);
    o.add("cdf.csv", fcsv);
    o.add("density_summary.json", io::dump_json(summary));
    o.write();
    if (!pass) {
        std::cerr << "assertion failed: density sup error above tolerance\n";
        return kAssertionFailed;
    }
    return kOk;
}

int cmd_check_linearization(const json& cfg, const RunOptions& opts) {
    io::check_keys(cfg, {"polynomial", "trials", "size", "tolerance", "corrupt", "seed"}, "check-linearization config");
    const NcPoly p = parse_polynomial(cfg);
    const int trials = static_cast<int>(io::get_long(cfg, "trials", 100));
    const int size = static_cast<int>(io::get_long(cfg, "size", 6));
    const double tol = io::get_double(cfg, "tolerance", 1e-10);
    if (trials < 1 || size < 2 || !(tol > 0.0)) throw Error(ErrorKind::Config, "need trials >= 1, size >= 2, tolerance > 0");
    LinearPencil pencil = linearize(p);
    if (cfg.contains("corrupt")) {
        const json& c = cfg["corrupt"];
        io::check_keys(c, {"matrix", "row", "col", "delta"}, "corrupt");
        const long which = io::get_long(c, "matrix", 0);
        const long row = io::get_long(c, "row", 0), col = io::get_long(c, "col", 0);
        if (which < 0 || which > pencil.d() || row < 0 || col < 0 || row >= pencil.m() || col >= pencil.m()) {
            throw Error(ErrorKind::Config, "corrupt: index out of range for a pencil of size " + std::to_string(pencil.m()));
        }
        CMatrix& target = which == 0 ? pencil.a0 : pencil.coeffs[static_cast<std::size_t>(which - 1)];
        target(row, col) += io::get_double(c, "delta", 0.1);
    }
    const std::uint64_t seed = seed_of(cfg, opts);
    const double residual = validate_pencil(p, pencil, trials, size, seed);
    const double mu_residual = validate_mu_identity(pencil, 8, 4, seed);
    const bool pass = residual < tol;
    json out = {{"polynomial", p.to_string()},
                {"m", pencil.m()},
                {"degree", pencil.degree},
                {"hermitian", pencil.is_hermitian()},
                {"residual", residual},
                {"tolerance", tol},
                {"mu_identity_residual", mu_residual},
                {"mu_identity_valid", mu_residual < kMuIdentityTol},
                {"a0", io::to_json(pencil.a0)},
                {"pass", pass}};
    json coeffs = json::array();
    for (const auto& a : pencil.coeffs) coeffs.push_back(io::to_json(a));
    out["coeffs"] = coeffs;
    log(opts, "pencil residual " + num(residual));
    Output o(opts);
    o.add("linearization.json", io::dump_json(out));
    o.write();
    if (!pass) {
        std::cerr << "assertion failed: pencil residual " << num(residual) << " >= " << num(tol) << "\n";
        return kAssertionFailed;
    }
    return kOk;
}

int cmd_mc(const json& cfg, const RunOptions& opts) {
    io::check_keys(cfg, {"model", "n", "b", "N", "samples", "series", "seed"}, "mc config");
    const OperatorModel model = io::parse_model(require(cfg, "model"));
    const long n = io::get_long(cfg, "n", 1);
    if (n < 1) throw Error(ErrorKind::Config, "n must be >= 1");
    const CMatrix b = io::parse_point(require(cfg, "b"), model.m(), "b");
    const long N = io::get_long(cfg, "N", 500);
    const long samples = io::get_long(cfg, "samples", 20);
    if (N < 50 || samples < 1) throw Error(ErrorKind::InvalidSize, "need N >= 50 and samples >= 1");
    SeriesOptions so;
    so.max_order = 512;
    so.tol = 1e-12;
    if (cfg.contains("series")) {
        io::check_keys(cfg["series"], {"tol", "max_order"}, "series");
        so.tol = io::get_double(cfg["series"], "tol", so.tol);
        so.max_order = static_cast<int>(io::get_long(cfg["series"], "max_order", so.max_order));
    }
    const std::uint64_t seed = seed_of(cfg, opts);
    log(opts, "Monte Carlo with N = " + std::to_string(N) + ", " + std::to_string(samples) + " samples");
    const McEstimate mc = mc_estimate(model, n, b, static_cast<int>(N), static_cast<int>(samples), seed, opts.workers);
    const SeriesResult exact = cauchy_series(SumModel{model, n}, b, so);
    const double diff = op_norm(mc.value - exact.value);
    const double bound = 3.0 * mc.stderr_ + 10.0 / static_cast<double>(N);
    const bool pass = diff < bound;
    json out = {{"estimate", io::to_json(mc.value)},
                {"stderr", mc.stderr_},
                {"series", io::to_json(exact.value)},
                {"series_tail_bound", exact.tail_bound},
                {"diff", diff},
                {"bound", bound},
                {"N", N},
                {"samples", samples},
                {"n", n},
                {"seed", seed},
                {"pass", pass}};
    Output o(opts);
    o.add("mc.json", io::dump_json(out));
    o.write();
    if (!pass) {
        std::cerr << "assertion failed: Monte Carlo estimate differs from the series by " << num(diff) << "\n";
        return kAssertionFailed;
    }
    return kOk;
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
    CLI::App app{"freebe: operator-valued Cauchy transforms and free CLT rates"};
    app.require_subcommand(1);
    std::string config_path;
    RunOptions opts;
    std::uint64_t seed = 1;
    app.add_option("--config", config_path, "JSON configuration file")->required();
    app.add_option("--out", opts.out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config)");
    app.add_option("--workers", opts.workers, "worker threads (0 = available parallelism)")->check(CLI::NonNegativeNumber);
    app.add_flag("--verbose", opts.verbose, "progress on standard error");
    app.fallthrough();

    using Cmd = int (*)(const json&, const RunOptions&);
    const std::vector<std::tuple<const char*, const char*, Cmd>> commands = {
        {"solve", "solve the semicircular fixed-point equation", cmd_solve},
        {"clt-rate", "measure ||G_s - G_{S_n}|| over n and a grid", cmd_clt_rate},
        {"poly", "scalar Cauchy transforms of a polynomial via linearization", cmd_poly},
        {"density", "recover the spectral density and CDF of a polynomial", cmd_density},
        {"check-linearization", "validate the linearization pencil of a polynomial", cmd_check_linearization},
        {"mc", "Monte Carlo matrix-model estimate against the series", cmd_mc},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help, fn] : commands) subs.push_back(app.add_subcommand(name, help));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }
    opts.seed = seed;
    opts.seed_given = seed_opt->count() > 0;
    if (opts.workers == 0) opts.workers = default_workers();

    json cfg;
    try {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open config " << config_path << "\n";
            return kConfigError;
        }
        cfg = json::parse(in);
    } catch (const json::exception& e) {
        std::cerr << "error: malformed JSON in " << config_path << ": " << e.what() << "\n";
        return kConfigError;
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        try {
            return std::get<2>(commands[i])(cfg, opts);
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return exit_code_for(e.kind());
        } catch (const json::exception& e) {
            std::cerr << "error: invalid configuration value: " << e.what() << "\n";
            return kConfigError;
        } catch (const std::filesystem::filesystem_error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kConfigError;
        }
    }
    return kConfigError;
}

}  // namespace freebe::cli

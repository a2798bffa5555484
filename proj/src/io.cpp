#include "freebe/io.hpp"

#include <charconv>
#include <cmath>
#include <set>

namespace freebe::io {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

void dump(const json& j, int indent, int depth, std::string& out) {
    const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
    const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{";
            out += nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) {
                    out += ",";
                    out += nl;
                }
                first = false;
                out += pad + json(it.key()).dump() + (indent > 0 ? ": " : ":");
                dump(it.value(), indent, depth + 1, out);
            }
            out += nl + close + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // Short arrays of scalars stay on one line.
            const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); }) && j.size() <= 8;
            out += "[";
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += flat || indent == 0 ? ", " : ",";
                if (!flat) out += nl + pad;
                first = false;
                dump(e, indent, depth + 1, out);
            }
            if (!flat) out += nl + close;
            out += "]";
            return;
        }
        case json::value_t::number_float:
            out += std::isfinite(j.get<double>()) ? format_double(j.get<double>()) : "null";
            return;
        default:
            out += j.dump();
    }
}

[[noreturn]] void config_error(std::string_view context, const std::string& what) {
    throw Error(ErrorKind::Config, std::string(context) + ": " + what);
}

}  // namespace

std::string dump_json(const json& j, int indent) {
    std::string out;
    dump(j, indent, 0, out);
    out += "\n";
    return out;
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view context) {
    if (!obj.is_object()) config_error(context, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            config_error(context, "unknown key '" + it.key() + "'");
        }
    }
}

double get_double(const json& obj, std::string_view key, double fallback) {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) return fallback;
    if (!it->is_number()) config_error(key, "expected a number");
    return it->get<double>();
}

long get_long(const json& obj, std::string_view key, long fallback) {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer()) config_error(key, "expected an integer");
    return it->get<long>();
}

cplx parse_complex(const json& j, std::string_view context) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    config_error(context, "expected a number or [re, im]");
}

namespace {

bool is_complex_literal(const json& j) {
    return j.is_number() || (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number());
}

}  // namespace

CMatrix parse_matrix(const json& j, std::string_view context) {
    if (is_complex_literal(j)) return CMatrix::Constant(1, 1, parse_complex(j, context));
    if (!j.is_array() || j.empty()) config_error(context, "expected a non-empty array of rows");
    const auto m = static_cast<Eigen::Index>(j.size());
    CMatrix a(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m) {
            config_error(context, "matrix must be square (row " + std::to_string(r) + ")");
        }
        for (Eigen::Index c = 0; c < m; ++c) a(r, c) = parse_complex(row[static_cast<std::size_t>(c)], context);
    }
    if (!a.allFinite()) config_error(context, "non-finite matrix entry");
    return a;
}

CMatrix parse_point(const json& j, Eigen::Index m, std::string_view context) {
    if (is_complex_literal(j)) return parse_complex(j, context) * identity(m);
    CMatrix a = parse_matrix(j, context);
    if (a.rows() != m) config_error(context, "matrix dimension does not match the model");
    return a;
}

ScalarLaw parse_law(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        config_error("distribution", "expected an object with a string 'kind'");
    }
    const std::string kind = j["kind"].get<std::string>();
    ScalarLaw law;
    if (kind == "semicircular") {
        check_keys(j, {"kind", "variance"}, "semicircular distribution");
        law = ScalarLaw::semicircular(get_double(j, "variance", 1.0));
    } else if (kind == "bernoulli") {
        check_keys(j, {"kind"}, "bernoulli distribution");
        law = ScalarLaw::bernoulli();
    } else if (kind == "two_atom") {
        check_keys(j, {"kind", "atoms", "weights"}, "two_atom distribution");
        double atoms[2] = {2.0, -0.5}, weights[2] = {0.2, 0.8};
        for (const char* key : {"atoms", "weights"}) {
            if (!j.contains(key)) continue;
            const json& v = j[key];
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
                config_error("two_atom distribution", std::string(key) + " must be two numbers");
            }
            double* dst = std::string_view(key) == "atoms" ? atoms : weights;
            dst[0] = v[0].get<double>();
            dst[1] = v[1].get<double>();
        }
        if (std::abs(weights[0] + weights[1] - 1.0) > 1e-12) config_error("two_atom distribution", "weights must sum to 1");
        law = ScalarLaw::two_atom(atoms[0], atoms[1], weights[0]);
    } else if (kind == "moments") {
        check_keys(j, {"kind", "moments"}, "moments distribution");
        if (!j.contains("moments") || !j["moments"].is_array()) config_error("moments distribution", "missing 'moments' array");
        std::vector<double> m;
        for (const auto& v : j["moments"]) {
            if (!v.is_number()) config_error("moments distribution", "moments must be numbers");
            m.push_back(v.get<double>());
        }
        law = ScalarLaw::from_moments(std::move(m));
    } else {
        throw Error(ErrorKind::UnknownKind, "unknown distribution kind '" + kind + "'");
    }
    law.validate();
    return law;
}

FreeFamilySpec parse_family(const json& j) {
    check_keys(j, {"base", "mixing"}, "family");
    if (!j.contains("base") || !j["base"].is_array() || j["base"].empty()) {
        config_error("family", "'base' must be a non-empty array of distributions");
    }
    std::vector<ScalarLaw> base;
    for (const auto& d : j["base"]) base.push_back(parse_law(d));
    if (!j.contains("mixing")) return FreeFamilySpec::independent(std::move(base));
    const json& mx = j["mixing"];
    if (!mx.is_array() || mx.empty()) config_error("family", "'mixing' must be a non-empty array of rows");
    RMatrix c(static_cast<Eigen::Index>(mx.size()), static_cast<Eigen::Index>(base.size()));
    for (std::size_t r = 0; r < mx.size(); ++r) {
        if (!mx[r].is_array() || mx[r].size() != base.size()) config_error("family", "mixing rows must have one entry per base law");
        for (std::size_t k = 0; k < base.size(); ++k) {
            if (!mx[r][k].is_number()) config_error("family", "mixing entries must be numbers");
            c(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = mx[r][k].get<double>();
        }
    }
    FreeFamilySpec f = FreeFamilySpec::mixed(std::move(base), c);
    f.validate();
    return f;
}

OperatorModel parse_model(const json& j) {
    check_keys(j, {"m", "a0", "coeffs", "family"}, "model");
    if (!j.contains("coeffs") || !j["coeffs"].is_array() || j["coeffs"].empty()) {
        config_error("model", "'coeffs' must be a non-empty array of matrices");
    }
    if (!j.contains("family")) config_error("model", "missing 'family'");
    std::vector<CMatrix> coeffs;
    for (const auto& a : j["coeffs"]) coeffs.push_back(parse_matrix(a, "model.coeffs"));
    const Eigen::Index m = coeffs.front().rows();
    if (j.contains("m") && get_long(j, "m", m) != m) config_error("model", "'m' does not match coefficient size");
    CMatrix a0 = j.contains("a0") ? parse_matrix(j["a0"], "model.a0") : CMatrix::Zero(m, m);
    try {
        return OperatorModel::make(std::move(a0), std::move(coeffs), parse_family(j["family"]));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::DimensionMismatch || e.kind() == ErrorKind::InvalidParams) config_error("model", e.what());
        throw;
    }
}

OmegaParams parse_omega(const json& j) {
    check_keys(j, {"theta", "sigma", "c", "kappa"}, "omega");
    OmegaParams p;
    p.theta = get_double(j, "theta", p.theta);
    p.sigma = get_double(j, "sigma", p.sigma);
    p.c = get_double(j, "c", p.c);
    p.kappa = get_double(j, "kappa", p.kappa);
    try {
        p.validate();
    } catch (const Error& e) {
        config_error("omega", e.what());
    }
    return p;
}

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json to_json(const CMatrix& a) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(to_json(a(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace freebe::io

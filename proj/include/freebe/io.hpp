#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "freebe/cltlab.hpp"
#include "freebe/freemoments.hpp"
#include "freebe/opmodel.hpp"

namespace freebe::io {

using json = nlohmann::json;

/// Locale-independent rendering with 17 significant digits ("nan", "inf"
/// for non-finite values).
std::string format_double(double v);

/// JSON text with every floating value printed by format_double; non-finite
/// values become null.
std::string dump_json(const json& j, int indent = 2);

/// Throws Config if `obj` is not an object or has keys outside `allowed`.
void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view context);

double get_double(const json& obj, std::string_view key, double fallback);
long get_long(const json& obj, std::string_view key, long fallback);

/// Number or [re, im].
cplx parse_complex(const json& j, std::string_view context);
/// Array of rows of complex entries; a bare complex value gives a 1 x 1 matrix.
CMatrix parse_matrix(const json& j, std::string_view context);
/// Scalar z means z I of size m; otherwise an m x m matrix.
CMatrix parse_point(const json& j, Eigen::Index m, std::string_view context);

ScalarLaw parse_law(const json& j);
FreeFamilySpec parse_family(const json& j);
OperatorModel parse_model(const json& j);
/// {"theta", "sigma", "c", "kappa"}; missing keys take the defaults.
OmegaParams parse_omega(const json& j);

json to_json(cplx z);
json to_json(const CMatrix& a);

}  // namespace freebe::io

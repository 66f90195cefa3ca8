#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "superhedge/error.hpp"
#include "superhedge/linalg.hpp"
#include "superhedge/move_set.hpp"
#include "superhedge/payoff.hpp"
#include "superhedge/set_function.hpp"

namespace superhedge {

using Json = nlohmann::ordered_json;

inline Rational rational_from_json(const Json& v) {
  if (v.is_string()) return Rational::parse(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  if (v.is_number_float()) return rational_from_double(v.get<double>());
  throw Error(ErrorCode::invalid_config, "expected a rational: string, integer or number");
}

inline Json rational_to_json(const Rational& r) {
  if (r.is_integer()) return Json(r.num());
  return Json(r.to_string());
}

// Move sets come inline as arrays of coordinate arrays, as an object with a
// "points" field, or as a named preset.
inline MoveSet move_set_from_json(const Json& j) {
  if (j.is_object() && j.contains("preset")) {
    const std::string name = j.at("preset").get<std::string>();
    auto rvi = [](std::initializer_list<int> xs) {
      RatVec v;
      for (int x : xs) v.push_back(Rational(x));
      return v;
    };
    if (name == "square")
      return build_move_set({rvi({1, 1}), rvi({1, -1}), rvi({-1, 1}), rvi({-1, -1})});
    if (name == "cross")
      return build_move_set({rvi({1, 0}), rvi({-1, 0}), rvi({0, 1}), rvi({0, -1})});
    if (name == "box3") {
      std::vector<RatVec> pts;
      for (int a : {-1, 2})
        for (int b : {-2, 1})
          for (int c : {-1, 1}) pts.push_back(rvi({a, b, c}));
      return build_move_set(pts);
    }
    throw Error(ErrorCode::invalid_config, "unknown move set preset '" + name + "'");
  }
  const Json& arr = j.is_object() ? j.at("points") : j;
  if (!arr.is_array() || arr.empty())
    throw Error(ErrorCode::invalid_config, "move set must be a nonempty array of points");
  std::vector<RatVec> pts;
  for (const auto& row : arr) {
    if (!row.is_array())
      throw Error(ErrorCode::invalid_config, "each move must be an array of coordinates");
    RatVec p;
    for (const auto& v : row) p.push_back(rational_from_json(v));
    pts.push_back(std::move(p));
  }
  return build_move_set(std::move(pts));
}

inline Json move_set_to_json(const MoveSet& m) {
  Json pts = Json::array();
  for (const auto& p : m.points) {
    Json row = Json::array();
    for (const auto& v : p) row.push_back(rational_to_json(v));
    pts.push_back(row);
  }
  Json j;
  j["points"] = pts;
  j["dim"] = m.dim;
  j["is_product"] = m.is_product();
  j["contains_zero_move"] = m.contains_zero_move;
  return j;
}

inline SetFunction set_function_from_json(const Json& j, int d) {
  std::vector<double> vals(std::size_t{1} << d);
  std::vector<bool> seen(vals.size(), false);
  for (const auto& [key, value] : j.items()) {
    std::size_t mask = std::stoul(key);
    if (mask >= vals.size())
      throw Error(ErrorCode::invalid_config, "set function mask out of range");
    vals[mask] = value.get<double>();
    seen[mask] = true;
  }
  for (bool s : seen)
    if (!s) throw Error(ErrorCode::invalid_config, "set function table incomplete");
  return SetFunction(d, std::move(vals));
}

inline Json set_function_to_json(const SetFunction& f) {
  Json j = Json::object();
  for (unsigned mask = 0; mask < (1u << f.d); ++mask) j[std::to_string(mask)] = f(mask);
  return j;
}

inline Scaling scaling_from_json(const Json& j, Scaling fallback) {
  if (!j.contains("scaling")) return fallback;
  const std::string s = j.at("scaling").get<std::string>();
  if (s == "none") return Scaling::none;
  if (s == "sqrt_n") return Scaling::sqrt_n;
  throw Error(ErrorCode::invalid_config, "scaling must be 'none' or 'sqrt_n'");
}

inline Payoff payoff_from_json(const Json& j, Scaling default_scaling = Scaling::none) {
  if (!j.is_object() || !j.contains("kind"))
    throw Error(ErrorCode::invalid_config, "payoff needs a 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  const Scaling scaling = scaling_from_json(j, default_scaling);
  auto strike = [&]() { return j.contains("K") ? j.at("K").get<double>() : j.value("strike", 0.0); };
  if (kind == "max_option") return payoffs::max_option(strike(), scaling);
  if (kind == "min_option") return payoffs::min_option(strike(), scaling);
  if (kind == "butterfly") return payoffs::butterfly(scaling);
  if (kind == "cone") return payoffs::cone(scaling);
  if (kind == "double_butterfly") return payoffs::double_butterfly(scaling);
  if (kind == "linear") {
    if (!j.contains("weights"))
      throw Error(ErrorCode::invalid_config, "linear payoff needs 'weights'");
    return payoffs::linear(j.at("weights").get<std::vector<double>>(), j.value("offset", 0.0),
                           scaling);
  }
  if (kind == "table1d") {
    if (!j.contains("knots") || !j.contains("values"))
      throw Error(ErrorCode::invalid_config, "table1d payoff needs 'knots' and 'values'");
    return payoffs::table1d(j.at("knots").get<std::vector<double>>(),
                            j.at("values").get<std::vector<double>>(), scaling);
  }
  if (kind == "table") {
    if (!j.contains("axes") || !j.contains("values"))
      throw Error(ErrorCode::invalid_config, "table payoff needs 'axes' and 'values'");
    return payoffs::lattice_table(j.at("axes").get<std::vector<std::vector<double>>>(),
                                  j.at("values").get<std::vector<double>>(), scaling);
  }
  throw Error(ErrorCode::invalid_config, "unknown payoff kind '" + kind + "'");
}

inline Json payoff_to_json(const Payoff& p, const Json& original) {
  Json j;
  j["kind"] = p.kind;
  if (original.is_object()) {
    for (const auto& [key, value] : original.items())
      if (key != "kind" && key != "scaling") j[key] = value;
  }
  j["scaling"] = p.scaling == Scaling::sqrt_n ? "sqrt_n" : "none";
  if (p.declared_modularity) j["declared_structure"] = to_string(*p.declared_modularity);
  if (p.declared_convex) j["declared_convex"] = true;
  if (p.partition) j["separable"] = true;
  return j;
}

inline Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty())
    throw Error(ErrorCode::invalid_config, "matrix must be an array of rows");
  const std::size_t n = j.size();
  Matrix m(n, j.at(0).size());
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = j.at(r);
    if (row.size() != m.cols)
      throw Error(ErrorCode::invalid_config, "ragged matrix rows");
    for (std::size_t c = 0; c < m.cols; ++c) m(r, c) = row.at(c).get<double>();
  }
  return m;
}

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace superhedge

#pragma once

#include <cmath>
#include <string>

#include "infobound/errors.hpp"

namespace infobound {

// Decision function theta: R -> [0,1] turning the log-likelihood-ratio
// statistic into a belief that U_J = 1. All kinds satisfy 1 - theta(x) =
// theta(-x) bitwise: negative arguments are evaluated via the reflection.
struct DecisionFunction {
  enum class Kind { kConstantHalf, kErf, kTanh, kSign };

  Kind kind = Kind::kErf;
  double a = 1.0;  // scale for erf/tanh

  double operator()(double x) const {
    if (x < 0.0) return 1.0 - positive_eval(-x);
    return positive_eval(x);
  }

  static DecisionFunction constant_half() { return {Kind::kConstantHalf, 1.0}; }
  static DecisionFunction erf_scaled(double a) { return make_scaled(Kind::kErf, a); }
  static DecisionFunction tanh_scaled(double a) { return make_scaled(Kind::kTanh, a); }
  static DecisionFunction sign() { return {Kind::kSign, 1.0}; }

  // "constant-half" | "sign" | "erf[:a]" | "tanh[:a]"
  static DecisionFunction parse(const std::string& text) {
    std::string name = text;
    double a = 1.0;
    if (const auto pos = text.find(':'); pos != std::string::npos) {
      name = text.substr(0, pos);
      try {
        a = std::stod(text.substr(pos + 1));
      } catch (const std::exception&) {
        throw validation_error("theta: bad scale in \"" + text + "\"");
      }
    }
    if (name == "constant-half") return constant_half();
    if (name == "sign") return sign();
    if (name == "erf") return erf_scaled(a);
    if (name == "tanh") return tanh_scaled(a);
    throw validation_error("theta: unknown kind \"" + name + "\"");
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::kConstantHalf: return "constant-half";
      case Kind::kSign: return "sign";
      case Kind::kErf: return "erf:" + format_scale();
      case Kind::kTanh: return "tanh:" + format_scale();
    }
    return "?";
  }

 private:
  static DecisionFunction make_scaled(Kind kind, double a) {
    if (!(a > 0.0)) throw validation_error("theta: scale must be positive");
    return {kind, a};
  }

  double positive_eval(double x) const {
    // Delta-Y grows with T; clamp before the smooth kinds.
    x = std::min(x, 1e8);
    switch (kind) {
      case Kind::kConstantHalf: return 0.5;
      case Kind::kErf: return 0.5 + 0.5 * std::erf(x / a);
      case Kind::kTanh: return 0.5 + 0.5 * std::tanh(x / a);
      case Kind::kSign: return x == 0.0 ? 0.5 : 1.0;
    }
    return 0.5;
  }

  std::string format_scale() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", a);
    return buf;
  }
};

}  // namespace infobound

#pragma once

#include <string>

#include "mktau/errors.hpp"

namespace mktau {

/// Innovation distribution family for the simulators: matrix normal, or the
/// jointly elliptical t with integer degrees of freedom nu.
enum class Dist { normal, student_t };

/// Estimator family: Kendall-matrix two-step (mrts) or the mean-centered
/// second-moment PCA baseline (apca).
enum class Method { mrts, apca };

inline std::string to_string(Dist dist, unsigned nu) {
  return dist == Dist::normal ? "normal" : "t" + std::to_string(nu);
}

inline std::string to_string(Method m) { return m == Method::mrts ? "mrts" : "apca"; }

/// Parses "normal" or "t<nu>" (e.g. "t1", "t3"); returns the pair (dist, nu).
inline std::pair<Dist, unsigned> parse_dist(const std::string& text) {
  if (text == "normal") return {Dist::normal, 0};
  if (text.size() >= 2 && text[0] == 't') {
    unsigned nu = 0;
    for (std::size_t i = 1; i < text.size(); ++i) {
      if (text[i] < '0' || text[i] > '9')
        throw ParamError("unknown distribution '" + text + "'");
      nu = nu * 10 + static_cast<unsigned>(text[i] - '0');
    }
    if (nu == 0) throw ParamError("t distribution requires nu >= 1, got '" + text + "'");
    return {Dist::student_t, nu};
  }
  throw ParamError("unknown distribution '" + text + "' (expected normal or t<nu>)");
}

inline Method parse_method(const std::string& text) {
  if (text == "mrts") return Method::mrts;
  if (text == "apca") return Method::apca;
  throw ParamError("unknown method '" + text + "' (expected mrts or apca)");
}

}  // namespace mktau

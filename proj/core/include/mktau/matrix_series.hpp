#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mktau/errors.hpp"

namespace mktau {

using Index = Eigen::Index;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Time-indexed stack of T real p1 x p2 matrices, stored contiguously with
/// row-major layout inside each time slice (the order the binary format uses).
struct MatrixSeries {
  Index T = 0;
  Index p1 = 0;
  Index p2 = 0;
  std::vector<double> data;

  MatrixSeries() = default;

  MatrixSeries(Index T_, Index p1_, Index p2_) : T(T_), p1(p1_), p2(p2_) {
    if (T < 1 || p1 < 1 || p2 < 1)
      throw ParamError("MatrixSeries dimensions must satisfy T >= 1, p1 >= 1, p2 >= 1");
    data.assign(static_cast<std::size_t>(T) * p1 * p2, 0.0);
  }

  double& at(Index t, Index r, Index c) {
    return data[static_cast<std::size_t>((t * p1 + r) * p2 + c)];
  }
  double at(Index t, Index r, Index c) const {
    return data[static_cast<std::size_t>((t * p1 + r) * p2 + c)];
  }

  Eigen::Map<RowMajorMatrix> slice(Index t) {
    return {data.data() + static_cast<std::size_t>(t) * p1 * p2, p1, p2};
  }
  Eigen::Map<const RowMajorMatrix> slice(Index t) const {
    return {data.data() + static_cast<std::size_t>(t) * p1 * p2, p1, p2};
  }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const MatrixSeries& a, const MatrixSeries& b) {
    return a.T == b.T && a.p1 == b.p1 && a.p2 == b.p2 && a.data == b.data;
  }
};

}  // namespace mktau

#ifndef IPMM_DATA_HPP
#define IPMM_DATA_HPP

#include <array>
#include <cstdint>

#include "ipmm/errors.hpp"

namespace ipmm {

/* Per-cell payload: a small fixed-capacity vector of reals.  The dimension m
 * is uniform across one mesh; the benchmarks run with m = 1, so inline
 * storage avoids a heap allocation per cell. */
class DataVector {
 public:
  static constexpr int kMaxDim = 4;

  DataVector() = default;
  explicit DataVector(int m, double fill = 0.0) : m_(static_cast<uint8_t>(m)) {
    if (m < 0 || m > kMaxDim) throw Error("DataVector: dimension out of range");
    for (int i = 0; i < m; ++i) c_[i] = fill;
  }

  int size() const { return m_; }
  double operator[](int i) const { return c_[i]; }
  double& operator[](int i) { return c_[i]; }

  DataVector& operator+=(const DataVector& o) {
    for (int i = 0; i < m_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  DataVector& operator*=(double s) {
    for (int i = 0; i < m_; ++i) c_[i] *= s;
    return *this;
  }
  friend DataVector operator*(double s, DataVector d) {
    d *= s;
    return d;
  }
  friend DataVector operator+(DataVector a, const DataVector& b) {
    a += b;
    return a;
  }

 private:
  std::array<double, kMaxDim> c_{};
  uint8_t m_ = 0;
};

/* Which side of the tracked interface a cell lies on.  Maintained by the
 * data-transfer layer; freshly created cells start unset. */
enum class PhaseLabel : uint8_t { unset = 0, inside = 1, outside = 2 };

}  // namespace ipmm

#endif

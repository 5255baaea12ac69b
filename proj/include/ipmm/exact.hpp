#ifndef IPMM_EXACT_HPP
#define IPMM_EXACT_HPP

/* Exact sign evaluation for the orientation and incircle determinants.
 *
 * Fast path: plain double evaluation guarded by a static forward error bound
 * (the classic stage-A filter with constants (3+16eps)eps and (10+96eps)eps).
 * When the filter cannot certify the sign, the determinant is recomputed in
 * nonoverlapping floating-point expansions, which represent the exact value,
 * and the sign is read off the leading component.  The expansion path is
 * slower but runs only for (near-)degenerate inputs.
 */

#include <cmath>
#include <cstddef>
#include <vector>

namespace ipmm::detail {

inline constexpr double kEps = 1.1102230246251565e-16; /* 2^-53 */
inline constexpr double kCcwErrA = (3.0 + 16.0 * kEps) * kEps;
inline constexpr double kIccErrA = (10.0 + 96.0 * kEps) * kEps;

/* Error-free transforms.  two_product uses fma, so no splitter is needed. */
inline void two_sum(double a, double b, double& hi, double& lo) {
  hi = a + b;
  double bv = hi - a;
  double av = hi - bv;
  lo = (a - av) + (b - bv);
}

inline void two_diff(double a, double b, double& hi, double& lo) {
  hi = a - b;
  double bv = a - hi;
  double av = hi + bv;
  lo = (a - av) - (bv - b);
}

inline void two_product(double a, double b, double& hi, double& lo) {
  hi = a * b;
  lo = std::fma(a, b, -hi);
}

/* A nonoverlapping expansion, components ordered by increasing magnitude.
 * The represented value is exactly the sum of the components.  Zero
 * components are eliminated, so sign() is the sign of the last component.
 */
class Expansion {
 public:
  Expansion() = default;

  static Expansion from(double x) {
    Expansion e;
    if (x != 0.0) e.c_.push_back(x);
    return e;
  }

  static Expansion from_two(double hi, double lo) {
    Expansion e;
    if (lo != 0.0) e.c_.push_back(lo);
    if (hi != 0.0) e.c_.push_back(hi);
    return e;
  }

  static Expansion diff(double a, double b) {
    double hi, lo;
    two_diff(a, b, hi, lo);
    return from_two(hi, lo);
  }

  static Expansion prod(double a, double b) {
    double hi, lo;
    two_product(a, b, hi, lo);
    return from_two(hi, lo);
  }

  int sign() const {
    if (c_.empty()) return 0;
    return c_.back() > 0.0 ? 1 : -1;
  }

  double estimate() const {
    double s = 0.0;
    for (double x : c_) s += x;
    return s;
  }

  Expansion operator-() const {
    Expansion e(*this);
    for (double& x : e.c_) x = -x;
    return e;
  }

  /* fast_expansion_sum with zero elimination (Shewchuk, Theorem 13). */
  Expansion operator+(const Expansion& other) const {
    if (c_.empty()) return other;
    if (other.c_.empty()) return *this;
    const std::vector<double>& e = c_;
    const std::vector<double>& f = other.c_;
    Expansion out;
    out.c_.reserve(e.size() + f.size());
    std::size_t ei = 0, fi = 0;
    double enow = e[0], fnow = f[0];
    double q;
    if ((fnow > enow) == (fnow > -enow)) {
      q = enow;
      if (++ei < e.size()) enow = e[ei];
    } else {
      q = fnow;
      if (++fi < f.size()) fnow = f[fi];
    }
    double hi, lo;
    if (ei < e.size() && fi < f.size()) {
      if ((fnow > enow) == (fnow > -enow)) {
        two_sum(enow, q, hi, lo); /* fast_two_sum would do; two_sum is safe */
        if (++ei < e.size()) enow = e[ei];
      } else {
        two_sum(fnow, q, hi, lo);
        if (++fi < f.size()) fnow = f[fi];
      }
      q = hi;
      if (lo != 0.0) out.c_.push_back(lo);
      while (ei < e.size() && fi < f.size()) {
        if ((fnow > enow) == (fnow > -enow)) {
          two_sum(q, enow, hi, lo);
          if (++ei < e.size()) enow = e[ei];
        } else {
          two_sum(q, fnow, hi, lo);
          if (++fi < f.size()) fnow = f[fi];
        }
        q = hi;
        if (lo != 0.0) out.c_.push_back(lo);
      }
    }
    while (ei < e.size()) {
      two_sum(q, enow, hi, lo);
      if (++ei < e.size()) enow = e[ei];
      q = hi;
      if (lo != 0.0) out.c_.push_back(lo);
    }
    while (fi < f.size()) {
      two_sum(q, fnow, hi, lo);
      if (++fi < f.size()) fnow = f[fi];
      q = hi;
      if (lo != 0.0) out.c_.push_back(lo);
    }
    if (q != 0.0) out.c_.push_back(q);
    return out;
  }

  Expansion operator-(const Expansion& other) const { return *this + (-other); }

  /* scale_expansion with zero elimination (Shewchuk, Theorem 19). */
  Expansion scaled(double b) const {
    Expansion out;
    if (c_.empty() || b == 0.0) return out;
    out.c_.reserve(2 * c_.size());
    double q, lo, t_hi, t_lo, s_hi, s_lo;
    two_product(c_[0], b, q, lo);
    if (lo != 0.0) out.c_.push_back(lo);
    for (std::size_t i = 1; i < c_.size(); ++i) {
      two_product(c_[i], b, t_hi, t_lo);
      two_sum(q, t_lo, s_hi, s_lo);
      if (s_lo != 0.0) out.c_.push_back(s_lo);
      two_sum(t_hi, s_hi, q, s_lo);
      if (s_lo != 0.0) out.c_.push_back(s_lo);
    }
    if (q != 0.0) out.c_.push_back(q);
    return out;
  }

  /* Exact product, O(m*n) partial products folded with exact sums. */
  Expansion operator*(const Expansion& other) const {
    Expansion acc;
    for (double b : other.c_) acc = acc + scaled(b);
    return acc;
  }

 private:
  std::vector<double> c_;
};

/* Sign of det[b-a, c-a]: +1 when (a,b,c) wind counterclockwise. */
inline int orient2d_sign(const double* a, const double* b, const double* c) {
  double detleft = (a[0] - c[0]) * (b[1] - c[1]);
  double detright = (a[1] - c[1]) * (b[0] - c[0]);
  double det = detleft - detright;
  double detsum;
  if (detleft > 0.0) {
    if (detright <= 0.0) return det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
    detsum = detleft + detright;
  } else if (detleft < 0.0) {
    if (detright >= 0.0) return det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
    detsum = -detleft - detright;
  } else {
    return det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
  }
  double errbound = kCcwErrA * detsum;
  if (det > errbound || -det > errbound) return det > 0.0 ? 1 : -1;

  Expansion acx = Expansion::diff(a[0], c[0]);
  Expansion acy = Expansion::diff(a[1], c[1]);
  Expansion bcx = Expansion::diff(b[0], c[0]);
  Expansion bcy = Expansion::diff(b[1], c[1]);
  return (acx * bcy - acy * bcx).sign();
}

/* Sign of the incircle determinant for CCW (a,b,c): +1 when p lies strictly
 * inside the circumcircle, 0 on it, -1 outside. */
inline int in_circle_sign(const double* a, const double* b, const double* c,
                          const double* p) {
  double adx = a[0] - p[0], ady = a[1] - p[1];
  double bdx = b[0] - p[0], bdy = b[1] - p[1];
  double cdx = c[0] - p[0], cdy = c[1] - p[1];

  double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  double alift = adx * adx + ady * ady;
  double cdxady = cdx * ady, adxcdy = adx * cdy;
  double blift = bdx * bdx + bdy * bdy;
  double adxbdy = adx * bdy, bdxady = bdx * ady;
  double clift = cdx * cdx + cdy * cdy;

  double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) +
               clift * (adxbdy - bdxady);
  double permanent = (std::fabs(bdxcdy) + std::fabs(cdxbdy)) * alift +
                     (std::fabs(cdxady) + std::fabs(adxcdy)) * blift +
                     (std::fabs(adxbdy) + std::fabs(bdxady)) * clift;
  double errbound = kIccErrA * permanent;
  if (det > errbound || -det > errbound) return det > 0.0 ? 1 : -1;

  Expansion eadx = Expansion::diff(a[0], p[0]);
  Expansion eady = Expansion::diff(a[1], p[1]);
  Expansion ebdx = Expansion::diff(b[0], p[0]);
  Expansion ebdy = Expansion::diff(b[1], p[1]);
  Expansion ecdx = Expansion::diff(c[0], p[0]);
  Expansion ecdy = Expansion::diff(c[1], p[1]);

  Expansion ea = eadx * eadx + eady * eady;
  Expansion eb = ebdx * ebdx + ebdy * ebdy;
  Expansion ec = ecdx * ecdx + ecdy * ecdy;

  Expansion bc = ebdx * ecdy - ecdx * ebdy;
  Expansion ca = ecdx * eady - eadx * ecdy;
  Expansion ab = eadx * ebdy - ebdx * eady;

  return (ea * bc + eb * ca + ec * ab).sign();
}

}  // namespace ipmm::detail

#endif

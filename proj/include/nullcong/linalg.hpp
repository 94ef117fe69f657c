#pragma once
// Small dense linear algebra over any field-like scalar (double, complex, jets).
// Matrices are row-major std::vector<S> of size n*n.

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nullcong/jet.hpp"

namespace nullcong {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class S>
using Mat = std::vector<S>;

inline double abs_value(double x) { return std::abs(x); }
inline double abs_value(const cplx& x) { return std::abs(x); }
template <class T, int K>
double abs_value(const Jet<T, K>& x) {
  return std::abs(x.value());
}

inline double recip_of(double x) { return 1.0 / x; }
inline cplx recip_of(const cplx& x) { return 1.0 / x; }
template <class T, int K>
Jet<T, K> recip_of(const Jet<T, K>& x) {
  return recip(x);
}

inline bool is_constant_zero(double x) { return x == 0.0; }
inline bool is_constant_zero(const cplx& x) { return x == cplx(0.0); }
template <class T, int K>
bool is_constant_zero(const Jet<T, K>& x) {
  if (x.value() != T(0)) return false;
  for (int i = 0; i < Jet<T, K>::kG; ++i)
    if (x.grad(i) != T(0)) return false;
  for (int p = 0; p < Jet<T, K>::kH; ++p)
    if (x.hp(p) != T(0)) return false;
  for (int p = 0; p < Jet<T, K>::kT; ++p)
    if (x.tp(p) != T(0)) return false;
  return true;
}

// Gauss-Jordan inverse with partial pivoting on the value part.
template <class S>
Mat<S> inverse(Mat<S> a, int n) {
  Mat<S> inv(n * n, S(0.0));
  for (int i = 0; i < n; ++i) inv[i * n + i] = S(1.0);
  double scale = 0;
  for (const auto& x : a) scale = std::max(scale, abs_value(x));
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (abs_value(a[r * n + c]) > abs_value(a[piv * n + c])) piv = r;
    if (abs_value(a[piv * n + c]) <= 1e-14 * (scale + 1e-300)) {
      std::ostringstream os;
      os << "singular matrix (pivot " << abs_value(a[piv * n + c]) << " in column " << c << ")";
      throw NumericError(os.str());
    }
    if (piv != c)
      for (int k = 0; k < n; ++k) {
        std::swap(a[c * n + k], a[piv * n + k]);
        std::swap(inv[c * n + k], inv[piv * n + k]);
      }
    const S p = recip_of(a[c * n + c]);
    for (int k = 0; k < n; ++k) {
      a[c * n + k] = a[c * n + k] * p;
      inv[c * n + k] = inv[c * n + k] * p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const S f = a[r * n + c];
      if (abs_value(f) == 0.0 && is_constant_zero(f)) continue;
      for (int k = 0; k < n; ++k) {
        a[r * n + k] = a[r * n + k] - f * a[c * n + k];
        inv[r * n + k] = inv[r * n + k] - f * inv[c * n + k];
      }
    }
  }
  return inv;
}

// Determinant by LU with partial pivoting on values.
template <class S>
S determinant(Mat<S> a, int n) {
  S det(1.0);
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (abs_value(a[r * n + c]) > abs_value(a[piv * n + c])) piv = r;
    if (abs_value(a[piv * n + c]) == 0.0) return S(0.0);
    if (piv != c) {
      for (int k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
      det = det * S(-1.0);
    }
    det = det * a[c * n + c];
    const S p = recip_of(a[c * n + c]);
    for (int r = c + 1; r < n; ++r) {
      const S f = a[r * n + c] * p;
      for (int k = c; k < n; ++k) a[r * n + k] = a[r * n + k] - f * a[c * n + k];
    }
  }
  return det;
}

template <class S>
Mat<S> matmul(const Mat<S>& a, const Mat<S>& b, int n) {
  Mat<S> r(n * n, S(0.0));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) r[i * n + j] = r[i * n + j] + a[i * n + k] * b[k * n + j];
  return r;
}

// 1-norm condition number estimate from an explicit inverse (values only).
template <class S>
double condition_number(const Mat<S>& a, const Mat<S>& inv, int n) {
  auto norm1 = [n](const Mat<S>& m) {
    double best = 0;
    for (int j = 0; j < n; ++j) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += abs_value(m[i * n + j]);
      best = std::max(best, s);
    }
    return best;
  };
  return norm1(a) * norm1(inv);
}

// Lower-triangular Cholesky factor C of a Hermitian positive-definite matrix
// H = C C^*. Works on complex jets; the diagonal of C is real.
template <int K>
Mat<Jet<cplx, K>> cholesky_lower(const Mat<Jet<cplx, K>>& h, int m) {
  using J = Jet<cplx, K>;
  Mat<J> c(m * m, J(0.0));
  for (int j = 0; j < m; ++j) {
    J d = h[j * m + j];
    for (int k = 0; k < j; ++k) d = d - c[j * m + k] * conj(c[j * m + k]);
    const double dv = d.value().real();
    if (!(dv > 0)) {
      std::ostringstream os;
      os << "Levi form is not positive definite: leading minor " << (j + 1) << " fails (pivot " << dv << ")";
      throw std::invalid_argument(os.str());
    }
    J s = to_complex(sqrt(real(d)));
    c[j * m + j] = s;
    const J inv = recip(s);
    for (int i = j + 1; i < m; ++i) {
      J v = h[i * m + j];
      for (int k = 0; k < j; ++k) v = v - c[i * m + k] * conj(c[j * m + k]);
      c[i * m + j] = v * inv;
    }
  }
  return c;
}

}  // namespace nullcong

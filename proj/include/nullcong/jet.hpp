#pragma once
// Forward-mode jets: a scalar field's value and all partial derivatives up to
// order K (K <= 3) at one point of a chart with at most kMaxDim coordinates.
// Derivative tensors are stored packed (one slot per sorted index tuple), so
// symmetry holds exactly.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace nullcong {

using cplx = std::complex<double>;
inline constexpr int kMaxDim = 8;

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

constexpr int n_pairs(int n) { return n * (n + 1) / 2; }
constexpr int n_triples(int n) { return n * (n + 1) * (n + 2) / 6; }

constexpr int pack2(int i, int j) {
  if (i > j) std::swap(i, j);
  return j * (j + 1) / 2 + i;
}
constexpr int pack3(int i, int j, int k) {
  if (i > j) std::swap(i, j);
  if (j > k) std::swap(j, k);
  if (i > j) std::swap(i, j);
  return k * (k + 1) * (k + 2) / 6 + j * (j + 1) / 2 + i;
}

struct PairEntry {
  int i, j;
};
struct TripleEntry {
  int i, j, k;     // sorted coordinate indices
  int ij, ik, jk;  // packed pair slots
};

constexpr auto make_pairs() {
  std::array<PairEntry, n_pairs(kMaxDim)> t{};
  for (int j = 0; j < kMaxDim; ++j)
    for (int i = 0; i <= j; ++i) t[pack2(i, j)] = {i, j};
  return t;
}
constexpr auto make_triples() {
  std::array<TripleEntry, n_triples(kMaxDim)> t{};
  for (int k = 0; k < kMaxDim; ++k)
    for (int j = 0; j <= k; ++j)
      for (int i = 0; i <= j; ++i)
        t[pack3(i, j, k)] = {i, j, k, pack2(i, j), pack2(i, k), pack2(j, k)};
  return t;
}
inline constexpr auto kPairs = make_pairs();
inline constexpr auto kTriples = make_triples();

template <class T>
struct is_complex : std::false_type {};
template <class U>
struct is_complex<std::complex<U>> : std::true_type {};

template <class T>
std::string fmt_scalar(const T& v) {
  std::ostringstream os;
  os.precision(17);
  if constexpr (is_complex<T>::value)
    os << v.real() << (v.imag() < 0 ? "-" : "+") << std::abs(v.imag()) << "i";
  else
    os << v;
  return os.str();
}

}  // namespace detail

template <class T, int K>
class Jet {
  static_assert(K >= 0 && K <= 3, "jet order must be 0..3");

 public:
  using scalar = T;
  static constexpr int order = K;
  static constexpr int kG = K >= 1 ? kMaxDim : 0;
  static constexpr int kH = K >= 2 ? detail::n_pairs(kMaxDim) : 0;
  static constexpr int kT = K >= 3 ? detail::n_triples(kMaxDim) : 0;

  Jet() = default;
  Jet(T v) : v_(v) {}  // constant field (implicit on purpose)
  template <class U = T, class = std::enable_if_t<detail::is_complex<U>::value>>
  Jet(double v) : v_(v) {}

  static Jet coordinate(int n, int axis, double at) {
    if (n < 0 || n > kMaxDim) throw std::invalid_argument("jet dimension out of range");
    if (axis < 0 || axis >= n) throw std::invalid_argument("coordinate axis out of range");
    Jet r;
    r.n_ = n;
    r.v_ = T(at);
    if constexpr (K >= 1) r.g_[axis] = T(1);
    return r;
  }

  int dim() const { return n_; }
  void set_dim(int n) { n_ = n; }

  const T& value() const { return v_; }
  T& value() { return v_; }
  const T& grad(int i) const { return g_[i]; }
  T& grad(int i) { return g_[i]; }
  const T& hess(int i, int j) const { return h_[detail::pack2(i, j)]; }
  T& hess(int i, int j) { return h_[detail::pack2(i, j)]; }
  const T& third(int i, int j, int k) const { return t_[detail::pack3(i, j, k)]; }
  T& third(int i, int j, int k) { return t_[detail::pack3(i, j, k)]; }

  // packed access, used by the arithmetic kernels
  const T& hp(int p) const { return h_[p]; }
  T& hp(int p) { return h_[p]; }
  const T& tp(int p) const { return t_[p]; }
  T& tp(int p) { return t_[p]; }

  Jet& operator+=(const Jet& o) {
    n_ = std::max(n_, o.n_);
    v_ += o.v_;
    for (int i = 0; i < kG; ++i) g_[i] += o.g_[i];
    for (int i = 0; i < kH; ++i) h_[i] += o.h_[i];
    for (int i = 0; i < kT; ++i) t_[i] += o.t_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    n_ = std::max(n_, o.n_);
    v_ -= o.v_;
    for (int i = 0; i < kG; ++i) g_[i] -= o.g_[i];
    for (int i = 0; i < kH; ++i) h_[i] -= o.h_[i];
    for (int i = 0; i < kT; ++i) t_[i] -= o.t_[i];
    return *this;
  }
  Jet& operator*=(const T& s) {
    v_ *= s;
    for (int i = 0; i < kG; ++i) g_[i] *= s;
    for (int i = 0; i < kH; ++i) h_[i] *= s;
    for (int i = 0; i < kT; ++i) t_[i] *= s;
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  Jet operator-() const {
    Jet r = *this;
    r *= T(-1);
    return r;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, const T& s) { return a *= s; }
  friend Jet operator*(const T& s, Jet a) { return a *= s; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    const int n = std::max(a.n_, b.n_);
    r.n_ = n;
    r.v_ = a.v_ * b.v_;
    if constexpr (K >= 1)
      for (int i = 0; i < n; ++i) r.g_[i] = a.v_ * b.g_[i] + a.g_[i] * b.v_;
    if constexpr (K >= 2)
      for (int p = 0; p < detail::n_pairs(n); ++p) {
        const auto& e = detail::kPairs[p];
        r.h_[p] = a.v_ * b.h_[p] + a.g_[e.i] * b.g_[e.j] + a.g_[e.j] * b.g_[e.i] + a.h_[p] * b.v_;
      }
    if constexpr (K >= 3)
      for (int p = 0; p < detail::n_triples(n); ++p) {
        const auto& e = detail::kTriples[p];
        r.t_[p] = a.v_ * b.t_[p] + a.g_[e.i] * b.h_[e.jk] + a.g_[e.j] * b.h_[e.ik] +
                  a.g_[e.k] * b.h_[e.ij] + a.h_[e.ij] * b.g_[e.k] + a.h_[e.ik] * b.g_[e.j] +
                  a.h_[e.jk] * b.g_[e.i] + a.t_[p] * b.v_;
      }
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * recip(b); }
  friend Jet operator/(Jet a, const T& s) {
    if (s == T(0)) throw EvalError("division by zero constant");
    return a *= (T(1) / s);
  }
  friend Jet operator+(Jet a, const T& s) {
    a.v_ += s;
    return a;
  }
  friend Jet operator+(const T& s, Jet a) {
    a.v_ += s;
    return a;
  }
  friend Jet operator-(Jet a, const T& s) {
    a.v_ -= s;
    return a;
  }
  friend Jet operator-(const T& s, const Jet& a) { return -a + s; }

  template <class S, class = std::enable_if_t<std::is_arithmetic_v<S>>>
  friend Jet operator*(Jet a, S s) {
    return a *= T(s);
  }
  template <class S, class = std::enable_if_t<std::is_arithmetic_v<S>>>
  friend Jet operator*(S s, Jet a) {
    return a *= T(s);
  }
  template <class S, class = std::enable_if_t<std::is_arithmetic_v<S>>>
  friend Jet operator/(Jet a, S s) {
    return a / T(s);
  }
  template <class S, class = std::enable_if_t<std::is_arithmetic_v<S>>>
  friend Jet operator+(Jet a, S s) {
    return a + T(s);
  }
  template <class S, class = std::enable_if_t<std::is_arithmetic_v<S>>>
  friend Jet operator+(S s, Jet a) {
    return a + T(s);
  }
  template <class S, class = std::enable_if_t<std::is_arithmetic_v<S>>>
  friend Jet operator-(Jet a, S s) {
    return a - T(s);
  }
  template <class S, class = std::enable_if_t<std::is_arithmetic_v<S>>>
  friend Jet operator-(S s, const Jet& a) {
    return T(s) - a;
  }

  // h = f(x) given f and its first three derivatives at x.value()
  friend Jet compose(const Jet& x, T f0, T f1, T f2, T f3) {
    Jet r;
    const int n = x.n_;
    r.n_ = n;
    r.v_ = f0;
    if constexpr (K >= 1)
      for (int i = 0; i < n; ++i) r.g_[i] = f1 * x.g_[i];
    if constexpr (K >= 2)
      for (int p = 0; p < detail::n_pairs(n); ++p) {
        const auto& e = detail::kPairs[p];
        r.h_[p] = f2 * x.g_[e.i] * x.g_[e.j] + f1 * x.h_[p];
      }
    if constexpr (K >= 3)
      for (int p = 0; p < detail::n_triples(n); ++p) {
        const auto& e = detail::kTriples[p];
        r.t_[p] = f3 * x.g_[e.i] * x.g_[e.j] * x.g_[e.k] +
                  f2 * (x.h_[e.ij] * x.g_[e.k] + x.h_[e.ik] * x.g_[e.j] + x.h_[e.jk] * x.g_[e.i]) +
                  f1 * x.t_[p];
      }
    return r;
  }

  friend Jet recip(const Jet& x) {
    const T v = x.v_;
    if (v == T(0)) throw EvalError("reciprocal of zero at value " + detail::fmt_scalar(v));
    const T r = T(1) / v;
    return compose(x, r, -r * r, T(2) * r * r * r, T(-6) * r * r * r * r);
  }

 private:
  int n_ = 0;
  T v_{};
  std::array<T, kG> g_{};
  std::array<T, kH> h_{};
  std::array<T, kT> t_{};

  template <class, int>
  friend class Jet;
  template <int K2, class U, int K1>
  friend Jet<U, K2> truncate(const Jet<U, K1>&);
  template <class U, int K1>
  friend Jet<U, K1 - 1> partial(const Jet<U, K1>&, int);
};

template <class T>
using Jet3 = Jet<T, 3>;
using RJet3 = Jet<double, 3>;
using CJet3 = Jet<cplx, 3>;

template <int K2, class T, int K1>
Jet<T, K2> truncate(const Jet<T, K1>& a) {
  static_assert(K2 <= K1, "cannot raise jet order by truncation");
  Jet<T, K2> r;
  r.n_ = a.n_;
  r.v_ = a.v_;
  for (int i = 0; i < Jet<T, K2>::kG; ++i) r.g_[i] = a.g_[i];
  for (int i = 0; i < Jet<T, K2>::kH; ++i) r.h_[i] = a.h_[i];
  for (int i = 0; i < Jet<T, K2>::kT; ++i) r.t_[i] = a.t_[i];
  return r;
}

// Jet of the partial derivative along coordinate j (one order lower).
template <class T, int K>
Jet<T, K - 1> partial(const Jet<T, K>& a, int j) {
  static_assert(K >= 1, "partial needs an order >= 1 jet");
  Jet<T, K - 1> r;
  r.n_ = a.n_;
  r.v_ = a.g_[j];
  if constexpr (K >= 2)
    for (int i = 0; i < a.n_; ++i) r.g_[i] = a.h_[detail::pack2(i, j)];
  if constexpr (K >= 3)
    for (int p = 0; p < detail::n_pairs(a.n_); ++p) {
      const auto& e = detail::kPairs[p];
      r.h_[p] = a.t_[detail::pack3(e.i, e.j, j)];
    }
  return r;
}

// Entrywise maps (valid because the coordinates are real).
template <class F, class T, int K>
auto map_entries(const Jet<T, K>& a, F f) {
  using U = decltype(f(a.value()));
  Jet<U, K> r;
  r.set_dim(a.dim());
  r.value() = f(a.value());
  for (int i = 0; i < Jet<T, K>::kG; ++i) r.grad(i) = f(a.grad(i));
  for (int p = 0; p < Jet<T, K>::kH; ++p) r.hp(p) = f(a.hp(p));
  for (int p = 0; p < Jet<T, K>::kT; ++p) r.tp(p) = f(a.tp(p));
  return r;
}

template <int K>
Jet<cplx, K> conj(const Jet<cplx, K>& a) {
  return map_entries(a, [](const cplx& z) { return std::conj(z); });
}
template <int K>
Jet<double, K> real(const Jet<cplx, K>& a) {
  return map_entries(a, [](const cplx& z) { return z.real(); });
}
template <int K>
Jet<double, K> imag(const Jet<cplx, K>& a) {
  return map_entries(a, [](const cplx& z) { return z.imag(); });
}
template <int K>
Jet<cplx, K> to_complex(const Jet<double, K>& a) {
  return map_entries(a, [](double x) { return cplx(x, 0.0); });
}
template <int K>
Jet<cplx, K> to_complex(const Jet<cplx, K>& a) {
  return a;
}

// Relabel coordinates i -> i + offset in a chart of dimension n (n >= a.dim()+offset).
template <class T, int K>
Jet<T, K> embed(const Jet<T, K>& a, int n, int offset) {
  if (a.dim() + offset > n || n > kMaxDim) throw std::invalid_argument("embed: bad dimensions");
  Jet<T, K> r(a.value());
  r.set_dim(n);
  const int d = a.dim();
  if constexpr (K >= 1)
    for (int i = 0; i < d; ++i) r.grad(i + offset) = a.grad(i);
  if constexpr (K >= 2)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) r.hess(i + offset, j + offset) = a.hess(i, j);
  if constexpr (K >= 3)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j)
        for (int k = j; k < d; ++k) r.third(i + offset, j + offset, k + offset) = a.third(i, j, k);
  return r;
}

// ---- elementary functions -------------------------------------------------

namespace detail {
template <class T>
bool near_zero(const T& v) {
  return std::abs(v) < 1e-300;
}
// cos(pi/2) rounds to ~6e-17, so poles of sec/tan need a looser test
template <class T>
bool near_pole(const T& c) {
  return std::abs(c) < 1e-14;
}
template <class T>
void require_real_domain(bool ok, const char* fn, const T& v) {
  if (!ok) throw EvalError(std::string(fn) + " outside its domain at value " + fmt_scalar(v));
}
}  // namespace detail

template <class T, int K>
Jet<T, K> sin(const Jet<T, K>& x) {
  using std::cos, std::sin;
  const T s = sin(x.value()), c = cos(x.value());
  return compose(x, s, c, -s, -c);
}
template <class T, int K>
Jet<T, K> cos(const Jet<T, K>& x) {
  using std::cos, std::sin;
  const T s = sin(x.value()), c = cos(x.value());
  return compose(x, c, -s, -c, s);
}
template <class T, int K>
Jet<T, K> sec(const Jet<T, K>& x) {
  using std::cos, std::sin;
  const T c = cos(x.value());
  if (detail::near_pole(c)) detail::require_real_domain(false, "sec", x.value());
  const T s = sin(x.value());
  const T f = T(1) / c, t = s / c;
  // sec' = sec tan, sec'' = sec(2 tan^2 + 1), sec''' = sec tan (6 tan^2 + 5)
  return compose(x, f, f * t, f * (T(2) * t * t + T(1)), f * t * (T(6) * t * t + T(5)));
}
template <class T, int K>
Jet<T, K> tan(const Jet<T, K>& x) {
  using std::cos, std::sin;
  const T c = cos(x.value());
  if (detail::near_pole(c)) detail::require_real_domain(false, "tan", x.value());
  const T t = sin(x.value()) / c;
  const T s2 = T(1) + t * t;
  return compose(x, t, s2, T(2) * t * s2, T(2) * s2 * (T(1) + T(3) * t * t));
}
template <class T, int K>
Jet<T, K> exp(const Jet<T, K>& x) {
  using std::exp;
  const T e = exp(x.value());
  return compose(x, e, e, e, e);
}
template <class T, int K>
Jet<T, K> log(const Jet<T, K>& x) {
  using std::log;
  const T v = x.value();
  if constexpr (detail::is_complex<T>::value)
    detail::require_real_domain(!detail::near_zero(v), "log", v);
  else
    detail::require_real_domain(v > 0, "log", v);
  const T r = T(1) / v;
  return compose(x, log(v), r, -r * r, T(2) * r * r * r);
}
template <class T, int K>
Jet<T, K> atan(const Jet<T, K>& x) {
  using std::atan;
  const T v = x.value();
  const T q = T(1) + v * v;
  detail::require_real_domain(!detail::near_zero(q), "atan", v);
  const T r = T(1) / q;
  return compose(x, atan(v), r, T(-2) * v * r * r, (T(6) * v * v - T(2)) * r * r * r);
}
template <class T, int K>
Jet<T, K> sqrt(const Jet<T, K>& x) {
  using std::sqrt;
  const T v = x.value();
  if constexpr (detail::is_complex<T>::value)
    detail::require_real_domain(!detail::near_zero(v), "sqrt", v);
  else
    detail::require_real_domain(v > 0, "sqrt", v);
  const T s = sqrt(v);
  const T r = T(1) / v;
  return compose(x, s, T(0.5) / s, T(-0.25) * r / s, T(0.375) * r * r / s);
}
template <class T, int K>
Jet<T, K> powi(const Jet<T, K>& x, int n) {
  if (n == 0) {
    Jet<T, K> one(T(1));
    one.set_dim(x.dim());
    return one;
  }
  const T v = x.value();
  if (n < 0 && detail::near_zero(v)) detail::require_real_domain(false, "negative power", v);
  auto pw = [&](int e) {
    if (e == 0) return T(1);
    T b = e > 0 ? v : T(1) / v;
    T r(1);
    for (int k = 0; k < std::abs(e); ++k) r *= b;
    return r;
  };
  const double dn = n;
  return compose(x, pw(n), T(dn) * pw(n - 1), T(dn * (dn - 1)) * pw(n - 2),
                 T(dn * (dn - 1) * (dn - 2)) * pw(n - 3));
}

template <class T>
T value_of(const T& x) {
  return x;
}
template <class T, int K>
T value_of(const Jet<T, K>& x) {
  return x.value();
}

template <class T>
double magnitude(const T& x) {
  return std::abs(value_of(x));
}

}  // namespace nullcong

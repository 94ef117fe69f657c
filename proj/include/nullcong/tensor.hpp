#pragma once
// Point-wise complex tensors, coframe handling and exterior calculus helpers.
// Conventions: wedge a^b = (a(x)b - b(x)a)/2 and (d alpha)_ab = (d_a alpha_b - d_b alpha_a)/2,
// so a 2-form written as sum_{IJ} F_IJ theta^I ^ theta^J has tensor components F_IJ.

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nullcong/jet.hpp"
#include "nullcong/linalg.hpp"

namespace nullcong {

template <int K>
using CJet = Jet<cplx, K>;

enum class Variance { Up, Down };

struct PointTensor {
  int d = 0;
  std::vector<Variance> valence;
  std::vector<cplx> c;

  PointTensor() = default;
  PointTensor(int dim, std::vector<Variance> val) : d(dim), valence(std::move(val)) {
    std::size_t n = 1;
    for (std::size_t i = 0; i < valence.size(); ++i) n *= static_cast<std::size_t>(d);
    c.assign(n, cplx(0.0));
  }
  static PointTensor covariant(int dim, int rank) {
    return PointTensor(dim, std::vector<Variance>(rank, Variance::Down));
  }
  static PointTensor scalar(cplx v) {
    PointTensor t(0, {});
    t.c = {v};
    return t;
  }

  int rank() const { return static_cast<int>(valence.size()); }
  std::size_t size() const { return c.size(); }

  std::size_t offset(std::initializer_list<int> idx) const {
    if (static_cast<int>(idx.size()) != rank()) throw std::invalid_argument("tensor index arity mismatch");
    std::size_t o = 0;
    for (int i : idx) o = o * d + i;
    return o;
  }
  std::size_t offset(const std::vector<int>& idx) const {
    std::size_t o = 0;
    for (int i : idx) o = o * d + i;
    return o;
  }
  template <class... I>
  cplx& operator()(I... i) {
    return c[offset({static_cast<int>(i)...})];
  }
  template <class... I>
  const cplx& operator()(I... i) const {
    return c[offset({static_cast<int>(i)...})];
  }
  cplx& at(const std::vector<int>& idx) { return c[offset(idx)]; }
  const cplx& at(const std::vector<int>& idx) const { return c[offset(idx)]; }

  std::vector<int> unflatten(std::size_t o) const {
    std::vector<int> idx(rank());
    for (int s = rank() - 1; s >= 0; --s) {
      idx[s] = static_cast<int>(o % d);
      o /= d;
    }
    return idx;
  }

  double max_abs() const {
    double m = 0;
    for (const auto& z : c) m = std::max(m, std::abs(z));
    return m;
  }
  double max_imag() const {
    double m = 0;
    for (const auto& z : c) m = std::max(m, std::abs(z.imag()));
    return m;
  }

  PointTensor& operator+=(const PointTensor& o) {
    check_same(o);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
    return *this;
  }
  PointTensor& operator-=(const PointTensor& o) {
    check_same(o);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
    return *this;
  }
  PointTensor& operator*=(cplx s) {
    for (auto& z : c) z *= s;
    return *this;
  }
  friend PointTensor operator+(PointTensor a, const PointTensor& b) { return a += b; }
  friend PointTensor operator-(PointTensor a, const PointTensor& b) { return a -= b; }
  friend PointTensor operator*(PointTensor a, cplx s) { return a *= s; }
  friend PointTensor operator*(cplx s, PointTensor a) { return a *= s; }

  void check_same(const PointTensor& o) const {
    if (d != o.d || c.size() != o.c.size()) throw std::invalid_argument("tensor shape mismatch");
  }
};

inline double max_abs_diff(const PointTensor& a, const PointTensor& b) {
  a.check_same(b);
  double m = 0;
  for (std::size_t i = 0; i < a.c.size(); ++i) m = std::max(m, std::abs(a.c[i] - b.c[i]));
  return m;
}

// max|a-b| / (max(|a|,|b|) + 1e-30)
inline double rel_diff(const PointTensor& a, const PointTensor& b) {
  return max_abs_diff(a, b) / (std::max(a.max_abs(), b.max_abs()) + 1e-30);
}

inline PointTensor tensor_product(const PointTensor& a, const PointTensor& b) {
  if (a.d != b.d && a.rank() && b.rank()) throw std::invalid_argument("tensor_product: dimension mismatch");
  std::vector<Variance> v = a.valence;
  v.insert(v.end(), b.valence.begin(), b.valence.end());
  PointTensor r(a.rank() ? a.d : b.d, v);
  for (std::size_t i = 0; i < a.c.size(); ++i)
    for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i * b.c.size() + j] = a.c[i] * b.c[j];
  return r;
}

inline PointTensor contract(const PointTensor& t, int sa, int sb) {
  if (sa == sb || sa < 0 || sb < 0 || sa >= t.rank() || sb >= t.rank())
    throw std::invalid_argument("contract: bad slots");
  if (t.valence[sa] == t.valence[sb])
    throw std::invalid_argument("contract: slots have the same variance; raise or lower first");
  std::vector<Variance> v;
  for (int s = 0; s < t.rank(); ++s)
    if (s != sa && s != sb) v.push_back(t.valence[s]);
  PointTensor r(t.d, v);
  for (std::size_t o = 0; o < r.c.size(); ++o) {
    std::vector<int> ridx = r.unflatten(o);
    std::vector<int> idx(t.rank());
    int k = 0;
    for (int s = 0; s < t.rank(); ++s)
      if (s != sa && s != sb) idx[s] = ridx[k++];
    cplx acc = 0;
    for (int i = 0; i < t.d; ++i) {
      idx[sa] = idx[sb] = i;
      acc += t.at(idx);
    }
    r.c[o] = acc;
  }
  if (r.rank() == 0) r.d = t.d;
  return r;
}

// Contract slot `slot` of t with the matrix m (m[a*d+b]), replacing index a by b:
// r_{..b..} = sum_a t_{..a..} m[a][b].
inline PointTensor apply_on_slot(const PointTensor& t, int slot, const std::vector<cplx>& m, Variance v) {
  PointTensor r(t.d, t.valence);
  r.valence[slot] = v;
  const int d = t.d;
  std::size_t inner = 1;
  for (int s = slot + 1; s < t.rank(); ++s) inner *= d;
  const std::size_t outer = t.c.size() / (inner * d);
  for (std::size_t o = 0; o < outer; ++o)
    for (int b = 0; b < d; ++b)
      for (std::size_t in = 0; in < inner; ++in) {
        cplx acc = 0;
        for (int a = 0; a < d; ++a) acc += t.c[(o * d + a) * inner + in] * m[a * d + b];
        r.c[(o * d + b) * inner + in] = acc;
      }
  return r;
}

// Lower (direction Down) or raise (Up) one slot with metric g (covariant, d x d).
inline PointTensor raise_lower(const PointTensor& t, int slot, const PointTensor& g, Variance direction) {
  if (g.rank() != 2 || g.d != t.d) throw std::invalid_argument("raise_lower: metric shape mismatch");
  for (int a = 0; a < g.d; ++a)
    for (int b = 0; b < g.d; ++b)
      if (std::abs(g(a, b) - g(b, a)) > 1e-12 * (g.max_abs() + 1e-300))
        throw std::invalid_argument("raise_lower: metric not symmetric");
  if (t.valence[slot] == direction) throw std::invalid_argument("raise_lower: slot already has that variance");
  if (direction == Variance::Down) return apply_on_slot(t, slot, g.c, Variance::Down);
  const cplx det = determinant(g.c, g.d);
  if (std::abs(det) < 1e-300) {
    std::ostringstream os;
    os << "singular metric (determinant " << std::abs(det) << ")";
    throw NumericError(os.str());
  }
  return apply_on_slot(t, slot, inverse(g.c, g.d), Variance::Up);
}

// Sym/antisym over a slot pair: (t_ab +/- t_ba)/2.
inline PointTensor symmetrize(const PointTensor& t, int sa, int sb, bool anti = false) {
  if (t.valence[sa] != t.valence[sb]) throw std::invalid_argument("symmetrize: mixed variance");
  PointTensor r(t.d, t.valence);
  for (std::size_t o = 0; o < t.c.size(); ++o) {
    std::vector<int> idx = t.unflatten(o);
    std::swap(idx[sa], idx[sb]);
    const cplx sw = t.at(idx);
    r.c[o] = 0.5 * (anti ? t.c[o] - sw : t.c[o] + sw);
  }
  return r;
}

inline PointTensor wedge(const PointTensor& a, const PointTensor& b) {
  return (tensor_product(a, b) - tensor_product(b, a)) * cplx(0.5);
}

// A frame on a chart: coframe rows theta^I_a and the dual frame vectors e_I^a.
struct Frame {
  int d = 0;
  std::vector<cplx> coframe;  // [I*d + a]
  std::vector<cplx> vectors;  // [a*d + I] (column I is e_I)
  double condition = 0;

  static Frame from_coframe(const std::vector<cplx>& rows, int d, double max_condition = 1e8) {
    Frame f;
    f.d = d;
    f.coframe = rows;
    f.vectors = inverse(rows, d);
    f.condition = condition_number(rows, f.vectors, d);
    if (!(f.condition <= max_condition)) {
      std::ostringstream os;
      os << "ill-conditioned coframe (condition number " << f.condition << ")";
      throw NumericError(os.str());
    }
    return f;
  }
  cplx vec(int I, int a) const { return vectors[a * d + I]; }
};

// Coordinate -> frame components: down slots take frame vectors, up slots coframe rows.
inline PointTensor frame_components(const PointTensor& t, const Frame& f) {
  if (t.d != f.d) throw std::invalid_argument("frame_components: dimension mismatch");
  std::vector<cplx> cof_t(f.d * f.d);  // [a*d + I] = theta^I_a
  for (int I = 0; I < f.d; ++I)
    for (int a = 0; a < f.d; ++a) cof_t[a * f.d + I] = f.coframe[I * f.d + a];
  PointTensor r = t;
  for (int s = 0; s < t.rank(); ++s)
    r = apply_on_slot(r, s, t.valence[s] == Variance::Down ? f.vectors : cof_t, t.valence[s]);
  return r;
}

// Frame -> coordinate components (inverse of frame_components).
inline PointTensor coordinate_components(const PointTensor& t, const Frame& f) {
  std::vector<cplx> vec_t(f.d * f.d);  // [I*d + a] = e_I^a
  for (int I = 0; I < f.d; ++I)
    for (int a = 0; a < f.d; ++a) vec_t[I * f.d + a] = f.vectors[a * f.d + I];
  PointTensor r = t;
  for (int s = 0; s < t.rank(); ++s)
    r = apply_on_slot(r, s, t.valence[s] == Variance::Down ? f.coframe : vec_t, t.valence[s]);
  return r;
}

// ---- jet-valued fields ------------------------------------------------------

template <int K>
using FormJets = std::vector<CJet<K>>;  // coordinate components of a 1-form

template <int K>
PointTensor values(const std::vector<CJet<K>>& comps, int d, std::vector<Variance> val) {
  PointTensor t(d, std::move(val));
  if (t.c.size() != comps.size()) throw std::invalid_argument("values: size mismatch");
  for (std::size_t i = 0; i < comps.size(); ++i) t.c[i] = comps[i].value();
  return t;
}

// (d alpha)_ab = (d_a alpha_b - d_b alpha_a)/2, one jet order lower.
template <int K>
std::vector<CJet<K - 1>> exterior_derivative(const FormJets<K>& alpha, int d) {
  if (static_cast<int>(alpha.size()) != d) throw std::invalid_argument("exterior_derivative: size mismatch");
  std::vector<CJet<K - 1>> r(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) r[a * d + b] = (partial(alpha[b], a) - partial(alpha[a], b)) * 0.5;
  return r;
}

template <int K>
PointTensor exterior_derivative_at(const FormJets<K>& alpha, int d) {
  static_assert(K >= 1, "exterior derivative needs order-1 jets");
  return values<K - 1>(exterior_derivative<K>(alpha, d), d, {Variance::Down, Variance::Down});
}

// Evaluate a 2-form (coordinate components, jets) on two vectors (jets).
template <int K>
CJet<K> pair_eval(const std::vector<CJet<K>>& f, const std::vector<CJet<K>>& x, const std::vector<CJet<K>>& y,
                  int d) {
  CJet<K> acc(0.0);
  for (int a = 0; a < d; ++a) {
    CJet<K> row(0.0);
    for (int b = 0; b < d; ++b) row += f[a * d + b] * y[b];
    acc += x[a] * row;
  }
  return acc;
}

template <int K>
CJet<K> form_eval(const std::vector<CJet<K>>& f, const std::vector<CJet<K>>& x, int d) {
  CJet<K> acc(0.0);
  for (int a = 0; a < d; ++a) acc += f[a] * x[a];
  return acc;
}

template <int K>
std::vector<CJet<K>> column(const Mat<CJet<K>>& m, int d, int col) {
  std::vector<CJet<K>> v(d);
  for (int a = 0; a < d; ++a) v[a] = m[a * d + col];
  return v;
}

template <int K2, int K1>
std::vector<CJet<K2>> truncate_all(const std::vector<CJet<K1>>& v) {
  std::vector<CJet<K2>> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = truncate<K2>(v[i]);
  return r;
}

// Rows theta'^g = sum_a C_{a g} theta^a with H = C C^*; the new Levi form is the identity.
// `rows` holds m 1-forms with d components each.
template <int K>
std::vector<FormJets<K>> unitarize(const std::vector<FormJets<K>>& rows, const Mat<CJet<K>>& h, int m) {
  if (static_cast<int>(rows.size()) != m) throw std::invalid_argument("unitarize: row count mismatch");
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      if (std::abs(h[a * m + b].value() - std::conj(h[b * m + a].value())) > 1e-10)
        throw std::invalid_argument("unitarize: Levi form is not Hermitian");
  const Mat<CJet<K>> c = cholesky_lower(h, m);
  const int d = rows.empty() ? 0 : static_cast<int>(rows[0].size());
  std::vector<FormJets<K>> out(m, FormJets<K>(d, CJet<K>(0.0)));
  for (int g = 0; g < m; ++g)
    for (int a = g; a < m; ++a) {
      const CJet<K>& coef = c[a * m + g];
      for (int i = 0; i < d; ++i) out[g][i] += coef * rows[a][i];
    }
  return out;
}

}  // namespace nullcong

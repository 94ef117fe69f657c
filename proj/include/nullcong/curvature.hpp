#pragma once
// Levi-Civita curvature of a metric given by order-K jets of its components.
// Riemann convention: 2 nabla_[a nabla_b] V^c = R_ab^c_d V^d.
// Ricci Ric_bd = R_cb^c_d, Schouten P = (Ric - Sc/(2(n+1)) g)/n with n = d-2.

#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nullcong/tensor.hpp"

namespace nullcong {

// A metric field: components g_ab with order-3 jets at a point.
struct MetricField {
  int dim = 0;
  int plus = 0, minus = 0;  // expected signature; (0,0) skips the check
  std::function<Mat<CJet<3>>(const std::vector<double>&)> eval;
};

template <int K>
struct Connection {
  int d = 0;
  Mat<CJet<K>> g;
  Mat<CJet<K - 1>> ginv;
  std::vector<CJet<K - 1>> gamma;  // [(c*d + a)*d + b] = Gamma^c_ab
  const CJet<K - 1>& G(int c, int a, int b) const { return gamma[(c * d + a) * d + b]; }
};

template <int K>
Connection<K> levi_civita(const Mat<CJet<K>>& g, int d) {
  static_assert(K >= 1, "connection needs order-1 metric jets");
  Connection<K> c;
  c.d = d;
  c.g = g;
  Mat<CJet<K - 1>> gl(d * d);
  for (int i = 0; i < d * d; ++i) gl[i] = truncate<K - 1>(g[i]);
  c.ginv = inverse(gl, d);
  std::vector<CJet<K - 1>> dg(d * d * d);  // [(e*d+a)*d+b] = d_e g_ab
  for (int e = 0; e < d; ++e)
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) dg[(e * d + a) * d + b] = dg[(e * d + b) * d + a] = partial(g[a * d + b], e);
  std::vector<CJet<K - 1>> low(d * d * d);  // Gamma_{e a b}
  for (int e = 0; e < d; ++e)
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        CJet<K - 1> v = (dg[(a * d + e) * d + b] + dg[(b * d + e) * d + a] - dg[(e * d + a) * d + b]) * 0.5;
        low[(e * d + a) * d + b] = v;
        low[(e * d + b) * d + a] = v;
      }
  c.gamma.assign(d * d * d, CJet<K - 1>(0.0));
  for (int cc = 0; cc < d; ++cc)
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        CJet<K - 1> acc(0.0);
        for (int e = 0; e < d; ++e) acc += c.ginv[cc * d + e] * low[(e * d + a) * d + b];
        c.gamma[(cc * d + a) * d + b] = acc;
        c.gamma[(cc * d + b) * d + a] = acc;
      }
  return c;
}

// R_ab^c_d as jets of order K-2, index [((a*d+b)*d+c)*d+dd].
template <int K>
std::vector<CJet<K - 2>> riemann_jets(const Connection<K>& cn) {
  static_assert(K >= 2, "Riemann needs order-2 metric jets");
  const int d = cn.d;
  std::vector<CJet<K - 2>> gl(cn.gamma.size());
  for (std::size_t i = 0; i < gl.size(); ++i) gl[i] = truncate<K - 2>(cn.gamma[i]);
  // dG[e][c][a][b] = d_e Gamma^c_ab
  std::vector<CJet<K - 2>> dG(d * d * d * d);
  for (int e = 0; e < d; ++e)
    for (int i = 0; i < d * d * d; ++i) dG[e * d * d * d + i] = partial(cn.gamma[i], e);
  auto G = [&](int c, int a, int b) -> const CJet<K - 2>& { return gl[(c * d + a) * d + b]; };
  auto DG = [&](int e, int c, int a, int b) -> const CJet<K - 2>& { return dG[((e * d + c) * d + a) * d + b]; };
  std::vector<CJet<K - 2>> R(d * d * d * d, CJet<K - 2>(0.0));
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int dd = 0; dd < d; ++dd) {
          CJet<K - 2> v = DG(a, c, b, dd) - DG(b, c, a, dd);
          for (int e = 0; e < d; ++e) v += G(c, a, e) * G(e, b, dd) - G(c, b, e) * G(e, a, dd);
          R[((a * d + b) * d + c) * d + dd] = v;
          R[((b * d + a) * d + c) * d + dd] = -v;
        }
  return R;
}

// Covariant derivative of a tensor field whose components carry order-K jets.
// The result has an extra leading covariant slot: (nabla T)_{e ...}.
template <int K, int KG>
PointTensor covariant_derivative(const std::vector<CJet<K>>& comps, const std::vector<Variance>& valence,
                                 const Connection<KG>& cn) {
  static_assert(K >= 1, "covariant derivative needs order-1 jets of the field");
  const int d = cn.d;
  const int r = static_cast<int>(valence.size());
  PointTensor t(d, valence);
  if (t.c.size() != comps.size()) throw std::invalid_argument("covariant_derivative: size mismatch");
  for (std::size_t i = 0; i < comps.size(); ++i) t.c[i] = comps[i].value();
  std::vector<Variance> v{Variance::Down};
  v.insert(v.end(), valence.begin(), valence.end());
  PointTensor out(d, v);
  for (std::size_t o = 0; o < out.c.size(); ++o) {
    std::vector<int> idx = out.unflatten(o);
    const int e = idx[0];
    std::vector<int> ti(idx.begin() + 1, idx.end());
    cplx acc = comps[t.offset(ti)].grad(e);
    for (int s = 0; s < r; ++s) {
      const int orig = ti[s];
      for (int k = 0; k < d; ++k) {
        ti[s] = k;
        if (valence[s] == Variance::Up)
          acc += cn.G(orig, e, k).value() * t.at(ti);
        else
          acc -= cn.G(k, e, orig).value() * t.at(ti);
      }
      ti[s] = orig;
    }
    out.c[o] = acc;
  }
  return out;
}

struct CurvaturePack {
  int d = 0;
  PointTensor g, ginv;
  PointTensor gamma;    // Gamma^c_ab  (up, down, down)
  PointTensor riemann;  // R_ab^c_d    (down, down, up, down)
  PointTensor riemann_low;  // R_abcd = g_ce R_ab^e_d
  PointTensor ricci;
  cplx scalar = 0;
  PointTensor schouten;
  cplx schouten_trace = 0;
  PointTensor weyl;     // W_abcd
  std::optional<PointTensor> cotton;        // Y_abc = nabla_b P_ca - nabla_c P_ba
  std::optional<PointTensor> riemann_grad;  // nabla_e R_ab^c_d
};

namespace detail {

template <int K>
std::vector<CJet<K>> ricci_from(const std::vector<CJet<K>>& R, int d) {
  std::vector<CJet<K>> ric(d * d, CJet<K>(0.0));
  for (int b = 0; b < d; ++b)
    for (int dd = 0; dd < d; ++dd) {
      CJet<K> acc(0.0);
      for (int c = 0; c < d; ++c) acc += R[((c * d + b) * d + c) * d + dd];
      ric[b * d + dd] = acc;
    }
  return ric;
}

template <int K, int KI>
std::vector<CJet<K>> schouten_from(const std::vector<CJet<K>>& ric, const Mat<CJet<KI>>& ginv,
                                   const Mat<CJet<KI>>& g, int d) {
  CJet<K> sc(0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) sc += truncate<K>(ginv[a * d + b]) * ric[a * d + b];
  const double n = d - 2;
  std::vector<CJet<K>> P(d * d);
  for (int i = 0; i < d * d; ++i) P[i] = (ric[i] - sc * truncate<K>(g[i]) * (1.0 / (2.0 * (n + 1)))) * (1.0 / n);
  return P;
}

}  // namespace detail

inline Mat<CJet<3>> eval_metric(const MetricField& mf, const std::vector<double>& pt) {
  if (static_cast<int>(pt.size()) != mf.dim) throw std::invalid_argument("metric point has wrong dimension");
  Mat<CJet<3>> g = mf.eval(pt);
  if (static_cast<int>(g.size()) != mf.dim * mf.dim) throw std::invalid_argument("metric evaluator size mismatch");
  return g;
}

// Fill a curvature pack from order-K metric jets (K = 2 or 3). Cotton and the
// Riemann gradient are only available at K = 3.
template <int K>
CurvaturePack curvature_from_jets(const Mat<CJet<K>>& gj, int d) {
  static_assert(K == 2 || K == 3, "curvature pack needs order 2 or 3");
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (std::abs(gj[a * d + b].value() - gj[b * d + a].value()) > 1e-12 * (1 + std::abs(gj[a * d + b].value())))
        throw std::invalid_argument("metric is not symmetric");
  const Connection<K> cn = levi_civita<K>(gj, d);
  const auto R = riemann_jets<K>(cn);
  CurvaturePack p;
  p.d = d;
  const auto dn = Variance::Down, up = Variance::Up;
  p.g = values<K>(gj, d, {dn, dn});
  p.ginv = values<K - 1>(cn.ginv, d, {up, up});
  p.gamma = values<K - 1>(cn.gamma, d, {up, dn, dn});
  p.riemann = values<K - 2>(R, d, {dn, dn, up, dn});
  p.riemann_low = apply_on_slot(p.riemann, 2, p.g.c, dn);
  const auto ric = detail::ricci_from<K - 2>(R, d);
  p.ricci = values<K - 2>(ric, d, {dn, dn});
  cplx sc = 0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) sc += p.ginv(a, b) * p.ricci(a, b);
  p.scalar = sc;
  const auto P = detail::schouten_from<K - 2, K - 1>(ric, cn.ginv, truncate_all<K - 1>(gj), d);
  p.schouten = values<K - 2>(P, d, {dn, dn});
  cplx tr = 0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) tr += p.ginv(a, b) * p.schouten(a, b);
  p.schouten_trace = tr;
  p.weyl = PointTensor::covariant(d, 4);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          p.weyl(a, b, c, e) = p.riemann_low(a, b, c, e) -
                               (p.g(a, c) * p.schouten(b, e) - p.g(a, e) * p.schouten(b, c) -
                                p.g(b, c) * p.schouten(a, e) + p.g(b, e) * p.schouten(a, c));
  if constexpr (K == 3) {
    const auto dP = covariant_derivative<1, 3>(P, {dn, dn}, cn);  // (nabla_e P)_{ab}
    PointTensor Y = PointTensor::covariant(d, 3);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c) Y(a, b, c) = dP(b, c, a) - dP(c, b, a);
    p.cotton = Y;
    p.riemann_grad = covariant_derivative<1, 3>(R, {dn, dn, up, dn}, cn);
  }
  return p;
}

inline CurvaturePack curvature_pack(const MetricField& mf, const std::vector<double>& pt, int order) {
  const Mat<CJet<3>> g = eval_metric(mf, pt);
  if (order == 3) return curvature_from_jets<3>(g, mf.dim);
  if (order == 2) return curvature_from_jets<2>(truncate_all<2>(g), mf.dim);
  throw std::invalid_argument("curvature order must be 2 or 3");
}

// Eigenvalue-sign check of a real symmetric metric via the inertia of an LDL^T pass.
inline std::pair<int, int> signature(const PointTensor& g) {
  const int d = g.d;
  std::vector<double> a(d * d);
  for (int i = 0; i < d * d; ++i) a[i] = g.c[i].real();
  int plus = 0, minus = 0;
  // symmetric Gaussian elimination with diagonal pivoting; falls back to a 2x2 rotation
  std::vector<bool> used(d, false);
  for (int step = 0; step < d; ++step) {
    int piv = -1;
    double best = 0;
    for (int i = 0; i < d; ++i)
      if (!used[i] && std::abs(a[i * d + i]) > best) best = std::abs(a[i * d + i]), piv = i;
    if (piv < 0 || best < 1e-13) {
      // all remaining diagonal entries vanish: combine a pair x_i +/- x_j
      int bi = -1, bj = -1;
      double bo = 0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          if (!used[i] && !used[j] && i != j && std::abs(a[i * d + j]) > bo) bo = std::abs(a[i * d + j]), bi = i, bj = j;
      if (bi < 0) break;
      for (int k = 0; k < d; ++k) a[bi * d + k] += a[bj * d + k];
      for (int k = 0; k < d; ++k) a[k * d + bi] += a[k * d + bj];
      --step;
      continue;
    }
    const double p = a[piv * d + piv];
    (p > 0 ? plus : minus)++;
    used[piv] = true;
    for (int i = 0; i < d; ++i) {
      if (used[i]) continue;
      const double f = a[i * d + piv] / p;
      for (int j = 0; j < d; ++j) a[i * d + j] -= f * a[piv * d + j];
    }
  }
  return {plus, minus};
}

// e^{2 phi} g with phi given as a scalar field with order-3 jets.
inline MetricField conformal_rescale(const MetricField& g, std::function<CJet<3>(const std::vector<double>&)> phi) {
  MetricField r = g;
  r.eval = [g, phi](const std::vector<double>& pt) {
    Mat<CJet<3>> m = g.eval(pt);
    const CJet<3> f = exp(phi(pt) * 2.0);
    for (auto& x : m) x = f * x;
    return m;
  };
  return r;
}

struct TransformResiduals {
  double connection = 0;
  double schouten = 0;
};

// Compare the rescaled connection and Schouten tensor against the transformation laws
// Gamma_hat - Gamma = delta Ups + delta Ups - g Ups^#,  P_hat = P - nabla Ups + Ups Ups - |Ups|^2 g / 2.
// Both residuals are relative to the largest component of the tensors involved.
inline TransformResiduals transform_law_residuals(const MetricField& g,
                                                  std::function<CJet<3>(const std::vector<double>&)> phi,
                                                  const std::vector<double>& pt) {
  const int d = g.dim;
  const MetricField gh = conformal_rescale(g, phi);
  const auto gj = truncate_all<2>(eval_metric(g, pt));
  const auto hj = truncate_all<2>(eval_metric(gh, pt));
  const Connection<2> c = levi_civita<2>(gj, d);
  const Connection<2> ch = levi_civita<2>(hj, d);
  const CJet<3> f = phi(pt);
  std::vector<cplx> ups(d);
  for (int a = 0; a < d; ++a) ups[a] = f.grad(a);
  std::vector<cplx> ups_up(d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) ups_up[a] += c.ginv[a * d + b].value() * ups[b];
  double scale = 0, worst = 0;
  for (int cc = 0; cc < d; ++cc)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        const cplx lhs = ch.G(cc, a, b).value() - c.G(cc, a, b).value();
        const cplx rhs = (cc == a ? ups[b] : 0.0) + (cc == b ? ups[a] : 0.0) - gj[a * d + b].value() * ups_up[cc];
        worst = std::max(worst, std::abs(lhs - rhs));
        scale = std::max({scale, std::abs(ch.G(cc, a, b).value()), std::abs(c.G(cc, a, b).value()), std::abs(rhs)});
      }
  TransformResiduals r;
  r.connection = worst / (scale + 1e-30);

  const CurvaturePack p = curvature_from_jets<2>(gj, d);
  const CurvaturePack ph = curvature_from_jets<2>(hj, d);
  cplx norm2 = 0;
  for (int a = 0; a < d; ++a) norm2 += ups[a] * ups_up[a];
  PointTensor pred = p.schouten;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      cplx hess = f.hess(a, b);
      for (int e = 0; e < d; ++e) hess -= c.G(e, a, b).value() * ups[e];
      pred(a, b) += -hess + ups[a] * ups[b] - 0.5 * norm2 * p.g(a, b);
    }
  r.schouten = max_abs_diff(ph.schouten, pred) / (std::max({ph.schouten.max_abs(), pred.max_abs(), p.schouten.max_abs()}) + 1e-30);
  return r;
}

}  // namespace nullcong

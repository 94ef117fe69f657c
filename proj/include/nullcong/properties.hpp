#pragma once
// Residuals of curvature-engine identities on random polynomial metrics: the
// Ricci identity for the Riemann convention, Weyl trace-freeness and conformal
// invariance, and the conformal transformation laws.

#include <algorithm>
#include <functional>
#include <vector>

#include "nullcong/curvature.hpp"

namespace nullcong {

// Flat metric (Lorentzian or Riemannian) plus a random symmetric cubic perturbation.
// G is any generator with uniform(lo, hi), such as Rng.
template <class G>
MetricField random_polynomial_metric(G& rng, int d, bool lorentzian, double eps = 0.08) {
  std::vector<double> base(d * d, 0.0);
  for (int a = 0; a < d; ++a) base[a * d + a] = (lorentzian && a == 0) ? -1.0 : 1.0;
  const int np = d * (d + 1) / 2;
  std::vector<std::vector<double>> lin(np), quad(np), cub(np);
  auto fill = [&](std::vector<double>& v, int size, double s) {
    v.resize(size);
    for (auto& x : v) x = rng.uniform(-s, s);
  };
  for (int p = 0; p < np; ++p) {
    fill(lin[p], d, eps);
    fill(quad[p], d * d, eps);
    fill(cub[p], d * d * d, eps / 2);
  }
  MetricField mf;
  mf.dim = d;
  mf.plus = lorentzian ? d - 1 : d;
  mf.minus = lorentzian ? 1 : 0;
  mf.eval = [d, base, lin, quad, cub](const std::vector<double>& pt) {
    std::vector<CJet<3>> x;
    for (int i = 0; i < d; ++i) x.push_back(to_complex(Jet<double, 3>::coordinate(d, i, pt[i])));
    Mat<CJet<3>> g(d * d);
    int p = 0;
    for (int b = 0; b < d; ++b)
      for (int a = 0; a <= b; ++a, ++p) {
        CJet<3> v(base[a * d + b]);
        v.set_dim(d);
        for (int k = 0; k < d; ++k) {
          v += x[k] * lin[p][k];
          for (int l = k; l < d; ++l) {
            v += x[k] * x[l] * quad[p][k * d + l];
            for (int n = l; n < d; ++n) v += x[k] * x[l] * x[n] * cub[p][(k * d + l) * d + n];
          }
        }
        g[a * d + b] = g[b * d + a] = v;
      }
    return g;
  };
  return mf;
}

// Scalar field sum_i c_i sin(a_i x_i) + b_i x_i^2 with random coefficients.
template <class G>
std::function<CJet<3>(const std::vector<double>&)> random_conformal_factor(G& rng, int d) {
  std::vector<double> a(d), b(d), c(d);
  for (int i = 0; i < d; ++i) {
    a[i] = rng.uniform(-0.4, 0.4);
    b[i] = rng.uniform(-0.3, 0.3);
    c[i] = rng.uniform(-0.4, 0.4);
  }
  return [a, b, c](const std::vector<double>& pt) {
    const int d = static_cast<int>(pt.size());
    CJet<3> f(0.0);
    f.set_dim(d);
    for (int i = 0; i < d; ++i) {
      const CJet<3> x = to_complex(Jet<double, 3>::coordinate(d, i, pt[i]));
      f += sin(x * a[i]) * c[i] + x * x * b[i];
    }
    return f;
  };
}

// max |2 nabla_[a nabla_b] V^c - R_ab^c_d V^d| relative to the largest term, for a
// random vector field V.
template <class G>
double ricci_identity_residual(const MetricField& mf, const std::vector<double>& pt, G& rng) {
  const int d = mf.dim;
  const auto g = eval_metric(mf, pt);
  const Connection<3> cn = levi_civita<3>(g, d);
  const auto R = riemann_jets<3>(cn);
  std::vector<CJet<3>> x;
  for (int i = 0; i < d; ++i) x.push_back(to_complex(Jet<double, 3>::coordinate(d, i, pt[i])));
  std::vector<CJet<2>> V(d);
  for (int c = 0; c < d; ++c) {
    const double c0 = rng.uniform(-1, 1), c1 = rng.uniform(-1, 1), c2 = rng.uniform(-1, 1);
    V[c] = truncate<2>(sin(x[c] * c0 + x[(c + 1) % d] * c1) + x[(c + 2) % d] * x[c] * c2);
  }
  std::vector<CJet<1>> DV(d * d);
  for (int b = 0; b < d; ++b)
    for (int c = 0; c < d; ++c) {
      CJet<1> acc = partial(V[c], b);
      for (int e = 0; e < d; ++e) acc += truncate<1>(cn.G(c, b, e)) * truncate<1>(V[e]);
      DV[b * d + c] = acc;
    }
  const PointTensor DDV = covariant_derivative<1, 3>(DV, {Variance::Down, Variance::Up}, cn);
  double worst = 0, scale = 0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        const cplx lhs = DDV(a, b, c) - DDV(b, a, c);
        cplx rhs = 0;
        for (int e = 0; e < d; ++e) rhs += R[((a * d + b) * d + c) * d + e].value() * V[e].value();
        worst = std::max(worst, std::abs(lhs - rhs));
        scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
      }
  return worst / (scale + 1e-30);
}

// Largest trace of the Weyl tensor over all slot pairs, relative to max |W|.
inline double weyl_trace_residual(const CurvaturePack& p) {
  const double sW = p.weyl.max_abs() + 1e-30;
  double worst = 0;
  for (int s1 = 0; s1 < 4; ++s1)
    for (int s2 = s1 + 1; s2 < 4; ++s2)
      worst = std::max(worst, contract(raise_lower(p.weyl, s2, p.g, Variance::Up), s1, s2).max_abs() / sW);
  return worst;
}

// Relative change of W_ab^c_d under g -> e^{2 phi} g.
inline double weyl_conformal_residual(const MetricField& mf, std::function<CJet<3>(const std::vector<double>&)> phi,
                                      const std::vector<double>& pt) {
  const auto p = curvature_pack(mf, pt, 2);
  const auto ph = curvature_pack(conformal_rescale(mf, std::move(phi)), pt, 2);
  return rel_diff(raise_lower(ph.weyl, 2, ph.g, Variance::Up), raise_lower(p.weyl, 2, p.g, Variance::Up));
}

}  // namespace nullcong

#pragma once
// Invariants of a null congruence: geodesy, twist, shear, expansion, the Weyl–twist
// identity for non-shearing congruences, and the Weyl degeneracy conditions.
// The screen space is spanned by explicitly supplied (possibly complex) vectors.

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nullcong/curvature.hpp"

namespace nullcong {

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Vector field, its dual line and screen at a point. The vector field carries jets;
// `ell` and the screen vectors are point values.
template <int K>
struct OpticalSetup {
  int d = 0;
  Mat<CJet<K>> g;                       // metric jets
  std::vector<CJet<K>> k;               // optical vector field
  std::vector<cplx> ell;                // transverse null vector with kappa(ell) != 0
  std::vector<std::vector<cplx>> screen;  // basis of the screen space
};

struct CongruenceInvariants {
  int n = 0;                      // screen dimension
  std::vector<cplx> screen_metric;  // h_ij
  std::vector<cplx> twist;        // tau_ij = d kappa(e_i, e_j)
  std::vector<cplx> shear;        // trace-free part of the kappa-stripped shear
  cplx shear_trace = 0;           // trace removed from the raw shear
  cplx expansion = 0;
  double geodesy = 0;             // max |Lie_k kappa(v)| over v in K-perp
  double null_residual = 0;       // |g(k, k)|
  double kappa_ell = 0;           // |kappa(ell)|

  double max_shear() const {
    double s = 0;
    for (const auto& x : shear) s = std::max(s, std::abs(x));
    return s;
  }
};

namespace detail {

inline cplx bilinear(const std::vector<cplx>& g, int d, const std::vector<cplx>& x, const std::vector<cplx>& y) {
  cplx acc = 0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) acc += x[a] * g[a * d + b] * y[b];
  return acc;
}

inline cplx pairing(const std::vector<cplx>& form, const std::vector<cplx>& v) {
  cplx acc = 0;
  for (std::size_t a = 0; a < form.size(); ++a) acc += form[a] * v[a];
  return acc;
}

}  // namespace detail

template <int K>
CongruenceInvariants congruence_invariants(const OpticalSetup<K>& s) {
  static_assert(K >= 1, "congruence invariants need first derivatives");
  const int d = s.d;
  const int n = static_cast<int>(s.screen.size());
  std::vector<cplx> gv(d * d), kv(d);
  for (int i = 0; i < d * d; ++i) gv[i] = s.g[i].value();
  for (int a = 0; a < d; ++a) kv[a] = s.k[a].value();

  CongruenceInvariants r;
  r.n = n;
  r.null_residual = std::abs(detail::bilinear(gv, d, kv, kv));
  double gscale = 0;
  for (const auto& x : gv) gscale = std::max(gscale, std::abs(x));
  if (r.null_residual > 1e-8 * std::max(1.0, gscale)) {
    std::ostringstream os;
    os << "optical vector is not null: |g(k,k)| = " << r.null_residual;
    throw PreconditionError(os.str());
  }

  // kappa_a = g_ab k^b with jets
  std::vector<CJet<K>> kappa(d);
  for (int a = 0; a < d; ++a) {
    CJet<K> acc(0.0);
    for (int b = 0; b < d; ++b) acc += s.g[a * d + b] * s.k[b];
    kappa[a] = acc;
  }
  std::vector<cplx> kap(d);
  for (int a = 0; a < d; ++a) kap[a] = kappa[a].value();
  const cplx kl = detail::pairing(kap, s.ell);
  r.kappa_ell = std::abs(kl);
  if (r.kappa_ell < 1e-12) throw PreconditionError("transverse vector ell has kappa(ell) = 0");

  // Lie derivatives along k (values)
  std::vector<cplx> lie_g(d * d, 0.0), lie_kappa(d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      cplx v = 0;
      for (int c = 0; c < d; ++c)
        v += kv[c] * s.g[a * d + b].grad(c) + gv[c * d + b] * s.k[c].grad(a) + gv[a * d + c] * s.k[c].grad(b);
      lie_g[a * d + b] = v;
    }
  for (int a = 0; a < d; ++a) {
    cplx v = 0;
    for (int c = 0; c < d; ++c) v += kv[c] * kappa[a].grad(c) + kap[c] * s.k[c].grad(a);
    lie_kappa[a] = v;
  }

  // geodesy on K-perp = screen + k
  auto perp = s.screen;
  perp.push_back(kv);
  for (const auto& v : perp) r.geodesy = std::max(r.geodesy, std::abs(detail::pairing(lie_kappa, v)));

  // twist and shear on the screen
  r.screen_metric.assign(n * n, 0.0);
  r.twist.assign(n * n, 0.0);
  std::vector<cplx> raw(n * n);
  const auto dk = exterior_derivative<K>(kappa, d);
  std::vector<cplx> dkv(d * d);
  for (int i = 0; i < d * d; ++i) dkv[i] = dk[i].value();
  const cplx lie_kappa_ell = detail::pairing(lie_kappa, s.ell) / kl;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      r.screen_metric[i * n + j] = detail::bilinear(gv, d, s.screen[i], s.screen[j]);
      r.twist[i * n + j] = detail::bilinear(dkv, d, s.screen[i], s.screen[j]);
      raw[i * n + j] =
          0.5 * (detail::bilinear(lie_g, d, s.screen[i], s.screen[j]) - r.screen_metric[i * n + j] * lie_kappa_ell);
    }
  if (n > 0) {
    const auto hinv = inverse(r.screen_metric, n);
    cplx tr = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) tr += hinv[i * n + j] * raw[j * n + i];
    r.shear_trace = tr;
    r.shear.resize(n * n);
    for (int i = 0; i < n * n; ++i) r.shear[i] = raw[i] - tr / static_cast<double>(n) * r.screen_metric[i];
  }

  // expansion: (kappa(ell) div k - (nabla_k kappa)(ell)) / kappa(ell)
  const Connection<K> cn = levi_civita<K>(s.g, d);
  cplx div = 0;
  for (int a = 0; a < d; ++a) {
    div += s.k[a].grad(a);
    for (int b = 0; b < d; ++b) div += cn.G(a, a, b).value() * kv[b];
  }
  const PointTensor nk = covariant_derivative<K, K>(kappa, {Variance::Down}, cn);  // (nabla_e kappa)_a
  cplx nkk = 0;
  for (int e = 0; e < d; ++e)
    for (int a = 0; a < d; ++a) nkk += kv[e] * nk(e, a) * s.ell[a];
  r.expansion = (kl * div - nkk) / kl;
  return r;
}

// tau_ik tau^k_j + (1/n) tau_kl tau^kl h_ij with n the screen dimension.
inline double twist_complex_structure_residual(const CongruenceInvariants& inv) {
  const int n = inv.n;
  if (n == 0) return 0;
  const auto hinv = inverse(inv.screen_metric, n);
  const auto& t = inv.twist;
  // tau^k_j = h^{kl} tau_lj
  std::vector<cplx> up(n * n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) up[k * n + j] += hinv[k * n + l] * t[l * n + j];
  cplx norm = 0;  // tau_kl tau^kl
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      cplx tkl_up = 0;  // tau^{kl} = h^{ka} h^{lb} tau_ab
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) tkl_up += hinv[k * n + a] * hinv[l * n + b] * t[a * n + b];
      norm += t[k * n + l] * tkl_up;
    }
  double worst = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx v = norm / static_cast<double>(n) * inv.screen_metric[i * n + j];
      for (int k = 0; k < n; ++k) v += t[i * n + k] * up[k * n + j];
      worst = std::max(worst, std::abs(v));
    }
  return worst;
}

namespace detail {

inline double max_abs_of(const std::vector<cplx>& v) {
  double s = 0;
  for (const auto& x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace detail

struct TwistIdentityResult {
  double residual = 0;  // max |lhs - rhs| / max(1, max operand)
  double lhs_max = 0, rhs_max = 0;
};

// 4 kappa_[a W_b]ef[c kappa_d] k^e k^f against
// tau_abe tau^e_cd + (4/n) tau_[a^ef g_b][c tau_d]ef with tau_abc = 3 kappa_[a nabla_b kappa_c].
// Requires a geodesic, non-shearing, non-expanding setup; the caller checks this
// through congruence_invariants.
inline TwistIdentityResult weyl_twist_identity(const OpticalSetup<2>& s) {
  const int d = s.d;
  const int nscreen = d - 2;
  const CurvaturePack p = curvature_from_jets<2>(s.g, d);
  const Connection<2> cn = levi_civita<2>(s.g, d);
  std::vector<CJet<2>> kappa(d);
  for (int a = 0; a < d; ++a) {
    CJet<2> acc(0.0);
    for (int b = 0; b < d; ++b) acc += s.g[a * d + b] * s.k[b];
    kappa[a] = acc;
  }
  const PointTensor nk = covariant_derivative<2, 2>(kappa, {Variance::Down}, cn);
  std::vector<cplx> kap(d), kv(d);
  for (int a = 0; a < d; ++a) {
    kap[a] = kappa[a].value();
    kv[a] = s.k[a].value();
  }
  auto I3 = [d](int a, int b, int c) { return (a * d + b) * d + c; };
  auto I4 = [d](int a, int b, int c, int e) { return ((a * d + b) * d + c) * d + e; };

  // tau_abc = (1/2) sum over permutations sign * kappa_a nabla_b kappa_c
  std::vector<cplx> tau(d * d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        auto T = [&](int x, int y, int z) { return kap[x] * nk(y, z); };
        tau[I3(a, b, c)] =
            0.5 * (T(a, b, c) - T(a, c, b) + T(b, c, a) - T(b, a, c) + T(c, a, b) - T(c, b, a));
      }
  // Q_bc = W_becf k^e k^f
  std::vector<cplx> Q(d * d, 0.0);
  for (int b = 0; b < d; ++b)
    for (int c = 0; c < d; ++c)
      for (int e = 0; e < d; ++e)
        for (int f = 0; f < d; ++f) Q[b * d + c] += p.weyl(b, e, f, c) * kv[e] * kv[f];
  // tau^e_cd
  std::vector<cplx> tau_up(d * d * d, 0.0);
  for (int e = 0; e < d; ++e)
    for (int f = 0; f < d; ++f)
      for (int c = 0; c < d; ++c)
        for (int dd = 0; dd < d; ++dd) tau_up[I3(e, c, dd)] += p.ginv(e, f) * tau[I3(f, c, dd)];
  // Z_ad = tau_a^ef tau_def
  std::vector<cplx> tau_aup(d * d * d, 0.0);  // tau_a^{ef}
  for (int a = 0; a < d; ++a)
    for (int e = 0; e < d; ++e)
      for (int f = 0; f < d; ++f) {
        cplx v = 0;
        for (int x = 0; x < d; ++x)
          for (int y = 0; y < d; ++y) v += p.ginv(e, x) * p.ginv(f, y) * tau[I3(a, x, y)];
        tau_aup[I3(a, e, f)] = v;
      }
  std::vector<cplx> Z(d * d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int dd = 0; dd < d; ++dd)
      for (int e = 0; e < d; ++e)
        for (int f = 0; f < d; ++f) Z[a * d + dd] += tau_aup[I3(a, e, f)] * tau[I3(dd, e, f)];

  std::vector<cplx> lhs(d * d * d * d), rhs(d * d * d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          auto X = [&](int x, int y, int z, int w) { return kap[x] * Q[y * d + z] * kap[w]; };
          lhs[I4(a, b, c, e)] = X(a, b, c, e) - X(b, a, c, e) - X(a, b, e, c) + X(b, a, e, c);
          cplx first = 0;
          for (int f = 0; f < d; ++f) first += tau[I3(a, b, f)] * tau_up[I3(f, c, e)];
          auto Y = [&](int x, int y, int z, int w) { return Z[x * d + w] * p.g(y, z); };
          const cplx second = (Y(a, b, c, e) - Y(b, a, c, e) - Y(a, b, e, c) + Y(b, a, e, c)) / double(nscreen);
          rhs[I4(a, b, c, e)] = first + second;
        }
  TwistIdentityResult r;
  r.lhs_max = detail::max_abs_of(lhs);
  r.rhs_max = detail::max_abs_of(rhs);
  double diff = 0;
  for (std::size_t i = 0; i < lhs.size(); ++i) diff = std::max(diff, std::abs(lhs[i] - rhs[i]));
  r.residual = diff / std::max({1.0, r.lhs_max, r.rhs_max});
  return r;
}

struct DegeneracyReport {
  // (i) W(k,v,k,v) on the screen; (ii) W(k,v,k,.) for v in K-perp; (iii) the repeated
  // direction condition; (iv) trace-free screen part of W(k, ., ., .); (v) the full
  // kappa_[a W_bc]f[d kappa_e] k^f.
  std::array<double, 5> residual{};
};

// Weyl degeneracy conditions from the Weyl tensor in coordinates and a frame
// (ell, screen..., k) given by point values; the frame is normalized so that
// kappa(ell) = 1 before contracting.
inline DegeneracyReport weyl_degeneracy_report(const PointTensor& weyl, const std::vector<cplx>& g,
                                               const std::vector<cplx>& k, const std::vector<cplx>& ell,
                                               const std::vector<std::vector<cplx>>& screen) {
  const int d = weyl.d;
  const int n = static_cast<int>(screen.size());
  std::vector<cplx> kap(d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) kap[a] += g[a * d + b] * k[b];
  const cplx kl = detail::pairing(kap, ell);
  // frame: 0 = ell / kappa(ell), 1..n screen, n+1 = k
  std::vector<std::vector<cplx>> fr;
  std::vector<cplx> l0(ell);
  for (auto& x : l0) x /= kl;
  fr.push_back(l0);
  for (const auto& v : screen) fr.push_back(v);
  fr.push_back(k);
  const int F = static_cast<int>(fr.size());
  const int K = F - 1;
  std::vector<cplx> vecs(d * F);  // [a*F + I]
  for (int I = 0; I < F; ++I)
    for (int a = 0; a < d; ++a) vecs[a * F + I] = fr[I][a];
  if (F != d) throw std::invalid_argument("weyl_degeneracy_report: frame must span the tangent space");
  PointTensor w = weyl;
  for (int s = 0; s < 4; ++s) w = apply_on_slot(w, s, vecs, Variance::Down);
  auto W = [&](int a, int b, int c, int e) { return w(a, b, c, e); };
  std::vector<cplx> kf(F, 0.0);  // kappa in the frame: only the ell slot
  kf[0] = 1.0;

  DegeneracyReport r;
  double i1 = 0, i2 = 0, i3 = 0, i4 = 0, i5 = 0;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) i1 = std::max(i1, std::abs(W(K, i, K, j)));
  for (int v = 1; v <= n + 1; ++v)
    for (int x = 0; x < F; ++x) i2 = std::max(i2, std::abs(W(K, v, K, x)));
  for (int a = 0; a < F; ++a)
    for (int b = 0; b < F; ++b)
      for (int c = 0; c < F; ++c)
        i3 = std::max(i3, std::abs(0.5 * (W(K, a, K, b) * kf[c] - W(K, a, K, c) * kf[b])));
  // screen tensor T_ijk = W(k, e_i, e_j, e_k) and its trace-free part
  if (n > 1) {
    std::vector<cplx> h(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h[i * n + j] = detail::bilinear(g, d, screen[i], screen[j]);
    const auto hinv = inverse(h, n);
    std::vector<cplx> t(n, 0.0);  // t_k = h^ij T_ijk
    for (int kk = 0; kk < n; ++kk)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t[kk] += hinv[i * n + j] * W(K, 1 + i, 1 + j, 1 + kk);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int kk = 0; kk < n; ++kk) {
          const cplx v = W(K, 1 + i, 1 + j, 1 + kk) - (h[i * n + j] * t[kk] - h[i * n + kk] * t[j]) / double(n - 1);
          i4 = std::max(i4, std::abs(v));
        }
  }
  // full five-index tensor, antisymmetrized over (abc) and (de)
  std::vector<cplx> Wk(F * F * F);  // W(b, c, k, d)
  for (int b = 0; b < F; ++b)
    for (int c = 0; c < F; ++c)
      for (int e = 0; e < F; ++e) Wk[(b * F + c) * F + e] = W(b, c, K, e);
  const int perm[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}};
  const double sgn[6] = {1, 1, 1, -1, -1, -1};
  for (int a = 0; a < F; ++a)
    for (int b = 0; b < F; ++b)
      for (int c = 0; c < F; ++c)
        for (int x = 0; x < F; ++x)
          for (int y = 0; y < F; ++y) {
            const int idx[3] = {a, b, c};
            cplx v = 0;
            for (int p = 0; p < 6; ++p) {
              const int A = idx[perm[p][0]], B = idx[perm[p][1]], C = idx[perm[p][2]];
              v += sgn[p] * kf[A] * (Wk[(B * F + C) * F + x] * kf[y] - Wk[(B * F + C) * F + y] * kf[x]);
            }
            i5 = std::max(i5, std::abs(v) / 12.0);
          }
  r.residual = {i1, i2, i3, i4, i5};
  return r;
}

// lambda_a(phi) solving lambda'' = (2m-4)/(2m-1) i lambda', from the amplitude E and
// the constant part lam (values at the base point).
inline Jet<cplx, 3> e_alpha_ode_solution(int m, double phi, cplx E, cplx lam) {
  if (m < 1) throw std::invalid_argument("e_alpha_ode_solution: m must be at least 1");
  const Jet<cplx, 3> x = to_complex(Jet<double, 3>::coordinate(1, 0, phi));
  if (m == 2) return x * (2.0 * E) + lam;
  const double w = (2.0 * m - 4) / (2.0 * m - 1);
  return exp(x * cplx(0, w)) * (cplx(0, -2) * E / w) + lam;
}

inline double e_alpha_ode_residual(int m, const Jet<cplx, 3>& lam) {
  const double w = (2.0 * m - 4) / (2.0 * m - 1);
  return std::abs(lam.hess(0, 0) - cplx(0, w) * lam.grad(0));
}

}  // namespace nullcong

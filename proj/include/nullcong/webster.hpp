#pragma once
// Webster–Tanaka connection of a contact almost-CR base in a unitary adapted frame
// (identity Levi form): connection forms, pseudo-Hermitian torsion, Nijenhuis tensor,
// curvature, Ricci/Schouten/Chern–Moser tensors and the (almost) CR–Einstein
// residuals, together with the identities used to validate them.
//
// Frame directions are numbered 0 (Reeb), 1..m (e_a), m+1..2m (conjugates).

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "nullcong/cr_base.hpp"
#include "nullcong/curvature.hpp"

namespace nullcong {

struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <int K>
struct WebsterSolve {
  static_assert(K >= 1, "the Webster solve needs first derivatives of the coframe");
  BaseFrameJets<K> frame;
  int m = 0, n = 0;
  std::vector<std::vector<CJet<K - 1>>> T;  // T[C][A*n+B] = dtheta^C(e_A, e_B)
  std::vector<CJet<K - 1>> gamma;           // [(b*m + a)*n + A] = Gamma_b^a(e_A)
  std::vector<CJet<K - 1>> torsion;         // [a*m + b] = A_ab
  std::vector<CJet<K - 1>> nijenhuis;       // [(b*m + c)*m + a] = N_bca
  double adapted_residual = 0;     // d theta0 against i h theta ^ theta-bar (coefficient convention)
  double roundtrip_residual = 0;   // reassembled d theta^a against the numerical one
  double hermitian_residual = 0;   // Gamma_b^a + conj(Gamma_a^b) along the Reeb direction
  double symmetry_residual = 0;    // A symmetric, N with vanishing total antisymmetrization

  const CJet<K - 1>& G(int b, int a, int A) const { return gamma[(b * m + a) * n + A]; }
  const CJet<K - 1>& Ators(int a, int b) const { return torsion[a * m + b]; }
  const CJet<K - 1>& N(int b, int c, int a) const { return nijenhuis[(b * m + c) * m + a]; }
  int up(int a) const { return 1 + a; }       // frame index of e_a
  int dn(int a) const { return 1 + m + a; }   // frame index of conj(e_a)

  // frame derivative e_A(f) of a field living in the chart of the frame jets
  template <int K2>
  CJet<K2 - 1> d(const CJet<K2>& f, int A) const {
    return frame.template along<K2>(f, A);
  }

  // Connection coefficient for the (possibly barred) index pair along direction A:
  // nabla_{e_A} e_B = sum_C conn(B, C, A) e_C.
  template <int J>
  CJet<J> conn(int B, int C, int A) const {
    CJet<J> z(0.0);
    z.set_dim(frame.D);
    if (B == 0 || C == 0) return z;
    const bool bb = B > m, bc = C > m;
    if (bb != bc) return z;
    if (!bb) return truncate<J>(G(B - 1, C - 1, A));
    return conj(truncate<J>(G(B - 1 - m, C - 1 - m, frame.bar(A))));
  }
};

// With `strict`, input that is not partially integrable or whose structure equations
// cannot be solved raises StructureError; otherwise the defects only show up in the
// residual fields.
template <int K>
WebsterSolve<K> webster_solve(const BaseFrameJets<K>& f, bool strict = true) {
  WebsterSolve<K> w;
  w.frame = f;
  const int m = f.m, n = f.n;
  w.m = m;
  w.n = n;
  w.T = structure_components<K>(f);
  const auto& T = w.T;
  const auto at = [n](int A, int B) { return A * n + B; };

  // partial integrability: no theta^a ^ theta^b component in d theta0
  double worst20 = 0;
  int wa = 0, wb = 0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const double v = 2 * std::abs(T[0][at(w.up(a), w.up(b))].value());
      if (v > worst20) {
        worst20 = v;
        wa = a;
        wb = b;
      }
    }
  if (strict && worst20 > 1e-6)
    throw StructureError("not partially integrable: d theta0 has a theta^" + std::to_string(wa + 1) + " ^ theta^" +
                         std::to_string(wb + 1) + " coefficient of size " + std::to_string(worst20));

  for (int A = 0; A < n; ++A)
    for (int B = 0; B < n; ++B) {
      cplx expected = 0;
      if (A >= 1 && A <= m && B == A + m) expected = cplx(0, 0.5);
      if (B >= 1 && B <= m && A == B + m) expected = cplx(0, -0.5);
      w.adapted_residual = std::max(w.adapted_residual, 2 * std::abs(T[0][at(A, B)].value() - expected));
    }

  CJet<K - 1> zero(0.0);
  zero.set_dim(f.D);
  w.gamma.assign(m * m * n, zero);
  for (int b = 0; b < m; ++b)
    for (int a = 0; a < m; ++a) {
      w.gamma[(b * m + a) * n + 0] = T[w.up(a)][at(w.up(b), 0)] * 2.0;
      for (int c = 0; c < m; ++c) w.gamma[(b * m + a) * n + w.dn(c)] = T[w.up(a)][at(w.up(b), w.dn(c))] * 2.0;
    }
  for (int b = 0; b < m; ++b)
    for (int a = 0; a < m; ++a)
      for (int c = 0; c < m; ++c) w.gamma[(b * m + a) * n + w.up(c)] = -conj(w.G(a, b, w.dn(c)));

  w.torsion.assign(m * m, zero);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) w.torsion[a * m + b] = conj(T[w.up(a)][at(0, w.dn(b))]) * 2.0;
  w.nijenhuis.assign(m * m * m, zero);
  for (int b = 0; b < m; ++b)
    for (int c = 0; c < m; ++c)
      for (int a = 0; a < m; ++a) w.nijenhuis[(b * m + c) * m + a] = conj(T[w.up(a)][at(w.dn(b), w.dn(c))]) * -2.0;

  // reassemble d theta^a = theta^b ^ Gamma_b^a + A^a_{b-bar} theta0 ^ theta-bar^b
  //                        - (1/2) N_{b-bar c-bar}^a theta-bar^b ^ theta-bar^c
  double consistency = 0;
  int ca = 0, cb = 0, cc = 0;
  for (int a = 0; a < m; ++a) {
    std::vector<cplx> pred(n * n, 0.0);
    for (int b = 0; b < m; ++b)
      for (int C = 0; C < n; ++C) {
        const cplx g = w.G(b, a, C).value();
        pred[at(w.up(b), C)] += 0.5 * g;
        pred[at(C, w.up(b))] -= 0.5 * g;
      }
    for (int b = 0; b < m; ++b) {
      const cplx abar = std::conj(w.Ators(a, b).value());
      pred[at(0, w.dn(b))] += 0.5 * abar;
      pred[at(w.dn(b), 0)] -= 0.5 * abar;
      for (int c = 0; c < m; ++c) {
        const cplx nbar = std::conj(w.N(b, c, a).value());
        pred[at(w.dn(b), w.dn(c))] -= 0.25 * nbar;
        pred[at(w.dn(c), w.dn(b))] += 0.25 * nbar;
      }
    }
    for (int A = 0; A < n; ++A)
      for (int B = 0; B < n; ++B) {
        const double r = 2 * std::abs(pred[at(A, B)] - T[w.up(a)][at(A, B)].value());
        w.roundtrip_residual = std::max(w.roundtrip_residual, r);
        const bool both_holomorphic = A >= 1 && A <= m && B >= 1 && B <= m;
        if (both_holomorphic && r > consistency) {
          consistency = r;
          ca = a;
          cb = A - 1;
          cc = B - 1;
        }
      }
  }
  if (strict && consistency > 1e-6)
    throw StructureError("structure equations inconsistent: the theta^" + std::to_string(cb + 1) + " ^ theta^" +
                         std::to_string(cc + 1) + " coefficient of d theta^" + std::to_string(ca + 1) +
                         " cannot be absorbed by the connection (mismatch " + std::to_string(consistency) + ")");

  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      w.hermitian_residual =
          std::max(w.hermitian_residual, std::abs(w.G(b, a, 0).value() + std::conj(w.G(a, b, 0).value())));
      w.symmetry_residual =
          std::max(w.symmetry_residual, std::abs(w.Ators(a, b).value() - w.Ators(b, a).value()));
      for (int c = 0; c < m; ++c) {
        const cplx cyc = w.N(a, b, c).value() + w.N(b, c, a).value() + w.N(c, a, b).value();
        w.symmetry_residual = std::max(w.symmetry_residual, std::abs(cyc));
      }
    }
  return w;
}

// ---- curvature ----------------------------------------------------------------

template <int K>
struct WebsterCurvature {
  static_assert(K >= 2, "Webster curvature needs second derivatives of the coframe");
  int m = 0, n = 0;
  std::vector<CJet<K - 2>> R;        // [(A*n + B)*m*m + d*m + g] = R(e_A, e_B)_d^g
  std::vector<CJet<K - 2>> ricci;    // [g*m + d] = Ric_g^d
  CJet<K - 2> scalar;
  std::vector<CJet<K - 2>> nn;       // [a*m + b] = N_{a d c} conj(N_{b d c})
  CJet<K - 2> nn_trace;              // |N|^2
  CJet<K - 2> lambda;                // (Sc - |N|^2) / m
  std::vector<cplx> schouten;        // [a*m + b]
  cplx schouten_trace;
  std::vector<cplx> chern_moser;     // [((a*m + g)*m + b)*m + d] = S_a^g_b^d

  const CJet<K - 2>& r(int A, int B, int d, int g) const { return R[(A * n + B) * m * m + d * m + g]; }
};

// Trace-free part (with respect to h = identity) of X_{a g-bar b d-bar} after
// symmetrizing in (a, b) and (g, d); components indexed ((a*m + g)*m + b)*m + d.
inline std::vector<cplx> hermitian_sym_tracefree(const std::vector<cplx>& raw, int m) {
  const int m4 = m * m * m * m;
  auto idx = [m](int a, int g, int b, int d) { return ((a * m + g) * m + b) * m + d; };
  std::vector<cplx> X(m4);
  for (int a = 0; a < m; ++a)
    for (int g = 0; g < m; ++g)
      for (int b = 0; b < m; ++b)
        for (int d = 0; d < m; ++d)
          X[idx(a, g, b, d)] =
              0.25 * (raw[idx(a, g, b, d)] + raw[idx(b, g, a, d)] + raw[idx(a, d, b, g)] + raw[idx(b, d, a, g)]);
  std::vector<cplx> tr(m * m, 0.0);
  cplx tau = 0;
  for (int a = 0; a < m; ++a)
    for (int g = 0; g < m; ++g) {
      for (int e = 0; e < m; ++e) tr[a * m + g] += X[idx(a, g, e, e)];
      if (a == g) tau += tr[a * m + g];
    }
  auto delta = [](int i, int j) { return i == j ? 1.0 : 0.0; };
  std::vector<cplx> out(m4);
  for (int a = 0; a < m; ++a)
    for (int g = 0; g < m; ++g)
      for (int b = 0; b < m; ++b)
        for (int d = 0; d < m; ++d) {
          const cplx sym_t = 0.25 * (tr[a * m + g] * delta(b, d) + tr[b * m + g] * delta(a, d) +
                                     tr[a * m + d] * delta(b, g) + tr[b * m + d] * delta(a, g));
          const double sym_dd = 0.5 * (delta(a, g) * delta(b, d) + delta(a, d) * delta(b, g));
          out[idx(a, g, b, d)] =
              X[idx(a, g, b, d)] - (4.0 / (m + 2.0)) * sym_t + (2.0 / ((m + 1.0) * (m + 2.0))) * tau * sym_dd;
        }
  return out;
}

template <int K>
WebsterCurvature<K> webster_curvature(const WebsterSolve<K>& w) {
  WebsterCurvature<K> c;
  const int m = w.m, n = w.n;
  c.m = m;
  c.n = n;
  CJet<K - 2> zero(0.0);
  zero.set_dim(w.frame.D);
  c.R.assign(n * n * m * m, zero);
  // derivatives of the connection coefficients along every frame direction
  std::vector<CJet<K - 2>> dG(m * m * n * n);  // [((d*m+g)*n + B)*n + A] = e_A(Gamma_d^g(e_B))
  for (int d = 0; d < m; ++d)
    for (int g = 0; g < m; ++g)
      for (int B = 0; B < n; ++B)
        for (int A = 0; A < n; ++A) dG[((d * m + g) * n + B) * n + A] = w.d(w.G(d, g, B), A);
  for (int A = 0; A < n; ++A)
    for (int B = 0; B < n; ++B)
      for (int d = 0; d < m; ++d)
        for (int g = 0; g < m; ++g) {
          CJet<K - 2> v = dG[((d * m + g) * n + B) * n + A] - dG[((d * m + g) * n + A) * n + B];
          for (int C = 0; C < n; ++C)
            v += truncate<K - 2>(w.T[C][A * n + B]) * truncate<K - 2>(w.G(d, g, C)) * 2.0;
          for (int e = 0; e < m; ++e)
            v += truncate<K - 2>(w.G(d, e, B)) * truncate<K - 2>(w.G(e, g, A)) -
                 truncate<K - 2>(w.G(d, e, A)) * truncate<K - 2>(w.G(e, g, B));
          c.R[(A * n + B) * m * m + d * m + g] = v;
        }
  c.ricci.assign(m * m, zero);
  for (int g = 0; g < m; ++g)
    for (int d = 0; d < m; ++d)
      for (int a = 0; a < m; ++a) c.ricci[g * m + d] += c.r(w.up(a), w.dn(a), g, d);
  c.scalar = zero;
  for (int g = 0; g < m; ++g) c.scalar += c.ricci[g * m + g];
  c.nn.assign(m * m, zero);
  c.nn_trace = zero;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int d = 0; d < m; ++d)
        for (int e = 0; e < m; ++e)
          c.nn[a * m + b] += truncate<K - 2>(w.N(a, d, e)) * conj(truncate<K - 2>(w.N(b, d, e)));
  for (int a = 0; a < m; ++a) c.nn_trace += c.nn[a * m + a];
  c.lambda = (c.scalar - c.nn_trace) * (1.0 / m);

  const cplx sc = c.scalar.value();
  c.schouten.assign(m * m, 0.0);
  c.schouten_trace = 0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      c.schouten[a * m + b] = (c.ricci[a * m + b].value() - (a == b ? sc / (2.0 * m + 2.0) : 0.0)) / (m + 2.0);
      if (a == b) c.schouten_trace += c.schouten[a * m + b];
    }

  // Chern–Moser: trace-free part of the (ab)(gd)-symmetrized R(e_a, conj e_g)_b^d
  const int m4 = m * m * m * m;
  std::vector<cplx> raw(m4);
  for (int a = 0; a < m; ++a)
    for (int g = 0; g < m; ++g)
      for (int b = 0; b < m; ++b)
        for (int d = 0; d < m; ++d) raw[((a * m + g) * m + b) * m + d] = c.r(w.up(a), w.dn(g), b, d).value();
  c.chern_moser = hermitian_sym_tracefree(raw, m);
  return c;
}

// Covariant derivative along e_A of a tensor with r lower holomorphic indices
// (components indexed in base m, first index most significant).
template <int K, int J>
std::vector<CJet<J - 1>> covariant_lower(const WebsterSolve<K>& w, const std::vector<CJet<J>>& comps, int rank,
                                         int A) {
  const int m = w.m;
  std::vector<CJet<J - 1>> out(comps.size());
  std::vector<int> digits(rank);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    int rem = static_cast<int>(i);
    for (int s = rank - 1; s >= 0; --s) {
      digits[s] = rem % m;
      rem /= m;
    }
    CJet<J - 1> v = w.d(comps[i], A);
    for (int s = 0; s < rank; ++s) {
      int stride = 1;
      for (int t = rank - 1; t > s; --t) stride *= m;
      const int base = static_cast<int>(i) - digits[s] * stride;
      for (int d = 0; d < m; ++d)
        v -= w.template conn<J - 1>(w.up(digits[s]), w.up(d), A) * truncate<J - 1>(comps[base + d * stride]);
    }
    out[i] = v;
  }
  return out;
}

// Covariant derivative of a tensor with `rank` lower indices over the full base frame
// range 0..n-1 (Reeb, holomorphic, antiholomorphic), first index most significant.
// Result: [A * n^rank + i] = (nabla_{e_A} T)_i.
template <int K, int J>
std::vector<CJet<J - 1>> covariant_full(const WebsterSolve<K>& w, const std::vector<CJet<J>>& comps, int rank) {
  const int n = w.n;
  const std::size_t size = comps.size();
  std::vector<CJet<J - 1>> out(n * size);
  std::vector<int> digits(rank);
  for (int A = 0; A < n; ++A)
    for (std::size_t i = 0; i < size; ++i) {
      int rem = static_cast<int>(i);
      for (int s = rank - 1; s >= 0; --s) {
        digits[s] = rem % n;
        rem /= n;
      }
      CJet<J - 1> v = w.d(comps[i], A);
      int stride = 1;
      for (int s = rank - 1; s >= 0; --s) {
        const int base = static_cast<int>(i) - digits[s] * stride;
        for (int C = 1; C < n; ++C)
          v -= w.template conn<J - 1>(digits[s], C, A) * truncate<J - 1>(comps[base + C * stride]);
        stride *= n;
      }
      out[A * size + i] = v;
    }
  return out;
}

// ---- CR–Einstein ------------------------------------------------------------------

struct CREinsteinResiduals {
  double torsion = 0;          // max |A_ab|
  double divergence = 0;       // max |sym_(ab) nabla^c N_{c a b}|
  double ricci = 0;            // max |Ric_a^b - N_adc N^bdc - lambda delta|
  double lambda = 0;           // (Sc - |N|^2)/m at the point
  double lambda_gradient = 0;  // max over frame directions |e_A lambda|
  double adapted = 0;          // d theta0 relation
  double structure = 0;        // structure-equation round trip

  double worst() const {
    return std::max({torsion, divergence, ricci, lambda_gradient, adapted, structure});
  }
};

template <int K>
CREinsteinResiduals cr_einstein_check(const WebsterSolve<K>& w, const WebsterCurvature<K>& c) {
  static_assert(K >= 3, "the CR–Einstein check needs third derivatives of the coframe");
  CREinsteinResiduals r;
  const int m = w.m;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) r.torsion = std::max(r.torsion, std::abs(w.Ators(a, b).value()));
  // nabla_{conj e_c} N, summed over c = first index
  std::vector<cplx> div(m * m, 0.0);
  for (int cidx = 0; cidx < m; ++cidx) {
    const auto dn = covariant_lower<K, K - 1>(w, w.nijenhuis, 3, w.dn(cidx));
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) div[a * m + b] += dn[(cidx * m + a) * m + b].value();
  }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) r.divergence = std::max(r.divergence, std::abs(0.5 * (div[a * m + b] + div[b * m + a])));
  r.lambda = c.lambda.value().real();
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const cplx v = c.ricci[a * m + b].value() - c.nn[a * m + b].value() - (a == b ? c.lambda.value() : 0.0);
      r.ricci = std::max(r.ricci, std::abs(v));
    }
  for (int A = 0; A < w.n; ++A) r.lambda_gradient = std::max(r.lambda_gradient, std::abs(w.d(c.lambda, A).value()));
  r.adapted = w.adapted_residual;
  r.structure = w.roundtrip_residual;
  return r;
}

// ---- identities -------------------------------------------------------------------

// Second covariant derivative nabla^2 f(e_A, e_B) of a scalar field with order-3 jets.
template <int K>
std::vector<cplx> hessian_frame(const WebsterSolve<K>& w, const CJet<3>& f) {
  static_assert(K >= 2, "frame Hessian needs order-2 frame jets");
  const int n = w.n;
  std::vector<CJet<2>> df(n);
  for (int B = 0; B < n; ++B) df[B] = w.d(f, B);
  std::vector<cplx> h(n * n);
  for (int A = 0; A < n; ++A)
    for (int B = 0; B < n; ++B) {
      cplx v = w.d(df[B], A).value();
      for (int C = 0; C < n; ++C) v -= w.template conn<0>(B, C, A).value() * df[C].value();
      h[A * n + B] = v;
    }
  return h;
}

// Max violation of the three commutation relations for a scalar function.
template <int K>
double commutation_residual(const WebsterSolve<K>& w, const CJet<3>& f) {
  const int m = w.m, n = w.n;
  const auto h = hessian_frame<K>(w, f);
  std::vector<cplx> df(n);
  for (int A = 0; A < n; ++A) df[A] = w.d(f, A).value();
  double worst = 0;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      const int ua = w.up(a), ub = w.up(b), db = w.dn(b);
      const cplx mixed = h[ua * n + db] - h[db * n + ua] + (a == b ? cplx(0, 1) * df[0] : 0.0);
      cplx hol = h[ua * n + ub] - h[ub * n + ua];
      for (int g = 0; g < m; ++g) hol -= w.N(a, b, g).value() * df[w.dn(g)];
      worst = std::max({worst, std::abs(mixed), std::abs(hol)});
    }
    cplx reeb = h[w.up(a) * n + 0] - h[0 * n + w.up(a)];
    for (int b = 0; b < m; ++b) reeb -= w.Ators(a, b).value() * df[w.dn(b)];
    worst = std::max(worst, std::abs(reeb));
  }
  return worst;
}

// Residuals of the five first Bianchi identities, in order: curvature symmetry
// against N N-bar, R(e_a, e_0) against the torsion, R(e_b, e_c) against nabla N,
// nabla_0 N against nabla A, and the cyclic identity for nabla N.
template <int K>
std::array<double, 5> first_bianchi_residuals(const WebsterSolve<K>& w, const WebsterCurvature<K>& c) {
  static_assert(K >= 2, "Bianchi identities need order-2 frame jets");
  const int m = w.m;
  std::array<double, 5> res{};
  auto A = [&](int a, int b) { return w.Ators(a, b).value(); };
  auto N = [&](int a, int b, int g) { return w.N(a, b, g).value(); };
  // nabla N and nabla A along every direction
  std::vector<std::vector<CJet<K - 2>>> dN(w.n), dA(w.n);
  for (int D = 0; D < w.n; ++D) {
    dN[D] = covariant_lower<K, K - 1>(w, w.nijenhuis, 3, D);
    dA[D] = covariant_lower<K, K - 1>(w, w.torsion, 2, D);
  }
  auto dNv = [&](int D, int b, int g, int a) { return dN[D][(b * m + g) * m + a].value(); };
  auto dAv = [&](int D, int a, int b) { return dA[D][a * m + b].value(); };
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int g = 0; g < m; ++g)
        for (int d = 0; d < m; ++d) {
          // R(e_b, conj e_g)_a^d - R(e_b, conj e_d)_a^g = - N_{e b a} conj(N_{g d e})
          cplx lhs = c.r(w.up(b), w.dn(g), a, d).value() - c.r(w.up(b), w.dn(d), a, g).value();
          for (int e = 0; e < m; ++e) lhs += N(e, b, a) * std::conj(N(g, d, e));
          res[0] = std::max(res[0], std::abs(lhs));
        }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int g = 0; g < m; ++g) {
        // R(e_a, e_0)_b^g = nabla_{conj e_g} A_ab + conj(A_dg) N_dab
        cplx v = c.r(w.up(a), 0, b, g).value() - dAv(w.dn(g), a, b);
        for (int d = 0; d < m; ++d) v -= std::conj(A(d, g)) * N(d, a, b);
        res[1] = std::max(res[1], std::abs(v));
      }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int g = 0; g < m; ++g)
        for (int d = 0; d < m; ++d) {
          // R(e_b, e_g)_a^d = nabla_{conj e_d} N_bga - i (A_ab delta_dg - A_ag delta_db)
          const cplx corr = cplx(0, 1) * (A(a, b) * (d == g ? 1.0 : 0.0) - A(a, g) * (d == b ? 1.0 : 0.0));
          const cplx v = c.r(w.up(b), w.up(g), a, d).value() - dNv(w.dn(d), b, g, a) + corr;
          res[2] = std::max(res[2], std::abs(v));
        }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int g = 0; g < m; ++g) {
        // nabla_0 N_bga = -(nabla_b A_ga - nabla_g A_ba)
        const cplx v = dNv(0, b, g, a) + dAv(w.up(b), g, a) - dAv(w.up(g), b, a);
        res[3] = std::max(res[3], std::abs(v));
        for (int d = 0; d < m; ++d) {
          // cyclic sum over (d, b, g) of nabla_d N_bga
          const cplx cyc = dNv(w.up(d), b, g, a) + dNv(w.up(b), g, d, a) + dNv(w.up(g), d, b, a);
          res[4] = std::max(res[4], std::abs(cyc));
        }
      }
  return res;
}

// ---- convenience at a base point ------------------------------------------------

struct WebsterPack {
  int m = 0;
  std::vector<double> reeb;
  std::vector<cplx> torsion;       // A_ab
  std::vector<cplx> nijenhuis;     // N_bca
  std::vector<cplx> ricci;         // Ric_a^b
  cplx scalar;
  double lambda = 0;
  std::vector<cplx> schouten;
  cplx schouten_trace;
  std::vector<cplx> chern_moser;
  double max_connection = 0;
  double max_curvature = 0;
  double adapted_residual = 0, roundtrip_residual = 0, hermitian_residual = 0, symmetry_residual = 0;
};

inline WebsterPack webster_pack(const CRBase& b, const std::vector<double>& pt) {
  const auto f = base_frame_at<3>(b, pt);
  const auto w = webster_solve<3>(f);
  const auto c = webster_curvature<3>(w);
  WebsterPack p;
  p.m = b.m;
  p.reeb.resize(f.n);
  for (int a = 0; a < f.n; ++a) p.reeb[a] = f.vectors[a * f.n + 0].value().real();
  for (const auto& x : w.torsion) p.torsion.push_back(x.value());
  for (const auto& x : w.nijenhuis) p.nijenhuis.push_back(x.value());
  for (const auto& x : c.ricci) p.ricci.push_back(x.value());
  p.scalar = c.scalar.value();
  p.lambda = c.lambda.value().real();
  p.schouten = c.schouten;
  p.schouten_trace = c.schouten_trace;
  p.chern_moser = c.chern_moser;
  for (const auto& x : w.gamma) p.max_connection = std::max(p.max_connection, std::abs(x.value()));
  for (const auto& x : c.R) p.max_curvature = std::max(p.max_curvature, std::abs(x.value()));
  p.adapted_residual = w.adapted_residual;
  p.roundtrip_residual = w.roundtrip_residual;
  p.hermitian_residual = w.hermitian_residual;
  p.symmetry_residual = w.symmetry_residual;
  return p;
}

// Defects of the coframe itself are reported through the adapted and structure residuals.
inline CREinsteinResiduals cr_einstein_check(const CRBase& b, const std::vector<double>& pt) {
  const auto w = webster_solve<3>(base_frame_at<3>(b, pt), false);
  return cr_einstein_check<3>(w, webster_curvature<3>(w));
}

inline double max_abs(const std::vector<cplx>& v) {
  double r = 0;
  for (const auto& z : v) r = std::max(r, std::abs(z));
  return r;
}

// ---- Kähler base checks ---------------------------------------------------------

// d theta0 = (1/2) omega on coordinate vectors, with omega(X, Y) = h(JX, Y) for the
// base metric h and J dz = i dz; legs along t must vanish.
inline double kahler_form_residual(const CRBase& b, const std::vector<double>& pt) {
  const int m = b.m, n = b.dim();
  const auto x = base_coordinate_jets<1>(pt);
  FormJets<1> t0(n);
  for (int a = 0; a < n; ++a) t0[a] = evaluate<1>(b.theta0[a], x);
  const PointTensor dt = exterior_derivative_at<1>(t0, n);
  const std::vector<double> xy(pt.begin() + 1, pt.end());
  const auto g = kahler_base_metric<0>(b, xy);
  const int d = 2 * m;
  // J on coordinate vectors: J d/dx_a = d/dy_a, J d/dy_a = -d/dx_a
  auto J = [](int i) { return (i % 2 == 0) ? std::pair<int, double>(i + 1, 1.0) : std::pair<int, double>(i - 1, -1.0); };
  double worst = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const auto [ji, s] = J(i);
      const cplx omega = s * g[ji * d + j].value();
      worst = std::max(worst, std::abs(dt(1 + i, 1 + j) - 0.5 * omega));
    }
  for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(dt(0, i)));
  return worst;
}

struct KahlerEinsteinCheck {
  double constant = 0;  // Sc / (2m) of the base metric
  double residual = 0;  // max |Ric - constant * h| relative to max |h|
};

inline KahlerEinsteinCheck kahler_einstein_check(const CRBase& b, const std::vector<double>& xy) {
  const int d = 2 * b.m;
  const auto g = kahler_base_metric<2>(b, xy);
  const CurvaturePack cp = curvature_from_jets<2>(g, d);
  KahlerEinsteinCheck out;
  out.constant = cp.scalar.real() / d;
  double scale = 0;
  for (int i = 0; i < d * d; ++i) scale = std::max(scale, std::abs(cp.g.c[i]));
  for (int i = 0; i < d * d; ++i)
    out.residual = std::max(out.residual, std::abs(cp.ricci.c[i] - out.constant * cp.g.c[i]) / scale);
  return out;
}

// For a lift built with a declared Einstein constant, confirm the base metric is
// Einstein with that constant at the given chart points.
inline void verify_kahler_einstein(const CRBase& b, const std::vector<std::vector<double>>& points, double tol = 1e-7) {
  if (!b.einstein_constant) return;
  for (const auto& p : points) {
    const std::vector<double> xy(p.begin() + 1, p.end());
    const auto chk = kahler_einstein_check(b, xy);
    if (chk.residual > tol || std::abs(chk.constant - *b.einstein_constant) > tol * std::max(1.0, std::abs(chk.constant)))
      throw std::invalid_argument("base metric is not Einstein with constant " + std::to_string(*b.einstein_constant) +
                                  ": Ricci/metric ratio " + std::to_string(chk.constant) + ", residual " +
                                  std::to_string(chk.residual));
  }
}

}  // namespace nullcong

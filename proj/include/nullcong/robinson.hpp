#pragma once
// Spacetime metrics over a CR base. Chart (phi, base coordinates); coframe order
// kappa, theta^a, conj theta^a, lambda with dual frame ell, e_a, conj e_a, k = d/dphi.
// g = kappa (x) lambda + lambda (x) kappa + sum_a (theta^a (x) conj theta^a + c.c.),
// kappa = 2 theta0, lambda = dphi + lambda0 theta0 + lambda_a theta^a + c.c.

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nullcong/optical.hpp"
#include "nullcong/webster.hpp"

namespace nullcong {

struct EinsteinParams {
  int m = 2;
  double Lambda = 0;   // Einstein constant of the rescaled metric
  double uLambda = 0;  // CR–Einstein constant of the base
  double c = 0;        // free constant of the lambda0 family
};

inline std::vector<double> aj_coefficients(int m) {
  if (m < 1) throw std::invalid_argument("aj_coefficients: m must be at least 1");
  std::vector<double> a(m + 1);
  a[0] = 1.0;
  for (int j = 1; j <= m; ++j) a[j] = (2.0 * m - 2 * j + 4) / (2.0 * m - 2 * j + 1) * a[j - 1];
  return a;
}

// Coefficients of lambda0 as a polynomial in cos^2(phi), without the c-term:
// [j] multiplies cos^{2j}, j = 0..m+1.
inline std::vector<double> lambda0_cos_coefficients(const EinsteinParams& p) {
  const auto a = aj_coefficients(p.m);
  const double lead = p.uLambda / (2.0 * p.m + 2);
  const double amp = p.Lambda / (2.0 * p.m + 1) - lead;
  std::vector<double> b(p.m + 2);
  for (int j = 0; j <= p.m; ++j) b[j] = amp * a[j];
  b[0] += lead;
  b[p.m + 1] = -2.0 * amp * a[p.m];
  return b;
}

template <class J>
J lambda0_of(const EinsteinParams& p, const J& phi) {
  using std::cos;
  using std::sin;
  const auto b = lambda0_cos_coefficients(p);
  const J c = cos(phi);
  const J x = c * c;
  J acc = x * 0.0 + b[p.m + 1];
  for (int j = p.m; j >= 0; --j) acc = acc * x + b[j];
  J odd = c;  // cos^{2m+1}
  for (int j = 0; j < p.m; ++j) odd = odd * x;
  return acc + odd * sin(phi) * p.c;
}

inline Jet<double, 3> lambda0_jet(const EinsteinParams& p, double phi) {
  return lambda0_of(p, Jet<double, 3>::coordinate(1, 0, phi));
}

struct Lambda0OdeResiduals {
  double r1 = 0, r2 = 0, r3 = 0, r4 = 0, rb = 0;
  double worst_ode() const { return std::max({r1, r2, r3, r4}); }
};

// Residuals of the four lambda0 ODEs, each divided by max(1, largest term magnitude),
// and the relation between the cos^{2m+2} coefficient and a_m.
inline Lambda0OdeResiduals lambda0_ode_residuals(const EinsteinParams& p, double phi) {
  const auto l = lambda0_jet(p, phi);
  const double v = l.value(), d1 = l.grad(0), d2 = l.hess(0, 0);
  const double m = p.m, L = p.Lambda, uL = p.uLambda;
  const double t = std::tan(phi), s2 = 1.0 / (std::cos(phi) * std::cos(phi));
  auto rel = [](std::initializer_list<double> terms) {
    double sum = 0, scale = 1;
    for (double x : terms) {
      sum += x;
      scale = std::max(scale, std::abs(x));
    }
    return std::abs(sum) / scale;
  };
  Lambda0OdeResiduals r;
  r.r1 = rel({d2, 2 * (2 * m + 1) * t * d1, (-4 * m * (m + 1) + 2 * (m + 1) * (2 * m + 1) * s2) * v,
              -2 * (m + 1) * L * s2, 2 * m * uL});
  r.r2 = rel({d2, (2 * m + 1) * t * d1, (2 * (m + 1) + (2 * m + 1) * s2) * v, -L * s2, -uL});
  r.r3 = rel({t * d1, -(2 * m + 2 - (2 * m + 1) * s2) * v, -L * s2, uL});
  r.r4 = rel({d2, (4 * (m + 1) * (m + 1) - 2 * m * (2 * m + 1) * s2) * v, 2 * m * L * s2, -2 * (m + 1) * uL});
  const auto b = lambda0_cos_coefficients(p);
  const auto a = aj_coefficients(p.m);
  r.rb = std::abs(b[p.m + 1] + 2 * (L / (2 * m + 1) - uL / (2 * m + 2)) * a[p.m]);
  return r;
}

// ---- Taub–NUT chart ----------------------------------------------------------------

struct TaubNutPoint {
  double phi = 0, F = 0;
  double F_ode_residual = 0;  // relative residual of the F equation multiplied by r^2
  double M = 0;               // expected integration constant
  double M_extracted = 0;     // G F / r minus the particular antiderivative
  double roundtrip = 0;       // |uLambda tan(phi) - r|
};

inline TaubNutPoint taubnut_map(const EinsteinParams& p, double r) {
  if (p.uLambda == 0.0) throw std::invalid_argument("taubnut_map: the base constant must be non-zero");
  const double uL = p.uLambda, L = p.Lambda;
  const int m = p.m;
  TaubNutPoint out;
  out.phi = std::atan(r / uL);
  out.roundtrip = std::abs(uL * std::tan(out.phi) - r);
  using RJ = Jet<double, 3>;
  const RJ R = RJ::coordinate(1, 0, r);
  const RJ phi = atan(R * (1.0 / uL));
  const RJ q = R * R + uL * uL;
  const RJ F = q * lambda0_of(p, phi) * (-1.0 / (uL * uL));
  RJ G = q * 0.0 + 1.0;
  for (int j = 0; j < m; ++j) G = G * q;
  out.F = F.value();
  const double g = G.value(), gp = G.grad(0), f = F.value(), fp = F.grad(0);
  const double rhs = g * uL - g * q.value() * L / (uL * uL);
  const double terms[4] = {r * gp * f, r * g * fp, -g * f, -rhs};
  double sum = 0, scale = 1;
  for (double x : terms) {
    sum += x;
    scale = std::max(scale, std::abs(x));
  }
  out.F_ode_residual = std::abs(sum) / scale;
  out.M = -std::pow(uL, 2 * m - 1) * p.c;

  // particular antiderivative of G uLambda / r^2 - G (r^2 + uLambda^2) Lambda / (uLambda^2 r^2)
  const double re = std::abs(r) > 1e-3 ? r : uL;
  auto binom = [](int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double b = 1;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
  };
  double P = 0;
  for (int j = 0; j <= m + 1; ++j) {
    const double coef = binom(m, j) * std::pow(uL, 2 * m - 2 * j + 1) -
                        L / (uL * uL) * (binom(m, j - 1) + binom(m, j)) * std::pow(uL, 2 * m - 2 * j + 2);
    P += coef * std::pow(re, 2 * j - 1) / (2 * j - 1);
  }
  const double qe = re * re + uL * uL;
  const double Fe = -qe / (uL * uL) * lambda0_of(p, std::atan(re / uL));
  out.M_extracted = std::pow(qe, m) * Fe / re - P;
  return out;
}

// ---- spacetime models ---------------------------------------------------------------

// lambda0 and lambda_1..lambda_m from order-3 jets of the chart coordinates (phi first).
using LambdaField = std::function<std::vector<CJet<3>>(const std::vector<CJet<3>>&)>;

inline LambdaField einstein_lambda(const EinsteinParams& p) {
  return [p](const std::vector<CJet<3>>& x) {
    const int D = static_cast<int>(x.size());
    CJet<3> z(0.0);
    z.set_dim(D);
    std::vector<CJet<3>> out(p.m + 1, z);
    out[0] = to_complex(lambda0_of(p, real(x[0])));
    out[0].set_dim(D);
    return out;
  };
}

// Expressions over the chart variables ("phi" followed by the base coordinates).
struct GeneralLambda {
  ExprPtr lambda0;               // real
  std::vector<ExprPtr> lambda_a;  // m complex fields
};

inline LambdaField general_lambda_field(const GeneralLambda& gl) {
  return [gl](const std::vector<CJet<3>>& x) {
    const int D = static_cast<int>(x.size());
    std::vector<CJet<3>> out;
    out.push_back(to_complex(real(evaluate<3>(gl.lambda0, x))));
    for (const auto& e : gl.lambda_a) out.push_back(evaluate<3>(e, x));
    for (auto& v : out) v.set_dim(std::max(v.dim(), D));
    return out;
  };
}

struct SpacetimeModel {
  CRBase base;
  int m = 0, D = 0;
  LambdaField lambda;
  std::optional<EinsteinParams> params;
  MetricField g, ghat;
  std::vector<std::string> coords;  // phi, base coordinates
};

template <int K>
struct SpacetimeFrame {
  int m = 0, n = 0, D = 0;
  BaseFrameJets<K> base;
  std::vector<CJet<K>> lam;       // lambda0, lambda_1..lambda_m
  std::vector<FormJets<K>> rows;  // kappa, theta^a, conj theta^a, lambda
  Mat<CJet<K>> metric;            // g_ab
  Frame frame;                    // point values of the coframe and its dual frame
  int L() const { return D - 1; }
  int up(int a) const { return 1 + a; }
  int dn(int a) const { return 1 + m + a; }
};

template <int K>
SpacetimeFrame<K> spacetime_frame(const SpacetimeModel& md, const std::vector<double>& pt) {
  const int D = md.D, m = md.m, n = 2 * m + 1;
  if (static_cast<int>(pt.size()) != D) throw std::invalid_argument("spacetime_frame: point dimension mismatch");
  SpacetimeFrame<K> f;
  f.m = m;
  f.n = n;
  f.D = D;
  std::vector<CJet<3>> x3;
  for (int i = 0; i < D; ++i) x3.push_back(to_complex(Jet<double, 3>::coordinate(D, i, pt[i])));
  const auto lam3 = md.lambda(x3);
  if (static_cast<int>(lam3.size()) != m + 1) throw std::invalid_argument("lambda field must return m + 1 components");
  f.lam = truncate_all<K>(lam3);
  const std::vector<CJet<3>> xb3(x3.begin() + 1, x3.end());
  f.base = base_frame<K>(md.base, truncate_all<K>(xb3), 1);
  CJet<K> zero(0.0);
  zero.set_dim(D);
  f.rows.assign(D, FormJets<K>(D, zero));
  const auto& br = f.base.rows;  // theta0, theta^a, conj theta^a over the base chart
  for (int c = 0; c < n; ++c) {
    f.rows[0][1 + c] = br[0][c] * 2.0;
    for (int a = 0; a < 2 * m; ++a) f.rows[1 + a][1 + c] = br[1 + a][c];
    CJet<K> l = f.lam[0] * br[0][c];
    for (int a = 0; a < m; ++a) l += f.lam[1 + a] * br[1 + a][c] + conj(f.lam[1 + a]) * br[1 + m + a][c];
    f.rows[D - 1][1 + c] = l;
  }
  f.rows[D - 1][0] = zero + 1.0;
  f.metric.assign(D * D, zero);
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) {
      CJet<K> v = f.rows[0][a] * f.rows[D - 1][b] + f.rows[D - 1][a] * f.rows[0][b];
      for (int s = 0; s < m; ++s) v += f.rows[1 + s][a] * f.rows[1 + m + s][b] + f.rows[1 + m + s][a] * f.rows[1 + s][b];
      f.metric[a * D + b] = to_complex(real(v));
    }
  std::vector<cplx> cof(D * D);
  for (int I = 0; I < D; ++I)
    for (int a = 0; a < D; ++a) cof[I * D + a] = f.rows[I][a].value();
  f.frame = Frame::from_coframe(cof, D);
  return f;
}

template <int K>
Mat<CJet<K>> rescaled_metric(const SpacetimeFrame<K>& f, double phi) {
  const CJet<K> s = to_complex(sec(Jet<double, K>::coordinate(f.D, 0, phi)));
  Mat<CJet<K>> r = f.metric;
  for (auto& x : r) x = x * s * s;
  return r;
}

inline SpacetimeModel assemble_general(const CRBase& base, LambdaField lam) {
  SpacetimeModel md;
  md.base = base;
  md.m = base.m;
  md.D = base.dim() + 1;
  md.lambda = std::move(lam);
  md.coords.push_back("phi");
  for (const auto& c : base.coords) md.coords.push_back(c);
  const int D = md.D;
  auto copy = std::make_shared<SpacetimeModel>(md);
  md.g.dim = md.ghat.dim = D;
  md.g.plus = md.ghat.plus = D - 1;
  md.g.minus = md.ghat.minus = 1;
  md.g.eval = [copy](const std::vector<double>& pt) { return spacetime_frame<3>(*copy, pt).metric; };
  md.ghat.eval = [copy](const std::vector<double>& pt) {
    return rescaled_metric<3>(spacetime_frame<3>(*copy, pt), pt[0]);
  };
  return md;
}

inline SpacetimeModel assemble_general(const CRBase& base, const GeneralLambda& gl) {
  if (static_cast<int>(gl.lambda_a.size()) != base.m)
    throw std::invalid_argument("assemble_general: expected one lambda_a per holomorphic direction");
  return assemble_general(base, general_lambda_field(gl));
}

// CR–Einstein constant of a base, checked at a few fixed points.
inline double base_einstein_constant(const CRBase& b) {
  const int n = b.dim();
  std::vector<double> lams;
  for (int s = 0; s < 3; ++s) {
    std::vector<double> pt(n);
    for (int i = 0; i < n; ++i) pt[i] = 0.1 * (s + 1) * ((i + s) % 2 ? -1.0 : 1.0) + 0.05 * i;
    const auto w = webster_solve<3>(base_frame_at<3>(b, pt), true);
    const auto c = webster_curvature<3>(w);
    const auto r = cr_einstein_check<3>(w, c);
    if (r.worst() > 1e-6) {
      std::ostringstream os;
      os << "base '" << b.name << "' is not CR–Einstein (residual " << r.worst() << ")";
      throw std::invalid_argument(os.str());
    }
    lams.push_back(r.lambda);
  }
  const auto [lo, hi] = std::minmax_element(lams.begin(), lams.end());
  if (*hi - *lo > 1e-7) throw std::invalid_argument("base CR–Einstein constant is not constant");
  return lams[0];
}

inline SpacetimeModel assemble_einstein(const CRBase& base, const EinsteinParams& p, bool verify_base = true) {
  if (p.m != base.m) {
    std::ostringstream os;
    os << "assemble_einstein: params m = " << p.m << " but base m = " << base.m;
    throw std::invalid_argument(os.str());
  }
  if (verify_base) {
    const double ul = base_einstein_constant(base);
    if (std::abs(ul - p.uLambda) > 1e-7) {
      std::ostringstream os;
      os.precision(17);
      os << "assemble_einstein: base constant " << ul << " does not match parameter " << p.uLambda;
      throw std::invalid_argument(os.str());
    }
  }
  SpacetimeModel md = assemble_general(base, einstein_lambda(p));
  md.params = p;
  return md;
}

inline EinsteinParams fefferman_params(int m, double uLambda) {
  return EinsteinParams{m, (2.0 * m + 1) * uLambda / (2.0 * m + 2), uLambda, 0.0};
}

inline bool is_fefferman(const EinsteinParams& p) {
  return std::abs((2.0 * p.m + 2) * p.Lambda - (2.0 * p.m + 1) * p.uLambda) <= 1e-12 * std::max(1.0, std::abs(p.uLambda)) &&
         p.c == 0.0;
}

// ---- lambda structure: B, C, E -------------------------------------------------------

// Webster data of the base at a spacetime point together with the coefficients of
// d lambda. Base-frame tensors use the full index range 0..2m; index 0 is the Reeb
// direction and carries lambda0 for lambda itself.
struct LambdaStructure {
  int m = 0, n = 0;
  WebsterSolve<3> w;
  std::vector<CJet<3>> lam;  // lambda_I
  std::vector<CJet<2>> E;    // E_I = d_phi lambda_I / 2
  std::vector<CJet<2>> B;    // [I*n + J], zero when an index is 0
  std::vector<CJet<2>> C;    // [I], C_0 = 0
  std::vector<CJet<2>> A;    // [I*n + J], torsion with its conjugate block
  std::vector<CJet<2>> N;    // [(I*n + J)*n + K], Nijenhuis with its conjugate block
  std::vector<CJet<2>> dlam;  // [A*n + I] = nabla_A lambda_I
};

inline LambdaStructure lambda_structure(const SpacetimeModel& md, const std::vector<double>& pt) {
  const auto f = spacetime_frame<3>(md, pt);
  LambdaStructure s;
  const int m = md.m, n = 2 * m + 1;
  s.m = m;
  s.n = n;
  s.w = webster_solve<3>(f.base, false);
  const auto& w = s.w;
  CJet<3> z3(0.0);
  z3.set_dim(md.D);
  CJet<2> z2 = truncate<2>(z3);
  s.lam.assign(n, z3);
  s.lam[0] = f.lam[0];
  for (int a = 0; a < m; ++a) {
    s.lam[1 + a] = f.lam[1 + a];
    s.lam[1 + m + a] = conj(f.lam[1 + a]);
  }
  s.dlam = covariant_full<3, 3>(w, s.lam, 1);
  s.E.resize(n);
  std::vector<CJet<2>> dot(n);
  for (int I = 0; I < n; ++I) {
    dot[I] = partial(s.lam[I], 0);
    s.E[I] = dot[I] * 0.5;
  }
  auto lam2 = truncate_all<2>(s.lam);
  auto DL = [&](int Adir, int I) { return s.dlam[Adir * n + I]; };
  const cplx iu(0, 1);
  s.B.assign(n * n, z2);
  s.A.assign(n * n, z2);
  s.N.assign(n * n * n, z2);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      s.A[(1 + a) * n + 1 + b] = truncate<2>(w.Ators(a, b));
      s.A[(1 + m + a) * n + 1 + m + b] = conj(truncate<2>(w.Ators(a, b)));
      for (int c = 0; c < m; ++c) {
        s.N[((1 + a) * n + 1 + b) * n + 1 + c] = truncate<2>(w.N(a, b, c));
        s.N[((1 + m + a) * n + 1 + m + b) * n + 1 + m + c] = conj(truncate<2>(w.N(a, b, c)));
      }
    }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const int ua = 1 + a, ub = 1 + b, da = 1 + m + a, db = 1 + m + b;
      CJet<2> bu = (DL(ua, ub) - DL(ub, ua)) * -0.5 + (lam2[ua] * dot[ub] - lam2[ub] * dot[ua]) * 0.5;
      for (int c = 0; c < m; ++c) bu += s.N[(ua * n + ub) * n + 1 + c] * lam2[1 + m + c] * 0.5;
      CJet<2> bm = (DL(ua, db) - DL(db, ua) - lam2[ua] * dot[db] + lam2[db] * dot[ua]) * -0.5;
      if (a == b) bm += lam2[0] * (-0.5 * iu);
      s.B[ua * n + ub] = bu;
      s.B[da * n + db] = conj(bu);
      s.B[ua * n + db] = bm;
    }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) s.B[(1 + m + a) * n + 1 + b] = s.B[(1 + b) * n + 1 + m + a] * -1.0;
  s.C.assign(n, z2);
  for (int a = 0; a < m; ++a) {
    const int ua = 1 + a;
    CJet<2> v = DL(ua, 0) - DL(0, ua) - lam2[ua] * dot[0] + lam2[0] * dot[ua];
    for (int b = 0; b < m; ++b) v -= s.A[ua * n + 1 + b] * lam2[1 + m + b];
    s.C[ua] = v * -0.5;
    s.C[1 + m + a] = conj(s.C[ua]);
  }
  return s;
}

struct BCECoefficients {
  int m = 0;
  std::vector<cplx> B_uu, B_ub;  // [a*m + b]
  std::vector<cplx> C, E;        // [a]
  cplx E0 = 0;
  double dlambda_residual = 0;   // frame expansion of the numerical d lambda against B, C, E
};

inline BCECoefficients bce_coefficients(const SpacetimeModel& md, const std::vector<double>& pt) {
  const auto s = lambda_structure(md, pt);
  const int m = md.m, n = s.n, D = md.D, L = D - 1;
  BCECoefficients r;
  r.m = m;
  r.B_uu.resize(m * m);
  r.B_ub.resize(m * m);
  r.C.resize(m);
  r.E.resize(m);
  for (int a = 0; a < m; ++a) {
    r.C[a] = s.C[1 + a].value();
    r.E[a] = s.E[1 + a].value();
    for (int b = 0; b < m; ++b) {
      r.B_uu[a * m + b] = s.B[(1 + a) * n + 1 + b].value();
      r.B_ub[a * m + b] = s.B[(1 + a) * n + 1 + m + b].value();
    }
  }
  r.E0 = s.E[0].value();

  // F(I, J) with d lambda(e_I, e_J) = (F_IJ - F_JI) / 2
  std::vector<cplx> F(D * D, 0.0);
  for (int I = 1; I < n; ++I) {
    for (int J = 1; J < n; ++J) {
      const bool iu = I <= m, ju = J <= m;
      if (iu == ju)
        F[I * D + J] = -s.B[I * n + J].value();
      else if (iu)
        F[I * D + J] = -2.0 * s.B[I * n + J].value();
    }
    F[I * D + 0] = -s.C[I].value();
    F[I * D + L] = -2.0 * s.E[I].value();
  }
  F[0 * D + L] = -s.E[0].value();
  const auto f = spacetime_frame<3>(md, pt);
  const auto dl = exterior_derivative_at<3>(f.rows[L], D);
  const auto dlf = frame_components(dl, f.frame);
  for (int I = 0; I < D; ++I)
    for (int J = 0; J < D; ++J)
      r.dlambda_residual =
          std::max(r.dlambda_residual, std::abs(dlf(I, J) - 0.5 * (F[I * D + J] - F[J * D + I])));
  return r;
}

// ---- Einstein checks ----------------------------------------------------------------

struct EinsteinResidual {
  double einstein = 0;  // max |Ric - Lambda ghat| / max |ghat|
  double radiation = 0;  // |(Ric - Lambda ghat)(ell, ell)| / sec^4 phi
  double weyl = 0;       // max |W(ghat)| over coordinate components
};

inline EinsteinResidual einstein_residual(const SpacetimeModel& md, const std::vector<double>& pt) {
  if (!md.params) throw std::invalid_argument("einstein_residual: model has no Einstein parameters");
  const double Lam = md.params->Lambda;
  const auto f = spacetime_frame<2>(md, pt);
  const auto gh = rescaled_metric<2>(f, pt[0]);
  const auto p = curvature_from_jets<2>(gh, md.D);
  EinsteinResidual r;
  const PointTensor diff = p.ricci - Lam * p.g;
  r.einstein = diff.max_abs() / p.g.max_abs();
  r.weyl = p.weyl.max_abs();
  const double s2 = 1.0 / (std::cos(pt[0]) * std::cos(pt[0]));
  cplx rl = 0;
  for (int a = 0; a < md.D; ++a)
    for (int b = 0; b < md.D; ++b) rl += diff(a, b) * f.frame.vec(0, a) * f.frame.vec(0, b);
  r.radiation = std::abs(rl) / (s2 * s2);
  return r;
}

// Residuals of the rescaled Schouten tensor against Lambda/(2(2m+1)) ghat, split into
// the families of the integration steps (frame components, indices raised with g).
struct SchoutenSteps {
  static constexpr int kCount = 8;
  static constexpr const char* kNames[kCount] = {"P^00", "P_a^0", "P_ab", "P_ab'(tf)",
                                                  "P_a^a", "P_0^0", "P_a0", "P_00"};
  std::array<double, kCount> residual{};
};

inline SchoutenSteps schouten_steps(const SpacetimeModel& md, const std::vector<double>& pt) {
  if (!md.params) throw std::invalid_argument("schouten_steps: model has no Einstein parameters");
  const int m = md.m, D = md.D, L = D - 1;
  const auto f = spacetime_frame<2>(md, pt);
  const auto p = curvature_from_jets<2>(rescaled_metric<2>(f, pt[0]), D);
  const auto Pf = frame_components(p.schouten, f.frame);
  const double s2 = 1.0 / (std::cos(pt[0]) * std::cos(pt[0]));
  const double k = md.params->Lambda / (2.0 * (2 * m + 1)) * s2;
  auto gf = [&](int I, int J) -> double {
    if ((I == 0 && J == L) || (I == L && J == 0)) return 1;
    if (I >= 1 && I < L && J >= 1 && J < L && std::abs(I - J) == m) return 1;
    return 0;
  };
  auto dP = [&](int I, int J) { return Pf(I, J) - k * gf(I, J); };
  SchoutenSteps s;
  auto& r = s.residual;
  r[0] = std::abs(dP(L, L));
  cplx tr = 0;
  for (int a = 0; a < m; ++a) tr += dP(1 + a, 1 + m + a);
  r[4] = std::abs(tr);
  for (int a = 0; a < m; ++a) {
    r[1] = std::max(r[1], std::abs(dP(1 + a, L)));
    r[6] = std::max(r[6], std::abs(dP(1 + a, 0)));
    for (int b = 0; b < m; ++b) {
      r[2] = std::max(r[2], std::abs(dP(1 + a, 1 + b)));
      r[3] = std::max(r[3], std::abs(dP(1 + a, 1 + m + b) - (a == b ? tr / double(m) : 0.0)));
    }
  }
  r[5] = std::abs(dP(0, L));
  r[7] = std::abs(dP(0, 0));
  return s;
}

namespace detail {

// Frame components of nabla of a 1-form of g (derivative slot first).
inline PointTensor frame_nabla(const SpacetimeFrame<2>& f, const FormJets<2>& form) {
  const Connection<2> cn = levi_civita<2>(f.metric, f.D);
  return frame_components(covariant_derivative<2, 2>(form, {Variance::Down}, cn), f.frame);
}

inline double max_diff(const PointTensor& t, const std::vector<cplx>& expected) {
  double r = 0;
  for (std::size_t i = 0; i < t.c.size(); ++i) r = std::max(r, std::abs(t.c[i] - expected[i]));
  return r;
}

}  // namespace detail

struct CoframeDerivativeResiduals {
  double kappa = 0, theta = 0, lambda = 0;
  double theta_printed = 0;  // theta with the kappa-theta term taken as +i lambda0 kappa . theta
};

// Covariant derivatives of the coframe of g against their closed forms; valid for
// lambda_a = 0 and a lambda0 that only depends on phi. The kappa-theta term of
// nabla theta^a is -i lambda0 kappa . theta^a, as forced by metric compatibility with
// nabla lambda; `theta_printed` measures the opposite sign.
inline CoframeDerivativeResiduals coframe_derivative_check(const SpacetimeModel& md, const std::vector<double>& pt) {
  const auto f = spacetime_frame<3>(md, pt);
  const int m = md.m, D = md.D, L = D - 1;
  SpacetimeFrame<2> f2;
  f2.m = m;
  f2.D = D;
  f2.metric = truncate_all<2>(f.metric);
  f2.frame = f.frame;
  const auto w = webster_solve<3>(f.base, false);
  const double l0 = f.lam[0].value().real();
  const double l0d = f.lam[0].grad(0).real();
  const cplx iu(0, 1);
  auto at = [D](int I, int J) { return I * D + J; };
  CoframeDerivativeResiduals r;

  std::vector<cplx> ek(D * D, 0.0), el(D * D, 0.0);
  for (int a = 0; a < m; ++a) {
    ek[at(1 + a, 1 + m + a)] = iu;
    ek[at(1 + m + a, 1 + a)] = -iu;
    el[at(1 + a, 1 + m + a)] = 0.5 * iu * l0;
    el[at(1 + m + a, 1 + a)] = -0.5 * iu * l0;
  }
  ek[at(0, 0)] += 0.5 * l0d;
  el[at(0, L)] += -0.5 * l0d;
  r.kappa = detail::max_diff(detail::frame_nabla(f2, truncate_all<2>(f.rows[0])), ek);
  r.lambda = detail::max_diff(detail::frame_nabla(f2, truncate_all<2>(f.rows[L])), el);

  for (int al = 0; al < m; ++al) {
    std::vector<cplx> e(D * D, 0.0);
    for (int I = 0; I < L; ++I) {
      const double wgt = I == 0 ? 0.5 : 1.0;  // base projection of ell is half the Reeb field
      for (int b = 0; b < m; ++b) e[at(I, 1 + b)] -= wgt * w.G(b, al, I).value();
    }
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) e[at(1 + m + c, 1 + m + b)] -= std::conj(w.N(al, b, c).value());
    e[at(L, 1 + al)] += -iu;
    e[at(1 + al, L)] += -iu;
    auto printed = e;
    e[at(0, 1 + al)] -= 0.5 * iu * l0;
    e[at(1 + al, 0)] -= 0.5 * iu * l0;
    printed[at(0, 1 + al)] += 0.5 * iu * l0;
    printed[at(1 + al, 0)] += 0.5 * iu * l0;
    const auto nt = detail::frame_nabla(f2, truncate_all<2>(f.rows[1 + al]));
    r.theta = std::max(r.theta, detail::max_diff(nt, e));
    r.theta_printed = std::max(r.theta_printed, detail::max_diff(nt, printed));
  }
  return r;
}

struct KillingResiduals {
  double sym = 0;   // max |nabla_(a v_b)| in frame components
  double norm = 0;  // |g(v, v) - lambda0|
};

inline KillingResiduals killing_check(const SpacetimeModel& md, const std::vector<double>& pt) {
  const auto f = spacetime_frame<2>(md, pt);
  const int D = md.D, L = D - 1;
  FormJets<2> alpha(D);
  for (int a = 0; a < D; ++a) alpha[a] = f.rows[L][a] + f.lam[0] * f.rows[0][a] * 0.5;
  const auto na = detail::frame_nabla(f, alpha);
  KillingResiduals r;
  for (int I = 0; I < D; ++I)
    for (int J = 0; J < D; ++J) r.sym = std::max(r.sym, 0.5 * std::abs(na(I, J) + na(J, I)));
  std::vector<cplx> gv(D * D);
  for (int i = 0; i < D * D; ++i) gv[i] = f.metric[i].value();
  const auto gi = inverse(gv, D);
  cplx nn = 0;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) nn += gi[a * D + b] * alpha[a].value() * alpha[b].value();
  r.norm = std::abs(nn - f.lam[0].value());
  return r;
}

// Conformal Killing residual of k = d/dphi for the rescaled metric.
inline double conformal_killing_residual(const SpacetimeModel& md, const std::vector<double>& pt) {
  const auto f = spacetime_frame<1>(md, pt);
  const int D = md.D;
  const auto gh = rescaled_metric<1>(f, pt[0]);
  std::vector<cplx> gv(D * D);
  for (int i = 0; i < D * D; ++i) gv[i] = gh[i].value();
  const auto gi = inverse(gv, D);
  cplx tr = 0;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) tr += gi[a * D + b] * gh[b * D + a].grad(0);
  double r = 0, scale = 0;
  for (int a = 0; a < D * D; ++a) {
    r = std::max(r, std::abs(gh[a].grad(0) - tr / double(D) * gv[a]));
    scale = std::max(scale, std::abs(gv[a]));
  }
  return r / scale;
}

struct DualRobinsonResiduals {
  bool parallel_branch = false;  // lambda0 = 0 at the point
  double lambda_prime = 0;       // nabla lambda' (or nabla lambda on the parallel branch)
  double kappa_prime = 0;
  double geodesy = 0, shear = 0, expansion = 0;  // congruence of ell for g
};

inline DualRobinsonResiduals dual_robinson_check(const SpacetimeModel& md, const std::vector<double>& pt) {
  const auto f = spacetime_frame<2>(md, pt);
  const int m = md.m, D = md.D, L = D - 1;
  const CJet<2> l0 = f.lam[0];
  const double l0v = l0.value().real(), l0d = l0.grad(0).real();
  const cplx iu(0, 1);
  DualRobinsonResiduals r;
  if (std::abs(l0v) < 1e-12) {
    r.parallel_branch = true;
    r.lambda_prime = detail::frame_nabla(f, f.rows[L]).max_abs();
  } else {
    FormJets<2> lp(D), kp(D);
    for (int a = 0; a < D; ++a) {
      lp[a] = f.rows[L][a] * recip(l0) * 2.0;
      kp[a] = f.rows[0][a] * l0 * 0.5;
    }
    std::vector<cplx> el(D * D, 0.0), ek(D * D, 0.0);
    for (int a = 0; a < m; ++a) {
      el[(1 + a) * D + 1 + m + a] = iu;
      el[(1 + m + a) * D + 1 + a] = -iu;
      ek[(1 + a) * D + 1 + m + a] = 0.5 * iu * l0v;
      ek[(1 + m + a) * D + 1 + a] = -0.5 * iu * l0v;
    }
    el[L * D + L] += -0.5 * l0d * (2.0 / l0v) * (2.0 / l0v);
    ek[L * D + 0] += 0.5 * l0d;
    r.lambda_prime = detail::max_diff(detail::frame_nabla(f, lp), el);
    r.kappa_prime = detail::max_diff(detail::frame_nabla(f, kp), ek);
  }
  // congruence of ell = g^{-1}(lambda) with the roles of k and ell exchanged
  OpticalSetup<2> s;
  s.d = D;
  s.g = f.metric;
  const auto gi = inverse(f.metric, D);
  s.k.resize(D);
  for (int a = 0; a < D; ++a) {
    CJet<2> v(0.0);
    v.set_dim(D);
    for (int b = 0; b < D; ++b) v += gi[a * D + b] * f.rows[L][b];
    s.k[a] = v;
  }
  s.ell.resize(D);
  for (int a = 0; a < D; ++a) s.ell[a] = f.frame.vec(L, a);
  for (int I = 1; I < L; ++I) {
    std::vector<cplx> v(D);
    for (int a = 0; a < D; ++a) v[a] = f.frame.vec(I, a);
    s.screen.push_back(v);
  }
  const auto inv = congruence_invariants<2>(s);
  r.geodesy = inv.geodesy;
  r.shear = inv.max_shear();
  r.expansion = std::abs(inv.expansion);
  return r;
}

// Optical setup of k = d/dphi for g or the rescaled metric.
template <int K>
OpticalSetup<K> optical_setup(const SpacetimeModel& md, const std::vector<double>& pt, bool rescaled) {
  const auto f = spacetime_frame<K>(md, pt);
  const int D = md.D;
  OpticalSetup<K> s;
  s.d = D;
  s.g = rescaled ? rescaled_metric<K>(f, pt[0]) : f.metric;
  CJet<K> z(0.0);
  z.set_dim(D);
  s.k.assign(D, z);
  s.k[0] = z + 1.0;
  s.ell.resize(D);
  for (int a = 0; a < D; ++a) s.ell[a] = f.frame.vec(0, a);
  for (int I = 1; I < D - 1; ++I) {
    std::vector<cplx> v(D);
    for (int a = 0; a < D; ++a) v[a] = f.frame.vec(I, a);
    s.screen.push_back(v);
  }
  return s;
}

// Weyl degeneracy conditions of g along k = d/dphi, with the transverse null vector and
// screen taken from the spacetime frame.
inline DegeneracyReport weyl_degeneracy_at(const SpacetimeModel& md, const std::vector<double>& pt) {
  const auto s = optical_setup<2>(md, pt, false);
  const auto p = curvature_from_jets<2>(s.g, s.d);
  std::vector<cplx> gv(s.g.size()), kv(s.d);
  for (std::size_t i = 0; i < s.g.size(); ++i) gv[i] = s.g[i].value();
  for (int a = 0; a < s.d; ++a) kv[a] = s.k[a].value();
  return weyl_degeneracy_report(p.weyl, gv, kv, s.ell, s.screen);
}

struct FeffermanCriteria {
  double weyl = 0;    // max |k^a W_abcd|
  double cotton = 0;  // max |k^c Y_abc|
  double scalar = 0;  // (div k)^2/(2m+2)^2 - P(k,k) - k(div k)/(2m+2)
  double lambda0_spread = 0;
};

// Fefferman characterization of k = d/dphi, evaluated for g.
inline FeffermanCriteria fefferman_criteria(const SpacetimeModel& md, const std::vector<double>& pt) {
  if (!md.params || !is_fefferman(*md.params))
    throw PreconditionError("fefferman_criteria: parameters are not of Fefferman type");
  const int D = md.D, m = md.m;
  const auto f = spacetime_frame<3>(md, pt);
  const auto p = curvature_from_jets<3>(f.metric, D);
  FeffermanCriteria r;
  for (int b = 0; b < D; ++b)
    for (int c = 0; c < D; ++c)
      for (int d = 0; d < D; ++d) r.weyl = std::max(r.weyl, std::abs(p.weyl(0, b, c, d)));
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) r.cotton = std::max(r.cotton, std::abs((*p.cotton)(a, b, 0)));
  const Connection<3> cn = levi_civita<3>(f.metric, D);
  CJet<2> div(0.0);
  div.set_dim(D);
  for (int a = 0; a < D; ++a) div += cn.G(a, a, 0);
  const double M = 2.0 * m + 2;
  const cplx sc = div.value() * div.value() / (M * M) - p.schouten(0, 0) - div.grad(0) / M;
  r.scalar = sc.real();
  double lo = 1e300, hi = -1e300;
  for (double phi : {-1.0, -0.3, 0.0, 0.4, 1.1}) {
    const double v = lambda0_of(*md.params, phi);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  r.lambda0_spread = hi - lo;
  return r;
}

// Rescaled metric minus the Fefferman–Einstein comparison metric and the null
// Kerr–Schild term, relative to max |ghat|.
inline double kerr_schild_check(const SpacetimeModel& md, const std::vector<double>& pt) {
  if (!md.params) throw std::invalid_argument("kerr_schild_check: model has no Einstein parameters");
  const auto& p = *md.params;
  const SpacetimeModel fe = assemble_einstein(md.base, fefferman_params(p.m, p.uLambda), false);
  const auto f = spacetime_frame<1>(md, pt);
  const auto ffe = spacetime_frame<1>(fe, pt);
  const auto gh = rescaled_metric<1>(f, pt[0]);
  const auto gfe = rescaled_metric<1>(ffe, pt[0]);
  const double s2 = 1.0 / (std::cos(pt[0]) * std::cos(pt[0]));
  const cplx coef = s2 * (f.lam[0].value() - p.uLambda / (2.0 * p.m + 2));
  const int D = md.D;
  double r = 0, scale = 0;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) {
      const cplx v = gh[a * D + b].value() - gfe[a * D + b].value() -
                     coef * f.rows[0][a].value() * f.rows[0][b].value();
      r = std::max(r, std::abs(v));
      scale = std::max(scale, std::abs(gh[a * D + b].value()));
    }
  return r / scale;
}

}  // namespace nullcong

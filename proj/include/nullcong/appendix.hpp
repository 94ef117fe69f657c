#pragma once
// Closed-form frame components of the curvature of the canonical metric g,
// expressed through the lambda coefficients B, C, E and the Webster data of the
// base, compared against the numerically differentiated curvature.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "nullcong/robinson.hpp"

namespace nullcong {

struct FamilyResidual {
  std::string name;
  double residual = 0;   // max |numeric - closed form| / max(1, max |numeric|, max |closed form|)
  double magnitude = 0;  // max |numeric|
};

inline double worst_of(const std::vector<FamilyResidual>& fs) {
  double w = 0;
  for (const auto& f : fs) w = std::max(w, f.residual);
  return w;
}

namespace detail {

class FamilyAccumulator {
 public:
  explicit FamilyAccumulator(std::string name) : name_(std::move(name)) {}
  void add(cplx numeric, cplx formula) {
    diff_ = std::max(diff_, std::abs(numeric - formula));
    scale_ = std::max({scale_, std::abs(numeric), std::abs(formula)});
    magnitude_ = std::max(magnitude_, std::abs(numeric));
  }
  FamilyResidual result() const { return {name_, diff_ / scale_, magnitude_}; }

 private:
  std::string name_;
  double diff_ = 0, scale_ = 1, magnitude_ = 0;
};

// Point values of the lambda structure and its derivatives, all in the full base
// index range 0..2m (0 = Reeb direction, 1..m holomorphic, m+1..2m conjugate).
struct StructureValues {
  int m = 0, n = 0;
  std::vector<cplx> lam_, lamd_, E_, Ed_, B_, Bd_, C_, Cd_, A_, N_;
  std::vector<cplx> DE_, DB_, DC_, DA_, DN_;
  cplx lamdd0 = 0;
  WebsterCurvature<3> wc;

  int u(int a) const { return 1 + a; }
  int b(int a) const { return 1 + m + a; }
  cplx l(int I) const { return lam_[I]; }
  cplx ld(int I) const { return lamd_[I]; }
  cplx e(int I) const { return E_[I]; }
  cplx ed(int I) const { return Ed_[I]; }
  cplx bb(int I, int J) const { return B_[I * n + J]; }
  cplx bbd(int I, int J) const { return Bd_[I * n + J]; }
  cplx c(int I) const { return C_[I]; }
  cplx cd(int I) const { return Cd_[I]; }
  cplx aa(int I, int J) const { return A_[I * n + J]; }
  cplx nn(int I, int J, int K) const { return N_[(I * n + J) * n + K]; }
  cplx De(int X, int I) const { return DE_[X * n + I]; }
  cplx Db(int X, int I, int J) const { return DB_[(X * n + I) * n + J]; }
  cplx Dc(int X, int I) const { return DC_[X * n + I]; }
  cplx Da(int X, int I, int J) const { return DA_[(X * n + I) * n + J]; }
  cplx Dn(int X, int I, int J, int K) const { return DN_[((X * n + I) * n + J) * n + K]; }
  // base curvature R(e_g, conj e_d, e_a, conj e_b) with h = identity
  cplx rb(int g, int d, int a, int bb_) const { return wc.r(u(g), b(d), a, bb_).value(); }
  cplx ricb(int a, int bb_) const { return wc.ricci[a * m + bb_].value(); }
  cplx nnb(int a, int bb_) const { return wc.nn[a * m + bb_].value(); }
};

template <int J>
std::vector<cplx> jet_values(const std::vector<CJet<J>>& v) {
  std::vector<cplx> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i].value();
  return r;
}

template <int J>
std::vector<cplx> phi_derivatives(const std::vector<CJet<J>>& v) {
  std::vector<cplx> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i].grad(0);
  return r;
}

inline StructureValues structure_values(const LambdaStructure& s) {
  StructureValues v;
  v.m = s.m;
  v.n = s.n;
  v.lam_ = jet_values(s.lam);
  v.lamd_ = phi_derivatives(s.lam);
  v.lamdd0 = s.lam[0].hess(0, 0);
  v.E_ = jet_values(s.E);
  v.Ed_ = phi_derivatives(s.E);
  v.B_ = jet_values(s.B);
  v.Bd_ = phi_derivatives(s.B);
  v.C_ = jet_values(s.C);
  v.Cd_ = phi_derivatives(s.C);
  v.A_ = jet_values(s.A);
  v.N_ = jet_values(s.N);
  v.DE_ = jet_values(covariant_full<3, 2>(s.w, s.E, 1));
  v.DB_ = jet_values(covariant_full<3, 2>(s.w, s.B, 2));
  v.DC_ = jet_values(covariant_full<3, 2>(s.w, s.C, 1));
  v.DA_ = jet_values(covariant_full<3, 2>(s.w, s.A, 2));
  v.DN_ = jet_values(covariant_full<3, 2>(s.w, s.N, 3));
  v.wc = webster_curvature<3>(s.w);
  return v;
}

inline double kron(int i, int j) { return i == j ? 1.0 : 0.0; }

// Orthogonal projection of a rank-4 tensor (components m^4, slot 0 most
// significant) onto the kernel of the traces over the given slot pairs.
inline std::vector<cplx> tracefree_project(const std::vector<cplx>& t, int m,
                                           const std::vector<std::pair<int, int>>& pairs) {
  const int size = m * m * m * m;
  std::vector<std::vector<double>> basis;
  for (const auto& [p, q] : pairs) {
    int other[2], k = 0;
    for (int s = 0; s < 4; ++s)
      if (s != p && s != q) other[k++] = s;
    for (int x = 0; x < m; ++x)
      for (int y = 0; y < m; ++y) {
        std::vector<double> row(size, 0.0);
        for (int e = 0; e < m; ++e) {
          int dig[4];
          dig[p] = dig[q] = e;
          dig[other[0]] = x;
          dig[other[1]] = y;
          row[((dig[0] * m + dig[1]) * m + dig[2]) * m + dig[3]] = 1.0;
        }
        for (const auto& bvec : basis) {
          double dot = 0;
          for (int i = 0; i < size; ++i) dot += bvec[i] * row[i];
          for (int i = 0; i < size; ++i) row[i] -= dot * bvec[i];
        }
        double norm = 0;
        for (double r : row) norm += r * r;
        norm = std::sqrt(norm);
        if (norm < 1e-9) continue;
        for (double& r : row) r /= norm;
        basis.push_back(std::move(row));
      }
  }
  std::vector<cplx> out = t;
  for (const auto& bvec : basis) {
    cplx dot = 0;
    for (int i = 0; i < size; ++i) dot += bvec[i] * out[i];
    for (int i = 0; i < size; ++i) out[i] -= dot * bvec[i];
  }
  return out;
}

}  // namespace detail

struct AppendixResiduals {
  std::vector<FamilyResidual> riemann, ricci, bianchi;
  double worst() const { return std::max({worst_of(riemann), worst_of(ricci), worst_of(bianchi)}); }
};

// Frame components of the Riemann and Ricci tensors and the scalar curvature of g
// against their closed forms, plus the first Bianchi identities of d lambda.
inline AppendixResiduals appendix_residuals(const SpacetimeModel& md, const std::vector<double>& pt) {
  using detail::FamilyAccumulator;
  using detail::kron;
  const auto s = lambda_structure(md, pt);
  const auto V = detail::structure_values(s);
  const int m = md.m, D = md.D, L = D - 1;
  const auto f = spacetime_frame<2>(md, pt);
  const auto p = curvature_from_jets<2>(f.metric, D);
  const PointTensor Rf = frame_components(p.riemann_low, f.frame);
  const PointTensor Ricf = frame_components(p.ricci, f.frame);
  const cplx i(0, 1);
  auto u = [&](int a) { return V.u(a); };
  auto b = [&](int a) { return V.b(a); };
  AppendixResiduals out;

  // ---- Riemann ----
  {
    FamilyAccumulator f1("R(e_c,k,k,e_a)"), f2("R(ebar_c,k,k,e_a)"), f3("R(l,k,k,e_a)"), f4("R(e_b,e_d,k,e_a)"),
        f5("R(e_b,ebar_c,k,e_a)"), f6("R(e_c,l,k,e_a)"), f7("R(ebar_b,l,k,e_a)"), f8("R(l,k,k,l)"),
        f9("R(e_c,e_d,e_a,e_b)"), f10("R(e_c,ebar_d,e_a,e_b)"), f11("R(e_c,ebar_d,ebar_b,e_a)"),
        f12("R(l,k,e_a,l)"), f13("R(e_c,l,e_a,e_b)"), f14("R(e_b,ebar_c,e_a,l)"), f15("R(e_b,l,e_a,l)"),
        f16("R(ebar_b,l,e_a,l)");
    cplx EE = 0;
    for (int a = 0; a < m; ++a) EE += V.e(u(a)) * V.e(b(a));
    f8.add(Rf(0, L, L, 0), V.ed(0) - 2.0 * EE);
    for (int a = 0; a < m; ++a) {
      const int ua = u(a);
      f3.add(Rf(0, L, L, ua), V.ed(ua) - i * V.e(ua));
      {
        cplx v = 0.5 * V.De(0, ua) - 0.5 * V.l(0) * V.ed(ua) + i * V.c(ua) - V.cd(ua);
        for (int bt = 0; bt < m; ++bt) v += V.e(b(bt)) * V.bb(ua, u(bt)) + V.e(u(bt)) * V.bb(ua, b(bt));
        f12.add(Rf(0, L, ua, 0), v);
      }
      for (int g = 0; g < m; ++g) {
        f1.add(Rf(u(g), L, L, ua), 0.0);
        f2.add(Rf(b(g), L, L, ua), -kron(a, g));
        {
          const int ug = u(g);
          cplx v = -V.De(ug, ua) + V.l(ug) * V.ed(ua) + V.e(ua) * V.e(ug) - 0.5 * i * V.aa(ua, ug) -
                   i * V.bb(ug, ua);
          for (int bt = 0; bt < m; ++bt) v += V.e(b(bt)) * V.nn(u(bt), ua, ug);
          f6.add(Rf(ug, 0, L, ua), v);
        }
        {
          const int bg = b(g);  // plays the role of the barred beta
          cplx v = -V.De(bg, ua) + V.l(bg) * V.ed(ua) + V.e(ua) * V.e(bg) + i * V.e(0) * kron(a, g) -
                   i * V.bb(ua, bg);
          f7.add(Rf(bg, 0, L, ua), v);
        }
      }
      for (int bt = 0; bt < m; ++bt) {
        const int ub = u(bt);
        for (int d = 0; d < m; ++d) f4.add(Rf(ub, u(d), L, ua), -2.0 * i * V.nn(ub, u(d), ua));
        for (int g = 0; g < m; ++g)
          f5.add(Rf(ub, b(g), L, ua), -2.0 * i * V.e(ua) * kron(bt, g) - i * V.e(ub) * kron(a, g));
        // R(e_b, l, e_a, l)
        {
          cplx v = -0.5 * V.Db(0, ua, ub) + 0.5 * V.l(0) * V.bbd(ua, ub) + V.Dc(ub, ua) - V.l(ub) * V.cd(ua) -
                   V.e(ua) * V.c(ub) + V.e(ub) * V.c(ua) - 0.5 * V.e(0) * V.aa(ua, ub) - V.e(0) * V.bb(ua, ub) -
                   0.25 * V.Da(0, ua, ub);
          for (int g = 0; g < m; ++g)
            v += -V.bb(ua, b(g)) * V.aa(ub, u(g)) + V.bb(ua, u(g)) * V.bb(ub, b(g)) -
                 V.c(b(g)) * V.nn(u(g), ua, ub) + V.bb(ub, u(g)) * V.bb(ua, b(g));
          f15.add(Rf(ub, 0, ua, 0), v);
        }
        // R(ebar_b, l, e_a, l)
        {
          const int bb_ = b(bt);
          cplx v = -0.5 * V.Db(0, ua, bb_) + 0.5 * V.l(0) * V.bbd(ua, bb_) + V.Dc(bb_, ua) - V.l(bb_) * V.cd(ua) -
                   V.e(ua) * V.c(bb_) + V.e(bb_) * V.c(ua) - V.e(0) * V.bb(ua, bb_);
          for (int g = 0; g < m; ++g)
            v += -V.bb(ua, u(g)) * V.aa(bb_, b(g)) + V.bb(ua, u(g)) * V.bb(bb_, b(g)) -
                 V.bb(ua, b(g)) * V.bb(u(g), bb_) - 0.25 * V.aa(ua, u(g)) * V.aa(bb_, b(g));
          f16.add(Rf(bb_, 0, ua, 0), v);
        }
        for (int g = 0; g < m; ++g) {
          const int ug = u(g);
          // R(e_c, l, e_a, e_b)
          {
            cplx v = V.Db(ug, ua, ub) - V.l(ug) * V.bbd(ua, ub) - 0.5 * V.Dn(0, ua, ub, ug) +
                     0.5 * (V.e(ua) * V.aa(ub, ug) - V.e(ub) * V.aa(ua, ug)) +
                     (V.e(ua) * V.bb(ub, ug) - V.e(ub) * V.bb(ua, ug));
            for (int d = 0; d < m; ++d)
              v += V.bb(ua, b(d)) * V.nn(ub, u(d), ug) - V.bb(ub, b(d)) * V.nn(ua, u(d), ug);
            f13.add(Rf(ug, 0, ua, ub), v);
          }
          // R(e_b, ebar_c, e_a, l)
          {
            const int bg = b(g);
            cplx v = -V.Db(bg, ua, ub) + V.l(bg) * V.bbd(ua, ub) + V.Db(ub, ua, bg) - V.l(ub) * V.bbd(ua, bg) -
                     2.0 * V.e(ua) * V.bb(ub, bg) + V.e(ub) * V.bb(ua, bg) - V.e(bg) * V.bb(ua, ub) +
                     2.0 * i * V.c(ua) * kron(bt, g) - 0.5 * V.e(bg) * V.aa(ua, ub) - 0.5 * V.Da(bg, ua, ub);
            for (int d = 0; d < m; ++d)
              v += V.bb(bg, b(d)) * V.nn(u(d), ua, ub) - 0.5 * V.aa(bg, b(d)) * V.nn(u(d), ua, ub);
            f14.add(Rf(ub, bg, ua, 0), v);
          }
          for (int d = 0; d < m; ++d) {
            const int ud = u(d), bd = b(d);
            f9.add(Rf(ug, ud, ua, ub), V.Dn(ug, ua, ub, ud) - V.Dn(ud, ua, ub, ug));
            f10.add(Rf(ug, bd, ua, ub),
                    2.0 * i * V.bb(ua, ub) * kron(g, d) -
                        i * (V.bb(ug, ua) * kron(bt, d) - V.bb(ug, ub) * kron(a, d)) - V.Dn(bd, ua, ub, ug) +
                        0.5 * i * (V.aa(ug, ua) * kron(bt, d) - V.aa(ug, ub) * kron(a, d)));
            cplx v = V.rb(g, d, a, bt) - 2.0 * i * V.bb(ua, b(bt)) * kron(g, d) -
                     2.0 * i * V.bb(ug, bd) * kron(a, bt) - i * V.bb(ug, b(bt)) * kron(a, d) -
                     i * V.bb(ua, bd) * kron(g, bt);
            for (int e = 0; e < m; ++e) v += V.nn(u(e), ua, ug) * std::conj(V.nn(u(e), ub, ud));
            f11.add(Rf(ug, bd, b(bt), ua), v);
          }
        }
      }
    }
    for (const auto* fa : {&f1, &f2, &f3, &f4, &f5, &f6, &f7, &f8, &f9, &f10, &f11, &f12, &f13, &f14, &f15, &f16})
      out.riemann.push_back(fa->result());
  }

  // ---- Ricci and scalar ----
  {
    FamilyAccumulator r1("Ric(k,k)"), r2("Ric(e_a,k)"), r3("Ric(e_a,e_b)"), r4("Ric(e_a,ebar_b)"),
        r5("Ric(l,k)"), r6("Ric(l,e_b)"), r7("Ric(l,l)"), r8("Sc");
    r1.add(Ricf(L, L), 2.0 * m);
    cplx divE = 0, lamEd = 0, EE = 0, Btr = 0;
    for (int a = 0; a < m; ++a) {
      divE += V.De(u(a), b(a)) + V.De(b(a), u(a));
      lamEd += V.l(u(a)) * V.ed(b(a)) + V.l(b(a)) * V.ed(u(a));
      EE += V.e(u(a)) * V.e(b(a));
      Btr += V.bb(u(a), b(a));
    }
    r5.add(Ricf(0, L), divE - lamEd - 4.0 * EE + 2.0 * i * Btr + V.ed(0));
    cplx nn2 = V.wc.nn_trace.value();
    r8.add(p.scalar, 4.0 * divE - 4.0 * lamEd - 12.0 * EE + 2.0 * V.ed(0) - 4.0 * i * Btr +
                         2.0 * V.wc.scalar.value() - 2.0 * nn2);
    {
      cplx v = 0;
      for (int a = 0; a < m; ++a) {
        v += V.Dc(u(a), b(a)) + V.Dc(b(a), u(a)) - V.l(u(a)) * V.cd(b(a)) - V.l(b(a)) * V.cd(u(a));
        for (int bt = 0; bt < m; ++bt)
          v += -0.5 * V.aa(u(a), u(bt)) * std::conj(V.aa(u(a), u(bt))) +
               2.0 * V.bb(u(a), u(bt)) * std::conj(V.bb(u(a), u(bt))) -
               2.0 * V.bb(u(a), b(bt)) * V.bb(u(bt), b(a));
      }
      r7.add(Ricf(0, 0), v);
    }
    for (int a = 0; a < m; ++a) {
      const int ua = u(a);
      r2.add(Ricf(ua, L), V.ed(ua) - 4.0 * i * V.e(ua));
      {
        const int ub = ua;  // the free index of Ric(l, e_b)
        cplx v = V.De(ub, 0) - 0.5 * V.De(0, ub) - V.l(ub) * V.ed(0) + 0.5 * V.l(0) * V.ed(ub) - i * V.c(ub);
        for (int al = 0; al < m; ++al) {
          const int u_ = u(al), b_ = b(al);
          v += -0.5 * V.e(b_) * V.aa(ub, u_) - 2.0 * V.e(b_) * V.bb(u_, ub) + 2.0 * V.e(u_) * V.bb(ub, b_) +
               V.Db(b_, u_, ub) - V.l(b_) * V.bbd(u_, ub) - V.Db(u_, ub, b_) + V.l(u_) * V.bbd(ub, b_) +
               0.5 * V.Da(b_, ub, u_);
          for (int g = 0; g < m; ++g)
            v += 0.5 * std::conj(V.bb(u_, u(g))) * V.nn(u_, u(g), ub) +
                 0.5 * std::conj(V.aa(u_, u(g))) * V.nn(ub, u_, u(g));
        }
        r6.add(Ricf(0, ub), v);
      }
      for (int bt = 0; bt < m; ++bt) {
        const int ub = u(bt), bb_ = b(bt);
        cplx v = V.De(ua, ub) + V.De(ub, ua) - V.l(ua) * V.ed(ub) - V.l(ub) * V.ed(ua) -
                 2.0 * V.e(ua) * V.e(ub) + i * double(m) * V.aa(ua, ub);
        for (int g = 0; g < m; ++g)
          v += V.Dn(b(g), u(g), ua, ub) + V.Dn(b(g), u(g), ub, ua) -
               (V.nn(u(g), ua, ub) + V.nn(u(g), ub, ua)) * V.e(b(g));
        r3.add(Ricf(ua, ub), v);
        r4.add(Ricf(ua, bb_), V.De(ua, bb_) + V.De(bb_, ua) - V.l(ua) * V.ed(bb_) - V.l(bb_) * V.ed(ua) -
                                  2.0 * V.e(ua) * V.e(bb_) - 4.0 * i * V.bb(ua, bb_) + V.ricb(a, bt) -
                                  V.nnb(a, bt));
      }
    }
    for (const auto* fa : {&r1, &r2, &r3, &r4, &r5, &r6, &r7, &r8}) out.ricci.push_back(fa->result());
  }

  // ---- first Bianchi identities of d lambda ----
  {
    FamilyAccumulator b1("dB_ab"), b2("dB_ab'"), b3("dC_a"), b4("dB_[abc]"), b5("dB_abc'"), b6("dC_[ab]"),
        b7("dC_ab'");
    for (int a = 0; a < m; ++a) {
      const int ua = u(a);
      {
        cplx v = V.cd(ua) + V.De(ua, 0) - V.De(0, ua) - V.l(ua) * V.ed(0) + V.l(0) * V.ed(ua);
        for (int bt = 0; bt < m; ++bt) v -= V.aa(u(bt), ua) * V.e(b(bt));
        b3.add(v, 0.0);
      }
      for (int bt = 0; bt < m; ++bt) {
        const int ub = u(bt), bb_ = b(bt);
        {
          cplx v = V.bbd(ua, ub) + V.De(ua, ub) - V.De(ub, ua) - V.l(ua) * V.ed(ub) + V.l(ub) * V.ed(ua);
          for (int g = 0; g < m; ++g) v -= V.nn(ua, ub, u(g)) * V.e(b(g));
          b1.add(v, 0.0);
        }
        b2.add(V.bbd(ua, bb_) + V.De(ua, bb_) - V.De(bb_, ua) - V.l(ua) * V.ed(bb_) + V.l(bb_) * V.ed(ua) +
                   i * V.e(0) * kron(a, bt),
               0.0);
        {
          cplx v = 0.5 * (V.Dc(ua, ub) - V.Dc(ub, ua)) - 0.5 * (V.l(ua) * V.cd(ub) - V.l(ub) * V.cd(ua)) +
                   0.5 * V.Db(0, ua, ub) - 0.5 * V.l(0) * V.bbd(ua, ub) + (V.e(ua) * V.c(ub) - V.e(ub) * V.c(ua)) +
                   V.e(0) * V.bb(ua, ub);
          for (int g = 0; g < m; ++g)
            v += 0.5 * (V.bb(ua, b(g)) * V.aa(ub, u(g)) - V.bb(ub, b(g)) * V.aa(ua, u(g))) -
                 0.5 * V.nn(ua, ub, u(g)) * V.c(b(g));
          b6.add(v, 0.0);
        }
        {
          cplx v = V.Dc(ua, bb_) - V.Dc(bb_, ua) - V.l(ua) * V.cd(bb_) + V.l(bb_) * V.cd(ua) + V.Db(0, ua, bb_) -
                   V.l(0) * V.bbd(ua, bb_) + 2.0 * V.e(ua) * V.c(bb_) - 2.0 * V.e(bb_) * V.c(ua) +
                   2.0 * V.e(0) * V.bb(ua, bb_);
          for (int g = 0; g < m; ++g)
            v -= V.bb(bb_, b(g)) * V.aa(u(g), ua) + V.aa(bb_, b(g)) * V.bb(u(g), ua);
          b7.add(v, 0.0);
        }
        for (int g = 0; g < m; ++g) {
          const int ug = u(g), bg = b(g);
          // fully antisymmetrized identity
          auto term = [&](int x, int y, int z) {
            cplx t = V.Db(x, y, z) - V.l(x) * V.bbd(y, z) + 2.0 * V.e(x) * V.bb(y, z);
            for (int d = 0; d < m; ++d) t += V.bb(x, b(d)) * V.nn(y, z, u(d));
            return t;
          };
          const cplx anti = (term(ua, ub, ug) - term(ub, ua, ug) + term(ub, ug, ua) - term(ug, ub, ua) +
                             term(ug, ua, ub) - term(ua, ug, ub)) /
                            6.0;
          b4.add(anti, 0.0);
          cplx v = V.Db(ua, ub, bg) - V.Db(ub, ua, bg) + V.Db(bg, ua, ub) - V.l(ua) * V.bbd(ub, bg) +
                   V.l(ub) * V.bbd(ua, bg) - V.l(bg) * V.bbd(ua, ub) +
                   2.0 * (V.e(ua) * V.bb(ub, bg) - V.e(ub) * V.bb(ua, bg)) + 2.0 * V.e(bg) * V.bb(ua, ub) -
                   i * (V.c(ua) * kron(bt, g) - V.c(ub) * kron(a, g));
          for (int d = 0; d < m; ++d) v += V.nn(ua, ub, u(d)) * V.bb(bg, b(d));
          b5.add(v, 0.0);
        }
      }
    }
    for (const auto* fa : {&b1, &b2, &b3, &b4, &b5, &b6, &b7}) out.bianchi.push_back(fa->result());
  }
  return out;
}

// Weyl tensor of g for Einstein lambda against its closed-form components.
inline std::vector<FamilyResidual> weyl_einstein_components(const SpacetimeModel& md, const std::vector<double>& pt) {
  if (!md.params) throw std::invalid_argument("weyl_einstein_components: model has no Einstein parameters");
  using detail::FamilyAccumulator;
  using detail::kron;
  const auto s = lambda_structure(md, pt);
  const auto V = detail::structure_values(s);
  const int m = md.m, D = md.D, L = D - 1;
  const auto f = spacetime_frame<2>(md, pt);
  const auto p = curvature_from_jets<2>(f.metric, D);
  const PointTensor Wf = frame_components(p.weyl, f.frame);
  const cplx i(0, 1);
  const cplx l0 = V.l(0), l0d = V.ld(0), l0dd = V.lamdd0;
  const double uL = md.params->uLambda;
  const double M = 2.0 * m * (2.0 * m + 1.0);
  const cplx X2 = (2.0 * m - 1.0) / 2.0 * l0dd - (2.0 * m + 2.0) * l0 + uL;
  FamilyAccumulator w1("W(e_c,k,e_a,e_b)"), w2("W(e_c,e_d,e_a,e_b)"), w3("W(e_c,e_d,ebar_b,e_a)"),
      w4("W(e_c,ebar_d,ebar_b,e_a)"), w5("W(ebar_b,l,k,e_a)"), w6("W(l,k,k,l)"), w7("W(e_c,l,e_a,e_b)");
  w6.add(Wf(0, L, L, 0), X2 / (2.0 * m + 1.0));
  auto u = [&](int a) { return V.u(a); };
  auto b = [&](int a) { return V.b(a); };
  for (int a = 0; a < m; ++a)
    for (int bt = 0; bt < m; ++bt) {
      w5.add(Wf(b(bt), 0, L, u(a)), (0.5 * i * l0d + X2 / M) * kron(a, bt));
      for (int g = 0; g < m; ++g) {
        w1.add(Wf(u(g), L, u(a), u(bt)), 2.0 * i * V.nn(u(a), u(bt), u(g)));
        w7.add(Wf(u(g), 0, u(a), u(bt)), i * l0 * V.nn(u(a), u(bt), u(g)));
        for (int d = 0; d < m; ++d) {
          w2.add(Wf(u(g), u(d), u(a), u(bt)), V.Dn(u(g), u(a), u(bt), u(d)) - V.Dn(u(d), u(a), u(bt), u(g)));
          w3.add(Wf(u(g), u(d), b(bt), u(a)), V.Dn(b(bt), u(g), u(d), u(a)));
          cplx v = V.rb(g, d, a, bt) - 2.0 * l0 * kron(a, bt) * kron(g, d) - l0 * kron(g, bt) * kron(a, d) +
                   (l0dd + 2.0 * (3.0 * m + 2.0) * l0 - 2.0 * (m + 1.0) * uL) / M * kron(a, d) * kron(g, bt);
          for (int e = 0; e < m; ++e) v += std::conj(V.nn(u(e), u(bt), u(d))) * V.nn(u(e), u(a), u(g));
          w4.add(Wf(u(g), b(d), b(bt), u(a)), v);
        }
      }
    }
  std::vector<FamilyResidual> out;
  for (const auto* fa : {&w1, &w2, &w3, &w4, &w5, &w6, &w7}) out.push_back(fa->result());
  return out;
}

// Weyl tensor of g against the Nijenhuis tensor and Chern–Moser tensor of the base
// (valid for any lambda).
inline std::vector<FamilyResidual> weyl_cr_relations(const SpacetimeModel& md, const std::vector<double>& pt) {
  using detail::FamilyAccumulator;
  const auto s = lambda_structure(md, pt);
  const auto V = detail::structure_values(s);
  const int m = md.m, D = md.D, L = D - 1;
  const auto f = spacetime_frame<2>(md, pt);
  const auto p = curvature_from_jets<2>(f.metric, D);
  const PointTensor Wf = frame_components(p.weyl, f.frame);
  const cplx i(0, 1);
  auto u = [&](int a) { return V.u(a); };
  auto b = [&](int a) { return V.b(a); };
  auto idx = [m](int a, int b_, int c, int d) { return ((a * m + b_) * m + c) * m + d; };
  const int m4 = m * m * m * m;
  FamilyAccumulator c1("W(k,e_a,e_b,e_c)"), c2("W(e_a,e_b,e_c,e_d)"), c3("W(ebar_a,e_b,e_c,e_d) trace-free"),
      c4("W(e_b,ebar_d,ebar_c,e_a) trace-free");
  std::vector<cplx> t3(m4), t4(m4), s4(m4);
  for (int a = 0; a < m; ++a)
    for (int bt = 0; bt < m; ++bt)
      for (int g = 0; g < m; ++g) {
        c1.add(Wf(L, u(a), u(bt), u(g)), -2.0 * i * V.nn(u(bt), u(g), u(a)));
        for (int d = 0; d < m; ++d) {
          c2.add(Wf(u(a), u(bt), u(g), u(d)), V.Dn(u(a), u(g), u(d), u(bt)) - V.Dn(u(bt), u(g), u(d), u(a)));
          t3[idx(a, bt, g, d)] = Wf(b(a), u(bt), u(g), u(d)) - V.Dn(b(a), u(g), u(d), u(bt));
          // slots (beta, delta-bar, gamma-bar, alpha) with loop names (a = alpha, bt = beta, g = gamma, d = delta)
          cplx q = 0;
          for (int e = 0; e < m; ++e) {
            const cplx n_ab_e = V.nn(u(a), u(bt), u(e));
            const cplx nb_gd_e = std::conj(V.nn(u(g), u(d), u(e)));
            const cplx nsym_ab = 0.5 * (V.nn(u(e), u(a), u(bt)) + V.nn(u(e), u(bt), u(a)));
            const cplx nbsym_gd = 0.5 * std::conj(V.nn(u(e), u(g), u(d)) + V.nn(u(e), u(d), u(g)));
            q += 0.5 * nb_gd_e * n_ab_e - nsym_ab * nb_gd_e - nbsym_gd * n_ab_e + nsym_ab * nbsym_gd;
          }
          t4[idx(bt, d, g, a)] = Wf(u(bt), b(d), b(g), u(a)) - q;
          s4[idx(bt, d, g, a)] = V.wc.chern_moser[idx(a, g, bt, d)];
        }
      }
  const auto p3 = detail::tracefree_project(t3, m, {{0, 1}, {0, 2}, {0, 3}});
  for (int k = 0; k < m4; ++k) c3.add(p3[k], 0.0);
  const auto p4 = detail::tracefree_project(t4, m, {{0, 1}, {0, 2}, {3, 1}, {3, 2}});
  for (int k = 0; k < m4; ++k) c4.add(p4[k], s4[k]);
  return {c1.result(), c2.result(), c3.result(), c4.result()};
}

}  // namespace nullcong

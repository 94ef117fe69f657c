#pragma once
// Contact almost-CR bases given by closed-form coframes on a chart of 2m+1 real
// coordinates. Built-ins: the Heisenberg group and circle-bundle lifts of Kähler
// potentials (Fubini–Study in particular). Bases can also be read from a text
// manifest:
//
//   # comment
//   m = 1
//   coords = t x y
//   theta0[t] = 1
//   theta0[y] = x
//   theta[1][x] = 1
//   theta[1][y] = i
//   levi[1][1] = 1          (optional; the identity when no levi entry is given)
//   kahler = log(1 + x^2 + y^2)   (alternative to theta0/theta/levi; coords t x1 y1 ...)
//
// Unlisted coframe components are zero.

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nullcong/expr.hpp"
#include "nullcong/tensor.hpp"

namespace nullcong {

struct CRBase {
  std::string name;
  int m = 0;
  std::vector<std::string> coords;            // 2m+1 names, contact direction first by convention
  std::vector<ExprPtr> theta0;                // n components
  std::vector<std::vector<ExprPtr>> theta;    // m rows of n components
  std::vector<ExprPtr> levi;                  // m*m, h_{a b-bar}
  ExprPtr kahler_potential;                   // set for Kähler lifts
  std::optional<double> einstein_constant;    // Kähler–Einstein constant when known in closed form

  int dim() const { return 2 * m + 1; }
};

namespace detail {

inline std::vector<std::string> complex_chart_names(int m) {
  std::vector<std::string> c{"t"};
  for (int a = 1; a <= m; ++a) {
    c.push_back("x" + std::to_string(a));
    c.push_back("y" + std::to_string(a));
  }
  return c;
}

inline std::vector<ExprPtr> zero_row(int n) { return std::vector<ExprPtr>(n, ex::constant(0.0)); }

inline std::vector<ExprPtr> identity_levi(int m) {
  std::vector<ExprPtr> h(m * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) h[a * m + b] = ex::constant(a == b ? 1.0 : 0.0);
  return h;
}

// theta^a = dz^a = dx^a + i dy^a on the chart (t, x1, y1, ...)
inline std::vector<std::vector<ExprPtr>> holomorphic_rows(int m) {
  const int n = 2 * m + 1;
  std::vector<std::vector<ExprPtr>> rows(m, zero_row(n));
  for (int a = 0; a < m; ++a) {
    rows[a][1 + 2 * a] = ex::constant(1.0);
    rows[a][2 + 2 * a] = ex::constant(cplx(0, 1));
  }
  return rows;
}

}  // namespace detail

// Flat model: theta0 = dt + sum (x dy - y dx), theta^a = dz^a, identity Levi form.
inline CRBase heisenberg(int m) {
  if (m < 1) throw std::invalid_argument("heisenberg: m must be >= 1");
  CRBase b;
  b.name = "heisenberg";
  b.m = m;
  b.coords = detail::complex_chart_names(m);
  const int n = b.dim();
  b.theta0 = detail::zero_row(n);
  b.theta0[0] = ex::constant(1.0);
  for (int a = 0; a < m; ++a) {
    b.theta0[1 + 2 * a] = ex::neg(ex::variable(2 + 2 * a));
    b.theta0[2 + 2 * a] = ex::variable(1 + 2 * a);
  }
  b.theta = detail::holomorphic_rows(m);
  b.levi = detail::identity_levi(m);
  return b;
}

// Circle-bundle lift of the Kähler metric with potential K(x, y) on the chart
// (t, x1, y1, ...): theta0 = dt + sum(-K_y dx + K_x dy)/2, theta^a = dz^a,
// h_{a b-bar} = d_a d_{b-bar} K. The t-scaling distinguishing the branches of
// nonzero and zero Einstein constant is absorbed into the coordinate t, so one
// formula serves both; a nonzero constant is recorded and later validated
// against the curvature of the base metric.
inline CRBase lift_from_kahler(const ExprPtr& potential, int m, std::optional<double> einstein_constant = {},
                               std::string name = "kahler-lift") {
  if (m < 1) throw std::invalid_argument("lift_from_kahler: m must be >= 1");
  CRBase b;
  b.name = std::move(name);
  b.m = m;
  b.coords = detail::complex_chart_names(m);
  const int n = b.dim();
  b.kahler_potential = potential;
  b.einstein_constant = einstein_constant;
  b.theta0 = detail::zero_row(n);
  b.theta0[0] = ex::constant(1.0);
  for (int a = 0; a < m; ++a) {
    const int ix = 1 + 2 * a, iy = 2 + 2 * a;
    b.theta0[ix] = ex::scale(-0.5, ex::diff(potential, iy));
    b.theta0[iy] = ex::scale(0.5, ex::diff(potential, ix));
  }
  b.theta = detail::holomorphic_rows(m);
  b.levi.resize(m * m);
  for (int a = 0; a < m; ++a)
    for (int c = 0; c < m; ++c) {
      const int xa = 1 + 2 * a, ya = 2 + 2 * a, xc = 1 + 2 * c, yc = 2 + 2 * c;
      auto d2 = [&](int i, int j) { return ex::diff(ex::diff(potential, i), j); };
      const ExprPtr re = ex::add(d2(xa, xc), d2(ya, yc));
      const ExprPtr im = ex::sub(d2(xa, yc), d2(ya, xc));
      b.levi[a * m + c] = ex::scale(0.25, ex::add(re, ex::mul(ex::constant(cplx(0, 1)), im)));
    }
  return b;
}

// Fubini–Study: K = log(1 + |z|^2). Its Kähler–Einstein constant (for the base
// metric h_{a b-bar}(dz dz-bar + dz-bar dz)) is m + 1.
inline CRBase fs_lift(int m) {
  if (m < 1) throw std::invalid_argument("fs_lift: m must be >= 1");
  ExprPtr s = ex::constant(1.0);
  for (int a = 0; a < m; ++a) {
    s = ex::add(s, ex::powi(ex::variable(1 + 2 * a), 2));
    s = ex::add(s, ex::powi(ex::variable(2 + 2 * a), 2));
  }
  return lift_from_kahler(ex::func(Op::Log, s), m, static_cast<double>(m + 1), "fs-lift");
}

// theta0 -> c theta0 together with h -> c h (the adapted relation is preserved).
inline CRBase rescale_contact(const CRBase& b, double c) {
  CRBase r = b;
  for (auto& e : r.theta0) e = ex::scale(c, e);
  for (auto& e : r.levi) e = ex::scale(c, e);
  r.kahler_potential = nullptr;
  r.einstein_constant.reset();
  return r;
}

// ---- manifest ---------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto z = s.find_last_not_of(" \t\r");
  return s.substr(a, z - a + 1);
}

}  // namespace detail

inline CRBase parse_manifest(const std::string& text, const std::string& name = "file") {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::optional<int> m;
  std::vector<std::string> coords;
  struct Pending {
    std::string key;
    std::vector<std::string> idx;
    std::string rhs;
    int line, col, rhs_col;
  };
  std::vector<Pending> entries;
  int coords_line = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = line;
    const auto hash = body.find('#');
    if (hash != std::string::npos) body = body.substr(0, hash);
    if (detail::trim(body).empty()) continue;
    const auto eq = body.find('=');
    const int lead = static_cast<int>(body.find_first_not_of(" \t")) + 1;
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno, lead);
    const std::string lhs = detail::trim(body.substr(0, eq));
    const std::string rhs = body.substr(eq + 1);
    const int rhs_col = static_cast<int>(eq) + 2;
    // split key[i][j]
    std::string key = lhs;
    std::vector<std::string> idx;
    const auto br = lhs.find('[');
    if (br != std::string::npos) {
      key = detail::trim(lhs.substr(0, br));
      std::size_t p = br;
      while (p < lhs.size()) {
        if (lhs[p] != '[') throw ParseError("malformed index", lineno, lead + static_cast<int>(p));
        const auto close = lhs.find(']', p);
        if (close == std::string::npos) throw ParseError("missing ']'", lineno, lead + static_cast<int>(p));
        idx.push_back(detail::trim(lhs.substr(p + 1, close - p - 1)));
        p = close + 1;
        while (p < lhs.size() && (lhs[p] == ' ' || lhs[p] == '\t')) ++p;
      }
    }
    if (key == "m" && idx.empty()) {
      const std::string v = detail::trim(rhs);
      std::size_t used = 0;
      int mv = 0;
      try {
        mv = std::stoi(v, &used);
      } catch (...) {
        throw ParseError("m must be a positive integer", lineno, rhs_col);
      }
      if (used != v.size() || mv < 1 || 2 * mv + 1 > kMaxDim - 1)
        throw ParseError("m must be an integer between 1 and 3", lineno, rhs_col);
      if (m) throw ParseError("duplicate m", lineno, lead);
      m = mv;
    } else if (key == "coords" && idx.empty()) {
      if (!coords.empty()) throw ParseError("duplicate coords", lineno, lead);
      std::istringstream cs(rhs);
      std::string c;
      while (cs >> c) {
        if (!(std::isalpha(static_cast<unsigned char>(c[0])) || c[0] == '_'))
          throw ParseError("invalid coordinate name '" + c + "'", lineno, rhs_col);
        if (c == "i" || c == "pi") throw ParseError("'" + c + "' is reserved", lineno, rhs_col);
        coords.push_back(c);
      }
      coords_line = lineno;
    } else if (key == "theta0" || key == "theta" || key == "levi" || key == "kahler" || key == "name") {
      entries.push_back({key, idx, rhs, lineno, lead, rhs_col});
    } else {
      throw ParseError("unknown key '" + key + "'", lineno, lead);
    }
  }
  if (!m) throw ParseError("missing 'm = ...'", lineno + 1, 1);
  if (coords.empty()) throw ParseError("missing 'coords = ...'", lineno + 1, 1);
  const int n = 2 * *m + 1;
  if (static_cast<int>(coords.size()) != n)
    throw ParseError("expected " + std::to_string(n) + " coordinates for m = " + std::to_string(*m) + ", got " +
                         std::to_string(coords.size()),
                     coords_line, 1);

  auto coord_index = [&](const Pending& e, const std::string& s) {
    for (int k = 0; k < n; ++k)
      if (coords[k] == s) return k;
    throw ParseError("unknown coordinate '" + s + "'", e.line, e.col);
  };
  auto frame_index = [&](const Pending& e, const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (...) {
      throw ParseError("index must be an integer in 1.." + std::to_string(*m), e.line, e.col);
    }
    if (used != s.size() || v < 1 || v > *m)
      throw ParseError("index must be an integer in 1.." + std::to_string(*m), e.line, e.col);
    return v - 1;
  };

  CRBase b;
  b.name = name;
  b.m = *m;
  b.coords = coords;
  b.theta0 = detail::zero_row(n);
  b.theta.assign(*m, detail::zero_row(n));
  b.levi = detail::identity_levi(*m);
  bool any_levi = false, any_frame = false;
  ExprPtr kahler;
  std::vector<bool> seen_levi(*m * *m, false);
  for (const auto& e : entries) {
    if (e.key == "name") {
      b.name = detail::trim(e.rhs);
      continue;
    }
    const ExprPtr ex = parse_expression(e.rhs, coords, e.line, e.rhs_col);
    if (e.key == "kahler") {
      if (!e.idx.empty()) throw ParseError("kahler takes no index", e.line, e.col);
      kahler = ex;
    } else if (e.key == "theta0") {
      if (e.idx.size() != 1) throw ParseError("theta0 needs one coordinate index", e.line, e.col);
      b.theta0[coord_index(e, e.idx[0])] = ex;
      any_frame = true;
    } else if (e.key == "theta") {
      if (e.idx.size() != 2) throw ParseError("theta needs [frame][coordinate]", e.line, e.col);
      b.theta[frame_index(e, e.idx[0])][coord_index(e, e.idx[1])] = ex;
      any_frame = true;
    } else {  // levi
      if (e.idx.size() != 2) throw ParseError("levi needs [a][b]", e.line, e.col);
      if (!any_levi) b.levi.assign(*m * *m, ex::constant(0.0));
      any_levi = true;
      const int a = frame_index(e, e.idx[0]), c = frame_index(e, e.idx[1]);
      b.levi[a * *m + c] = ex;
      seen_levi[a * *m + c] = true;
    }
  }
  if (kahler) {
    if (any_frame || any_levi) throw ParseError("kahler cannot be combined with explicit coframe entries", lineno, 1);
    const std::string nm = b.name;
    b = lift_from_kahler(kahler, *m, std::nullopt, nm);
    b.coords = coords;
    return b;
  }
  if (any_levi) {
    // fill the conjugate entries of a Hermitian form given by its upper triangle
    for (int a = 0; a < *m; ++a)
      for (int c = 0; c < *m; ++c)
        if (!seen_levi[a * *m + c] && seen_levi[c * *m + a])
          b.levi[a * *m + c] = b.levi[c * *m + a];  // real entries; complex ones must be given explicitly
  }
  return b;
}

inline CRBase load_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open base manifest '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_manifest(ss.str(), path);
}

// ---- evaluation on jets -------------------------------------------------------

// Adapted coframe of a base evaluated on coordinate jets that may live in a larger
// chart (e.g. the spacetime chart with the base at coordinate offset `off`).
// Rows are ordered theta0, theta^1..theta^m, conj(theta^1)..conj(theta^m) with
// components along the n base coordinates; after unitarization the Levi form is
// the identity.
template <int K>
struct BaseFrameJets {
  int m = 0, n = 0, D = 0, off = 0;
  std::vector<FormJets<K>> rows;  // n rows with n components
  Mat<CJet<K>> vectors;           // [a*n + I] = e_I^a
  Mat<CJet<K>> levi;              // Levi form before unitarization
  double condition = 0;

  // Frame vector I applied to a field with jets in the D-chart.
  template <int K2>
  CJet<K2 - 1> along(const CJet<K2>& f, int I) const {
    static_assert(K2 >= 1 && K2 - 1 <= K, "frame derivative order");
    CJet<K2 - 1> acc(0.0);
    acc.set_dim(D);
    for (int a = 0; a < n; ++a) acc += truncate<K2 - 1>(vectors[a * n + I]) * partial(f, off + a);
    return acc;
  }
  // index of the conjugate frame direction
  int bar(int I) const { return I == 0 ? 0 : (I <= m ? I + m : I - m); }
};

template <int K>
std::vector<CJet<K>> base_coordinate_jets(const std::vector<double>& pt, int D = -1, int off = 0) {
  const int n = static_cast<int>(pt.size());
  if (D < 0) D = n;
  std::vector<CJet<K>> x;
  for (int i = 0; i < n; ++i) x.push_back(to_complex(Jet<double, K>::coordinate(D, off + i, pt[i])));
  return x;
}

template <int K>
BaseFrameJets<K> base_frame(const CRBase& b, const std::vector<CJet<K>>& x, int off, bool unitarized = true) {
  const int m = b.m, n = b.dim();
  if (static_cast<int>(x.size()) != n) throw std::invalid_argument("base_frame: wrong number of coordinates");
  BaseFrameJets<K> f;
  f.m = m;
  f.n = n;
  f.D = x.empty() ? n : x[0].dim();
  f.off = off;
  FormJets<K> t0(n);
  for (int a = 0; a < n; ++a) t0[a] = evaluate<K>(b.theta0[a], x);
  std::vector<FormJets<K>> th(m, FormJets<K>(n));
  for (int r = 0; r < m; ++r)
    for (int a = 0; a < n; ++a) th[r][a] = evaluate<K>(b.theta[r][a], x);
  f.levi.resize(m * m);
  for (int i = 0; i < m * m; ++i) f.levi[i] = evaluate<K>(b.levi[i], x);
  if (unitarized) th = unitarize<K>(th, f.levi, m);
  f.rows.push_back(t0);
  for (auto& r : th) f.rows.push_back(r);
  for (int r = 0; r < m; ++r) {
    FormJets<K> c(n);
    for (int a = 0; a < n; ++a) c[a] = conj(th[r][a]);
    f.rows.push_back(c);
  }
  Mat<CJet<K>> M(n * n);
  std::vector<cplx> vals(n * n);
  for (int I = 0; I < n; ++I)
    for (int a = 0; a < n; ++a) {
      M[I * n + a] = f.rows[I][a];
      vals[I * n + a] = f.rows[I][a].value();
    }
  const Frame check = Frame::from_coframe(vals, n);
  f.condition = check.condition;
  f.vectors = inverse(M, n);
  return f;
}

template <int K>
BaseFrameJets<K> base_frame_at(const CRBase& b, const std::vector<double>& pt, bool unitarized = true) {
  return base_frame<K>(b, base_coordinate_jets<K>(pt), 0, unitarized);
}

// Frame components dtheta^C(e_A, e_B) of the exterior derivative of each row
// (tensor convention; a 2-form F_IJ theta^I ^ theta^J has components F_IJ).
template <int K>
std::vector<std::vector<CJet<K - 1>>> structure_components(const BaseFrameJets<K>& f) {
  const int n = f.n;
  std::vector<std::vector<CJet<K - 1>>> T(n, std::vector<CJet<K - 1>>(n * n));
  std::vector<CJet<K - 1>> e(n * n);
  for (int i = 0; i < n * n; ++i) e[i] = truncate<K - 1>(f.vectors[i]);
  for (int C = 0; C < n; ++C) {
    // (d theta^C)_ab over base coordinates, using the D-chart derivatives
    std::vector<CJet<K - 1>> dth(n * n);
    for (int a = 0; a < n; ++a)
      for (int b2 = 0; b2 < n; ++b2)
        dth[a * n + b2] = (partial(f.rows[C][b2], f.off + a) - partial(f.rows[C][a], f.off + b2)) * 0.5;
    for (int A = 0; A < n; ++A)
      for (int B = 0; B < n; ++B) {
        CJet<K - 1> acc(0.0);
        for (int a = 0; a < n; ++a) {
          CJet<K - 1> row(0.0);
          for (int b2 = 0; b2 < n; ++b2) row += dth[a * n + b2] * e[b2 * n + B];
          acc += e[a * n + A] * row;
        }
        T[C][A * n + B] = acc;
      }
  }
  return T;
}

// Max deviation of d theta0 from i h theta^a ^ theta-bar^b in frame components,
// reported in the coefficient convention (twice the tensor component).
inline double validate_adapted(const CRBase& b, const std::vector<double>& pt) {
  const auto f = base_frame_at<1>(b, pt);
  const auto T = structure_components<1>(f);
  const int m = b.m, n = b.dim();
  double worst = 0;
  for (int A = 0; A < n; ++A)
    for (int B = 0; B < n; ++B) {
      cplx expected = 0;
      if (A >= 1 && A <= m && B == A + m) expected = cplx(0, 0.5);
      if (B >= 1 && B <= m && A == B + m) expected = cplx(0, -0.5);
      worst = std::max(worst, 2 * std::abs(T[0][A * n + B].value() - expected));
    }
  return worst;
}

struct ReebResult {
  std::vector<double> vector;     // coordinate components
  double normalization_residual;  // |theta0(e0) - 1|
  double kernel_residual;         // max |d theta0(e0, .)|
};

// Solve theta0(v) = 1, d theta0(v, .) = 0 by least squares.
inline ReebResult reeb(const CRBase& b, const std::vector<double>& pt) {
  const int n = b.dim();
  const auto x = base_coordinate_jets<1>(pt);
  FormJets<1> t0(n);
  for (int a = 0; a < n; ++a) t0[a] = evaluate<1>(b.theta0[a], x);
  const PointTensor dt = exterior_derivative_at<1>(t0, n);
  // rows: (d theta0)_{a b} v^a for each b, then theta0_a v^a
  std::vector<std::vector<cplx>> M;
  std::vector<cplx> rhs;
  for (int bb = 0; bb < n; ++bb) {
    std::vector<cplx> row(n);
    for (int a = 0; a < n; ++a) row[a] = dt(a, bb);
    M.push_back(row);
    rhs.push_back(0.0);
  }
  std::vector<cplx> row(n);
  for (int a = 0; a < n; ++a) row[a] = t0[a].value();
  M.push_back(row);
  rhs.push_back(1.0);
  std::vector<cplx> N(n * n, 0.0), r(n, 0.0);
  for (std::size_t k = 0; k < M.size(); ++k)
    for (int i = 0; i < n; ++i) {
      r[i] += std::conj(M[k][i]) * rhs[k];
      for (int j = 0; j < n; ++j) N[i * n + j] += std::conj(M[k][i]) * M[k][j];
    }
  std::vector<cplx> inv;
  try {
    inv = inverse(N, n);
  } catch (const NumericError&) {
    throw NumericError("contact condition fails: the Reeb system is degenerate");
  }
  ReebResult out;
  out.vector.assign(n, 0.0);
  std::vector<cplx> v(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v[i] += inv[i * n + j] * r[j];
  for (int i = 0; i < n; ++i) out.vector[i] = v[i].real();
  cplx norm = 0;
  for (int a = 0; a < n; ++a) norm += t0[a].value() * v[a];
  out.normalization_residual = std::abs(norm - 1.0);
  out.kernel_residual = 0;
  for (int bb = 0; bb < n; ++bb) {
    cplx acc = 0;
    for (int a = 0; a < n; ++a) acc += dt(a, bb) * v[a];
    out.kernel_residual = std::max(out.kernel_residual, 2 * std::abs(acc));
  }
  return out;
}

// Riemannian base metric h_{a b-bar}(dz dz-bar + dz-bar dz) of a Kähler lift on the
// 2m real coordinates (x1, y1, ...), as jets of order K in a 2m-dimensional chart.
template <int K>
Mat<CJet<K>> kahler_base_metric(const CRBase& b, const std::vector<double>& xy) {
  if (!b.kahler_potential) throw std::invalid_argument("base has no Kähler potential");
  const int m = b.m, d = 2 * m;
  if (static_cast<int>(xy.size()) != d) throw std::invalid_argument("kahler_base_metric: need 2m coordinates");
  std::vector<CJet<K>> x;
  x.push_back(CJet<K>(0.0));  // t slot, unused by the Levi form
  x[0].set_dim(d);
  for (int i = 0; i < d; ++i) x.push_back(to_complex(Jet<double, K>::coordinate(d, i, xy[i])));
  Mat<CJet<K>> g(d * d, CJet<K>(0.0));
  for (int a = 0; a < m; ++a)
    for (int c = 0; c < m; ++c) {
      const CJet<K> h = evaluate<K>(b.levi[a * m + c], x);
      // dz^a dz-bar^c + dz-bar^c dz^a contributes 2 Re(h (dx^a + i dy^a)(dx^c - i dy^c)) symmetrized
      const CJet<K> re = to_complex(real(h)), im = to_complex(imag(h));
      const int xa = 2 * a, ya = 2 * a + 1, xc = 2 * c, yc = 2 * c + 1;
      g[xa * d + xc] += re;
      g[ya * d + yc] += re;
      g[xa * d + yc] += im;
      g[ya * d + xc] -= im;
    }
  // symmetrize (the sum above gives h(dz dz-bar + dz-bar dz) row by row)
  Mat<CJet<K>> s(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s[i * d + j] = g[i * d + j] + g[j * d + i];
  return s;
}

}  // namespace nullcong

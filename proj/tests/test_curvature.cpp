#include <gtest/gtest.h>

#include <array>

#include "nullcong/curvature.hpp"
#include "nullcong/properties.hpp"
#include "test_support.hpp"

using namespace nullcong;
using testing_support::Gen;

namespace {

const auto Dn = Variance::Down;

std::vector<CJet<3>> coordinate_jets(const std::vector<double>& p) {
  std::vector<CJet<3>> x;
  const int d = static_cast<int>(p.size());
  for (int i = 0; i < d; ++i) x.push_back(to_complex(RJet3::coordinate(d, i, p[i])));
  return x;
}

}  // namespace

TEST(CurvaturePack, FlatAffineChartHasNoCurvature) {
  Gen gen(1);
  MetricField mf;
  mf.dim = 4;
  std::vector<double> a(16);
  for (auto& v : a) v = gen.uniform(-0.3, 0.3);
  mf.eval = [a](const std::vector<double>&) {
    Mat<CJet<3>> g(16);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) g[i * 4 + j] = CJet<3>((i == j ? (i == 0 ? -1.0 : 1.0) : 0.0) + a[i * 4 + j] + a[j * 4 + i]);
    return g;
  };
  const auto p = curvature_pack(mf, {0.1, 0.2, 0.3, 0.4}, 3);
  EXPECT_LT(p.riemann.max_abs(), 1e-12);
  EXPECT_LT(p.ricci.max_abs(), 1e-12);
  EXPECT_LT(p.weyl.max_abs(), 1e-12);
  EXPECT_LT(p.cotton->max_abs(), 1e-12);
  EXPECT_EQ(signature(p.g), std::make_pair(3, 1));
}

TEST(CurvaturePack, RoundSphereScalarAgainstFiniteDifferencePipeline) {
  const double r = 1.7;
  auto metric_values = [r](double th) { return std::array<double, 2>{r * r, r * r * std::sin(th) * std::sin(th)}; };
  MetricField mf;
  mf.dim = 2;
  mf.eval = [r](const std::vector<double>& pt) {
    const auto x = coordinate_jets(pt);
    const auto s = sin(x[0]);
    Mat<CJet<3>> g(4, CJet<3>(0.0));
    g[0] = CJet<3>(r * r);
    g[3] = s * s * (r * r);
    return g;
  };
  const double th = 0.9;
  const auto p = curvature_pack(mf, {th, 0.3}, 2);
  EXPECT_NEAR(p.scalar.real(), 2.0 / (r * r), 1e-12);

  // Independent pipeline: diagonal metric depending on theta only, Christoffels and
  // their derivatives by central differences.
  const double h = 1e-4;
  auto christoffel = [&](double t) {
    // Gamma^c_ab for (theta, phi) with g = diag(A(t), B(t)).
    const auto g0 = metric_values(t);
    const auto gp = metric_values(t + h), gm = metric_values(t - h);
    const double dB = (gp[1] - gm[1]) / (2 * h);
    std::array<double, 8> G{};  // [(c*2+a)*2+b]
    G[(0 * 2 + 1) * 2 + 1] = -0.5 * dB / g0[0];
    G[(1 * 2 + 0) * 2 + 1] = G[(1 * 2 + 1) * 2 + 0] = 0.5 * dB / g0[1];
    return G;
  };
  const auto G = christoffel(th);
  const auto Gp = christoffel(th + h), Gm = christoffel(th - h);
  auto dG = [&](int e, int c, int a, int b) { return e == 0 ? (Gp[(c * 2 + a) * 2 + b] - Gm[(c * 2 + a) * 2 + b]) / (2 * h) : 0.0; };
  auto Gi = [&](int c, int a, int b) { return G[(c * 2 + a) * 2 + b]; };
  double sc = 0;
  const auto g0 = metric_values(th);
  for (int b = 0; b < 2; ++b) {
    double ric = 0;  // Ric_bb = R_cb^c_b
    for (int c = 0; c < 2; ++c) {
      double v = dG(c, c, b, b) - dG(b, c, c, b);
      for (int e = 0; e < 2; ++e) v += Gi(c, c, e) * Gi(e, b, b) - Gi(c, b, e) * Gi(e, c, b);
      ric += v;
    }
    sc += ric / g0[b];
  }
  EXPECT_NEAR(sc, 2.0 / (r * r), 1e-6);
  EXPECT_NEAR(p.scalar.real(), sc, 1e-6);
}

TEST(CurvatureProperties, CommutatorConventionOnRandomMetrics) {
  Gen gen(2024);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = trial % 2 ? 6 : 4;
    const MetricField mf = random_polynomial_metric(gen, d, trial % 3 != 0);
    worst = std::max(worst, ricci_identity_residual(mf, gen.point(d, -1, 1), gen));
  }
  EXPECT_LT(worst, 1e-7);
}

TEST(CurvatureProperties, SymmetriesAndBianchi) {
  Gen gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = trial % 2 ? 6 : 4;
    const MetricField mf = random_polynomial_metric(gen, d, true);
    const auto p = curvature_pack(mf, gen.point(d, -1, 1), 3);
    const double sR = p.riemann.max_abs() + 1e-30;
    double anti = 0, bianchi1 = 0, bianchi2 = 0, ric_sym = 0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        ric_sym = std::max(ric_sym, std::abs(p.ricci(a, b) - p.ricci(b, a)));
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) {
            anti = std::max(anti, std::abs(p.riemann(a, b, c, e) + p.riemann(b, a, c, e)));
            bianchi1 = std::max(bianchi1, std::abs(p.riemann(a, b, c, e) + p.riemann(b, e, c, a) + p.riemann(e, a, c, b)));
            for (int f = 0; f < d; ++f) {
              const auto& DR = *p.riemann_grad;
              bianchi2 = std::max(bianchi2, std::abs(DR(f, a, b, c, e) + DR(a, b, f, c, e) + DR(b, f, a, c, e)));
            }
          }
      }
    EXPECT_LT(anti / sR, 1e-14);
    EXPECT_LT(bianchi1 / sR, 1e-8);
    EXPECT_LT(bianchi2 / (p.riemann_grad->max_abs() + 1e-30), 1e-6);
    EXPECT_LT(ric_sym / (p.ricci.max_abs() + 1e-30), 1e-12);
    // Ric_bd = R_cb^c_d via the generic contraction
    EXPECT_LT(rel_diff(contract(p.riemann, 0, 2), p.ricci), 1e-12);
  }
}

TEST(CurvatureProperties, WeylTraceFreeAndConformallyInvariant) {
  Gen gen(99);
  double worst_trace = 0, worst_inv = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = trial % 2 ? 6 : 4;
    const MetricField mf = random_polynomial_metric(gen, d, trial % 2 == 0);
    const auto pt = gen.point(d, -1, 1);
    worst_trace = std::max(worst_trace, weyl_trace_residual(curvature_pack(mf, pt, 2)));
    worst_inv = std::max(worst_inv, weyl_conformal_residual(mf, random_conformal_factor(gen, d), pt));
  }
  EXPECT_LT(worst_trace, 1e-9);
  EXPECT_LT(worst_inv, 1e-8);
}

TEST(ConformalRescale, ZeroFactorIsIdentity) {
  Gen gen(3);
  const MetricField mf = random_polynomial_metric(gen, 4, true);
  auto zero = [](const std::vector<double>& q) {
    CJet<3> z(0.0);
    z.set_dim(static_cast<int>(q.size()));
    return z;
  };
  const auto pt = gen.point(4, -1, 1);
  const auto a = eval_metric(mf, pt), b = eval_metric(conformal_rescale(mf, zero), pt);
  for (int i = 0; i < 16; ++i) EXPECT_EQ(a[i].value(), b[i].value());
}

TEST(TransformLaws, ConstantFactorGivesZeroResiduals) {
  Gen gen(4);
  const MetricField mf = random_polynomial_metric(gen, 4, true);
  auto c = [](const std::vector<double>& q) {
    CJet<3> z(0.7);
    z.set_dim(static_cast<int>(q.size()));
    return z;
  };
  const auto r = transform_law_residuals(mf, c, gen.point(4, -1, 1));
  EXPECT_LT(r.connection, 1e-12);
  EXPECT_LT(r.schouten, 1e-12);
}

TEST(TransformLaws, QuadraticFactorOnMinkowski) {
  MetricField mink;
  mink.dim = 4;
  mink.eval = [](const std::vector<double>&) {
    Mat<CJet<3>> g(16, CJet<3>(0.0));
    g[0] = CJet<3>(-1.0);
    for (int i = 1; i < 4; ++i) g[i * 4 + i] = CJet<3>(1.0);
    return g;
  };
  Gen gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = gen.point(10, -0.5, 0.5);
    auto phi = [q](const std::vector<double>& pt) {
      const auto x = coordinate_jets(pt);
      CJet<3> f(q[0]);
      f.set_dim(4);
      for (int i = 0; i < 4; ++i) f += x[i] * q[1 + i] + x[i] * x[(i + 1) % 4] * q[5 + i];
      return f;
    };
    const auto r = transform_law_residuals(mink, phi, gen.point(4, -1, 1));
    EXPECT_LT(r.connection, 1e-8);
    EXPECT_LT(r.schouten, 1e-8);
  }
}

TEST(TransformLaws, RandomMetricsInFourAndSixDimensions) {
  Gen gen(6);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = trial % 2 ? 6 : 4;
    const MetricField mf = random_polynomial_metric(gen, d, true);
    const auto co = gen.point(d, -0.4, 0.4);
    auto phi = [co](const std::vector<double>& pt) {
      const auto x = coordinate_jets(pt);
      CJet<3> f(0.0);
      f.set_dim(static_cast<int>(pt.size()));
      for (std::size_t i = 0; i < pt.size(); ++i) f += exp(x[i] * co[i]) * co[(i + 2) % pt.size()];
      return f;
    };
    const auto r = transform_law_residuals(mf, phi, gen.point(d, -1, 1));
    worst = std::max({worst, r.connection, r.schouten});
  }
  EXPECT_LT(worst, 1e-7);
}

TEST(CovariantDerivative, MetricCompatibilityAndTorsionFree) {
  Gen gen(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 4;
    const MetricField mf = random_polynomial_metric(gen, d, true);
    const auto pt = gen.point(d, -1, 1);
    const auto g = eval_metric(mf, pt);
    const Connection<3> cn = levi_civita<3>(g, d);
    EXPECT_LT((covariant_derivative<3, 3>(g, {Dn, Dn}, cn).max_abs()), 1e-10);
    const auto x = coordinate_jets(pt);
    const CJet<3> f = sin(x[0] * x[1]) + x[2] * x[3] * x[0];
    std::vector<CJet<2>> df(d);
    for (int a = 0; a < d; ++a) df[a] = partial(f, a);
    const PointTensor H = covariant_derivative<2, 3>(df, {Dn}, cn);
    EXPECT_LT(symmetrize(H, 0, 1, true).max_abs(), 1e-12);
  }
}

TEST(Cotton, VanishesForEinsteinMetric) {
  // Round 4-sphere in stereographic coordinates: g = 4 / (1 + |x|^2)^2 delta.
  MetricField mf;
  mf.dim = 4;
  mf.eval = [](const std::vector<double>& pt) {
    const auto x = coordinate_jets(pt);
    CJet<3> s(1.0);
    for (const auto& xi : x) s += xi * xi;
    const CJet<3> c = recip(s * s) * 4.0;
    Mat<CJet<3>> g(16, CJet<3>(0.0));
    for (int i = 0; i < 4; ++i) g[i * 4 + i] = c;
    return g;
  };
  const auto p = curvature_pack(mf, {0.3, -0.2, 0.5, 0.1}, 3);
  EXPECT_LT(p.cotton->max_abs(), 1e-6);
  // Ric = 3 g for the unit 4-sphere
  EXPECT_LT(max_abs_diff(p.ricci, p.g * cplx(3.0)), 1e-10);
}

TEST(CurvaturePack, SingularMetricIsNumericError) {
  MetricField mf;
  mf.dim = 2;
  mf.eval = [](const std::vector<double>&) { return Mat<CJet<3>>{CJet<3>(1.0), CJet<3>(1.0), CJet<3>(1.0), CJet<3>(1.0)}; };
  EXPECT_THROW(curvature_pack(mf, {0.0, 0.0}, 2), NumericError);
  EXPECT_THROW(curvature_pack(mf, {0.0, 0.0}, 1), std::invalid_argument);
}

#include <gtest/gtest.h>

#include <cmath>

#include "nullcong/robinson.hpp"
#include "nullcong/sampling.hpp"
#include "test_support.hpp"

using namespace nullcong;
using testing_support::Gen;

namespace {

std::vector<double> spacetime_point(Gen& g, int m, double margin = 0.3, double r = 0.6) {
  std::vector<double> p{g.uniform(-kHalfPi + margin, kHalfPi - margin)};
  for (int i = 0; i < 2 * m + 1; ++i) p.push_back(g.uniform(-r, r));
  return p;
}

CRBase tilted() { return parse_manifest(testing_support::kTiltedManifest); }

// Constant metric 2 du dv + dx^2 + dy^2 with k = d/du, ell = d/dv.
template <int K>
OpticalSetup<K> minkowski_setup() {
  OpticalSetup<K> s;
  s.d = 4;
  CJet<K> z(0.0);
  z.set_dim(4);
  s.g.assign(16, z);
  s.g[0 * 4 + 1] = z + 1.0;
  s.g[1 * 4 + 0] = z + 1.0;
  s.g[2 * 4 + 2] = z + 1.0;
  s.g[3 * 4 + 3] = z + 1.0;
  s.k.assign(4, z);
  s.k[0] = z + 1.0;
  s.ell = {0.0, 1.0, 0.0, 0.0};
  s.screen = {{0.0, 0.0, 1.0, 0.0}, {0.0, 0.0, 0.0, 1.0}};
  return s;
}


// Straightforward matrix evaluation of tau.tau + (1/n) |tau|^2 h for h = identity.
double twist_residual_oracle(const std::vector<cplx>& t, int n) {
  cplx norm = 0;
  for (const auto& x : t) norm += x * x;
  double worst = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx v = (i == j) ? norm / double(n) : 0.0;
      for (int k = 0; k < n; ++k) v += t[i * n + k] * t[k * n + j];
      worst = std::max(worst, std::abs(v));
    }
  return worst;
}

CongruenceInvariants screen_only(const std::vector<cplx>& tau, int n) {
  CongruenceInvariants inv;
  inv.n = n;
  inv.screen_metric.assign(n * n, 0.0);
  for (int i = 0; i < n; ++i) inv.screen_metric[i * n + i] = 1.0;
  inv.twist = tau;
  return inv;
}

}  // namespace

TEST(Congruence, MinkowskiIsTwistFreeShearFreeExpansionFree) {
  const auto inv = congruence_invariants<2>(minkowski_setup<2>());
  EXPECT_EQ(inv.n, 2);
  for (const auto& t : inv.twist) EXPECT_EQ(std::abs(t), 0.0);
  EXPECT_EQ(inv.max_shear(), 0.0);
  EXPECT_EQ(std::abs(inv.expansion), 0.0);
  EXPECT_EQ(inv.geodesy, 0.0);
  EXPECT_EQ(inv.null_residual, 0.0);
  EXPECT_EQ(inv.kappa_ell, 1.0);
}

TEST(Congruence, NonNullVectorIsRejected) {
  auto s = minkowski_setup<2>();
  s.k[2] = s.k[2] + 0.5;  // k = d/du + d/dx / 2 has g(k, k) = 1/4
  try {
    congruence_invariants<2>(s);
    FAIL() << "expected a precondition error";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("0.25"), std::string::npos) << e.what();
  }
}

TEST(Congruence, CanonicalMetricIsGeodesicShearFreeExpansionFree) {
  Gen g(201);
  const std::vector<SpacetimeModel> models{
      assemble_einstein(heisenberg(2), EinsteinParams{2, 0.7, 0.0, -0.3}),
      assemble_einstein(fs_lift(3), EinsteinParams{3, -1.1, 4.0, 0.5}),
      assemble_general(tilted(), random_general_lambda(g, tilted())),
  };
  for (const auto& md : models)
    for (int k = 0; k < 4; ++k) {
      const auto inv = congruence_invariants<1>(optical_setup<1>(md, spacetime_point(g, md.m), false));
      EXPECT_LT(inv.null_residual, 1e-10);
      EXPECT_NEAR(inv.kappa_ell, 1.0, 1e-10);
      EXPECT_LT(inv.geodesy, 1e-9);
      EXPECT_LT(inv.max_shear(), 1e-9);
      EXPECT_LT(std::abs(inv.expansion), 1e-9);
      EXPECT_LT(twist_complex_structure_residual(inv), 1e-9);
      // twist is antisymmetric
      for (int i = 0; i < inv.n; ++i)
        for (int j = 0; j < inv.n; ++j)
          EXPECT_LT(std::abs(inv.twist[i * inv.n + j] + inv.twist[j * inv.n + i]), 1e-12);
    }
}

TEST(Congruence, ShearIsTraceFreeForGenericVectorField) {
  // k = d/du - y^4/32 d/dv + y^2/4 d/dy is null and not shear-free
  auto s = minkowski_setup<2>();
  const auto y = to_complex(Jet<double, 2>::coordinate(4, 3, -0.3));
  s.k[3] = y * y * 0.25;
  s.k[1] = s.k[3] * s.k[3] * -0.5;
  const auto inv = congruence_invariants<2>(s);
  EXPECT_GT(inv.max_shear(), 1e-3);
  cplx tr = 0;
  for (int i = 0; i < inv.n; ++i) tr += inv.shear[i * inv.n + i];
  EXPECT_LT(std::abs(tr), 1e-12);
}

TEST(TwistStructure, ZeroTwistHasZeroResidual) {
  EXPECT_EQ(twist_complex_structure_residual(screen_only(std::vector<cplx>(16, 0.0), 4)), 0.0);
}

TEST(TwistStructure, StandardComplexStructureHasZeroResidual) {
  std::vector<cplx> J(16, 0.0);
  J[0 * 4 + 1] = 2.0;
  J[1 * 4 + 0] = -2.0;
  J[2 * 4 + 3] = 2.0;
  J[3 * 4 + 2] = -2.0;
  EXPECT_LT(twist_complex_structure_residual(screen_only(J, 4)), 1e-14);
}

TEST(TwistStructure, RandomAntisymmetricTwistMatchesMatrixOracle) {
  Gen g(202);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<cplx> t(16, 0.0);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        t[i * 4 + j] = g.uniform(-1, 1);
        t[j * 4 + i] = -t[i * 4 + j];
      }
    const double r = twist_complex_structure_residual(screen_only(t, 4));
    EXPECT_NEAR(r, twist_residual_oracle(t, 4), 1e-13);
    EXPECT_GT(r, 0.0);
  }
}

TEST(WeylTwistIdentity, FlatMetricBothSidesVanish) {
  const auto r = weyl_twist_identity(minkowski_setup<2>());
  EXPECT_EQ(r.lhs_max, 0.0);
  EXPECT_EQ(r.rhs_max, 0.0);
  EXPECT_EQ(r.residual, 0.0);
}

TEST(WeylTwistIdentity, GeneralLambdaModels) {
  Gen g(203);
  for (const CRBase& base : {heisenberg(2), tilted()})
    for (int trial = 0; trial < 3; ++trial) {
      const auto md = assemble_general(base, random_general_lambda(g, base));
      const auto pt = spacetime_point(g, 2);
      const auto s = optical_setup<2>(md, pt, false);
      const auto inv = congruence_invariants<2>(s);
      ASSERT_LT(inv.max_shear(), 1e-9);
      ASSERT_LT(std::abs(inv.expansion), 1e-9);
      EXPECT_LT(weyl_twist_identity(s).residual, 1e-7);
    }
}

// On the canonical metrics the twist is a complex structure and both sides vanish.
// A product with a flat plane has a twist of rank 2 on a 4-dimensional screen, so
// both sides are nonzero there.
TEST(WeylTwistIdentity, ProductWithFlatPlaneIsNonTrivial) {
  Gen g(209);
  for (int trial = 0; trial < 3; ++trial) {
    const auto md = assemble_general(heisenberg(1), random_general_lambda(g, heisenberg(1)));
    const auto pt4 = spacetime_point(g, 1);
    const auto s4 = optical_setup<2>(md, pt4, false);
    OpticalSetup<2> s;
    s.d = 6;
    CJet<2> z(0.0);
    z.set_dim(6);
    s.g.assign(36, z);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) s.g[a * 6 + b] = embed(s4.g[a * 4 + b], 6, 0);
    s.g[4 * 6 + 4] = z + 1.0;
    s.g[5 * 6 + 5] = z + 1.0;
    s.k.assign(6, z);
    s.k[0] = z + 1.0;
    s.ell = s4.ell;
    s.ell.resize(6, 0.0);
    for (auto v : s4.screen) {
      v.resize(6, 0.0);
      s.screen.push_back(v);
    }
    s.screen.push_back({0.0, 0.0, 0.0, 0.0, 1.0, 0.0});
    s.screen.push_back({0.0, 0.0, 0.0, 0.0, 0.0, 1.0});
    const auto inv = congruence_invariants<2>(s);
    ASSERT_LT(inv.max_shear(), 1e-9);
    ASSERT_LT(std::abs(inv.expansion), 1e-9);
    EXPECT_GT(twist_complex_structure_residual(inv), 0.1);
    const auto r = weyl_twist_identity(s);
    EXPECT_GT(r.lhs_max, 1e-2);
    EXPECT_GT(r.rhs_max, 1e-2);
    EXPECT_LT(r.residual, 1e-7);
  }
}

TEST(WeylTwistIdentity, EinsteinModels) {
  Gen g(204);
  for (int m : {2, 3}) {
    const std::vector<SpacetimeModel> models{
        assemble_einstein(heisenberg(m), EinsteinParams{m, g.uniform(-2, 2), 0.0, g.uniform(-1, 1)}),
        assemble_einstein(fs_lift(m), EinsteinParams{m, g.uniform(-2, 2), m + 1.0, g.uniform(-1, 1)}),
    };
    for (const auto& md : models) {
      const auto r = weyl_twist_identity(optical_setup<2>(md, spacetime_point(g, m), false));
      EXPECT_LT(r.residual, 1e-7);
    }
  }
}

TEST(WeylDegeneracy, EinsteinMetricSatisfiesAlignmentConditions) {
  Gen g(205);
  for (int m : {2, 3}) {
    const std::vector<SpacetimeModel> models{
        assemble_einstein(heisenberg(m), EinsteinParams{m, g.uniform(-2, 2), 0.0, g.uniform(-1, 1)}),
        assemble_einstein(fs_lift(m), EinsteinParams{m, g.uniform(-2, 2), m + 1.0, g.uniform(-1, 1)}),
    };
    for (const auto& md : models) {
      const auto r = weyl_degeneracy_at(md, spacetime_point(g, m));
      for (int c = 0; c < 3; ++c) EXPECT_LT(r.residual[c], 1e-8) << "condition " << c + 1;
      // built-in bases are integrable and lambda_a = 0, so the screen condition holds too
      EXPECT_LT(r.residual[3], 1e-8);
    }
  }
}

TEST(WeylDegeneracy, ConformallyFlatCaseSatisfiesAllConditions) {
  Gen g(206);
  const auto md = assemble_einstein(heisenberg(2), EinsteinParams{2, 0.0, 0.0, 0.0});
  for (int k = 0; k < 5; ++k) {
    const auto r = weyl_degeneracy_at(md, spacetime_point(g, 2));
    for (int c = 0; c < 5; ++c) EXPECT_LT(r.residual[c], 1e-7) << "condition " << c + 1;
  }
}

TEST(WeylDegeneracy, NonIntegrableBaseBreaksScreenCondition) {
  Gen g(207);
  const auto md = assemble_general(tilted(), random_general_lambda(g, tilted()));
  const auto r = weyl_degeneracy_at(md, spacetime_point(g, 2));
  EXPECT_GT(r.residual[3], 1e-4);
  EXPECT_GT(r.residual[4], 1e-4);
}

TEST(EAlphaOde, ZeroAmplitudeIsConstant) {
  for (int m : {1, 2, 3, 5}) {
    const auto j = e_alpha_ode_solution(m, 0.7, 0.0, cplx(0.3, -0.2));
    EXPECT_EQ(j.value(), cplx(0.3, -0.2));
    EXPECT_EQ(std::abs(j.grad(0)), 0.0);
  }
}

TEST(EAlphaOde, DimensionTwoIsLinear) {
  const cplx E(0.4, 0.1), lam(-0.2, 0.5);
  for (double phi : {-1.0, 0.0, 0.6}) {
    const auto j = e_alpha_ode_solution(2, phi, E, lam);
    EXPECT_LT(std::abs(j.value() - (2.0 * E * phi + lam)), 1e-15);
    EXPECT_LT(std::abs(j.grad(0) - 2.0 * E), 1e-15);
    EXPECT_EQ(std::abs(j.hess(0, 0)), 0.0);
  }
}

TEST(EAlphaOde, DimensionThreeExample) {
  // w = 2/5: lambda(0) = -2i E / w + lam = -5i for E = 1, lam = 0
  const auto j = e_alpha_ode_solution(3, 0.0, 1.0, 0.0);
  EXPECT_LT(std::abs(j.value() - cplx(0, -5)), 1e-14);
  EXPECT_LT(std::abs(j.grad(0) - 2.0), 1e-14);
}

TEST(EAlphaOde, SolutionsSatisfyOdeAndMatchDifferences) {
  Gen g(208);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = g.integer(1, 6);
    const double phi = g.uniform(-1.4, 1.4);
    const cplx E(g.uniform(-1, 1), g.uniform(-1, 1)), lam(g.uniform(-1, 1), g.uniform(-1, 1));
    const auto j = e_alpha_ode_solution(m, phi, E, lam);
    EXPECT_LT(e_alpha_ode_residual(m, j), 1e-10);
    if (m == 2) continue;
    const long double w = (2.0L * m - 4) / (2.0L * m - 1);
    auto part = [&](bool imag) -> testing_support::LdFn {
      return [=](const std::vector<long double>& x) {
        const std::complex<long double> v =
            std::exp(std::complex<long double>(0, w * x[0])) *
                (std::complex<long double>(0, -2) * std::complex<long double>(E.real(), E.imag()) / w) +
            std::complex<long double>(lam.real(), lam.imag());
        return imag ? v.imag() : v.real();
      };
    };
    const std::vector<long double> x{phi};
    const cplx d1(static_cast<double>(testing_support::central(part(false), x, {0}, 1e-5L)),
                  static_cast<double>(testing_support::central(part(true), x, {0}, 1e-5L)));
    EXPECT_LT(std::abs(j.grad(0) - d1), 1e-8);
  }
}

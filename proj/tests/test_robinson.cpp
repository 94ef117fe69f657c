#include <gtest/gtest.h>

#include <cmath>

#include "nullcong/robinson.hpp"
#include "nullcong/sampling.hpp"
#include "test_support.hpp"

using namespace nullcong;
using testing_support::Gen;

namespace {

std::vector<double> spacetime_point(Gen& g, int m, double margin = 0.2, double r = 0.8) {
  std::vector<double> p{g.uniform(-kHalfPi + margin, kHalfPi - margin)};
  for (int i = 0; i < 2 * m + 1; ++i) p.push_back(g.uniform(-r, r));
  return p;
}

EinsteinParams random_params(Gen& g, int m, double uLambda) {
  return EinsteinParams{m, g.uniform(-2, 2), uLambda, g.uniform(-1, 1)};
}

}  // namespace

TEST(Lambda0, AjCoefficientsFollowRecurrence) {
  EXPECT_EQ(aj_coefficients(1)[0], 1.0);
  const auto a2 = aj_coefficients(2);
  ASSERT_EQ(a2.size(), 3u);
  EXPECT_DOUBLE_EQ(a2[1], 2.0);
  EXPECT_DOUBLE_EQ(a2[2], 8.0);
  const auto a3 = aj_coefficients(3);
  EXPECT_DOUBLE_EQ(a3[1], 8.0 / 5);
  EXPECT_DOUBLE_EQ(a3[2], 16.0 / 5);
  EXPECT_DOUBLE_EQ(a3[3], 64.0 / 5);
  EXPECT_THROW(aj_coefficients(0), std::invalid_argument);
}

TEST(Lambda0, BoundaryValues) {
  Gen g(101);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = g.integer(1, 4);
    const EinsteinParams p{m, g.uniform(-3, 3), g.uniform(-3, 3), g.uniform(-2, 2)};
    EXPECT_NEAR(lambda0_of(p, 0.0), p.uLambda - p.Lambda, 1e-12);
    // near the boundary: constant, cos^2 term and the odd c-term, up to O(eps^4)
    const double eps = 1e-3, se = std::sin(eps);
    const double amp = p.Lambda / (2 * m + 1) - p.uLambda / (2 * m + 2);
    const double even = p.Lambda / (2 * m + 1) + amp * aj_coefficients(m)[1] * se * se;
    const double odd = p.c * std::pow(se, 2 * m + 1) * std::cos(eps);
    EXPECT_NEAR(lambda0_of(p, kHalfPi - eps), even + odd, 1e-10);
    EXPECT_NEAR(lambda0_of(p, -kHalfPi + eps), even - odd, 1e-10);
  }
  const auto fe = fefferman_params(2, 3.0);
  for (double phi : {-1.2, 0.0, 0.7}) EXPECT_NEAR(lambda0_of(fe, phi), 0.5, 1e-12);
}

TEST(Lambda0, OdeResidualsVanish) {
  Gen g(102);
  for (int m = 1; m <= 4; ++m)
    for (int draw = 0; draw < 5; ++draw) {
      const EinsteinParams p{m, g.uniform(-2, 2), g.uniform(-2, 2), g.uniform(-1, 1)};
      for (int k = 0; k < 100; ++k) {
        const auto r = lambda0_ode_residuals(p, g.uniform(-kHalfPi + 0.2, kHalfPi - 0.2));
        EXPECT_LT(r.worst_ode(), 1e-10) << r.r1 << " " << r.r2 << " " << r.r3 << " " << r.r4;
        EXPECT_LT(r.rb, 1e-12);
      }
    }
  const auto zero = lambda0_ode_residuals(EinsteinParams{2, 0, 0, 0}, 0.4);
  EXPECT_EQ(zero.worst_ode(), 0.0);
}

TEST(Lambda0, JetDerivativesMatchFiniteDifferences) {
  const EinsteinParams p{3, 0.7, -1.1, 0.4};
  const double phi = 0.37;
  const auto j = lambda0_jet(p, phi);
  const testing_support::LdFn f = [&](const std::vector<long double>& x) {
    return static_cast<long double>(lambda0_of(p, static_cast<double>(x[0])));
  };
  EXPECT_NEAR(j.grad(0), static_cast<double>(testing_support::central(f, {phi}, {0}, 1e-5L)), 1e-8);
}

TEST(TaubNut, RoundTripOdeAndMass) {
  EXPECT_THROW(taubnut_map(EinsteinParams{2, 1, 0, 0}, 1.0), std::invalid_argument);
  const EinsteinParams p{2, 0, 1, 0};
  EXPECT_NEAR(taubnut_map(p, 0.0).phi, 0.0, 1e-15);
  Gen g(103);
  for (int k = 0; k < 200; ++k) {
    const double r = g.uniform(-10, 10);
    const auto t = taubnut_map(p, r);
    EXPECT_LT(t.roundtrip, 1e-12);
    EXPECT_LT(t.F_ode_residual, 1e-8);
  }
  for (int draw = 0; draw < 10; ++draw) {
    const int m = g.integer(1, 3);
    const EinsteinParams q{m, g.uniform(-2, 2), g.uniform(0.5, 2) * (g.integer(0, 1) ? 1 : -1), g.uniform(-1, 1)};
    for (double r : {-7.0, -0.5, 0.0, 2.0, 9.0}) {
      const auto t = taubnut_map(q, r);
      EXPECT_LT(t.F_ode_residual, 1e-8);
      EXPECT_NEAR(t.M_extracted, t.M, 1e-6 * std::max(1.0, std::abs(t.M))) << "m=" << m << " r=" << r;
    }
  }
}

TEST(Spacetime, FrameMetricPatternAndSignature) {
  Gen g(104);
  const auto md = assemble_general(heisenberg(2), random_general_lambda(g, heisenberg(2)));
  for (int k = 0; k < 10; ++k) {
    const auto pt = spacetime_point(g, 2);
    const auto f = spacetime_frame<1>(md, pt);
    const int D = md.D, L = D - 1;
    PointTensor gt = PointTensor::covariant(D, 2);
    for (int i = 0; i < D * D; ++i) gt.c[i] = f.metric[i].value();
    const auto gf = frame_components(gt, f.frame);
    for (int I = 0; I < D; ++I)
      for (int J = 0; J < D; ++J) {
        const bool pair = (I == 0 && J == L) || (I == L && J == 0) ||
                          (I >= 1 && I < L && J >= 1 && J < L && std::abs(I - J) == 2);
        EXPECT_NEAR(std::abs(gf(I, J) - (pair ? 1.0 : 0.0)), 0, 1e-10);
      }
    EXPECT_EQ(signature(gt), std::make_pair(D - 1, 1));
  }
}

TEST(Spacetime, EinsteinModelMatchesGeneralModelBitForBit) {
  const EinsteinParams p{2, 1.0, 0.0, 0.3};
  const auto a = assemble_einstein(heisenberg(2), p);
  GeneralLambda gl;
  const auto b = assemble_general(heisenberg(2), einstein_lambda(p));
  const std::vector<double> pt{0.3, 0.1, -0.2, 0.4, 0.5, -0.6};
  const auto ga = a.g.eval(pt), gb = b.g.eval(pt);
  for (std::size_t i = 0; i < ga.size(); ++i) EXPECT_EQ(ga[i].value(), gb[i].value());
}

TEST(Spacetime, AssembleEinsteinRejectsMismatchedBaseConstant) {
  try {
    assemble_einstein(heisenberg(2), EinsteinParams{2, 1.0, 0.5, 0.0});
    FAIL();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("0.5"), std::string::npos) << msg;
    EXPECT_NE(msg.find("base constant 0"), std::string::npos) << msg;
  }
  EXPECT_NEAR(base_einstein_constant(fs_lift(2)), 3.0, 1e-7);
  EXPECT_NEAR(base_einstein_constant(heisenberg(3)), 0.0, 1e-12);
}

TEST(Einstein, HeisenbergResidualAndNoRadiation) {
  Gen g(105);
  const auto md = assemble_einstein(heisenberg(2), EinsteinParams{2, 1.0, 0.0, 0.3});
  for (int k = 0; k < 40; ++k) {
    const auto pt = spacetime_point(g, 2);
    const auto r = einstein_residual(md, pt);
    EXPECT_LT(r.einstein, 1e-7);
    EXPECT_LT(r.radiation, 1e-8);
  }
}

TEST(Einstein, FsLiftResidualRandomParams) {
  Gen g(106);
  for (int m : {2, 3}) {
    const double ul = base_einstein_constant(fs_lift(m));
    for (int draw = 0; draw < 2; ++draw) {
      const auto md = assemble_einstein(fs_lift(m), random_params(g, m, ul));
      for (int k = 0; k < 5; ++k) EXPECT_LT(einstein_residual(md, spacetime_point(g, m)).einstein, 1e-7);
    }
  }
}

TEST(Einstein, SchoutenStepsEachVanish) {
  Gen g(107);
  const auto md = assemble_einstein(heisenberg(2), random_params(g, 2, 0.0));
  for (int k = 0; k < 10; ++k) {
    const auto s = schouten_steps(md, spacetime_point(g, 2));
    for (int i = 0; i < SchoutenSteps::kCount; ++i) EXPECT_LT(s.residual[i], 1e-7) << SchoutenSteps::kNames[i];
  }
}

TEST(Einstein, ConformallyFlatWhenAllParametersVanish) {
  Gen g(108);
  const auto md = assemble_einstein(heisenberg(2), EinsteinParams{2, 0, 0, 0});
  for (int k = 0; k < 20; ++k) EXPECT_LT(einstein_residual(md, spacetime_point(g, 2)).weyl, 1e-7);
}

TEST(Bce, EinsteinCaseValues) {
  Gen g(109);
  const EinsteinParams p = random_params(g, 2, 0.0);
  const auto md = assemble_einstein(heisenberg(2), p);
  for (int k = 0; k < 5; ++k) {
    const auto pt = spacetime_point(g, 2);
    const auto r = bce_coefficients(md, pt);
    const auto l = lambda0_jet(p, pt[0]);
    for (int a = 0; a < 2; ++a) {
      EXPECT_LT(std::abs(r.C[a]), 1e-12);
      EXPECT_LT(std::abs(r.E[a]), 1e-12);
      for (int b = 0; b < 2; ++b) {
        EXPECT_LT(std::abs(r.B_uu[a * 2 + b]), 1e-12);
        const cplx expect = a == b ? cplx(0, -0.5 * l.value()) : 0.0;
        EXPECT_LT(std::abs(r.B_ub[a * 2 + b] - expect), 1e-12);
      }
    }
    EXPECT_NEAR(std::abs(r.E0 - 0.5 * l.grad(0)), 0, 1e-12);
    EXPECT_LT(r.dlambda_residual, 1e-8);
  }
}

TEST(Bce, VanishForLambdaEqualToDphi) {
  GeneralLambda gl;
  const std::vector<std::string> c{"phi", "t", "x1", "y1", "x2", "y2"};
  gl.lambda0 = parse_expression("0", c);
  gl.lambda_a = {parse_expression("0", c), parse_expression("0", c)};
  const auto r = bce_coefficients(assemble_general(heisenberg(2), gl), {0.2, 0.1, 0.3, -0.4, 0.2, 0.5});
  for (const auto& x : r.B_uu) EXPECT_EQ(std::abs(x), 0.0);
  for (const auto& x : r.B_ub) EXPECT_EQ(std::abs(x), 0.0);
  for (const auto& x : r.C) EXPECT_EQ(std::abs(x), 0.0);
  for (const auto& x : r.E) EXPECT_EQ(std::abs(x), 0.0);
  EXPECT_EQ(std::abs(r.E0), 0.0);
}

TEST(Bce, DLambdaExpansionRoundTripsForRandomLambda) {
  Gen g(110);
  for (int draw = 0; draw < 5; ++draw) {
    const auto md = assemble_general(heisenberg(2), random_general_lambda(g, heisenberg(2)));
    for (int k = 0; k < 5; ++k) EXPECT_LT(bce_coefficients(md, spacetime_point(g, 2)).dlambda_residual, 1e-8);
  }
}

TEST(CoframeDerivatives, EinsteinModels) {
  Gen g(111);
  for (int draw = 0; draw < 3; ++draw) {
    const auto md = assemble_einstein(heisenberg(2), random_params(g, 2, 0.0));
    for (int k = 0; k < 5; ++k) {
      const auto r = coframe_derivative_check(md, spacetime_point(g, 2));
      EXPECT_LT(r.kappa, 1e-8);
      EXPECT_LT(r.theta, 1e-8);
      EXPECT_LT(r.lambda, 1e-8);
    }
  }
  // the opposite sign of the kappa-theta term is off by exactly |lambda0|
  const EinsteinParams p{2, 0.9, 0.0, 0.2};
  const std::vector<double> pt{0.4, 0.1, 0.2, -0.3, 0.4, 0.1};
  const auto r = coframe_derivative_check(assemble_einstein(heisenberg(2), p), pt);
  EXPECT_NEAR(r.theta_printed, std::abs(lambda0_of(p, pt[0])), 1e-8);
  const auto flat = assemble_einstein(heisenberg(2), EinsteinParams{2, 0, 0, 0});
  EXPECT_LT(coframe_derivative_check(flat, {0.3, 0.1, 0.2, -0.3, 0.4, 0.1}).lambda, 1e-10);
}

TEST(Killing, SymmetryAndNorm) {
  Gen g(112);
  for (const auto& [base, ul] : {std::pair{heisenberg(2), 0.0}, std::pair{fs_lift(2), 3.0}}) {
    for (int draw = 0; draw < 3; ++draw) {
      const auto md = assemble_einstein(base, random_params(g, 2, ul));
      for (int k = 0; k < 5; ++k) {
        const auto r = killing_check(md, spacetime_point(g, 2));
        EXPECT_LT(r.sym, 1e-8);
        EXPECT_LT(r.norm, 1e-10);
      }
    }
  }
}

TEST(Fefferman, CriteriaOnFsLift) {
  Gen g(113);
  const auto md = assemble_einstein(fs_lift(2), fefferman_params(2, 3.0));
  for (int k = 0; k < 5; ++k) {
    const auto pt = spacetime_point(g, 2);
    const auto r = fefferman_criteria(md, pt);
    EXPECT_LT(r.weyl, 1e-7);
    EXPECT_LT(r.cotton, 1e-6);
    EXPECT_NEAR(r.scalar, -1.0, 1e-8);
    EXPECT_LT(r.lambda0_spread, 1e-12);
    EXPECT_LT(conformal_killing_residual(md, pt), 1e-8);
  }
  const auto flat = assemble_einstein(heisenberg(2), EinsteinParams{2, 0, 0, 0});
  const auto r = fefferman_criteria(flat, {0.3, 0.1, 0.2, -0.3, 0.4, 0.1});
  EXPECT_NEAR(r.scalar, -1.0, 1e-8);
  EXPECT_LT(r.weyl, 1e-7);
  const auto other = assemble_einstein(heisenberg(2), EinsteinParams{2, 1, 0, 0});
  EXPECT_THROW(fefferman_criteria(other, {0.3, 0.1, 0.2, -0.3, 0.4, 0.1}), PreconditionError);
}

TEST(KerrSchild, DifferenceIsNullTerm) {
  Gen g(114);
  const auto fe = assemble_einstein(fs_lift(2), fefferman_params(2, 3.0));
  EXPECT_EQ(kerr_schild_check(fe, {0.3, 0.1, 0.2, -0.3, 0.4, 0.1}), 0.0);
  const auto md = assemble_einstein(heisenberg(2), EinsteinParams{2, 1, 0, 0.5});
  for (int k = 0; k < 10; ++k) EXPECT_LT(kerr_schild_check(md, spacetime_point(g, 2)), 1e-9);
}

TEST(DualRobinson, GenericAndParallelBranches) {
  Gen g(115);
  const auto md = assemble_einstein(heisenberg(2), EinsteinParams{2, 1.3, 0, 0.4});
  for (int k = 0; k < 10; ++k) {
    const auto r = dual_robinson_check(md, spacetime_point(g, 2));
    EXPECT_FALSE(r.parallel_branch);
    EXPECT_LT(r.lambda_prime, 1e-8);
    EXPECT_LT(r.kappa_prime, 1e-8);
    EXPECT_LT(r.geodesy, 1e-9);
    EXPECT_LT(r.shear, 1e-9);
    EXPECT_LT(r.expansion, 1e-9);
  }
  const auto flat = assemble_einstein(heisenberg(2), EinsteinParams{2, 0, 0, 0});
  const auto r = dual_robinson_check(flat, {0.3, 0.1, 0.2, -0.3, 0.4, 0.1});
  EXPECT_TRUE(r.parallel_branch);
  EXPECT_LT(r.lambda_prime, 1e-10);
}

TEST(Optical, EinsteinCongruenceAndRescaledExpansion) {
  Gen g(116);
  const auto md = assemble_einstein(heisenberg(2), random_params(g, 2, 0.0));
  for (int k = 0; k < 10; ++k) {
    const auto pt = spacetime_point(g, 2);
    const auto inv = congruence_invariants<1>(optical_setup<1>(md, pt, false));
    EXPECT_LT(inv.geodesy, 1e-9);
    EXPECT_LT(inv.max_shear(), 1e-9);
    EXPECT_LT(std::abs(inv.expansion), 1e-9);
    EXPECT_LT(twist_complex_structure_residual(inv), 1e-9);
    for (int a = 0; a < 2; ++a) EXPECT_NEAR(std::abs(inv.twist[a * 4 + 2 + a] - cplx(0, 1)), 0, 1e-9);
    const auto hat = congruence_invariants<1>(optical_setup<1>(md, pt, true));
    EXPECT_NEAR(std::abs(hat.expansion - 4.0 * std::tan(pt[0])), 0, 1e-9);
  }
}

#pragma once
// Verification suites over seeded sample points, and their JSON and CSV reports.
// Every check folds per-sample residuals into max_abs and max_rel, where a sample's
// relative residual is |r| / max(1, |reference|); a check passes when max_rel <= tol.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "nullcong/appendix.hpp"
#include "nullcong/optical.hpp"
#include "nullcong/properties.hpp"
#include "nullcong/robinson.hpp"
#include "nullcong/sampling.hpp"
#include "nullcong/webster.hpp"

namespace nullcong {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string suite = "all";
  int m = 2;
  std::string base = "heisenberg";  // heisenberg | fs-lift | file:<path>
  double lambda = 1.0;
  std::optional<double> ulambda;    // empty: read from the base
  double c = 0.0;
  int samples = 20;
  std::uint64_t seed = 42;
  std::optional<double> tol;        // empty: per-check defaults
  double phi_margin = 0.2;
  std::string format = "json";
  int jobs = 1;
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"einstein",       "appendix", "twist-identity", "weyl-degeneracy",
                                              "cr-base",        "lambda0",  "fefferman",      "taubnut",
                                              "killing",        "dual-robinson", "conformal-laws"};
  return names;
}

inline void validate_config(const RunConfig& c) {
  const auto& names = suite_names();
  if (c.suite != "all" && std::find(names.begin(), names.end(), c.suite) == names.end())
    throw UsageError("unknown suite '" + c.suite + "'");
  if (c.m < 1 || c.m > 3) throw UsageError("m must be 1, 2 or 3");
  if (c.base != "heisenberg" && c.base != "fs-lift" && c.base.rfind("file:", 0) != 0)
    throw UsageError("base must be heisenberg, fs-lift or file:<path>");
  if (c.samples < 1) throw UsageError("samples must be at least 1");
  if (!(c.phi_margin > 0 && c.phi_margin < kHalfPi)) throw UsageError("phi-margin must lie in (0, pi/2)");
  if (c.tol && !(*c.tol > 0)) throw UsageError("tol must be positive");
  if (c.format != "json" && c.format != "csv") throw UsageError("format must be json or csv");
  if (c.jobs < 1) throw UsageError("jobs must be at least 1");
  for (double v : {c.lambda, c.c})
    if (!std::isfinite(v)) throw UsageError("parameters must be finite");
  if (c.ulambda && !std::isfinite(*c.ulambda)) throw UsageError("ulambda must be finite");
}

struct Check {
  std::string name;
  long samples = 0;
  double max_abs = 0, max_rel = 0, tol = 0;
  bool pass = true;
  std::optional<double> value;
  std::vector<double> values;
  std::optional<std::string> message;
  std::optional<std::vector<double>> point;
};

struct Report {
  std::string suite;
  RunConfig config;
  std::vector<Check> checks;
  bool pass = true;
  bool evaluation_error = false;
  double wall_ms = 0;
  int exit_code() const { return evaluation_error ? 3 : (pass ? 0 : 1); }
};

namespace detail {

struct Sample {
  double abs = 0;
  double ref = 0;
  std::string label;             // reported as the message of the worst sample
  std::optional<double> value;   // reported as the value of the worst sample
};

struct CheckSpec {
  std::string name;
  double tol;
};

using PointSamples = std::vector<std::optional<Sample>>;

struct EvaluationError : std::runtime_error {
  EvaluationError(const std::string& what, std::vector<double> at) : std::runtime_error(what), point(std::move(at)) {}
  std::vector<double> point;
};

// Evaluate f on every point with up to `jobs` threads. Results are stored by index;
// the error of the lowest failing index is rethrown with its point.
template <class T, class F>
std::vector<T> evaluate_points(const std::vector<std::vector<double>>& pts, int jobs, F f) {
  const std::size_t n = pts.size();
  std::vector<T> out(n);
  std::vector<std::optional<std::string>> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = f(i, pts[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < n; ++i)
    if (errors[i]) throw EvaluationError("point " + std::to_string(i) + ": " + *errors[i], pts[i]);
  return out;
}

inline bool passes(double max_rel, double tol) { return max_rel <= tol; }  // false for NaN

inline Check make_check(const std::string& name, long samples, double max_abs, double ref, double tol) {
  Check c;
  c.name = name;
  c.samples = samples;
  c.max_abs = max_abs;
  c.max_rel = max_abs / std::max(1.0, std::abs(ref));
  c.tol = tol;
  c.pass = passes(c.max_rel, tol);
  return c;
}

// Fold per-point samples into one check per spec, in spec order. Specs without any
// sample are dropped; failing checks carry their worst point.
inline std::vector<Check> fold(const std::vector<CheckSpec>& specs, const std::vector<PointSamples>& res,
                               const std::vector<std::vector<double>>& pts) {
  std::vector<Check> out;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    Check c;
    c.name = specs[k].name;
    c.tol = specs[k].tol;
    std::size_t worst = 0;
    const Sample* worst_sample = nullptr;
    for (std::size_t i = 0; i < res.size(); ++i) {
      if (k >= res[i].size() || !res[i][k]) continue;
      const Sample& s = *res[i][k];
      const double rel = s.abs / std::max(1.0, std::abs(s.ref));
      ++c.samples;
      if (std::isnan(c.max_rel)) continue;
      c.max_abs = std::isnan(s.abs) ? s.abs : std::max(c.max_abs, s.abs);
      if (worst_sample == nullptr || std::isnan(rel) || rel > c.max_rel) {
        c.max_rel = rel;
        worst = i;
        worst_sample = &s;
      }
    }
    if (c.samples == 0) continue;
    c.pass = passes(c.max_rel, c.tol);
    if (!worst_sample->label.empty()) c.message = "worst: " + worst_sample->label;
    c.value = worst_sample->value;
    if (!c.pass) c.point = pts[worst];
    out.push_back(std::move(c));
  }
  return out;
}

inline Sample sample(double abs, double ref = 0, std::string label = {}) { return Sample{abs, ref, std::move(label), {}}; }

inline CRBase load_base(const RunConfig& c) {
  if (c.base == "heisenberg") return heisenberg(c.m);
  if (c.base == "fs-lift") return fs_lift(c.m);
  CRBase b;
  try {
    b = load_manifest(c.base.substr(5));
  } catch (const std::exception& e) {
    throw UsageError(std::string("cannot load base: ") + e.what());
  }
  if (b.m != c.m)
    throw UsageError("base manifest declares m = " + std::to_string(b.m) + " but --m is " + std::to_string(c.m));
  return b;
}

// Shared state of one run: the base, its CR–Einstein constant when it has one, and
// per-suite random streams.
class SuiteContext {
 public:
  explicit SuiteContext(const RunConfig& cfg) : cfg_(cfg), base_(load_base(cfg)) {
    try {
      base_constant_ = base_einstein_constant(base_);
    } catch (const std::exception& e) {
      base_error_ = e.what();
    }
    if (cfg.ulambda && base_constant_ && std::abs(*cfg.ulambda - *base_constant_) > 1e-7) {
      std::ostringstream os;
      os.precision(17);
      os << "ulambda " << *cfg.ulambda << " does not match the base constant " << *base_constant_;
      throw UsageError(os.str());
    }
  }

  const RunConfig& config() const { return cfg_; }
  const CRBase& base() const { return base_; }
  bool has_params() const { return base_constant_.has_value(); }

  double ulambda() const {
    if (!base_constant_) throw UsageError("suite needs a CR–Einstein base: " + base_error_);
    return cfg_.ulambda.value_or(*base_constant_);
  }
  EinsteinParams params() const { return EinsteinParams{cfg_.m, cfg_.lambda, ulambda(), cfg_.c}; }
  SpacetimeModel einstein_model() const { return assemble_einstein(base_, params(), false); }

  std::uint64_t stream(const std::string& suite, std::uint64_t sub = 0) const {
    const auto& names = suite_names();
    const auto id = static_cast<std::uint64_t>(std::find(names.begin(), names.end(), suite) - names.begin());
    return derive_seed(derive_seed(cfg_.seed, id), sub);
  }
  std::vector<std::vector<double>> points(const std::string& suite, int count) const {
    return sample_points(stream(suite), count, base_.dim(), cfg_.phi_margin);
  }

  // The ten random polynomial lambda fields shared by the appendix and twist suites.
  std::vector<SpacetimeModel> general_models() const {
    Rng rng(stream("appendix", 1));
    std::vector<SpacetimeModel> out;
    for (int j = 0; j < 10; ++j) out.push_back(assemble_general(base_, random_general_lambda(rng, base_)));
    return out;
  }

 private:
  RunConfig cfg_;
  CRBase base_;
  std::optional<double> base_constant_;
  std::string base_error_;
};

inline double worst_value(const std::vector<FamilyResidual>& fs, std::string& label) {
  double w = -1;
  for (const auto& f : fs) {
    if (!(f.residual <= w)) {
      w = f.residual;
      label = f.name;
    }
    if (std::isnan(w)) break;
  }
  return std::max(w, 0.0);
}

inline std::vector<Check> suite_einstein(const SuiteContext& ctx) {
  const auto md = ctx.einstein_model();
  const auto& p = *md.params;
  const bool flat = p.Lambda == 0 && p.uLambda == 0 && p.c == 0;
  std::vector<CheckSpec> specs{{"einstein-residual", 1e-7}, {"radiation", 1e-8},  {"schouten-steps", 1e-7},
                               {"weyl-components", 1e-7},   {"kerr-schild", 1e-9}, {"coframe-derivatives", 1e-8}};
  if (flat) specs.push_back({"conformal-flatness", 1e-7});
  const auto pts = ctx.points("einstein", ctx.config().samples);
  const auto res = evaluate_points<PointSamples>(pts, ctx.config().jobs, [&](std::size_t, const std::vector<double>& pt) {
    const auto er = einstein_residual(md, pt);
    const auto st = schouten_steps(md, pt);
    std::size_t ws = 0;
    for (std::size_t i = 1; i < st.residual.size(); ++i)
      if (st.residual[i] > st.residual[ws]) ws = i;
    std::string wl;
    const double wr = worst_value(weyl_einstein_components(md, pt), wl);
    const auto cd = coframe_derivative_check(md, pt);
    PointSamples s{sample(er.einstein),
                   sample(er.radiation),
                   sample(st.residual[ws], 0, SchoutenSteps::kNames[ws]),
                   sample(wr, 0, wl),
                   sample(kerr_schild_check(md, pt)),
                   sample(std::max({cd.kappa, cd.theta, cd.lambda}))};
    if (flat) s.push_back(sample(er.weyl));
    return s;
  });
  return fold(specs, res, pts);
}

inline std::vector<Check> suite_appendix(const SuiteContext& ctx) {
  const auto models = ctx.general_models();
  const std::vector<CheckSpec> specs{{"riemann", 1e-7}, {"ricci", 1e-7}, {"bianchi", 1e-8}, {"weyl-cr", 1e-7}};
  const auto pts = ctx.points("appendix", 10 * ctx.config().samples);
  const auto res = evaluate_points<PointSamples>(pts, ctx.config().jobs, [&](std::size_t i, const std::vector<double>& pt) {
    const auto& md = models[i % models.size()];
    const auto r = appendix_residuals(md, pt);
    PointSamples s;
    std::string label;
    for (const auto* fam : {&r.riemann, &r.ricci, &r.bianchi}) {
      const double v = worst_value(*fam, label);
      s.push_back(sample(v, 0, label));
    }
    const double w = worst_value(weyl_cr_relations(md, pt), label);
    s.push_back(sample(w, 0, label));
    return s;
  });
  return fold(specs, res, pts);
}

inline std::vector<Check> suite_twist_identity(const SuiteContext& ctx) {
  const auto models = ctx.general_models();
  std::optional<SpacetimeModel> emd;
  if (ctx.has_params()) emd = ctx.einstein_model();
  std::vector<CheckSpec> specs{{"precondition-geodesy", 1e-9}, {"precondition-shear", 1e-9},
                               {"precondition-expansion", 1e-9}, {"identity-general", 1e-7}};
  if (emd) specs.push_back({"identity-einstein", 1e-7});
  const auto pts = ctx.points("twist-identity", ctx.config().samples);
  const auto res = evaluate_points<PointSamples>(pts, ctx.config().jobs, [&](std::size_t i, const std::vector<double>& pt) {
    PointSamples s(specs.size());
    double geo = 0, shear = 0, expn = 0;
    auto identity = [&](const SpacetimeModel& md) -> std::optional<Sample> {
      const auto setup = optical_setup<2>(md, pt, false);
      const auto inv = congruence_invariants<2>(setup);
      geo = std::max(geo, inv.geodesy);
      shear = std::max(shear, inv.max_shear());
      expn = std::max(expn, std::abs(inv.expansion));
      // the identity is only asserted where the congruence is non-shearing and non-expanding
      if (inv.geodesy > 1e-9 || inv.max_shear() > 1e-9 || std::abs(inv.expansion) > 1e-9) return std::nullopt;
      return sample(weyl_twist_identity(setup).residual);
    };
    s[3] = identity(models[i % models.size()]);
    if (emd) s[4] = identity(*emd);
    s[0] = sample(geo);
    s[1] = sample(shear);
    s[2] = sample(expn);
    return s;
  });
  return fold(specs, res, pts);
}

inline std::vector<Check> suite_weyl_degeneracy(const SuiteContext& ctx) {
  const int m = ctx.config().m;
  const auto emd = ctx.einstein_model();
  const auto flat = assemble_einstein(heisenberg(m), EinsteinParams{m, 0, 0, 0}, false);
  static const char* roman[5] = {"i", "ii", "iii", "iv", "v"};
  std::vector<CheckSpec> specs;
  for (int c = 0; c < 4; ++c) specs.push_back({std::string("einstein-") + roman[c], 1e-8});
  for (int c = 0; c < 5; ++c) specs.push_back({std::string("flat-") + roman[c], 1e-7});
  const auto pts = ctx.points("weyl-degeneracy", ctx.config().samples);
  const auto res = evaluate_points<PointSamples>(pts, ctx.config().jobs, [&](std::size_t, const std::vector<double>& pt) {
    const auto e = weyl_degeneracy_at(emd, pt);
    const auto f = weyl_degeneracy_at(flat, pt);
    PointSamples s;
    for (int c = 0; c < 4; ++c) s.push_back(sample(e.residual[c]));
    for (int c = 0; c < 5; ++c) s.push_back(sample(f.residual[c]));
    return s;
  });
  return fold(specs, res, pts);
}

inline std::vector<Check> suite_cr_base(const SuiteContext& ctx) {
  const auto& cfg = ctx.config();
  const CRBase& base = ctx.base();
  const bool builtin = cfg.base == "heisenberg" || cfg.base == "fs-lift";
  const bool flat_model = cfg.base == "heisenberg";
  std::optional<SpacetimeModel> emd;
  if (ctx.has_params()) emd = ctx.einstein_model();
  std::vector<CheckSpec> specs{{"structure-roundtrip", 1e-9}, {"adapted-coframe", 1e-9}, {"webster-invariants", 1e-10},
                               {"cr-einstein", 1e-7},         {"chern-moser", 1e-6},     {"rescaled-expansion", 1e-9}};
  struct Outcome {
    PointSamples s;
    double lambda = 0;
  };
  const auto pts = ctx.points("cr-base", cfg.samples);
  const auto res = evaluate_points<Outcome>(pts, cfg.jobs, [&](std::size_t, const std::vector<double>& pt) {
    const std::vector<double> bpt(pt.begin() + 1, pt.end());
    const auto wp = webster_pack(base, bpt);
    const auto cr = cr_einstein_check(base, bpt);
    Outcome o;
    o.s.resize(specs.size());
    o.s[0] = sample(std::max(wp.roundtrip_residual, wp.hermitian_residual));
    o.s[1] = sample(wp.adapted_residual);
    if (flat_model)
      o.s[2] = sample(std::max({wp.max_connection, wp.max_curvature, max_abs(wp.torsion), max_abs(wp.nijenhuis)}));
    o.s[3] = sample(cr.worst());
    if (builtin) o.s[4] = sample(max_abs(wp.chern_moser));
    if (emd) {
      const auto hat = congruence_invariants<1>(optical_setup<1>(*emd, pt, true));
      const double expected = 2.0 * cfg.m * std::tan(pt[0]);
      o.s[5] = sample(std::abs(hat.expansion - expected));
    }
    o.lambda = cr.lambda;
    return o;
  });
  std::vector<PointSamples> samples;
  double lo = 1e300, hi = -1e300;
  for (const auto& o : res) {
    samples.push_back(o.s);
    lo = std::min(lo, o.lambda);
    hi = std::max(hi, o.lambda);
  }
  auto out = fold(specs, samples, pts);
  Check spread = make_check("lambda-spread", static_cast<long>(res.size()), hi - lo, 0, 1e-7);
  spread.value = res.front().lambda;
  out.push_back(spread);
  return out;
}

inline std::vector<Check> suite_lambda0(const SuiteContext& ctx) {
  const auto& cfg = ctx.config();
  const EinsteinParams p = ctx.params();
  const std::vector<CheckSpec> specs{{"ode-residuals", 1e-10}, {"b-relation", 1e-12}};
  const auto pts = ctx.points("lambda0", cfg.samples);
  const auto res = evaluate_points<PointSamples>(pts, cfg.jobs, [&](std::size_t, const std::vector<double>& pt) {
    const auto r = lambda0_ode_residuals(p, pt[0]);
    return PointSamples{sample(r.worst_ode()), sample(r.rb)};
  });
  auto out = fold(specs, res, pts);

  const double v0 = lambda0_of(p, 0.0);
  Check zero = make_check("value-at-zero", 1, std::abs(v0 - (p.uLambda - p.Lambda)), p.uLambda - p.Lambda, 1e-12);
  zero.value = v0;
  out.push_back(zero);

  const double eps = 1e-3, limit = p.Lambda / (2.0 * p.m + 1);
  double dev = 0;
  for (double s : {-1.0, 1.0}) dev = std::max(dev, std::abs(lambda0_of(p, s * (kHalfPi - eps)) - limit));
  Check boundary = make_check("boundary-limit", 2, dev, limit, 1e-6);
  boundary.value = limit;
  out.push_back(boundary);

  const auto a = aj_coefficients(p.m);
  double rec = std::abs(a[0] - 1.0);
  for (int j = 1; j <= p.m; ++j)
    rec = std::max(rec, std::abs(a[j] * (2.0 * p.m - 2 * j + 1) - (2.0 * p.m - 2 * j + 4) * a[j - 1]));
  Check aj = make_check("aj-coefficients", static_cast<long>(a.size()), rec, 0, 1e-12);
  aj.values = a;
  out.push_back(aj);
  return out;
}

inline std::vector<Check> suite_fefferman(const SuiteContext& ctx) {
  const auto& cfg = ctx.config();
  const auto md = assemble_einstein(ctx.base(), fefferman_params(cfg.m, ctx.ulambda()), false);
  const std::vector<CheckSpec> specs{{"lambda0-spread", 1e-12}, {"conformal-killing", 1e-8}, {"weyl-k", 1e-7},
                                     {"cotton-k", 1e-6},        {"scalar-criterion", 1e-8}};
  const auto pts = ctx.points("fefferman", cfg.samples);
  const auto res = evaluate_points<PointSamples>(pts, cfg.jobs, [&](std::size_t, const std::vector<double>& pt) {
    const auto r = fefferman_criteria(md, pt);
    Sample sc = sample(std::abs(r.scalar + 1.0), 1.0);
    sc.value = r.scalar;
    return PointSamples{sample(r.lambda0_spread), sample(conformal_killing_residual(md, pt)), sample(r.weyl),
                        sample(r.cotton), sc};
  });
  auto out = fold(specs, res, pts);
  out.front().message = "Lambda and c set to the Fefferman branch";
  return out;
}

inline std::vector<Check> suite_taubnut(const SuiteContext& ctx) {
  const auto& cfg = ctx.config();
  const EinsteinParams p = ctx.params();
  if (p.uLambda == 0) throw UsageError("taubnut needs a nonzero ulambda");
  Rng rng(ctx.stream("taubnut"));
  std::vector<std::vector<double>> pts(cfg.samples);
  for (auto& r : pts) r = {rng.uniform(-10.0, 10.0)};
  const std::vector<CheckSpec> specs{{"f-ode", 1e-8}, {"roundtrip", 1e-12}, {"mass", 1e-6}};
  const auto res = evaluate_points<PointSamples>(pts, cfg.jobs, [&](std::size_t, const std::vector<double>& r) {
    const auto t = taubnut_map(p, r[0]);
    Sample mass = sample(std::abs(t.M_extracted - t.M), t.M);
    mass.value = t.M;
    return PointSamples{sample(t.F_ode_residual), sample(t.roundtrip), mass};
  });
  return fold(specs, res, pts);
}

inline std::vector<Check> suite_killing(const SuiteContext& ctx) {
  const auto md = ctx.einstein_model();
  const std::vector<CheckSpec> specs{{"killing-symmetry", 1e-8}, {"killing-norm", 1e-10}};
  const auto pts = ctx.points("killing", ctx.config().samples);
  const auto res = evaluate_points<PointSamples>(pts, ctx.config().jobs, [&](std::size_t, const std::vector<double>& pt) {
    const auto r = killing_check(md, pt);
    return PointSamples{sample(r.sym), sample(r.norm)};
  });
  return fold(specs, res, pts);
}

inline std::vector<Check> suite_dual_robinson(const SuiteContext& ctx) {
  const auto md = ctx.einstein_model();
  const std::vector<CheckSpec> specs{{"lambda-prime", 1e-8}, {"kappa-prime", 1e-8}, {"parallel-lambda", 1e-10},
                                     {"geodesy", 1e-9},      {"shear", 1e-9},       {"expansion", 1e-9}};
  const auto pts = ctx.points("dual-robinson", ctx.config().samples);
  const auto res = evaluate_points<PointSamples>(pts, ctx.config().jobs, [&](std::size_t, const std::vector<double>& pt) {
    const auto r = dual_robinson_check(md, pt);
    PointSamples s(specs.size());
    if (r.parallel_branch) {
      s[2] = sample(r.lambda_prime);
    } else {
      s[0] = sample(r.lambda_prime);
      s[1] = sample(r.kappa_prime);
    }
    s[3] = sample(r.geodesy);
    s[4] = sample(r.shear);
    s[5] = sample(r.expansion);
    return s;
  });
  return fold(specs, res, pts);
}

// Random polynomial metrics alternating between dimensions 4 and 6 and between
// Lorentzian and Riemannian signature, one sample point each.
inline std::vector<Check> suite_conformal_laws(const SuiteContext& ctx) {
  const auto& cfg = ctx.config();
  const std::vector<CheckSpec> specs{{"ricci-identity", 1e-7},
                                     {"weyl-trace", 1e-7},
                                     {"weyl-conformal-invariance", 1e-7},
                                     {"connection-law", 1e-7},
                                     {"schouten-law", 1e-7}};
  std::vector<std::vector<double>> pts(cfg.samples);
  for (int i = 0; i < cfg.samples; ++i) {
    Rng rng(ctx.stream("conformal-laws", 2 * i));
    const int d = i % 2 ? 6 : 4;
    for (int a = 0; a < d; ++a) pts[i].push_back(rng.uniform(-1.0, 1.0));
  }
  const auto res = evaluate_points<PointSamples>(pts, cfg.jobs, [&](std::size_t i, const std::vector<double>& pt) {
    Rng rng(ctx.stream("conformal-laws", 2 * i + 1));
    const int d = static_cast<int>(pt.size());
    const MetricField mf = random_polynomial_metric(rng, d, i % 3 != 0);
    const auto phi = random_conformal_factor(rng, d);
    const auto laws = transform_law_residuals(mf, phi, pt);
    return PointSamples{sample(ricci_identity_residual(mf, pt, rng)), sample(weyl_trace_residual(curvature_pack(mf, pt, 2))),
                        sample(weyl_conformal_residual(mf, phi, pt)), sample(laws.connection), sample(laws.schouten)};
  });
  return fold(specs, res, pts);
}

inline std::vector<Check> run_named(const SuiteContext& ctx, const std::string& suite) {
  if (suite == "einstein") return suite_einstein(ctx);
  if (suite == "appendix") return suite_appendix(ctx);
  if (suite == "twist-identity") return suite_twist_identity(ctx);
  if (suite == "weyl-degeneracy") return suite_weyl_degeneracy(ctx);
  if (suite == "cr-base") return suite_cr_base(ctx);
  if (suite == "lambda0") return suite_lambda0(ctx);
  if (suite == "fefferman") return suite_fefferman(ctx);
  if (suite == "taubnut") return suite_taubnut(ctx);
  if (suite == "killing") return suite_killing(ctx);
  if (suite == "dual-robinson") return suite_dual_robinson(ctx);
  if (suite == "conformal-laws") return suite_conformal_laws(ctx);
  throw UsageError("unknown suite '" + suite + "'");
}

}  // namespace detail

// Run one suite, or every suite for "all" (check names prefixed by the suite; suites
// whose preconditions the configuration does not meet are listed as skipped with zero
// samples). Configuration problems throw UsageError; evaluation failures produce a
// failing report whose last check records the message and point.
inline Report run_suite(const RunConfig& cfg) {
  validate_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  Report rep;
  rep.suite = cfg.suite;
  rep.config = cfg;
  const detail::SuiteContext ctx(cfg);
  try {
    if (cfg.suite == "all") {
      for (const auto& name : suite_names()) {
        std::vector<Check> cs;
        try {
          cs = detail::run_named(ctx, name);
        } catch (const UsageError& e) {
          Check skip;
          skip.name = "skipped";
          skip.message = e.what();
          cs.push_back(skip);
        }
        for (auto& c : cs) {
          c.name = name + "/" + c.name;
          rep.checks.push_back(std::move(c));
        }
      }
    } else {
      rep.checks = detail::run_named(ctx, cfg.suite);
    }
  } catch (const detail::EvaluationError& e) {
    Check c;
    c.name = "evaluation-error";
    c.pass = false;
    c.message = e.what();
    c.point = e.point;
    rep.checks.push_back(std::move(c));
    rep.evaluation_error = true;
  }
  if (cfg.tol)
    for (auto& c : rep.checks)
      if (c.samples > 0) {
        c.tol = *cfg.tol;
        c.pass = detail::passes(c.max_rel, c.tol);
      }
  rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const Check& c) { return c.pass; });
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// ---- emission -------------------------------------------------------------------

// 17 significant digits; non-finite values become `nonfinite` (null in JSON).
inline std::string format_number(double v, const char* nonfinite = "null") {
  if (std::isnan(v)) return nonfinite;
  if (std::isinf(v)) return std::string(nonfinite) == "null" ? "null" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string quote(const std::string& s) { return nlohmann::json(s).dump(); }

inline std::string config_json(const RunConfig& c) {
  std::ostringstream os;
  os << "{\"suite\": " << quote(c.suite) << ", \"m\": " << c.m << ", \"base\": " << quote(c.base)
     << ", \"lambda\": " << format_number(c.lambda)
     << ", \"ulambda\": " << (c.ulambda ? format_number(*c.ulambda) : quote("auto")) << ", \"c\": " << format_number(c.c)
     << ", \"samples\": " << c.samples << ", \"seed\": " << c.seed
     << ", \"tol\": " << (c.tol ? format_number(*c.tol) : "null") << ", \"phi_margin\": " << format_number(c.phi_margin)
     << ", \"format\": " << quote(c.format) << "}";
  return os.str();
}

inline std::string numbers_json(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v[i]);
  return s + "]";
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace detail

// The job count is not echoed, so reports do not depend on parallelism.
inline std::string emit_json(const Report& r) {
  std::ostringstream os;
  os << "{\n  \"suite\": " << detail::quote(r.suite) << ",\n  \"config\": " << detail::config_json(r.config)
     << ",\n  \"checks\": [";
  for (std::size_t i = 0; i < r.checks.size(); ++i) {
    const Check& c = r.checks[i];
    os << (i ? ",\n    {" : "\n    {") << "\"name\": " << detail::quote(c.name) << ", \"samples\": " << c.samples
       << ", \"max_abs\": " << format_number(c.max_abs) << ", \"max_rel\": " << format_number(c.max_rel)
       << ", \"tol\": " << format_number(c.tol) << ", \"pass\": " << (c.pass ? "true" : "false");
    if (c.value) os << ", \"value\": " << format_number(*c.value);
    if (!c.values.empty()) os << ", \"values\": " << detail::numbers_json(c.values);
    if (c.message) os << ", \"message\": " << detail::quote(*c.message);
    if (c.point) os << ", \"point\": " << detail::numbers_json(*c.point);
    os << "}";
  }
  os << (r.checks.empty() ? "],\n" : "\n  ],\n") << "  \"pass\": " << (r.pass ? "true" : "false")
     << ",\n  \"wall_ms\": " << format_number(r.wall_ms) << "\n}\n";
  return os.str();
}

inline std::string emit_csv(const Report& r) {
  std::ostringstream os;
  os << "check,samples,max_abs,max_rel,tol,pass\n";
  for (const Check& c : r.checks)
    os << detail::csv_field(c.name) << ',' << c.samples << ',' << format_number(c.max_abs, "nan") << ','
       << format_number(c.max_rel, "nan") << ',' << format_number(c.tol, "nan") << ',' << (c.pass ? "true" : "false")
       << '\n';
  return os.str();
}

inline std::string emit(const Report& r, const std::string& format) {
  if (format == "csv") return emit_csv(r);
  if (format == "json") return emit_json(r);
  throw UsageError("format must be json or csv");
}

}  // namespace nullcong

#pragma once
// Seeded, platform-independent sampling: uniform deviates from the raw 64-bit
// Mersenne Twister stream, sample points for spacetime charts and random
// polynomial lambda fields.

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nullcong/robinson.hpp"

namespace nullcong {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  // uniform on [lo, hi) from the top 53 bits of one draw
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  int integer(int lo, int hi) { return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  std::uint64_t next() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

// Independent stream for item `index` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr double kHalfPi = 1.5707963267948966;

// phi uniform in [-pi/2 + margin, pi/2 - margin], base coordinates uniform in [-1, 1].
inline std::vector<std::vector<double>> sample_points(std::uint64_t seed, int count, int base_dim, double margin) {
  Rng rng(seed);
  std::vector<std::vector<double>> pts(count);
  for (auto& p : pts) {
    p.push_back(rng.uniform(-kHalfPi + margin, kHalfPi - margin));
    for (int i = 0; i < base_dim; ++i) p.push_back(rng.uniform(-1.0, 1.0));
  }
  return pts;
}

// Quadratic polynomial lambda over the chart (phi, base coordinates): lambda0 real,
// lambda_a complex, coefficients of order 0.5. G is any generator with uniform(lo, hi)
// and integer(lo, hi), such as Rng.
template <class G>
GeneralLambda random_general_lambda(G& rng, const CRBase& base) {
  std::vector<std::string> coords{"phi"};
  for (const auto& s : base.coords) coords.push_back(s);
  const int n = static_cast<int>(coords.size());
  auto poly = [&](bool complex_coeffs) {
    std::ostringstream os;
    os.precision(17);
    os << rng.uniform(-0.5, 0.5);
    for (int k = 0; k < 5; ++k) {
      const int a = rng.integer(0, n - 1);
      const int b = rng.integer(0, n - 1);
      os << " + (" << rng.uniform(-0.4, 0.4);
      if (complex_coeffs) os << " + i*" << rng.uniform(-0.4, 0.4);
      os << ")*" << coords[a];
      if (rng.integer(0, 1)) os << "*" << coords[b];
    }
    return parse_expression(os.str(), coords);
  };
  GeneralLambda gl;
  gl.lambda0 = poly(false);
  for (int a = 0; a < base.m; ++a) gl.lambda_a.push_back(poly(true));
  return gl;
}

}  // namespace nullcong

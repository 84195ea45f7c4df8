#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace prodnet {

// Stream salts keep the per-firm substreams of different operations disjoint
// even when a caller reuses one seed across them.
inline constexpr std::uint64_t kStreamDegrees = 0;
inline constexpr std::uint64_t kStreamMatrix = 1ULL << 32;
inline constexpr std::uint64_t kStreamShocks = 2ULL << 32;
inline constexpr std::uint64_t kStreamScalar = 3ULL << 32;

// Counter-based generator: value k of a stream is a pure function of
// (seed, stream, k).  Draws can be produced in any order, from any thread,
// and the realized numbers never depend on scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : base_(splitmix64(splitmix64(seed ^ 0x243F6A8885A308D3ULL) +
                         splitmix64(stream * 0x9E3779B97F4A7C15ULL + 1))) {}

  std::uint64_t raw(std::uint64_t counter) const {
    return splitmix64(base_ + counter * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform on the open interval (0,1): safe as input to the inverse CDF.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(raw(counter) >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  double gaussian(std::uint64_t counter) const;

 private:
  std::uint64_t base_;
};

// Inverse standard normal CDF, Wichura's PPND16 rational approximations.
// Relative error below 1e-15 across (0,1); exact tail symmetry.
inline double norm_icdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("norm_icdf: p outside (0,1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
              6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
            1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
          1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return q * num / den;
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return (q < 0.0) ? -val : val;
}

inline double CounterRng::gaussian(std::uint64_t counter) const {
  return norm_icdf(uniform(counter));
}

// Standard normal CDF through erfc; absolute error well below 1e-12.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

// Lower tail P(Z < -c) for c >= 0, evaluated without cancellation.
inline double normal_lower_tail(double c) {
  return 0.5 * std::erfc(c * 0.7071067811865475244);
}

}  // namespace prodnet

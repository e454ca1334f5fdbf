#ifndef RANGESHIFT_COMMON_HPP
#define RANGESHIFT_COMMON_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace rangeshift {

using Vec = std::vector<double>;

/// Error raised by any module; the message starts with "module.operation:".
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline double sup_norm(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

inline double sup_diff(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw Error("common.sup_diff: length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

// left-to-right over ascending index; summation order is part of the
// determinism contract
inline double sum_ordered(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

// composite trapezoid on uniform abscissae
inline double trapezoid_mass(const Vec& v, double h) {
    if (v.size() < 2) return 0.0;
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
    return s * h;
}

/// Cubic smoothstep ramp: 0 for t<=0, 1 for t>=1, 3t^2-2t^3 between.
inline double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * (3.0 - 2.0 * t);
}

/// Smooth even bump cutoff: 1 on |u|<=1, exp(1 - 1/(1-(|u|-1)^2)) on
/// 1<|u|<2, 0 outside; nonincreasing in |u|.
inline double bump_cutoff(double u) {
    u = std::fabs(u);
    if (u <= 1.0) return 1.0;
    if (u >= 2.0) return 0.0;
    const double s = u - 1.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

/// Round-trip-exact float formatting shared by every CSV/report writer.
inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt_int(long long x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", x);
    return buf;
}

/// Deterministic 64-bit generator (splitmix64) with a [0,1) double mapping;
/// avoids libstdc++ distribution implementation details in seeded runs.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    /// uniform in [0,1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    /// uniform in [lo,hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  private:
    std::uint64_t state_;
};

}  // namespace rangeshift

#endif

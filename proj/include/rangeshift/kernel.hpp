#ifndef RANGESHIFT_KERNEL_HPP
#define RANGESHIFT_KERNEL_HPP

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rangeshift/common.hpp"
#include "rangeshift/csv.hpp"

namespace rangeshift {

enum class KernelPreset { uniform, tent, truncated_cosine, gaussian, fat_quartic, tabulated };

enum class Orientation { plus, minus };

/// Construction gate for unbounded profiles: the analytic bound on the mass
/// beyond the declared sampling radius must stay below this. (1e-7 admits the
/// canonical fat_quartic sampling radius of 200, whose true tail is ~4e-8.)
inline constexpr double kTailMassGate = 1e-7;

namespace detail {

inline double kahan_sum(const Vec& v) {
    double s = 0.0, c = 0.0;
    for (double x : v) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

}  // namespace detail

/// Dispersal kernel: a nonnegative density with unit (or, after truncation,
/// sub-unit) mass, positive at the origin. Immutable after construction.
class Kernel {
  public:
    static Kernel uniform(double radius) {
        require_positive(radius, "radius");
        Kernel k(KernelPreset::uniform);
        k.radius_ = radius;
        return k;
    }
    static Kernel tent(double radius) {
        require_positive(radius, "radius");
        Kernel k(KernelPreset::tent);
        k.radius_ = radius;
        return k;
    }
    static Kernel truncated_cosine(double radius) {
        require_positive(radius, "radius");
        Kernel k(KernelPreset::truncated_cosine);
        k.radius_ = radius;
        return k;
    }
    static Kernel gaussian(double sigma, double sampling_radius) {
        require_positive(sigma, "sigma");
        require_positive(sampling_radius, "sampling_radius");
        Kernel k(KernelPreset::gaussian);
        k.sigma_ = sigma;
        k.radius_ = sampling_radius;
        k.unbounded_ = true;
        const double tail = std::erfc(sampling_radius / (sigma * std::sqrt(2.0)));
        if (tail >= kTailMassGate)
            throw Error("kernel.make_kernel: gaussian tail mass bound " + fmt_g17(tail) +
                        " beyond sampling_radius exceeds gate " + fmt_g17(kTailMassGate));
        k.tail_mass_bound_ = tail;
        return k;
    }
    static Kernel fat_quartic(double scale, double sampling_radius) {
        require_positive(scale, "scale");
        require_positive(sampling_radius, "sampling_radius");
        Kernel k(KernelPreset::fat_quartic);
        k.scale_ = scale;
        k.radius_ = sampling_radius;
        k.unbounded_ = true;
        // density <= C (s/z)^4 with C = sqrt(2)/(pi s), so each tail is
        // bounded by C s^4 / (3 r^3)
        const double tail = 2.0 * std::sqrt(2.0) * scale * scale * scale /
                            (3.0 * M_PI * sampling_radius * sampling_radius * sampling_radius);
        if (tail >= kTailMassGate)
            throw Error("kernel.make_kernel: fat_quartic tail mass bound " + fmt_g17(tail) +
                        " beyond sampling_radius exceeds gate " + fmt_g17(kTailMassGate));
        k.tail_mass_bound_ = tail;
        return k;
    }
    /// Tabulated density on uniform abscissae; renormalized to unit mass by
    /// trapezoid quadrature.
    static Kernel tabulated(Vec abscissae, Vec densities) {
        if (abscissae.size() != densities.size() || abscissae.size() < 3)
            throw Error("kernel.make_kernel: tabulated input needs >= 3 matching samples");
        const std::size_t n = abscissae.size();
        const double h = (abscissae.back() - abscissae.front()) / static_cast<double>(n - 1);
        if (!(h > 0)) throw Error("kernel.make_kernel: abscissae must be increasing");
        for (std::size_t i = 0; i < n; ++i) {
            const double expect = abscissae.front() + h * static_cast<double>(i);
            if (std::fabs(abscissae[i] - expect) > 1e-9 * std::max(1.0, std::fabs(expect)))
                throw Error("kernel.make_kernel: abscissae not uniform at index " +
                            fmt_int(static_cast<long long>(i)));
            if (densities[i] < 0.0)
                throw Error("kernel.make_kernel: negative density sample at z=" +
                            fmt_g17(abscissae[i]));
        }
        if (abscissae.front() > 0.0 || abscissae.back() < 0.0)
            throw Error("kernel.make_kernel: tabulated abscissae must cover z=0");
        const double mass = trapezoid_mass(densities, h);
        if (!(mass > 0.0)) throw Error("kernel.make_kernel: tabulated profile has zero mass");
        for (double& d : densities) d /= mass;
        Kernel k(KernelPreset::tabulated);
        k.tab_z_ = std::move(abscissae);
        k.tab_j_ = std::move(densities);
        k.radius_ = std::max(std::fabs(k.tab_z_.front()), std::fabs(k.tab_z_.back()));
        if (!(k.density(0.0) > 0.0))
            throw Error("kernel.make_kernel: tabulated density vanishes at z=0");
        return k;
    }
    static Kernel from_csv(const std::string& path) {
        CsvTable t = read_csv(path);
        if (t.header.size() != 2 || t.header[0] != "z" || t.header[1] != "j")
            throw Error("kernel.load: expected header 'z,j' in " + path);
        Vec z, j;
        for (const auto& row : t.rows) {
            if (row.size() != 2) throw Error("kernel.load: ragged row in " + path);
            z.push_back(row[0]);
            j.push_back(row[1]);
        }
        return tabulated(std::move(z), std::move(j));
    }

    void save_csv(const std::string& path) const {
        CsvWriter w(path, {"z", "j"});
        if (preset_ == KernelPreset::tabulated) {
            for (std::size_t i = 0; i < tab_z_.size(); ++i) {
                const double z = reflected_ ? -tab_z_[tab_z_.size() - 1 - i] : tab_z_[i];
                w.row({z, density(z)});
            }
        } else {
            const auto [lo, hi] = range();
            const int samples = 2001;
            const double h = (hi - lo) / (samples - 1);
            for (int i = 0; i < samples; ++i) {
                const double z = lo + h * i;
                w.row({z, density(z)});
            }
        }
    }

    /// Density at displacement z, including reflection and truncation cutoff.
    double density(double z) const {
        const double zb = reflected_ ? -z : z;
        double v = base_density(zb);
        if (cutoff_N_ > 0.0) v *= bump_cutoff(z / cutoff_N_);
        return v;
    }

    /// Nonzero-support interval [lo, hi] of density().
    std::pair<double, double> range() const {
        double lo, hi;
        if (preset_ == KernelPreset::tabulated) {
            lo = tab_z_.front();
            hi = tab_z_.back();
            if (reflected_) {
                const double l2 = -hi;
                hi = -lo;
                lo = l2;
            }
        } else {
            lo = -radius_;
            hi = radius_;
        }
        if (cutoff_N_ > 0.0) {
            lo = std::max(lo, -2.0 * cutoff_N_);
            hi = std::min(hi, 2.0 * cutoff_N_);
        }
        return {lo, hi};
    }

    /// z |-> J(-z).
    Kernel reflect() const {
        Kernel k = *this;
        k.reflected_ = !k.reflected_;
        return k;
    }

    /// J_N = J * cutoff(z/N), deliberately not renormalized: the truncation
    /// sequence increases pointwise toward J and carries sub-unit mass.
    Kernel truncate(double N) const {
        require_positive(N, "N");
        if (cutoff_N_ > 0.0) throw Error("kernel.truncate: kernel is already truncated");
        Kernel k = *this;
        k.cutoff_N_ = N;
        return k;
    }

    bool truncated() const { return cutoff_N_ > 0.0; }
    double cutoff_N() const { return cutoff_N_; }
    /// Untruncated twin (same profile and reflection).
    Kernel without_cutoff() const {
        Kernel k = *this;
        k.cutoff_N_ = 0.0;
        return k;
    }
    Kernel without_reflection() const {
        Kernel k = *this;
        k.reflected_ = false;
        return k;
    }
    bool unbounded_profile() const { return unbounded_; }
    bool reflected() const { return reflected_; }
    KernelPreset preset() const { return preset_; }
    double tail_mass_bound() const { return tail_mass_bound_; }

    /// Mass of density(): exactly 1 unless truncated, in which case the
    /// quadrature value (< 1).
    double mass() const {
        if (!truncated()) return 1.0;
        return moment_quadrature(0, false);
    }

    /// Moment of order 0..2, over the full line or the half line z > 0.
    /// Closed forms for untruncated presets, quadrature otherwise.
    double moment(int order, bool half_line) const {
        if (order < 0 || order > 2) throw Error("kernel.moment: order out of range 0..2");
        if (preset_ != KernelPreset::tabulated && !truncated()) {
            double full0 = 1.0, full1 = 0.0, full2 = 0.0, half0 = 0.5, half1 = 0.0, half2 = 0.0;
            switch (preset_) {
                case KernelPreset::uniform:
                    full2 = radius_ * radius_ / 3.0;
                    half1 = radius_ / 4.0;
                    break;
                case KernelPreset::tent:
                    full2 = radius_ * radius_ / 6.0;
                    half1 = radius_ / 6.0;
                    break;
                case KernelPreset::truncated_cosine:
                    full2 = radius_ * radius_ * (1.0 - 8.0 / (M_PI * M_PI));
                    half1 = radius_ * (0.5 - 1.0 / M_PI);
                    break;
                case KernelPreset::gaussian:
                    full2 = sigma_ * sigma_;
                    half1 = sigma_ / std::sqrt(2.0 * M_PI);
                    break;
                case KernelPreset::fat_quartic:
                    full2 = scale_ * scale_;
                    half1 = scale_ * std::sqrt(2.0) / 4.0;
                    break;
                default:
                    break;
            }
            half2 = full2 / 2.0;
            if (!half_line) return order == 0 ? full0 : (order == 1 ? full1 : full2);
            return order == 0 ? half0 : (order == 1 ? half1 : half2);
        }
        return moment_quadrature(order, half_line);
    }

    /// Quadrature route for the same moments; exposed for cross-testing.
    double moment_quadrature(int order, bool half_line) const {
        if (order < 0 || order > 2) throw Error("kernel.moment: order out of range 0..2");
        if (reflected_ && !half_line) {
            // full-line moments reduce to the unreflected profile with the
            // identical summation order, so even moments match bit-exactly
            const double v = without_reflection().moment_quadrature(order, false);
            return order % 2 == 1 ? -v : v;
        }
        const auto [lo0, hi0] = range();
        const double lo = half_line ? std::max(0.0, lo0) : lo0;
        const double hi = hi0;
        if (hi <= lo) return 0.0;
        const int n = quadrature_points(lo, hi);
        const double h = (hi - lo) / (n - 1);
        Vec f(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double z = lo + h * i;
            f[static_cast<std::size_t>(i)] = density(z) * std::pow(z, order);
        }
        return trapezoid_mass(f, h);
    }

    /// Exponential transform: int J(z) e^{alpha z} dz for orientation plus,
    /// int J(-z) e^{alpha z} dz for orientation minus.
    double exponential_moment(double alpha, Orientation o) const {
        if (!std::isfinite(alpha) || alpha < 0.0)
            throw Error("kernel.exponential_moment: alpha must be finite and >= 0");
        if (alpha == 0.0) return mass();
        if (preset_ == KernelPreset::fat_quartic)
            throw Error("kernel.exponential_moment: transform-divergent (fat tail, alpha>0)");
        const double a = (o == Orientation::plus) != reflected_ ? alpha : -alpha;
        if (!truncated()) {
            switch (preset_) {
                case KernelPreset::uniform:
                    return std::sinh(a * radius_) / (a * radius_);
                case KernelPreset::tent: {
                    const double ar = a * radius_;
                    return 2.0 * (std::cosh(ar) - 1.0) / (ar * ar);
                }
                case KernelPreset::truncated_cosine: {
                    const double b = M_PI / (2.0 * radius_);
                    return b * b * std::cosh(a * radius_) / (a * a + b * b);
                }
                case KernelPreset::gaussian:
                    // full-line closed form; the declared sampling radius keeps
                    // the truncated difference below the tail gate for the
                    // alpha ranges the speed bounds sweep
                    return std::exp(0.5 * a * a * sigma_ * sigma_);
                default:
                    break;
            }
        }
        return exponential_moment_quadrature(alpha, o);
    }

    /// Quadrature route, exposed for cross-testing. Truncated fat_quartic is
    /// compactly supported and therefore admits every alpha here.
    double exponential_moment_quadrature(double alpha, Orientation o) const {
        if (preset_ == KernelPreset::fat_quartic && !truncated() && alpha != 0.0)
            throw Error("kernel.exponential_moment: transform-divergent (fat tail, alpha>0)");
        const double sign = (o == Orientation::plus) ? 1.0 : -1.0;
        const auto [lo, hi] = range();
        const int n = quadrature_points(lo, hi);
        const double h = (hi - lo) / (n - 1);
        Vec f(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double z = lo + h * i;
            f[static_cast<std::size_t>(i)] = density(z) * std::exp(alpha * sign * z);
        }
        return trapezoid_mass(f, h);
    }

  private:
    explicit Kernel(KernelPreset p) : preset_(p) {}

    static void require_positive(double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw Error(std::string("kernel.make_kernel: ") + name + " must be positive");
    }

    static int quadrature_points(double lo, double hi) {
        const double target_h = 5e-4;
        const int n = static_cast<int>(std::ceil((hi - lo) / target_h)) + 1;
        return std::clamp(n, 4001, 800001);
    }

    /// Profile density without reflection/cutoff.
    double base_density(double z) const {
        switch (preset_) {
            case KernelPreset::uniform:
                return std::fabs(z) <= radius_ ? 0.5 / radius_ : 0.0;
            case KernelPreset::tent:
                return std::fabs(z) <= radius_ ? (1.0 - std::fabs(z) / radius_) / radius_ : 0.0;
            case KernelPreset::truncated_cosine:
                return std::fabs(z) <= radius_
                           ? (M_PI / (4.0 * radius_)) * std::cos(M_PI * z / (2.0 * radius_))
                           : 0.0;
            case KernelPreset::gaussian:
                return std::fabs(z) <= radius_
                           ? std::exp(-0.5 * z * z / (sigma_ * sigma_)) /
                                 (sigma_ * std::sqrt(2.0 * M_PI))
                           : 0.0;
            case KernelPreset::fat_quartic: {
                if (std::fabs(z) > radius_) return 0.0;
                const double u = z / scale_;
                return std::sqrt(2.0) / (M_PI * scale_) / (1.0 + u * u * u * u);
            }
            case KernelPreset::tabulated: {
                if (z < tab_z_.front() || z > tab_z_.back()) return 0.0;
                const double h = (tab_z_.back() - tab_z_.front()) /
                                 static_cast<double>(tab_z_.size() - 1);
                const double s = (z - tab_z_.front()) / h;
                const auto i = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(s))),
                                        tab_z_.size() - 2);
                const double w = s - static_cast<double>(i);
                return (1.0 - w) * tab_j_[i] + w * tab_j_[i + 1];
            }
        }
        return 0.0;
    }

    KernelPreset preset_;
    double radius_ = 0.0;  // support radius, or sampling radius when unbounded
    double sigma_ = 0.0;
    double scale_ = 0.0;
    bool unbounded_ = false;
    bool reflected_ = false;
    double cutoff_N_ = 0.0;
    double tail_mass_bound_ = 0.0;
    Vec tab_z_, tab_j_;
};

/// Kernel sampled onto a grid of spacing h: taps[m - m_lo] = rho * h * J(m h),
/// where rho renormalizes the untruncated profile's sampled mass to 1. The
/// truncation cutoff is applied after rho, so truncated taps are pointwise
/// dominated by (and increase with N toward) the parent's.
struct KernelTaps {
    Vec t;
    int m_lo = 0;
    int m_hi = 0;
    double h = 0.0;
    double weight_sum = 0.0;

    double at(int m) const {
        return (m < m_lo || m > m_hi) ? 0.0 : t[static_cast<std::size_t>(m - m_lo)];
    }
};

inline KernelTaps discretize(const Kernel& kernel, double h) {
    if (!(h > 0.0)) throw Error("kernel.discretize: h must be positive");
    if (kernel.reflected()) {
        // mirror the unreflected taps so that reflection is grid-exact (the
        // renormalization sum is computed in the same order, bit for bit);
        // the truncation cutoff is even and commutes
        KernelTaps t = discretize(kernel.without_reflection(), h);
        std::reverse(t.t.begin(), t.t.end());
        const int lo = -t.m_hi, hi = -t.m_lo;
        t.m_lo = lo;
        t.m_hi = hi;
        return t;
    }
    // rho comes from the untruncated profile so that truncated taps stay
    // pointwise dominated by the parent's
    const bool cut = kernel.truncated();
    const Kernel parent = cut ? kernel.without_cutoff() : kernel;
    const auto [plo, phi] = parent.range();
    const int m_lo_base = static_cast<int>(std::ceil(plo / h - 1e-9));
    const int m_hi_base = static_cast<int>(std::floor(phi / h + 1e-9));
    if (m_hi_base < m_lo_base) throw Error("kernel.discretize: empty support on this grid");
    Vec braw(static_cast<std::size_t>(m_hi_base - m_lo_base + 1));
    for (int m = m_lo_base; m <= m_hi_base; ++m)
        braw[static_cast<std::size_t>(m - m_lo_base)] = h * parent.density(m * h);
    const double S = detail::kahan_sum(braw);
    if (!(S > 0.0)) throw Error("kernel.discretize: sampled mass is zero on this grid");
    const double rho = 1.0 / S;

    KernelTaps taps;
    taps.h = h;
    if (!cut) {
        taps.m_lo = m_lo_base;
        taps.m_hi = m_hi_base;
        taps.t.resize(braw.size());
        for (std::size_t i = 0; i < braw.size(); ++i) taps.t[i] = braw[i] * rho;
    } else {
        const double N = kernel.cutoff_N();
        const int m_lo_c = std::max(m_lo_base, static_cast<int>(std::ceil(-2.0 * N / h - 1e-9)));
        const int m_hi_c = std::min(m_hi_base, static_cast<int>(std::floor(2.0 * N / h + 1e-9)));
        taps.m_lo = m_lo_c;
        taps.m_hi = m_hi_c;
        taps.t.resize(static_cast<std::size_t>(m_hi_c - m_lo_c + 1));
        for (int m = m_lo_c; m <= m_hi_c; ++m)
            taps.t[static_cast<std::size_t>(m - m_lo_c)] =
                braw[static_cast<std::size_t>(m - m_lo_base)] * rho * bump_cutoff(m * h / N);
    }
    taps.weight_sum = detail::kahan_sum(taps.t);
    return taps;
}

}  // namespace rangeshift

#endif

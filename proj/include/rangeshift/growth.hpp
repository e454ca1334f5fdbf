#ifndef RANGESHIFT_GROWTH_HPP
#define RANGESHIFT_GROWTH_HPP

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rangeshift/common.hpp"
#include "rangeshift/csv.hpp"

namespace rangeshift {

/// Bounded niche profile a(x): plateau inside, smoothstep ramps, constant
/// tails. Tabulated profiles use local cubic (Catmull-Rom) interpolation
/// inside the table and constant extrapolation of the endpoint values.
class NicheProfile {
  public:
    static NicheProfile constant(double value) {
        NicheProfile p;
        p.kind_ = Kind::constant;
        p.height_ = value;
        return p;
    }
    static NicheProfile niche(double height, double radius, double ramp_width, double floor) {
        if (!(radius > 0.0) || !(ramp_width > 0.0))
            throw Error("environment.make_growth: niche radius and ramp width must be positive");
        NicheProfile p;
        p.kind_ = Kind::niche;
        p.height_ = height;
        p.radius_ = radius;
        p.width_ = ramp_width;
        p.floor_ = floor;
        return p;
    }
    static NicheProfile table(Vec x, Vec a) {
        if (x.size() != a.size() || x.size() < 4)
            throw Error("environment.make_growth: profile table needs >= 4 matching samples");
        const double h = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
        if (!(h > 0)) throw Error("environment.make_growth: table abscissae must be increasing");
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double expect = x.front() + h * static_cast<double>(i);
            if (std::fabs(x[i] - expect) > 1e-9 * std::max(1.0, std::fabs(expect)))
                throw Error("environment.make_growth: table abscissae not uniform");
        }
        NicheProfile p;
        p.kind_ = Kind::table;
        p.tab_x_ = std::move(x);
        p.tab_a_ = std::move(a);
        return p;
    }
    static NicheProfile from_csv(const std::string& path) {
        CsvTable t = read_csv(path);
        if (t.header.size() != 2 || t.header[0] != "x" || t.header[1] != "a")
            throw Error("environment.make_growth: expected header 'x,a' in " + path);
        Vec x, a;
        for (const auto& row : t.rows) {
            if (row.size() != 2) throw Error("environment.make_growth: ragged row in " + path);
            x.push_back(row[0]);
            a.push_back(row[1]);
        }
        return table(std::move(x), std::move(a));
    }

    double operator()(double x) const {
        double v;
        switch (kind_) {
            case Kind::constant:
                v = height_;
                break;
            case Kind::niche: {
                const double r = std::fabs(x);
                v = height_ - (height_ - floor_) * smoothstep((r - radius_) / width_);
                break;
            }
            case Kind::table:
                v = table_eval(x);
                break;
            default:
                v = 0.0;
        }
        return v + offset_;
    }

    /// |x| beyond which the profile equals its constant tail values.
    double structure_radius() const {
        switch (kind_) {
            case Kind::constant:
                return 0.0;
            case Kind::niche:
                return radius_ + width_;
            case Kind::table:
                return std::max(std::fabs(tab_x_.front()), std::fabs(tab_x_.back()));
            default:
                return 0.0;
        }
    }

    /// sup of the profile over both tails (beyond the structure radius).
    double tail_sup() const {
        switch (kind_) {
            case Kind::constant:
                return height_ + offset_;
            case Kind::niche:
                return floor_ + offset_;
            case Kind::table:
                return std::max(tab_a_.front(), tab_a_.back()) + offset_;
            default:
                return 0.0;
        }
    }

    NicheProfile reflected() const {
        NicheProfile p = *this;
        p.mirror_ = !p.mirror_;
        return p;
    }

    NicheProfile with_offset(double delta) const {
        NicheProfile p = *this;
        p.offset_ += delta;
        return p;
    }

  private:
    enum class Kind { constant, niche, table };

    double table_eval(double xq) const {
        double x = mirror_ ? -xq : xq;
        if (x <= tab_x_.front()) return tab_a_.front();
        if (x >= tab_x_.back()) return tab_a_.back();
        const double h = (tab_x_.back() - tab_x_.front()) /
                         static_cast<double>(tab_x_.size() - 1);
        const double s = (x - tab_x_.front()) / h;
        std::size_t i = static_cast<std::size_t>(std::floor(s));
        i = std::min(i, tab_x_.size() - 2);
        const double w = s - static_cast<double>(i);
        const double p0 = tab_a_[i > 0 ? i - 1 : 0];
        const double p1 = tab_a_[i];
        const double p2 = tab_a_[i + 1];
        const double p3 = tab_a_[std::min(i + 2, tab_a_.size() - 1)];
        // Catmull-Rom
        return p1 + 0.5 * w * (p2 - p0 + w * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                              w * (3.0 * (p1 - p2) + p3 - p0)));
    }

    Kind kind_ = Kind::constant;
    double height_ = 0.0, radius_ = 0.0, width_ = 0.0, floor_ = 0.0;
    double offset_ = 0.0;
    bool mirror_ = false;
    Vec tab_x_, tab_a_;
};

struct TailBound {
    double R0 = 0.0;
    double kappa = 0.0;
    double delta = 0.0;
};

/// KPP growth law f(x,s): f(x,0)=0, f(x,s)/s nonincreasing in s, bounded
/// saturation S(x), lethal tails. Immutable; evaluation is pure.
class GrowthModel {
  public:
    enum class Form { logistic, plateau, custom };

    /// f(x,s) = s (a(x) - b(x) s).
    static GrowthModel logistic(NicheProfile a_profile, NicheProfile b_profile) {
        GrowthModel g;
        g.form_ = Form::logistic;
        g.a_ = std::move(a_profile);
        g.b_ = std::move(b_profile);
        g.finish_construction();
        return g;
    }
    static GrowthModel logistic_const_b(NicheProfile a_profile, double b) {
        return logistic(std::move(a_profile), NicheProfile::constant(b));
    }
    /// The piecewise plateau law: s(a-s) on |x|<=L, -qs beyond L+L0, smooth
    /// ramps between.
    static GrowthModel plateau(double a, double q, double L, double L0) {
        if (!(a > 0.0) || !(q > 0.0) || !(L > 0.0) || !(L0 > 0.0))
            throw Error("environment.make_growth: plateau parameters must be positive");
        GrowthModel g;
        g.form_ = Form::plateau;
        g.pa_ = a;
        g.pq_ = q;
        g.pL_ = L;
        g.pL0_ = L0;
        g.finish_construction();
        return g;
    }
    static GrowthModel custom(std::function<double(double, double)> f,
                              std::function<double(double, double)> dfds,
                              std::function<double(double)> saturation,
                              double structure_radius) {
        GrowthModel g;
        g.form_ = Form::custom;
        g.cf_ = std::move(f);
        g.cdf_ = std::move(dfds);
        g.cS_ = std::move(saturation);
        g.c_radius_ = structure_radius;
        g.finish_construction();
        return g;
    }

    Form form() const { return form_; }

    double f(double x, double s) const {
        switch (form_) {
            case Form::logistic:
                return s * (a_(x) - b_(x) * s);
            case Form::plateau:
                return plateau_f(x, s);
            case Form::custom:
                return cf_(x, s);
        }
        return 0.0;
    }

    double dfds(double x, double s) const {
        switch (form_) {
            case Form::logistic:
                return a_(x) - 2.0 * b_(x) * s;
            case Form::plateau:
                return plateau_dfds(x, s);
            case Form::custom:
                return cdf_(x, s);
        }
        return 0.0;
    }

    /// Linearization a(x) = d/ds f(x,0).
    double a(double x) const {
        switch (form_) {
            case Form::logistic:
                return a_(x);
            case Form::plateau:
                return plateau_dfds(x, 0.0);
            case Form::custom:
                return cdf_(x, 0.0);
        }
        return 0.0;
    }

    double saturation(double x) const {
        switch (form_) {
            case Form::logistic: {
                const double ax = a_(x);
                return ax > 0.0 ? ax / b_(x) : 0.0;
            }
            case Form::plateau:
                return pa_;
            case Form::custom:
                return cS_(x);
        }
        return 0.0;
    }

    double sup_a() const { return sup_a_; }
    double inf_a() const { return inf_a_; }
    /// Constant super-solution level M: f(x, K) <= 0 for every K >= M.
    double sup_saturation() const { return sup_S_; }
    /// sup_{x, s in [0, M]} |f(x,s)|.
    double sup_abs_f(double M) const {
        double m = 0.0;
        scan_x([&](double x) {
            for (int k = 0; k <= 64; ++k) {
                const double s = M * static_cast<double>(k) / 64.0;
                m = std::max(m, std::fabs(f(x, s)));
            }
        });
        return m;
    }
    /// sup_{x, s in [0, M]} |d/ds f(x,s)| (the Lipschitz constant of f in s).
    double lipschitz_f(double M) const {
        double m = 0.0;
        scan_x([&](double x) {
            for (int k = 0; k <= 64; ++k) {
                const double s = M * static_cast<double>(k) / 64.0;
                m = std::max(m, std::fabs(dfds(x, s)));
            }
        });
        return m;
    }

    double structure_radius() const {
        switch (form_) {
            case Form::logistic:
                return std::max(a_.structure_radius(), b_.structure_radius());
            case Form::plateau:
                return pL_ + pL0_;
            case Form::custom:
                return c_radius_;
        }
        return 0.0;
    }

    /// Smallest sampled R0 and largest kappa with a(x) + delta <= -kappa for
    /// all |x| >= R0.
    TailBound tail_bounds(double delta) const {
        if (!(delta > 0.0)) throw Error("environment.tail_bounds: delta must be positive");
        const double a_inf_tail = tail_sup_a();
        const double kappa = -a_inf_tail - delta;
        if (!(kappa > 0.0))
            throw Error("environment.tail_bounds: no-tail-bound (a + delta does not stay "
                        "negative far out)");
        // smallest scanned R0 with sup_{|x|>=R0} a = tail value
        const double rs = structure_radius();
        const double dx = scan_step();
        double R0 = rs;
        const double target = a_inf_tail + 1e-12 * std::max(1.0, std::fabs(a_inf_tail));
        for (double x = rs; x >= 0.0; x -= dx) {
            if (a(x) > target || a(-x) > target) {
                break;
            }
            R0 = x;
        }
        return TailBound{R0, kappa, delta};
    }

    /// sup of a over both tails (analytic tail values).
    double tail_sup_a() const {
        switch (form_) {
            case Form::logistic:
                return a_.tail_sup();
            case Form::plateau:
                return -pq_;
            case Form::custom: {
                const double r = c_radius_ + 1.0;
                return std::max(cdf_(r, 0.0), cdf_(-r, 0.0));
            }
        }
        return 0.0;
    }

    GrowthModel with_potential_shift(double delta) const {
        if (form_ != Form::logistic)
            throw Error("environment: potential shift is only defined for the logistic form");
        return logistic(a_.with_offset(delta), b_);
    }
    GrowthModel reflected() const {
        if (form_ != Form::logistic)
            throw Error("environment: reflection helper is only defined for the logistic form");
        return logistic(a_.reflected(), b_.reflected());
    }

  private:
    GrowthModel() = default;

    double plateau_f(double x, double s) const {
        const double r = x;
        if (std::fabs(r) >= pL_ + pL0_) return -pq_ * s;
        if (std::fabs(r) <= pL_) return s * (pa_ - s);
        // phi+ is a smooth regularization of the indicator of x<=0
        const double u = (std::fabs(r) - pL_) / pL0_;
        const double phi = 1.0 - smoothstep(u);
        return -pq_ * s + s * (pa_ - s + pq_) * phi;
    }
    double plateau_dfds(double x, double s) const {
        const double r = x;
        if (std::fabs(r) >= pL_ + pL0_) return -pq_;
        if (std::fabs(r) <= pL_) return pa_ - 2.0 * s;
        const double u = (std::fabs(r) - pL_) / pL0_;
        const double phi = 1.0 - smoothstep(u);
        return -pq_ + (pa_ - 2.0 * s + pq_) * phi;
    }

    double scan_step() const {
        const double width = 2.0 * std::max(structure_radius(), 1.0);
        return 1e-3 * width;
    }

    template <typename Fn>
    void scan_x(Fn&& fn) const {
        const double rs = structure_radius();
        const double dx = scan_step();
        const double lo = -(rs + 2.0), hi = rs + 2.0;
        for (double x = lo; x <= hi + 0.5 * dx; x += dx) fn(x);
    }

    void finish_construction() {
        if (form_ == Form::logistic) {
            // b must stay positive: no saturation otherwise
            double bmin = 1e300;
            scan_x([&](double x) { bmin = std::min(bmin, b_(x)); });
            bmin = std::min(bmin, b_.tail_sup());
            if (!(bmin > 0.0))
                throw Error("environment.make_growth: b(x) must be positive everywhere "
                            "(no saturation)");
        }
        // sup/inf of the linearization: dense scan plus analytic tail values
        sup_a_ = -1e300;
        inf_a_ = 1e300;
        scan_x([&](double x) {
            const double ax = a(x);
            sup_a_ = std::max(sup_a_, ax);
            inf_a_ = std::min(inf_a_, ax);
        });
        sup_a_ = std::max(sup_a_, tail_sup_a());
        inf_a_ = std::min(inf_a_, tail_sup_a());
        // super-solution level
        sup_S_ = 0.0;
        scan_x([&](double x) { sup_S_ = std::max(sup_S_, saturation(x)); });
        verify_kpp();
    }

    void verify_kpp() const {
        const int nx = 257;
        const double rs = std::max(structure_radius(), 1.0) + 2.0;
        for (int i = 0; i < nx; ++i) {
            const double x = -rs + 2.0 * rs * static_cast<double>(i) / (nx - 1);
            const double f0 = f(x, 0.0);
            if (std::fabs(f0) > 1e-13 * std::max(1.0, std::fabs(sup_a_)))
                throw Error("environment.make_growth: f(x,0) != 0 at x=" + fmt_g17(x));
            const double S = std::max(saturation(x), 1e-3);
            double prev = 0.0;
            for (int k = 1; k <= 64; ++k) {
                const double s = 1e-6 + (S - 1e-6) * static_cast<double>(k - 1) / 63.0;
                const double g = f(x, s) / s;
                if (k > 1) {
                    const double slack = 64.0 * 2.2e-16 * std::max(1.0, std::fabs(prev));
                    if (g > prev + slack)
                        throw Error("environment.make_growth: f(x,s)/s increases at x=" +
                                    fmt_g17(x) + ", s=" + fmt_g17(s));
                }
                prev = g;
            }
            // custom evaluators: linearization must match one-sided finite
            // differences at s -> 0+
            if (form_ == Form::custom) {
                const double hs = 1e-6;
                const double fd = f(x, hs) / hs;
                if (std::fabs(fd - a(x)) > 1e-3 * std::max(1.0, std::fabs(a(x))))
                    throw Error("environment.make_growth: custom dfds inconsistent with f at x=" +
                                fmt_g17(x));
            }
        }
    }

    Form form_ = Form::logistic;
    NicheProfile a_ = NicheProfile::constant(0.0);
    NicheProfile b_ = NicheProfile::constant(1.0);
    double pa_ = 0.0, pq_ = 0.0, pL_ = 0.0, pL0_ = 0.0;
    std::function<double(double, double)> cf_, cdf_;
    std::function<double(double)> cS_;
    double c_radius_ = 0.0;
    double sup_a_ = 0.0, inf_a_ = 0.0, sup_S_ = 0.0;
};

}  // namespace rangeshift

#endif

#ifndef RANGESHIFT_CONVOLUTION_HPP
#define RANGESHIFT_CONVOLUTION_HPP

#include <fftw3.h>

#include <array>
#include <complex>
#include <cstring>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "rangeshift/common.hpp"
#include "rangeshift/kernel.hpp"

namespace rangeshift {

enum class ConvPath { automatic, direct, fft };

namespace detail {

// FFTW planner calls are not thread-safe; execution via the new-array
// interface is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffers {
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    std::size_t len = 0;
    FftwBuffers() = default;
    FftwBuffers(const FftwBuffers&) = delete;
    FftwBuffers& operator=(const FftwBuffers&) = delete;
    FftwBuffers(FftwBuffers&& o) noexcept : real(o.real), spec(o.spec), len(o.len) {
        o.real = nullptr;
        o.spec = nullptr;
        o.len = 0;
    }
    FftwBuffers& operator=(FftwBuffers&& o) noexcept {
        std::swap(real, o.real);
        std::swap(spec, o.spec);
        std::swap(len, o.len);
        return *this;
    }
    ~FftwBuffers() {
        if (real) fftw_free(real);
        if (spec) fftw_free(spec);
    }
    void ensure(std::size_t L) {
        if (len >= L && real) return;
        if (real) fftw_free(real);
        if (spec) fftw_free(spec);
        real = fftw_alloc_real(L);
        spec = fftw_alloc_complex(L / 2 + 1);
        len = L;
    }
};

// per-thread scratch keyed by transform length, so concurrent applies on a
// shared engine never touch common mutable state
inline FftwBuffers& thread_scratch(std::size_t L, int slot) {
    thread_local std::unordered_map<std::size_t, std::array<FftwBuffers, 2>> cache;
    auto& pair = cache[L];
    pair[static_cast<std::size_t>(slot)].ensure(L);
    return pair[static_cast<std::size_t>(slot)];
}

}  // namespace detail

/// Linear convolution of a grid vector with kernel taps (lags m_lo..m_hi):
/// out_i = sum_j taps[i-j] v_j, indices restricted to the grid. Direct and
/// FFT routes agree within ~1e-14 relative; both are exposed.
class ConvolutionEngine {
  public:
    ConvolutionEngine() = default;

    ConvolutionEngine(KernelTaps taps, int n, ConvPath path = ConvPath::automatic)
        : taps_(std::move(taps)), n_(n) {
        // lags beyond n-1 connect no pair of grid points
        clip_lags();
        const long long band = static_cast<long long>(taps_.m_hi) - taps_.m_lo + 1;
        if (path == ConvPath::automatic)
            path = (band > 96 && n_ >= 256) ? ConvPath::fft : ConvPath::direct;
        path_ = path;
        if (path_ == ConvPath::fft) plan_fft();
    }

    int n() const { return n_; }
    const KernelTaps& taps() const { return taps_; }
    ConvPath path() const { return path_; }

    void apply(const double* v, double* out) const {
        if (path_ == ConvPath::fft)
            apply_fft(v, out);
        else
            apply_direct(v, out);
    }

    Vec apply(const Vec& v) const {
        if (static_cast<int>(v.size()) != n_)
            throw Error("discrete_operator.apply: length mismatch");
        Vec out(v.size());
        apply(v.data(), out.data());
        return out;
    }

    void apply_direct(const double* v, double* out) const {
        const int mlo = taps_.m_lo, mhi = taps_.m_hi;
        const double* t = taps_.t.data();
        for (int i = 0; i < n_; ++i) {
            // j = i - m must stay in [0, n)
            const int m0 = std::max(mlo, i - (n_ - 1));
            const int m1 = std::min(mhi, i);
            double s = 0.0;
            for (int m = m0; m <= m1; ++m) s += t[m - mlo] * v[i - m];
            out[i] = s;
        }
    }

    void apply_fft(const double* v, double* out) const {
        auto& in_buf = detail::thread_scratch(L_, 0);
        auto& out_buf = detail::thread_scratch(L_, 1);
        std::memset(in_buf.real, 0, sizeof(double) * L_);
        std::memcpy(in_buf.real, v, sizeof(double) * static_cast<std::size_t>(n_));
        fftw_execute_dft_r2c(plan_fwd_.get(), in_buf.real, in_buf.spec);
        const std::size_t half = L_ / 2 + 1;
        for (std::size_t k = 0; k < half; ++k) {
            const double tre = taps_spec_[k].real(), tim = taps_spec_[k].imag();
            const double re = in_buf.spec[k][0] * tre - in_buf.spec[k][1] * tim;
            const double im = in_buf.spec[k][0] * tim + in_buf.spec[k][1] * tre;
            out_buf.spec[k][0] = re * inv_L_;
            out_buf.spec[k][1] = im * inv_L_;
        }
        fftw_execute_dft_c2r(plan_bwd_.get(), out_buf.spec, out_buf.real);
        // linear-convolution output for lag offset: out_i = r[i - m_lo]
        const int off = -taps_.m_lo;
        for (int i = 0; i < n_; ++i) out[i] = out_buf.real[(i + off) % static_cast<int>(L_)];
    }

  private:
    struct PlanDeleter {
        void operator()(fftw_plan_s* p) const {
            if (p) {
                std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
                fftw_destroy_plan(p);
            }
        }
    };
    using PlanPtr = std::unique_ptr<fftw_plan_s, PlanDeleter>;

    void clip_lags() {
        const int lim = n_ - 1;
        int lo = std::max(taps_.m_lo, -lim);
        int hi = std::min(taps_.m_hi, lim);
        if (lo > hi) {
            taps_.t.assign(1, 0.0);
            taps_.m_lo = taps_.m_hi = 0;
            return;
        }
        if (lo != taps_.m_lo || hi != taps_.m_hi) {
            Vec clipped(static_cast<std::size_t>(hi - lo + 1));
            for (int m = lo; m <= hi; ++m)
                clipped[static_cast<std::size_t>(m - lo)] = taps_.at(m);
            taps_.t = std::move(clipped);
            taps_.m_lo = lo;
            taps_.m_hi = hi;
        }
    }

    void plan_fft() {
        const int band = taps_.m_hi - taps_.m_lo + 1;
        std::size_t L = 1;
        while (L < static_cast<std::size_t>(n_ + band)) L *= 2;
        L_ = L;
        inv_L_ = 1.0 / static_cast<double>(L_);
        detail::FftwBuffers tmp_r, tmp_c;
        tmp_r.ensure(L_);
        tmp_c.ensure(L_);
        {
            std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
            plan_fwd_.reset(fftw_plan_dft_r2c_1d(static_cast<int>(L_), tmp_r.real, tmp_r.spec,
                                                 FFTW_ESTIMATE));
            plan_bwd_.reset(fftw_plan_dft_c2r_1d(static_cast<int>(L_), tmp_c.spec, tmp_c.real,
                                                 FFTW_ESTIMATE));
        }
        if (!plan_fwd_ || !plan_bwd_) throw Error("discrete_operator.apply: FFTW plan failed");
        // cache the taps transform, laid out so that tap lag m sits at
        // cyclic index (m - m_lo)
        std::memset(tmp_r.real, 0, sizeof(double) * L_);
        for (int m = taps_.m_lo; m <= taps_.m_hi; ++m)
            tmp_r.real[m - taps_.m_lo] = taps_.at(m);
        taps_spec_.resize(L_ / 2 + 1);
        fftw_execute_dft_r2c(plan_fwd_.get(), tmp_r.real,
                             reinterpret_cast<fftw_complex*>(taps_spec_.data()));
    }

    KernelTaps taps_;
    int n_ = 0;
    ConvPath path_ = ConvPath::direct;
    std::size_t L_ = 0;
    double inv_L_ = 0.0;
    PlanPtr plan_fwd_, plan_bwd_;
    std::vector<std::complex<double>> taps_spec_;
};

}  // namespace rangeshift

#endif

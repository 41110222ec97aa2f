#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "fft_kernels.hpp"
#include "spw/grid.hpp"

namespace spw {

namespace {

enum class Kind { forward, backward, real_forward, real_backward };

std::atomic<FftPlanning> planning{FftPlanning::estimate};

// FFTW planning is not thread-safe, execution on fresh arrays is. Plans are
// created once per (size, kind, effort) under a lock and reused through the
// new-array execute interface.
class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(Size size, Kind kind) {
        const FftPlanning effort = planning.load();
        const auto key = std::make_tuple(size.height, size.width, static_cast<int>(kind),
                                         static_cast<int>(effort));
        std::lock_guard lock(mutex_);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        const unsigned flags =
            (effort == FftPlanning::measure ? FFTW_MEASURE : FFTW_ESTIMATE) | FFTW_UNALIGNED;
        auto* cin = fftw_alloc_complex(size.area());
        auto* cout = fftw_alloc_complex(size.area());
        auto* real = fftw_alloc_real(size.area());
        fftw_plan plan = nullptr;
        switch (kind) {
            case Kind::forward:
                plan = fftw_plan_dft_2d(size.height, size.width, cin, cout, FFTW_FORWARD, flags);
                break;
            case Kind::backward:
                plan = fftw_plan_dft_2d(size.height, size.width, cin, cout, FFTW_BACKWARD, flags);
                break;
            case Kind::real_forward:
                plan = fftw_plan_dft_r2c_2d(size.height, size.width, real, cout, flags);
                break;
            case Kind::real_backward:
                plan = fftw_plan_dft_c2r_2d(size.height, size.width, cin, real, flags);
                break;
        }
        fftw_free(cin);
        fftw_free(cout);
        fftw_free(real);
        if (plan == nullptr) throw Error("FFTW failed to plan a " + to_string(size) + " transform");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

void set_fft_planning(FftPlanning mode) { planning.store(mode); }

FftPlanning fft_planning() { return planning.load(); }

namespace detail {

void c2c(const Complex* in, Complex* out, Size size, bool inverse) {
    fftw_plan plan = plan_cache().get(size, inverse ? Kind::backward : Kind::forward);
    // Out-of-place complex plans never write to their input.
    fftw_execute_dft(plan, as_fftw(const_cast<Complex*>(in)), as_fftw(out));
}

void r2c(const double* in, Complex* half_out, Size size) {
    fftw_plan plan = plan_cache().get(size, Kind::real_forward);
    fftw_execute_dft_r2c(plan, const_cast<double*>(in), as_fftw(half_out));
}

void c2r(Complex* half_in, double* out, Size size) {
    fftw_plan plan = plan_cache().get(size, Kind::real_backward);
    fftw_execute_dft_c2r(plan, as_fftw(half_in), out);
}

}  // namespace detail

ComplexGrid forward_fft(const ComplexGrid& g) {
    ComplexGrid out(g.size());
    detail::c2c(g.data(), out.data(), g.size(), false);
    return out;
}

ComplexGrid forward_fft(const RealGrid& g) {
    const Size size = g.size();
    const int half_w = size.width / 2 + 1;
    std::vector<Complex> half(static_cast<std::size_t>(size.height) * half_w);
    detail::r2c(g.data(), half.data(), size);

    // Rebuild the redundant half from conjugate symmetry.
    ComplexGrid out(size);
    for (int u = 0; u < size.height; ++u) {
        const int mu = (size.height - u) % size.height;
        for (int v = 0; v < size.width; ++v) {
            if (v < half_w)
                out(u, v) = half[static_cast<std::size_t>(u) * half_w + v];
            else
                out(u, v) = std::conj(half[static_cast<std::size_t>(mu) * half_w + (size.width - v)]);
        }
    }
    return out;
}

ComplexGrid inverse_fft(const ComplexGrid& s) {
    ComplexGrid out(s.size());
    detail::c2c(s.data(), out.data(), s.size(), true);
    const double norm = 1.0 / static_cast<double>(out.area());
    for (Complex& z : out.values()) z *= norm;
    return out;
}

namespace detail {

namespace {

struct Tap {
    int dst;
    int src;
    double gain;
};

// Per-axis bin correspondence for a Fourier resize from n to m bins.
std::vector<Tap> axis_taps(int n, int m) {
    std::vector<Tap> taps;
    if (m == n) {
        for (int s = 0; s < n; ++s) taps.push_back({s, s, 1.0});
    } else if (m > n) {
        for (int s = 0; s < n; ++s) {
            const int f = wrap_index(s, n);
            if (n % 2 == 0 && 2 * f == n) {
                taps.push_back({f, s, 0.5});
                taps.push_back({m - f, s, 0.5});
            } else {
                taps.push_back({(f + m) % m, s, 1.0});
            }
        }
    } else {
        for (int d = 0; d < m; ++d) {
            const int f = wrap_index(d, m);
            taps.push_back({d, (f + n) % n, 1.0});
            if (m % 2 == 0 && 2 * f == m) taps.push_back({d, n - f, 1.0});
        }
    }
    return taps;
}

}  // namespace

void resample_into(const Complex* src, Size source, Complex* dst, Size target) {
    const auto rows = axis_taps(source.height, target.height);
    const auto cols = axis_taps(source.width, target.width);
    const double scale = static_cast<double>(target.area()) / static_cast<double>(source.area());
    std::fill(dst, dst + target.area(), Complex{});
    for (const Tap& r : rows) {
        const Complex* src_row = src + static_cast<std::size_t>(r.src) * source.width;
        Complex* dst_row = dst + static_cast<std::size_t>(r.dst) * target.width;
        for (const Tap& c : cols) dst_row[c.dst] += (r.gain * c.gain * scale) * src_row[c.src];
    }
}

}  // namespace detail

ComplexGrid resample_spectrum(const ComplexGrid& spectrum, Size target) {
    if (target.height < 1 || target.width < 1)
        throw ShapeError("invalid resample target " + to_string(target));
    ComplexGrid out(target);
    detail::resample_into(spectrum.data(), spectrum.size(), out.data(), target);
    return out;
}

}  // namespace spw

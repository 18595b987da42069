#include "engine.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "msa/parallel.hpp"

namespace msa {

namespace {
int g_thread_override = 0;
}

int thread_count() {
    if (g_thread_override > 0) return g_thread_override;
    if (const char* s = std::getenv("MSA_THREADS")) {
        int v = std::atoi(s);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

void set_thread_count(int n) { g_thread_override = std::max(0, n); }

}  // namespace msa

namespace msa::detail {

std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

OffsetTable::OffsetTable(const GridSpec& g, double rho_max) : rho_max_(rho_max) {
    int r[3] = {0, 0, 0};
    for (int a = 0; a < g.D; ++a) r[a] = static_cast<int>(std::ceil(rho_max / g.h[a])) + 1;
    const double R2 = rho_max * rho_max;
    for (int i = -r[0]; i <= r[0]; ++i)
        for (int j = -r[1]; j <= r[1]; ++j)
            for (int k = -r[2]; k <= r[2]; ++k) {
                double x = i * g.h[0], y = g.D > 1 ? j * g.h[1] : 0.0, z = g.D > 2 ? k * g.h[2] : 0.0;
                double d2 = x * x + y * y + z * z;
                if (d2 < R2) offs_.push_back({d2, {i, j, k}});
            }
    std::sort(offs_.begin(), offs_.end(), [](const Offset& a, const Offset& b) {
        if (a.d2 != b.d2) return a.d2 < b.d2;
        return a.o < b.o;
    });
}

std::size_t OffsetTable::count(double rho) const {
    if (rho > rho_max_) throw DomainError("radius beyond the offset table");
    const double r2 = rho * rho;
    auto it = std::lower_bound(offs_.begin(), offs_.end(), r2, [](const Offset& a, double v) { return a.d2 < v; });
    return static_cast<std::size_t>(it - offs_.begin());
}

int window_len(double rho, double dt) {
    double q = rho * rho / dt;
    return std::max(1, static_cast<int>(std::ceil(q)));
}

struct SliceSpectra::Plans {
    double* rin = nullptr;
    fftw_complex* cbuf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
    ~Plans() {
        std::lock_guard<std::mutex> lk(fftw_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (inv) fftw_destroy_plan(inv);
        if (rin) fftw_free(rin);
        if (cbuf) fftw_free(cbuf);
    }
};

SliceSpectra::SliceSpectra(const GridSpec& g, const double* data, int nt) : g_(g), nt_(nt) {
    for (int a = 0; a < g.D; ++a) P_[a] = g.periodic[a] ? g.n[a] : 2 * g.n[a];
    real_size_ = 1;
    for (int a = 0; a < g.D; ++a) real_size_ *= P_[a];
    cplx_size_ = real_size_ / P_[g.D - 1] * (P_[g.D - 1] / 2 + 1);
    plans_ = std::make_unique<Plans>();
    {
        std::lock_guard<std::mutex> lk(fftw_mutex());
        plans_->rin = fftw_alloc_real(real_size_);
        plans_->cbuf = fftw_alloc_complex(cplx_size_);
        plans_->fwd = fftw_plan_dft_r2c(g.D, P_.data(), plans_->rin, plans_->cbuf, FFTW_ESTIMATE);
        plans_->inv = fftw_plan_dft_c2r(g.D, P_.data(), plans_->cbuf, plans_->rin, FFTW_ESTIMATE);
    }
    if (!plans_->fwd || !plans_->inv) throw ResourceError("FFT plan creation failed");
    spectra_.resize(cplx_size_ * nt);
    const std::size_t N = g.size();
    pad_.resize(N);
    for (std::size_t x = 0; x < N; ++x) {
        auto ii = g.unravel(x);
        std::size_t p = ii[0];
        if (g.D > 1) p = p * P_[1] + ii[1];
        if (g.D > 2) p = p * P_[2] + ii[2];
        pad_[x] = p;
    }
    for (int k = 0; k < nt; ++k) {
        std::fill(plans_->rin, plans_->rin + real_size_, 0.0);
        const double* s = data + k * N;
        for (std::size_t x = 0; x < N; ++x) plans_->rin[pad_[x]] = s[x];
        fftw_execute(plans_->fwd);
        std::memcpy(reinterpret_cast<void*>(spectra_.data() + k * cplx_size_), plans_->cbuf,
                    cplx_size_ * sizeof(fftw_complex));
    }
}

SliceSpectra::~SliceSpectra() = default;

void SliceSpectra::convolve(const std::vector<Tap>& taps, std::vector<double>& out) const {
    const std::size_t N = g_.size();
    out.assign(N * nt_, 0.0);
    // Kernel K(-o) so that (f * K)(x) = sum_o w f(x + o).
    std::fill(plans_->rin, plans_->rin + real_size_, 0.0);
    for (const auto& t : taps) {
        std::size_t p = 0;
        bool keep = true;
        for (int a = 0; a < g_.D; ++a) {
            int o = -t.o[a];
            if (!g_.periodic[a] && std::abs(o) > g_.n[a] - 1) {
                keep = false;
                break;
            }
            int m = P_[a];
            int r = o % m;
            if (r < 0) r += m;
            p = p * m + r;
        }
        if (keep) plans_->rin[p] += t.w;
    }
    fftw_execute(plans_->fwd);
    std::vector<std::complex<double>> K(cplx_size_);
    std::memcpy(reinterpret_cast<void*>(K.data()), plans_->cbuf, cplx_size_ * sizeof(fftw_complex));
    const double scale = 1.0 / static_cast<double>(real_size_);
    auto* cb = reinterpret_cast<std::complex<double>*>(plans_->cbuf);
    for (int k = 0; k < nt_; ++k) {
        const std::complex<double>* S = spectra_.data() + k * cplx_size_;
        for (std::size_t i = 0; i < cplx_size_; ++i) cb[i] = S[i] * K[i];
        fftw_execute(plans_->inv);
        double* o = out.data() + k * N;
        for (std::size_t x = 0; x < N; ++x) o[x] = plans_->rin[pad_[x]] * scale;
    }
}

void SliceSpectra::ball_sums(const OffsetTable& T, double rho, std::vector<double>& out) const {
    std::size_t n = T.count(rho);
    std::vector<Tap> taps;
    taps.reserve(n);
    for (std::size_t i = 0; i < n; ++i) taps.push_back({T[i].o, 1.0});
    convolve(taps, out);
}

}  // namespace msa::detail

namespace msa::detail {

double direct_ball_sum(const ScalarField& f, int k, const Point& x, double rho) {
    const GridSpec& g = f.grid;
    int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int a = 0; a < g.D; ++a) {
        lo[a] = static_cast<int>(std::ceil((x[a] - rho - g.origin[a]) / g.h[a] - 0.5)) - 1;
        hi[a] = static_cast<int>(std::floor((x[a] + rho - g.origin[a]) / g.h[a] - 0.5)) + 1;
        if (!g.periodic[a]) lo[a] = std::max(lo[a], 0), hi[a] = std::min(hi[a], g.n[a] - 1);
    }
    const double R2 = rho * rho;
    const double* s = f.slice(k);
    double acc = 0.0;
    for (int i = lo[0]; i <= hi[0]; ++i)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int l = lo[2]; l <= hi[2]; ++l) {
                int ii[3] = {i, j, l};
                double d2 = 0.0;
                for (int a = 0; a < g.D; ++a) {
                    double c = g.origin[a] + (ii[a] + 0.5) * g.h[a] - x[a];
                    d2 += c * c;
                    if (g.periodic[a]) ii[a] = ((ii[a] % g.n[a]) + g.n[a]) % g.n[a];
                }
                if (d2 < R2) acc += s[g.index(ii[0], ii[1], ii[2])];
            }
    return acc;
}

std::size_t containing_cell(const GridSpec& g, const Point& x) {
    int ii[3] = {0, 0, 0};
    for (int a = 0; a < g.D; ++a) {
        int i = static_cast<int>(std::floor((x[a] - g.origin[a]) / g.h[a]));
        if (g.periodic[a]) {
            i %= g.n[a];
            if (i < 0) i += g.n[a];
        } else {
            i = std::clamp(i, 0, g.n[a] - 1);
        }
        ii[a] = i;
    }
    return g.index(ii[0], ii[1], ii[2]);
}

}  // namespace msa::detail

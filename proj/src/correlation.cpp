#include "lpr/correlation.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstring>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "lpr/error.hpp"
#include "lpr/runtime.hpp"

namespace lpr {

namespace {

// ---------------------------------------------------------------------------
// FFTW interop. Plans are created once per geometry and executed on per-call
// buffers via the new-array API; all buffers come from fftw_alloc_* so their
// alignment matches the plans. Small transforms use FFTW_ESTIMATE (cheap,
// deterministic planning); mosaic-scale ones use FFTW_MEASURE, and the
// resulting wisdom can be persisted so later processes plan identically.
// ---------------------------------------------------------------------------

constexpr std::size_t kMeasureThreshold = std::size_t{1} << 21;

struct RealBuf {
    double* p = nullptr;
    std::size_t n = 0;
    RealBuf() = default;
    explicit RealBuf(std::size_t count) { reset(count); }
    ~RealBuf() { fftw_free(p); }
    RealBuf(const RealBuf&) = delete;
    RealBuf& operator=(const RealBuf&) = delete;
    void reset(std::size_t count) {
        fftw_free(p);
        p = fftw_alloc_real(count);
        n = count;
        std::memset(p, 0, n * sizeof(double));
    }
};

struct ComplexBuf {
    fftw_complex* p = nullptr;
    std::size_t n = 0;
    ComplexBuf() = default;
    explicit ComplexBuf(std::size_t count) { reset(count); }
    ~ComplexBuf() { fftw_free(p); }
    ComplexBuf(const ComplexBuf&) = delete;
    ComplexBuf& operator=(const ComplexBuf&) = delete;
    void reset(std::size_t count) {
        fftw_free(p);
        p = fftw_alloc_complex(count);
        n = count;
        std::memset(p, 0, n * sizeof(fftw_complex));
    }
};

enum class PlanKind { RowR2c, ColC2cFwd, Inv2dC2r };

using PlanKey = std::tuple<PlanKind, int, int>;

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    // 1-D r2c of length n1 over `rows` contiguous rows.
    fftw_plan row_r2c(int n1, int rows) {
        return get({PlanKind::RowR2c, n1, rows}, [&] {
            RealBuf in(static_cast<std::size_t>(rows) * n1);
            ComplexBuf out(static_cast<std::size_t>(rows) * (n1 / 2 + 1));
            int n[] = {n1};
            return fftw_plan_many_dft_r2c(1, n, rows, in.p, nullptr, 1, n1, out.p, nullptr, 1,
                                          n1 / 2 + 1, flags(static_cast<std::size_t>(rows) * n1));
        });
    }

    // In-place 1-D forward c2c of length n0 down every column of an
    // n0 x n1c row-major complex array. In-place is much faster than
    // out-of-place for this strided geometry.
    fftw_plan col_c2c(int n0, int n1c) {
        return get({PlanKind::ColC2cFwd, n0, n1c}, [&] {
            ComplexBuf buf(static_cast<std::size_t>(n0) * n1c);
            int n[] = {n0};
            return fftw_plan_many_dft(1, n, n1c, buf.p, nullptr, n1c, 1, buf.p, nullptr, n1c, 1,
                                      FFTW_FORWARD, flags(static_cast<std::size_t>(n0) * n1c));
        });
    }

    fftw_plan inv_c2r(int n0, int n1) {
        return get({PlanKind::Inv2dC2r, n0, n1}, [&] {
            ComplexBuf in(static_cast<std::size_t>(n0) * (n1 / 2 + 1));
            RealBuf out(static_cast<std::size_t>(n0) * n1);
            return fftw_plan_dft_c2r_2d(n0, n1, in.p, out.p,
                                        flags(static_cast<std::size_t>(n0) * n1));
        });
    }

    std::string export_wisdom() {
        std::lock_guard<std::mutex> lock(mutex_);
        char* s = fftw_export_wisdom_to_string();
        std::string wisdom = s ? s : "";
        std::free(s);
        return wisdom;
    }

    void import_wisdom(const std::string& wisdom) {
        if (wisdom.empty()) return;
        std::lock_guard<std::mutex> lock(mutex_);
        fftw_import_wisdom_from_string(wisdom.c_str());
    }

private:
    static unsigned flags(std::size_t total) {
        // MEASURE destroys its input arrays while planning; the dummies in
        // get() are discarded anyway.
        return total >= kMeasureThreshold ? FFTW_MEASURE : FFTW_ESTIMATE;
    }

    template <typename Make>
    fftw_plan get(const PlanKey& key, Make make) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = plans_.find(key);
        if (it == plans_.end()) {
            it = plans_.emplace(key, make()).first;
        }
        return it->second;
    }

    std::mutex mutex_;
    std::map<PlanKey, fftw_plan> plans_;
};

bool fft_fault_injected() {
    // Test hook: perturbs the FFT output so self-check detects a broken path.
    static const bool on = std::getenv("LPR_FFT_FAULT") != nullptr;
    return on;
}

}  // namespace

std::string export_fft_wisdom() { return PlanCache::instance().export_wisdom(); }
void import_fft_wisdom(const std::string& wisdom) { PlanCache::instance().import_wisdom(wisdom); }

int next_fast_len(int n) {
    if (n < 1) return 1;
    for (int candidate = n;; ++candidate) {
        int m = candidate;
        for (int f : {2, 3, 5, 7}) {
            while (m % f == 0) m /= f;
        }
        if (m == 1) return candidate;
    }
}

CorrelationSurface correlate_direct(const Grid& q, const Grid& r, double theta_deg) {
    const int ci = q.rows / 2;
    const int cj = q.cols / 2;
    CorrelationSurface s;
    s.theta_deg = theta_deg;
    s.values = Grid(r.rows, r.cols);
    for (int ir = 0; ir < r.rows; ++ir) {
        const int iq_lo = std::max(0, ci - ir);
        const int iq_hi = std::min(q.rows, r.rows - ir + ci);
        for (int jr = 0; jr < r.cols; ++jr) {
            const int jq_lo = std::max(0, cj - jr);
            const int jq_hi = std::min(q.cols, r.cols - jr + cj);
            double sum = 0.0;
            for (int iq = iq_lo; iq < iq_hi; ++iq) {
                const int ri = iq + ir - ci;
                for (int jq = jq_lo; jq < jq_hi; ++jq) {
                    sum += q.at(iq, jq) * r.at(ri, jq + jr - cj);
                }
            }
            s.values.at(ir, jr) = sum;
        }
    }
    return s;
}

CorrelationSurface correlate_direct(const BevDescriptor& q, const BevDescriptor& r) {
    if (q.cell_size != r.cell_size) {
        throw ConfigError("correlate: query/reference cell size mismatch");
    }
    return correlate_direct(q.grid, r.grid);
}

// ---------------------------------------------------------------------------
// FftCorrelator
// ---------------------------------------------------------------------------

struct CorrelateScratch::Impl {
    RealBuf rowbuf;    // hq x n1; columns beyond the query stay zero
    ComplexBuf spec;   // n0 x n1c
    RealBuf corr;      // n0 x n1
    int n0 = 0, n1 = 0, hq = 0;

    void ensure(int want_n0, int want_n1, int want_hq) {
        if (n0 == want_n0 && n1 == want_n1 && hq == want_hq) return;
        rowbuf.reset(static_cast<std::size_t>(want_hq) * want_n1);
        spec.reset(static_cast<std::size_t>(want_n0) * (want_n1 / 2 + 1));
        corr.reset(static_cast<std::size_t>(want_n0) * want_n1);
        n0 = want_n0;
        n1 = want_n1;
        hq = want_hq;
    }
};

CorrelateScratch::CorrelateScratch() : impl_(std::make_unique<Impl>()) {}
CorrelateScratch::~CorrelateScratch() = default;
CorrelateScratch::CorrelateScratch(CorrelateScratch&&) noexcept = default;
CorrelateScratch& CorrelateScratch::operator=(CorrelateScratch&&) noexcept = default;

struct FftCorrelator::Impl {
    int hr, wr, hq, wq;
    int n0, n1, n1c;
    int ci, cj;
    ComplexBuf ref_spec;

    Impl(const Grid& reference, int query_rows, int query_cols)
        : hr(reference.rows),
          wr(reference.cols),
          hq(query_rows),
          wq(query_cols),
          n0(next_fast_len(hr + hq - 1)),
          n1(next_fast_len(wr + wq - 1)),
          n1c(n1 / 2 + 1),
          ci(hq / 2),
          cj(wq / 2),
          ref_spec(static_cast<std::size_t>(n0) * (n1 / 2 + 1)) {
        if (hr < 1 || wr < 1 || hq < 1 || wq < 1) {
            throw ConfigError("correlate: grids must be non-empty");
        }
        // Warm every plan this correlator will need, so concurrent
        // correlate() calls only read the cache.
        PlanCache::instance().inv_c2r(n0, n1);
        PlanCache::instance().row_r2c(n1, hq);
        PlanCache::instance().col_c2c(n0, n1c);

        // Reference spectrum, computed with the same pruned forward pass.
        RealBuf rowbuf(static_cast<std::size_t>(hr) * n1);
        for (int i = 0; i < hr; ++i) {
            std::memcpy(rowbuf.p + static_cast<std::size_t>(i) * n1,
                        reference.data.data() + static_cast<std::size_t>(i) * wr,
                        static_cast<std::size_t>(wr) * sizeof(double));
        }
        fftw_execute_dft_r2c(PlanCache::instance().row_r2c(n1, hr), rowbuf.p, ref_spec.p);
        fftw_execute_dft(PlanCache::instance().col_c2c(n0, n1c), ref_spec.p, ref_spec.p);
    }

    PaddedCorrelation correlate_padded(const Grid& query, double theta_deg,
                                       CorrelateScratch::Impl& s) const {
        if (query.rows != hq || query.cols != wq) {
            throw ConfigError("correlate: query dimensions do not match correlator");
        }
        s.ensure(n0, n1, hq);

        // Forward transform of the padded query: r2c across the hq content
        // rows, then a full in-place column pass. The rowbuf zero padding
        // persists across calls; the spectrum rows below hq must be cleared
        // since the previous column pass overwrote them.
        for (int i = 0; i < hq; ++i) {
            std::memcpy(s.rowbuf.p + static_cast<std::size_t>(i) * n1,
                        query.data.data() + static_cast<std::size_t>(i) * wq,
                        static_cast<std::size_t>(wq) * sizeof(double));
        }
        std::memset(s.spec.p + static_cast<std::size_t>(hq) * n1c, 0,
                    static_cast<std::size_t>(n0 - hq) * n1c * sizeof(fftw_complex));
        fftw_execute_dft_r2c(PlanCache::instance().row_r2c(n1, hq), s.rowbuf.p, s.spec.p);
        fftw_execute_dft(PlanCache::instance().col_c2c(n0, n1c), s.spec.p, s.spec.p);

        // Cross-correlation: reference spectrum times conjugated query
        // spectrum, normalized for FFTW's unscaled inverse.
        const double scale = 1.0 / (static_cast<double>(n0) * static_cast<double>(n1));
        const std::size_t total = static_cast<std::size_t>(n0) * n1c;
        for (std::size_t k = 0; k < total; ++k) {
            const double ar = ref_spec.p[k][0], ai = ref_spec.p[k][1];
            const double br = s.spec.p[k][0], bi = -s.spec.p[k][1];
            s.spec.p[k][0] = (ar * br - ai * bi) * scale;
            s.spec.p[k][1] = (ar * bi + ai * br) * scale;
        }

        fftw_execute_dft_c2r(PlanCache::instance().inv_c2r(n0, n1), s.spec.p, s.corr.p);
        if (fft_fault_injected()) {
            s.corr.p[0] += 1e-3;
        }

        PaddedCorrelation view;
        view.data = s.corr.p;
        view.n0 = n0;
        view.n1 = n1;
        view.ci = ci;
        view.cj = cj;
        view.rows = hr;
        view.cols = wr;
        view.theta_deg = theta_deg;
        return view;
    }
};

FftCorrelator::FftCorrelator(const Grid& reference, int query_rows, int query_cols)
    : impl_(std::make_unique<Impl>(reference, query_rows, query_cols)) {}
FftCorrelator::~FftCorrelator() = default;
FftCorrelator::FftCorrelator(FftCorrelator&&) noexcept = default;
FftCorrelator& FftCorrelator::operator=(FftCorrelator&&) noexcept = default;

PaddedCorrelation FftCorrelator::correlate_padded(const Grid& query, double theta_deg,
                                                  CorrelateScratch& scratch) const {
    return impl_->correlate_padded(query, theta_deg, *scratch.impl_);
}

CorrelationSurface FftCorrelator::correlate(const Grid& query, double theta_deg) const {
    CorrelateScratch scratch;
    return materialize(impl_->correlate_padded(query, theta_deg, *scratch.impl_));
}

int FftCorrelator::reference_rows() const { return impl_->hr; }
int FftCorrelator::reference_cols() const { return impl_->wr; }

CorrelationSurface materialize(const PaddedCorrelation& p) {
    CorrelationSurface s;
    s.theta_deg = p.theta_deg;
    s.values = Grid(p.rows, p.cols);
    for (int ir = 0; ir < p.rows; ++ir) {
        int a = (ir - p.ci) % p.n0;
        if (a < 0) a += p.n0;
        const double* row = p.data + static_cast<std::size_t>(a) * p.n1;
        for (int jr = 0; jr < p.cols; ++jr) {
            int b = (jr - p.cj) % p.n1;
            if (b < 0) b += p.n1;
            s.values.at(ir, jr) = row[b];
        }
    }
    return s;
}

PeakResult argmax_padded(const PaddedCorrelation& p) {
    PeakResult best{0, 0, p.theta_deg, p.at(0, 0)};
    for (int ir = 0; ir < p.rows; ++ir) {
        int a = (ir - p.ci) % p.n0;
        if (a < 0) a += p.n0;
        const double* row = p.data + static_cast<std::size_t>(a) * p.n1;
        for (int jr = 0; jr < p.cols; ++jr) {
            int b = (jr - p.cj) % p.n1;
            if (b < 0) b += p.n1;
            if (row[b] > best.score) {
                best = PeakResult{ir, jr, p.theta_deg, row[b]};
            }
        }
    }
    return best;
}

CorrelationSurface correlate_fft(const Grid& q, const Grid& r, double theta_deg) {
    FftCorrelator correlator(r, q.rows, q.cols);
    return correlator.correlate(q, theta_deg);
}

CorrelationSurface correlate_fft(const BevDescriptor& q, const BevDescriptor& r) {
    if (q.cell_size != r.cell_size) {
        throw ConfigError("correlate: query/reference cell size mismatch");
    }
    return correlate_fft(q.grid, r.grid);
}

PeakResult argmax_surface(const CorrelationSurface& s) {
    if (s.values.empty()) throw ConfigError("argmax of empty surface");
    PeakResult best{0, 0, s.theta_deg, s.values.data[0]};
    for (int i = 0; i < s.values.rows; ++i) {
        for (int j = 0; j < s.values.cols; ++j) {
            const double v = s.values.at(i, j);
            if (v > best.score) {
                best = PeakResult{i, j, s.theta_deg, v};
            }
        }
    }
    return best;
}

std::vector<int> sweep_angles(int k_deg) {
    if (k_deg <= 0 || 360 % k_deg != 0) {
        throw ConfigError("rotation increment must be a positive divisor of 360, got " +
                          std::to_string(k_deg));
    }
    std::vector<int> angles;
    angles.reserve(360 / k_deg);
    for (int t = 0; t < 360; t += k_deg) angles.push_back(t);
    return angles;
}

void rotation_sweep_unordered(
    const BevDescriptor& query, const FftCorrelator& correlator, int k_deg,
    const std::function<void(std::size_t, const PaddedCorrelation&)>& consume) {
    const std::vector<int> angles = sweep_angles(k_deg);
    const int workers = std::min<int>(worker_count(), static_cast<int>(angles.size()));

    if (workers <= 1) {
        CorrelateScratch scratch;
        for (std::size_t t = 0; t < angles.size(); ++t) {
            const BevDescriptor rotated = rotate_descriptor(query, angles[t]);
            consume(t, correlator.correlate_padded(rotated.grid, angles[t], scratch));
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            CorrelateScratch scratch;
            for (std::size_t t = next.fetch_add(1); t < angles.size(); t = next.fetch_add(1)) {
                const BevDescriptor rotated = rotate_descriptor(query, angles[t]);
                consume(t, correlator.correlate_padded(rotated.grid, angles[t], scratch));
            }
        });
    }
    for (std::thread& thread : pool) thread.join();
}

PeakResult rotation_sweep_visit(const BevDescriptor& query, const FftCorrelator& correlator,
                                int k_deg,
                                const std::function<void(const CorrelationSurface&)>& visit) {
    const std::size_t count = sweep_angles(k_deg).size();
    std::vector<CorrelationSurface> slots(count);
    rotation_sweep_unordered(query, correlator, k_deg,
                             [&](std::size_t t, const PaddedCorrelation& padded) {
                                 slots[t] = materialize(padded);
                             });
    // Ascending theta with strictly-greater updates: ties stay with the
    // smaller theta, and argmax_surface already prefers smaller (i, j).
    PeakResult best;
    bool have_best = false;
    for (const CorrelationSurface& surface : slots) {
        const PeakResult peak = argmax_surface(surface);
        if (!have_best || peak.score > best.score) {
            best = peak;
            have_best = true;
        }
        if (visit) visit(surface);
    }
    return best;
}

SweepResult rotation_sweep(const BevDescriptor& query, const Grid& reference, int k_deg) {
    FftCorrelator correlator(reference, query.grid.rows, query.grid.cols);
    SweepResult result;
    result.best = rotation_sweep_visit(query, correlator, k_deg, [&](const CorrelationSurface& s) {
        result.surfaces.push_back(s);
    });
    return result;
}

}  // namespace lpr

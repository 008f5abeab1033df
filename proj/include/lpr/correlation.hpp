#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lpr/descriptor.hpp"
#include "lpr/grid.hpp"

namespace lpr {

// Score of the query placed with its center cell (floor(Hq/2), floor(Wq/2))
// on every reference cell, at one query rotation.
struct CorrelationSurface {
    Grid values;  // same dimensions as the reference grid
    double theta_deg = 0.0;
};

struct PeakResult {
    int i = 0;
    int j = 0;
    double theta_deg = 0.0;
    double score = 0.0;
};

// Brute-force sum of products; the oracle the FFT path is checked against.
// surface(ir, jr) = sum_q q(iq, jq) * r(iq + ir - ci, jq + jr - cj), with
// out-of-bounds reference cells contributing zero.
CorrelationSurface correlate_direct(const Grid& q, const Grid& r, double theta_deg = 0.0);
CorrelationSurface correlate_direct(const BevDescriptor& q, const BevDescriptor& r);

// Same contract, computed by zero-padded FFTs (linear, never circular).
CorrelationSurface correlate_fft(const Grid& q, const Grid& r, double theta_deg = 0.0);
CorrelationSurface correlate_fft(const BevDescriptor& q, const BevDescriptor& r);

// Maximal cell; ties broken by smallest i, then smallest j.
PeakResult argmax_surface(const CorrelationSurface& s);

// Smallest 7-smooth integer >= n; FFT sizes are padded up to this.
int next_fast_len(int n);

// Correlation result still sitting in the padded FFT output buffer. Valid
// only until the owning scratch is reused; read cells through at().
struct PaddedCorrelation {
    const double* data = nullptr;  // n0 x n1 row-major
    int n0 = 0, n1 = 0;
    int ci = 0, cj = 0;  // query center
    int rows = 0, cols = 0;  // reference dimensions
    double theta_deg = 0.0;

    double at(int ir, int jr) const {
        int a = (ir - ci) % n0;
        if (a < 0) a += n0;
        int b = (jr - cj) % n1;
        if (b < 0) b += n1;
        return data[static_cast<std::size_t>(a) * n1 + b];
    }
};

PeakResult argmax_padded(const PaddedCorrelation& p);
CorrelationSurface materialize(const PaddedCorrelation& p);

// Reusable per-thread work buffers for one correlator geometry.
class CorrelateScratch {
public:
    CorrelateScratch();
    ~CorrelateScratch();
    CorrelateScratch(CorrelateScratch&&) noexcept;
    CorrelateScratch& operator=(CorrelateScratch&&) noexcept;

private:
    friend class FftCorrelator;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Repeated correlations of same-size queries against one fixed reference:
// the padded reference spectrum is computed once and reused. Thread-safe;
// concurrent calls need distinct scratches.
class FftCorrelator {
public:
    FftCorrelator(const Grid& reference, int query_rows, int query_cols);
    ~FftCorrelator();
    FftCorrelator(FftCorrelator&&) noexcept;
    FftCorrelator& operator=(FftCorrelator&&) noexcept;

    CorrelationSurface correlate(const Grid& query, double theta_deg = 0.0) const;

    // Leaves the result in the scratch buffers and returns a view into them.
    PaddedCorrelation correlate_padded(const Grid& query, double theta_deg,
                                       CorrelateScratch& scratch) const;

    int reference_rows() const;
    int reference_cols() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct SweepResult {
    PeakResult best;
    std::vector<CorrelationSurface> surfaces;  // ascending theta
};

// Correlates the query rotated by every theta in {0, k, ..., 360-k} against
// the reference; global best peak with ties broken toward smaller theta,
// then smaller (i, j). k must divide 360.
SweepResult rotation_sweep(const BevDescriptor& query, const Grid& reference, int k_deg);

// Workhorse under the sweeps: `consume(theta_index, padded)` runs on worker
// threads, at most once per theta index and possibly out of order; callers
// reduce their per-theta values in index order afterwards.
void rotation_sweep_unordered(
    const BevDescriptor& query, const FftCorrelator& correlator, int k_deg,
    const std::function<void(std::size_t, const PaddedCorrelation&)>& consume);

// Ordered convenience wrapper: surfaces are materialized and handed to
// `visit` in ascending theta order. Returns the global best peak.
PeakResult rotation_sweep_visit(const BevDescriptor& query, const FftCorrelator& correlator,
                                int k_deg,
                                const std::function<void(const CorrelationSurface&)>& visit);

std::vector<int> sweep_angles(int k_deg);

// FFTW wisdom accumulated by this process (plans for large transforms are
// measured once; wisdom makes them reproducible across processes).
std::string export_fft_wisdom();
void import_fft_wisdom(const std::string& wisdom);

}  // namespace lpr

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lpr/correlation.hpp"
#include "lpr/error.hpp"
#include "test_helpers.hpp"

using namespace lpr;

namespace {

Grid random_grid(Rng& rng, int rows, int cols) {
    Grid g(rows, cols);
    for (double& v : g.data) v = rng.next_uniform(-1.0, 1.0);
    return g;
}

double max_abs(const Grid& g) {
    double m = 0.0;
    for (double v : g.data) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const Grid& a, const Grid& b) {
    REQUIRE(a.rows == b.rows);
    REQUIRE(a.cols == b.cols);
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data[k] - b.data[k]));
    return m;
}

BevDescriptor wrap(Grid g, double cell = 0.3, double unoccupied = 0.0) {
    BevDescriptor d;
    d.grid = std::move(g);
    d.cell_size = cell;
    d.unoccupied_value = unoccupied;
    return d;
}

}  // namespace

TEST_CASE("correlate_direct basics") {
    SUBCASE("1x1 against 1x1") {
        Grid q(1, 1, 1.0), r(1, 1, 1.0);
        const CorrelationSurface s = correlate_direct(q, r);
        REQUIRE(s.values.rows == 1);
        CHECK(s.values.at(0, 0) == 1.0);
    }

    SUBCASE("delta against delta localizes the peak") {
        Grid q(3, 3, 0.0), r(5, 5, 0.0);
        q.at(1, 1) = 1.0;
        r.at(4, 4) = 1.0;
        const CorrelationSurface s = correlate_direct(q, r);
        const PeakResult p = argmax_surface(s);
        CHECK(p.i == 4);
        CHECK(p.j == 4);
        CHECK(p.score == 1.0);
    }

    SUBCASE("query center convention") {
        // Query occupies one cell away from its center; the peak appears
        // displaced by the same offset.
        Grid q(4, 4, 0.0), r(9, 9, 0.0);
        q.at(3, 2) = 1.0;  // center cell is (2, 2): offset (+1, 0)
        r.at(5, 4) = 1.0;
        const PeakResult p = argmax_surface(correlate_direct(q, r));
        CHECK(p.i == 4);
        CHECK(p.j == 4);
    }
}

TEST_CASE("correlate_fft equals correlate_direct") {
    Rng rng(0xABCDEF);
    const int edges[] = {8, 16, 31, 32};
    for (int trial = 0; trial < 40; ++trial) {
        const Grid q = random_grid(rng, edges[rng.next_below(4)], edges[rng.next_below(4)]);
        const Grid r = random_grid(rng, edges[rng.next_below(4)], edges[rng.next_below(4)]);
        const CorrelationSurface direct = correlate_direct(q, r);
        const CorrelationSurface fast = correlate_fft(q, r);
        const double tol = 1e-6 * (1.0 + max_abs(direct.values));
        CHECK(max_abs_diff(direct.values, fast.values) <= tol);
    }

    SUBCASE("query larger than reference") {
        const Grid q = random_grid(rng, 32, 31);
        const Grid r = random_grid(rng, 9, 14);
        const CorrelationSurface direct = correlate_direct(q, r);
        const CorrelationSurface fast = correlate_fft(q, r);
        CHECK(max_abs_diff(direct.values, fast.values) <= 1e-6 * (1.0 + max_abs(direct.values)));
    }
}

TEST_CASE("correlate_fft properties") {
    Rng rng(31337);

    SUBCASE("all-zero query gives an all-zero surface") {
        const Grid q(16, 16, 0.0);
        const Grid r = random_grid(rng, 32, 32);
        const CorrelationSurface s = correlate_fft(q, r);
        CHECK(max_abs(s.values) <= 1e-12);
    }

    SUBCASE("doubling the query doubles the surface exactly") {
        const Grid q = random_grid(rng, 8, 8);
        Grid q2 = q;
        for (double& v : q2.data) v *= 2.0;
        const Grid r = random_grid(rng, 16, 16);
        const CorrelationSurface a = correlate_fft(q, r);
        const CorrelationSurface b = correlate_fft(q2, r);
        for (std::size_t k = 0; k < a.values.size(); ++k) {
            CHECK(b.values.data[k] == 2.0 * a.values.data[k]);
        }
    }

    SUBCASE("shifting reference content shifts the peak with it") {
        Grid q = random_grid(rng, 8, 8);
        for (double& v : q.data) v = std::abs(v);  // positive template
        Grid r(32, 32, 0.0);
        for (int i = 0; i < 8; ++i) {
            for (int j = 0; j < 8; ++j) r.at(10 + i, 6 + j) = q.at(i, j);
        }
        const PeakResult base = argmax_surface(correlate_fft(q, r));
        Grid shifted(32, 32, 0.0);
        for (int i = 0; i < 8; ++i) {
            for (int j = 0; j < 8; ++j) shifted.at(15 + i, 13 + j) = q.at(i, j);
        }
        const PeakResult moved = argmax_surface(correlate_fft(q, shifted));
        CHECK(moved.i == base.i + 5);
        CHECK(moved.j == base.j + 7);
    }

    SUBCASE("results are bitwise deterministic") {
        const Grid q = random_grid(rng, 31, 32);
        const Grid r = random_grid(rng, 32, 31);
        const CorrelationSurface a = correlate_fft(q, r);
        const CorrelationSurface b = correlate_fft(q, r);
        CHECK(a.values == b.values);
    }

    SUBCASE("cell size mismatch rejected") {
        const BevDescriptor q = wrap(random_grid(rng, 4, 4), 0.3);
        const BevDescriptor r = wrap(random_grid(rng, 8, 8), 0.6);
        CHECK_THROWS_AS(correlate_fft(q, r), ConfigError);
        CHECK_THROWS_AS(correlate_direct(q, r), ConfigError);
    }
}

TEST_CASE("argmax_surface tie-breaks") {
    SUBCASE("single maximum") {
        CorrelationSurface s;
        s.values = Grid(2, 2, 0.0);
        s.values.at(0, 1) = 1.0;
        const PeakResult p = argmax_surface(s);
        CHECK(p.i == 0);
        CHECK(p.j == 1);
    }

    SUBCASE("uniform surface picks the smallest (i, j)") {
        CorrelationSurface s;
        s.values = Grid(3, 3, 0.5);
        const PeakResult p = argmax_surface(s);
        CHECK(p.i == 0);
        CHECK(p.j == 0);
        CHECK(p.score == 0.5);
    }
}

TEST_CASE("rotation_sweep") {
    Rng rng(2024);

    SUBCASE("k=10 evaluates 36 rotations") {
        const BevDescriptor q = wrap(random_grid(rng, 8, 8));
        const Grid r = random_grid(rng, 8, 8);
        const SweepResult sweep = rotation_sweep(q, r, 10);
        CHECK(sweep.surfaces.size() == 36);
        for (std::size_t t = 0; t < sweep.surfaces.size(); ++t) {
            CHECK(sweep.surfaces[t].theta_deg == 10.0 * t);
        }
    }

    SUBCASE("k must divide 360") {
        const BevDescriptor q = wrap(random_grid(rng, 4, 4));
        const Grid r = random_grid(rng, 4, 4);
        CHECK_THROWS_AS(rotation_sweep(q, r, 7), ConfigError);
        CHECK_THROWS_AS(rotation_sweep(q, r, 0), ConfigError);
    }

    SUBCASE("k=360 degenerates to a single theta-0 correlation") {
        const BevDescriptor q = wrap(random_grid(rng, 8, 8), 0.3, -0.15);
        const Grid r = random_grid(rng, 16, 16);
        const SweepResult sweep = rotation_sweep(q, r, 360);
        REQUIRE(sweep.surfaces.size() == 1);
        CHECK(sweep.best.theta_deg == 0.0);
        const CorrelationSurface single = correlate_fft(q.grid, r);
        CHECK(sweep.surfaces[0].values == single.values);
    }

    SUBCASE("query equal to the reference peaks at theta 0") {
        BevDescriptor q = wrap(Grid(16, 16, 0.0), 0.3, 0.0);
        Rng local(5);
        for (double& v : q.grid.data) {
            if (local.next_double() < 0.3) v = 1.0;
        }
        const SweepResult sweep = rotation_sweep(q, q.grid, 90);
        CHECK(sweep.best.theta_deg == 0.0);
        CHECK(sweep.best.i == 8);
        CHECK(sweep.best.j == 8);
    }

    SUBCASE("rotated query recovers the planted right angle") {
        // Reference: asymmetric two-valued pattern. Query: the reference
        // rotated by -90 degrees; the sweep must undo it at theta=90.
        BevDescriptor ref = wrap(Grid(17, 17, 0.0), 0.3, 0.0);
        Rng local(6);
        for (int i = 0; i < 17; ++i) {
            for (int j = 0; j < 17; ++j) {
                if (local.next_double() < 0.25 * (1.0 + i / 17.0)) ref.grid.at(i, j) = 1.0;
            }
        }
        const BevDescriptor q = rotate_descriptor(ref, -90.0);
        const SweepResult sweep = rotation_sweep(q, ref.grid, 90);
        CHECK(sweep.best.theta_deg == 90.0);
        CHECK(sweep.best.i == 8);
        CHECK(sweep.best.j == 8);

        // The brute-force sweep agrees angle by angle.
        for (const CorrelationSurface& s : sweep.surfaces) {
            const CorrelationSurface direct =
                correlate_direct(rotate_descriptor(q, s.theta_deg).grid, ref.grid);
            CHECK(max_abs_diff(s.values, direct.values) <= 1e-6 * (1.0 + max_abs(direct.values)));
        }
    }
}

TEST_CASE("next_fast_len") {
    CHECK(next_fast_len(1) == 1);
    CHECK(next_fast_len(7) == 7);
    CHECK(next_fast_len(11) == 12);
    CHECK(next_fast_len(121) == 125);
    CHECK(next_fast_len(2399) == 2400);
}

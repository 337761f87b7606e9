#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "clob/errors.hpp"
#include "clob/random.hpp"
#include "clob/simulator.hpp"

using namespace clob;

namespace {

double lerp_at(const std::vector<double>& phi, double x0, double h, double x) {
    const double u = (x - x0) / h;
    const double last = static_cast<double>(phi.size() - 1);
    if (u < 0.0 || u > last) return 0.0;
    const auto i = static_cast<std::size_t>(std::floor(u));
    if (i + 1 >= phi.size()) return phi.back();
    const double f = u - static_cast<double>(i);
    return (1.0 - f) * phi[i] + f * phi[i + 1];
}

// Memoryless scheme written out directly from the update equation with a
// single history term.
std::vector<double> single_step(const std::vector<double>& prev, const Lattice& lat, double r, double nu,
                                double dt, double dx, double F, const std::vector<double>& creation) {
    std::vector<double> out(prev.size(), 0.0);
    for (std::size_t i = 1; i + 1 < prev.size(); ++i) {
        const double x = lat.x(i);
        const double minus = lerp_at(prev, lat.x0(), lat.dx(), x - dx);
        const double plus = lerp_at(prev, lat.x0(), lat.dx(), x + dx);
        out[i] = 0.5 * (r + F) * minus + 0.5 * (r - F) * plus - r * prev[i] + std::exp(-nu * dt) * prev[i] +
                 creation[i] * dt;
    }
    return out;
}

std::vector<double> gaussian(const Lattice& lat, double centre, double sd) {
    std::vector<double> g(lat.size(), 0.0);
    for (std::size_t i = 1; i + 1 < lat.size(); ++i) {
        const double z = (lat.x(i) - centre) / sd;
        g[i] = std::exp(-0.5 * z * z);
    }
    return g;
}

double moment(const std::vector<double>& phi, const Lattice& lat, int k, double about) {
    double s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) s += phi[i] * std::pow(lat.x(i) - about, k);
    return s * lat.dx();
}

double variance(const std::vector<double>& phi, const Lattice& lat) {
    const double m0 = moment(phi, lat, 0, 0.0);
    const double mean = moment(phi, lat, 1, 0.0) / m0;
    return moment(phi, lat, 2, mean) / m0;
}

}  // namespace

TEST_CASE("drift coefficient") {
    CHECK(drift_coefficient(0.0, 0.1, 0.5, 1.0, 0.5) == 0.0);
    CHECK(drift_coefficient(1.0, 0.1, 0.5, 1.0, 0.5) == doctest::Approx(0.2));
    CHECK(drift_coefficient(100.0, 0.1, 0.5, 1.0, 0.5) == 0.5);
    CHECK(drift_coefficient(-100.0, 0.1, 0.5, 1.0, 0.5) == -0.5);
}

TEST_CASE("alpha = 1 system matches an independent single-step scheme") {
    SimConfig cfg = table1_config();
    cfg.burn_in = 0;
    CoupledSystem sys(cfg, 99);
    const Lattice& lat = sys.lattice();
    REQUIRE(sys.kernel().window() == 1);
    std::vector<std::vector<double>> phi{sys.book(0).phi, sys.book(1).phi};
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
        const StepRecord rec = sys.advance();
        const BookParams& bp = cfg.books[rec.book];
        std::vector<double> c = source_term(lat.points(), rec.price_prev, bp.lambda, bp.mu);
        const auto G = coupling_term(lat.points(), rec.price_prev, rec.other_price, bp.lambda, bp.mu,
                                     cfg.eps_p_fraction * lat.dx(), cfg.coupling_form);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += G[i];
        phi[rec.book] = single_step(phi[rec.book], lat, cfg.lattice.r, bp.nu, rec.t - rec.t_prev, rec.dx, rec.F, c);
        for (std::size_t i = 0; i < lat.size(); ++i)
            worst = std::max(worst, std::abs(phi[rec.book][i] - sys.book(rec.book).phi[i]));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("pure diffusion conserves mass and spreads at rate 2 D") {
    for (SamplingMode mode : {SamplingMode::Uniform, SamplingMode::Exponential}) {
        CAPTURE(static_cast<int>(mode));
        LatticeConfig lc;
        const Lattice lat(lc);
        const KernelTable K = KernelTable::build(1.0);
        DensityStepper st(lat, K, lc.r, 0.0);
        const auto bump = gaussian(lat, 230.0, 5.0);
        st.reset(bump, 0.0);
        const std::vector<double> zero(lat.size(), 0.0);
        const double dtbar = base_dt(lc);
        EventClock clock(mode, 1.0 / dtbar);
        Rng rng = make_rng(4);
        const double m0 = moment(bump, lat, 0, 0.0);
        const double v0 = variance(bump, lat);
        // Interpolating a jump of q + f cells onto cells q and q + 1 adds
        // r ((1 - f) q^2 + f (q + 1)^2) h^2 of variance.
        double expected = 0.0;
        const double h = lat.dx();
        for (int n = 0; n < 1000; ++n) {
            const double dt = clock.next_dt(rng);
            const double dx = jump_length(dt, lc.D_alpha, lc.alpha, lc.r);
            const double u = dx / h;
            const double q = std::floor(u + 1e-12);
            const double f = std::max(0.0, u - q);
            expected += lc.r * ((1.0 - f) * q * q + f * (q + 1.0) * (q + 1.0)) * h * h;
            st.step(dt, dx, 0.0, zero);
        }
        const auto& phi = st.density();
        CHECK(std::abs(moment(phi, lat, 0, 0.0) - m0) < 1e-8 * m0);
        const double growth = variance(phi, lat) - v0;
        CHECK(growth == doctest::Approx(expected).epsilon(1e-6));
        if (mode == SamplingMode::Uniform) CHECK(growth == doctest::Approx(2.0 * lc.D_alpha * st.time()).epsilon(1e-6));
    }
}

TEST_CASE("cancellation-only decay of a flat profile") {
    LatticeConfig lc;
    const Lattice lat(lc);
    const KernelTable K = KernelTable::build(1.0);
    const double nu = 3.0;
    DensityStepper st(lat, K, lc.r, nu);
    std::vector<double> flat(lat.size(), 2.0);
    st.reset(flat, 0.0);
    const std::vector<double> zero(lat.size(), 0.0);
    Rng rng = make_rng(8);
    EventClock clock(SamplingMode::Exponential, 8.0);
    for (int n = 0; n < 50; ++n) {
        const double dt = clock.next_dt(rng);
        st.step(dt, jump_length(dt, lc.D_alpha, 1.0, lc.r), 0.0, zero);
    }
    const double expect = 2.0 * std::exp(-nu * st.time());
    for (std::size_t i = 100; i <= 300; ++i) CHECK(std::abs(st.density()[i] - expect) < 1e-10);
}

TEST_CASE("memory kernel leaves a flat profile unchanged") {
    LatticeConfig lc;
    lc.alpha = 0.57;
    const Lattice lat(lc);
    const KernelTable K = KernelTable::build(0.57);
    DensityStepper st(lat, K, lc.r, 0.0);
    std::vector<double> flat(lat.size(), 1.0);
    st.reset(flat, 0.0);
    const std::vector<double> zero(lat.size(), 0.0);
    for (int n = 0; n < 100; ++n) st.step(0.05, jump_length(0.05, lc.D_alpha, lc.alpha, lc.r), 0.0, zero);
    for (std::size_t i = 110; i <= 290; ++i) CHECK(std::abs(st.density()[i] - 1.0) < 1e-12);
}

TEST_CASE("constant maximal drift moves the price up monotonically") {
    SimConfig cfg = table1_config();
    cfg.coupling = false;
    cfg.force.fixed_drift = 0.5;
    cfg.burn_in = 0;
    CoupledSystem sys(cfg, 3);
    const double start = sys.book(0).price;
    double last = start;
    for (int n = 0; n < 400; ++n) {
        const StepRecord rec = sys.advance();
        if (rec.book != 0) continue;
        CHECK(rec.price >= last - 1e-12);
        last = rec.price;
    }
    CHECK(last > start + 0.5);
}

TEST_CASE("simulation is deterministic in the seed") {
    const SimConfig cfg = table1_config();
    const auto a = simulate(cfg, 20.0, 5);
    const auto b = simulate(cfg, 20.0, 5);
    const auto c = simulate(cfg, 20.0, 6);
    REQUIRE(a.paths.size() == 2);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(a.paths[j].t == b.paths[j].t);
        CHECK(a.paths[j].p == b.paths[j].p);
    }
    CHECK(a.paths[0].p != c.paths[0].p);
    for (const PricePath& p : a.paths) {
        CHECK(std::is_sorted(p.t.begin(), p.t.end()));
        for (double x : p.p) {
            CHECK(x > 130.0);
            CHECK(x < 330.0);
        }
    }
}

TEST_CASE("coupling keeps the spread mean-reverting") {
    auto spread_rms = [](const SimConfig& cfg, std::uint64_t seed) {
        double s2 = 0.0;
        std::size_t n = 0;
        SimulationOptions opts;
        opts.on_step = [&](const StepRecord& r) {
            s2 += (r.price - r.other_price) * (r.price - r.other_price);
            ++n;
        };
        simulate(cfg, 200.0, seed, opts);
        return std::sqrt(s2 / static_cast<double>(n));
    };
    SimConfig coupled = table1_config();
    SimConfig loose = coupled;
    loose.coupling = false;
    loose.force.independent = true;
    for (std::uint64_t seed : {1, 2, 3}) CHECK(spread_rms(loose, seed) > 3.0 * spread_rms(coupled, seed));
}

TEST_CASE("a one-time shock decays back toward parity") {
    int restored = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        SimConfig cfg = table1_config();
        cfg.shocks.push_back({1, Shock{0.03, -1.0, 5.0}});
        double peak = 0.0, later = 0.0;
        std::size_t after = 0;
        bool hit = false;
        SimulationOptions opts;
        opts.on_step = [&](const StepRecord& r) {
            if (r.shocked) hit = true;
            if (!hit) return;
            const double gap = std::abs(r.price - r.other_price);
            ++after;
            if (after <= 50) peak = std::max(peak, gap);
            if (after == 500) later = gap;
        };
        simulate(cfg, 5.0 + 600 * cfg.mean_dt(), static_cast<std::uint64_t>(s), opts);
        REQUIRE(after >= 500);
        if (later < peak) ++restored;
    }
    CHECK(restored >= 19);
}

TEST_CASE("impact table") {
    const SimConfig cfg = table1_config();
    const std::vector<double> Q{0.0, 0.005, 0.01, 0.02, 0.04};
    const auto rows = measure_impact(cfg, Q, 17);
    REQUIRE(rows.size() == Q.size());
    CHECK(rows[0].dp == 0.0);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].dp >= rows[i - 1].dp);
    CHECK(rows.back().dp > 0.0);
    const std::vector<double> neg{-0.02};
    CHECK(measure_impact(cfg, neg, 17)[0].dp < 0.0);
}

TEST_CASE("config validation and presets") {
    const SimConfig t2 = table2_config();
    CHECK(t2.lattice.D_alpha == 0.27);
    CHECK(t2.lattice.alpha == 0.57);
    CHECK(t2.books[0].nu == 12.55);
    CHECK(t2.mean_dt() == doctest::Approx(std::pow(0.125 / 0.54, 1.0 / 0.57)));
    SimConfig bad = table1_config();
    bad.books[0].mu = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = table1_config();
    bad.shocks.push_back({5, Shock{}});
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(simulate(table1_config(), -1.0, 1), ConfigError);
}

TEST_CASE("price path CSV round trip") {
    const auto res = simulate(table1_config(), 5.0, 9);
    std::stringstream ss;
    write_paths_csv(ss, res.paths, 9);
    CHECK(ss.str().rfind("# seed=9\nbook_id,t,p\n", 0) == 0);
    const auto back = read_paths_csv(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[1].t == res.paths[1].t);
    CHECK(back[1].p == res.paths[1].p);
}

TEST_CASE("snapshots are recorded on request") {
    SimulationOptions opts;
    opts.snapshot_every = 10;
    const auto res = simulate(table1_config(), 5.0, 2, opts);
    CHECK(res.snapshots.size() > 2);
    CHECK(res.snapshots.front().phi.size() == 401);
}

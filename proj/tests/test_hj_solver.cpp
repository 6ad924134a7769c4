#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "subfront/errors.hpp"
#include "subfront/hj_solver.hpp"

using namespace subfront;
using namespace subfront::hj;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Hamiltonian quadratic() {
    return Hamiltonian::from_functions([](double p) { return 0.5 * p * p; },
                                       [](double p) { return p; }, "p^2/2");
}

HJRunConfig make_config(Hamiltonian h, double t_end, std::vector<double> snaps = {}) {
    HJRunConfig c;
    c.hamiltonian = std::move(h);
    c.t_end = t_end;
    c.snapshot_times = snaps.empty() ? std::vector<double>{t_end} : std::move(snaps);
    return c;
}

// Hopf-Lax value min_y [sin y + (x-y)^2/(2t)]: scan a fine y-grid, then Newton on
// cos y = (x-y)/t from the best scan point.
double hopf_lax_sin(double x, double t, double dy) {
    double best_y = x, best = std::sin(x);
    for (double y = x - 3.0; y <= x + 3.0; y += dy) {
        const double v = std::sin(y) + (x - y) * (x - y) / (2.0 * t);
        if (v < best) best = v, best_y = y;
    }
    double y = best_y;
    for (int it = 0; it < 30; ++it) {
        const double g = std::cos(y) - (x - y) / t;
        const double dg = -std::sin(y) + 1.0 / t;
        y -= g / dg;
    }
    return std::min(best, std::sin(y) + (x - y) * (x - y) / (2.0 * t));
}

double hopf_lax_error(std::size_t n, double t) {
    const Grid1D g{0.0, kTwoPi, n, true};
    const auto psi0 = GridField::sample(g, [](double x) { return std::sin(x); });
    const auto out = integrate(psi0, make_config(quadratic(), t)).back();
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        err = std::max(err, std::abs(out.values[i] - hopf_lax_sin(g.node(i), t, g.dx() / 10.0)));
    return err;
}

double max_forward_slope(const GridField& f) {
    double m = 0.0;
    const std::size_t n = f.size();
    for (std::size_t i = 0; i < n; ++i)
        m = std::max(m, std::abs(f.values[(i + 1) % n] - f.values[i]) / f.grid.dx());
    return m;
}

Hamiltonian subdiffusive(double mu) {
    const auto law = WaitingLaw::power_law(mu);
    return Hamiltonian::from_table(
        hamiltonian::TabulatedHamiltonian(hamiltonian::build_table(law, 1.0, 6.0, 601), law, 1.0),
        "mu=0.3");
}

}  // namespace

TEST_CASE("weno5 on constant data") {
    const Grid1D g{0.0, 1.0, 32, true};
    const auto r = weno5_reconstruct(GridField::sample(g, [](double) { return 3.7; }));
    for (std::size_t i = 0; i < 32; ++i) {
        CHECK(r.p_minus[i] == 0.0);
        CHECK(r.p_plus[i] == 0.0);
    }
    const std::vector<double> tiny(5, 1.0);
    CHECK_THROWS_AS(weno5_reconstruct(tiny, 0.1), DomainError);
}

TEST_CASE("weno5 refinement order on a sine") {
    const double L = 20.0;
    std::vector<double> errs;
    for (std::size_t n : {32u, 64u, 128u}) {
        const Grid1D g{0.0, L, n, true};
        const auto f = GridField::sample(g, [&](double x) { return std::sin(kTwoPi * x / L); });
        const auto r = weno5_reconstruct(f);
        double e = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double exact = kTwoPi / L * std::cos(kTwoPi * g.node(i) / L);
            e = std::max({e, std::abs(r.p_minus[i] - exact), std::abs(r.p_plus[i] - exact)});
        }
        errs.push_back(e);
    }
    for (std::size_t k = 1; k < errs.size(); ++k) {
        const double order = std::log2(errs[k - 1] / errs[k]);
        MESSAGE("weno5 order " << order);
        CHECK(order >= 4.5);
    }
}

TEST_CASE("weno5 on a single-node spike stays bounded") {
    const std::size_t n = 32;
    std::vector<double> v(n, 0.0);
    v[16] = 1.0;
    const double dx = 0.5;
    const auto r = weno5_reconstruct(v, dx);
    // Each candidate stencil has absolute coefficient sum at most 10/3, and the weights are convex.
    const double bound = 10.0 / 3.0 * (1.0 / dx);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::isfinite(r.p_minus[i]));
        CHECK(std::isfinite(r.p_plus[i]));
        CHECK(std::abs(r.p_minus[i]) <= bound);
        CHECK(std::abs(r.p_plus[i]) <= bound);
        // Outside the stencil support the reconstruction sees only zeros.
        if (i < 12 || i > 20) {
            CHECK(r.p_minus[i] == 0.0);
            CHECK(r.p_plus[i] == 0.0);
        }
    }
}

TEST_CASE("lax-friedrichs numerical Hamiltonian") {
    const auto h = [](double p) { return 0.5 * p * p; };
    CHECK(lax_friedrichs_hamiltonian(1.0, 1.0, h, 3.0) == 0.5);
    CHECK(lax_friedrichs_hamiltonian(0.0, 2.0, [](double) { return 0.0; }, 1.0) == -1.0);
    // Monotone: nondecreasing in p-, nonincreasing in p+, when alpha >= sup |H'| = 2.
    const double alpha = 2.0, d = 1e-4;
    for (double pm = -2.0; pm <= 2.0 - d; pm += 0.1)
        for (double pp = -2.0; pp <= 2.0 - d; pp += 0.1) {
            const double base = lax_friedrichs_hamiltonian(pm, pp, h, alpha);
            CHECK(lax_friedrichs_hamiltonian(pm + d, pp, h, alpha) >= base - 1e-15);
            CHECK(lax_friedrichs_hamiltonian(pm, pp + d, h, alpha) <= base + 1e-15);
        }
}

TEST_CASE("rk3 fixed points") {
    const Grid1D g{0.0, 20.0, 64, true};
    const auto f = GridField::sample(g, [](double x) { return std::cos(x) + 0.1 * x * (20.0 - x); });
    auto zero_cfg = make_config(Hamiltonian::zero(), 1.0);
    const auto same = rk3_advance(f, 0.1, zero_cfg);
    for (std::size_t i = 0; i < 64; ++i) CHECK(same.values[i] == f.values[i]);

    const auto c = GridField::sample(g, [](double) { return -2.5; });
    const auto cfg = make_config(subdiffusive(0.3), 1.0);
    const auto c1 = rk3_advance(c, 0.05, cfg, 1.0);
    for (double v : c1.values) CHECK(v == -2.5);

    CHECK_THROWS_AS(rk3_advance(f, 1.0, make_config(quadratic(), 1.0), 10.0), SchemeError);
}

TEST_CASE("transport matches exact translation") {
    const auto h = Hamiltonian::from_functions([](double p) { return p; }, [](double) { return 1.0; }, "p");
    std::vector<double> errs;
    for (std::size_t n : {64u, 128u}) {
        const Grid1D g{0.0, kTwoPi, n, true};
        const auto f = GridField::sample(g, [](double x) { return std::sin(x); });
        const auto out = integrate(f, make_config(h, 1.0)).back();
        double e = 0.0;
        for (std::size_t i = 0; i < n; ++i) e = std::max(e, std::abs(out.values[i] - std::sin(g.node(i) - 1.0)));
        errs.push_back(e);
    }
    MESSAGE("transport errors " << errs[0] << " " << errs[1]);
    CHECK(errs[0] < 1e-4);
    CHECK(std::log2(errs[0] / errs[1]) >= 2.5);
}

TEST_CASE("quadratic Hamiltonian matches Hopf-Lax before the shock") {
    const double e256 = hopf_lax_error(256, 0.5);
    MESSAGE("Hopf-Lax sup error, 256 cells: " << e256);
    CHECK(e256 < 1e-3);
    const double e64 = hopf_lax_error(64, 0.5), e128 = hopf_lax_error(128, 0.5);
    MESSAGE("orders " << std::log2(e64 / e128) << " " << std::log2(e128 / e256));
    CHECK(std::log2(e64 / e128) >= 2.5);
    CHECK(std::log2(e128 / e256) >= 2.5);
}

TEST_CASE("zero Hamiltonian leaves every snapshot unchanged") {
    const Grid1D g{0.0, 20.0, 32, true};
    const auto f = GridField::sample(g, [](double x) { return std::sin(x); });
    auto cfg = make_config(Hamiltonian::zero(), 2.0, {0.5, 1.0, 2.0});
    const auto snaps = integrate(f, cfg);
    REQUIRE(snaps.size() == 3);
    for (const auto& s : snaps)
        for (std::size_t i = 0; i < 32; ++i) CHECK(s.values[i] == f.values[i]);
    CHECK(snaps[1].time == 1.0);
}

TEST_CASE("decay, comparison and Lipschitz invariants with the subdiffusive Hamiltonian") {
    const Grid1D g{0.0, 20.0, 128, true};
    const auto h = subdiffusive(0.3);
    const auto times = log_spaced_times(1.0, 200.0, 8);
    // Smooth periodic well, close to 0.2 (x-10)^2 near the centre.
    const double k = std::numbers::pi / 10.0, amp = 0.4 / (k * k);
    const auto well = [=](double x) { return amp * (1.0 - std::cos(k * (x - 10.0))); };
    const auto a0 = GridField::sample(g, well);
    const auto b0 = GridField::sample(g, [=](double x) { return well(x) + 0.05 + 0.5 * std::exp(-(x - 5.0) * (x - 5.0)); });
    IntegrationStats stats;
    const auto a = integrate(a0, make_config(h, 200.0, times), &stats);
    const auto b = integrate(b0, make_config(h, 200.0, times));
    CHECK(stats.steps > 0);
    CHECK(stats.max_alpha > 0.0);

    double prev_max = a0.max(), prev_lip = max_forward_slope(a0);
    const GridField* prev = &a0;
    double violation = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].time == times[k]);
        CHECK(a[k].max() <= prev_max + 1e-10);
        for (std::size_t i = 0; i < g.n_cells; ++i) {
            CHECK(a[k].values[i] <= prev->values[i] + 1e-8 * g.dx());
            violation = std::max(violation, a[k].values[i] - b[k].values[i]);
        }
        const double lip = max_forward_slope(a[k]);
        CHECK(lip <= prev_lip * 1.01);
        prev_max = a[k].max();
        prev_lip = lip;
        prev = &a[k];
    }
    CHECK(violation <= 1e-8);
    CHECK(a.back().max() < a0.max());
}

TEST_CASE("space-dependent Hamiltonian reduces to the homogeneous one for constant mu") {
    ModelParams params;
    params.sigma = 1.0;
    params.mu_of_x = [](double) { return 0.3; };
    params.mu_x_min = params.mu_x_max = 0.3;
    const auto hx = Hamiltonian::space_dependent_from(params, 4.0, 201);
    CHECK(hx.space_dependent);
    const auto law = WaitingLaw::power_law(0.3);
    for (double p : {0.0, 0.4, -1.7})
        CHECK(std::abs(hx(3.0, p) - hamiltonian::hamiltonian_eval(p, law, 1.0)) < 1e-6);
    CHECK_THROWS_AS(Hamiltonian::space_dependent_from(ModelParams{}, 4.0, 201), DomainError);
}

TEST_CASE("config validation") {
    auto c = make_config(quadratic(), 1.0);
    CHECK_NOTHROW(c.validate());
    c.snapshot_times = {};
    CHECK_THROWS_AS(c.validate(), DomainError);
    c.snapshot_times = {0.5, 2.0};
    CHECK_THROWS_AS(c.validate(), DomainError);
    c.snapshot_times = {0.5};
    c.cfl = 1.5;
    CHECK_THROWS_AS(c.validate(), DomainError);
    const auto t = log_spaced_times(1.0, 1e5, 20);
    CHECK(t.size() == 20);
    CHECK(t.front() == 1.0);
    CHECK(t.back() == 1e5);
}

TEST_CASE("touching data: comparison holds up to the WENO truncation error") {
    // WENO5 is not a monotone scheme, so ordered data that touch can cross by a
    // truncation-size amount; the crossing must shrink under refinement.
    const double k = std::numbers::pi / 10.0, amp = 0.4 / (k * k);
    const auto well = [=](double x) { return amp * (1.0 - std::cos(k * (x - 10.0))); };
    const auto h = subdiffusive(0.3);
    std::vector<double> worst;
    for (std::size_t n : {128u, 256u}) {
        const Grid1D g{0.0, 20.0, n, true};
        const auto a = integrate(GridField::sample(g, well), make_config(h, 50.0)).back();
        const auto b = integrate(GridField::sample(g, [=](double x) { return well(x) + 0.5 * std::exp(-(x - 5.0) * (x - 5.0)); }),
                                 make_config(h, 50.0)).back();
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) v = std::max(v, a.values[i] - b.values[i]);
        worst.push_back(v);
    }
    MESSAGE("crossing " << worst[0] << " -> " << worst[1]);
    CHECK(worst[0] < 1e-5);
    CHECK(worst[1] < worst[0]);
}

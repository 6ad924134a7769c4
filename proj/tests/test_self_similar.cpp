#include <doctest.h>

#include <cmath>

#include "subfront/errors.hpp"
#include "subfront/hj_solver.hpp"
#include "subfront/self_similar.hpp"

using namespace subfront;
using namespace subfront::hj;

namespace {

std::vector<GridField> exact_snapshots(const SelfSimilarOptions& o, const std::vector<double>& times) {
    const Grid1D g{0.0, 20.0, 200, true};
    std::vector<GridField> out;
    for (double t : times) {
        const double c = oracle_amplitude(t, o.c0, o.prefactor, o.power, o.shape_exponent);
        out.push_back(GridField::sample(
            g, [&](double x) { return c * std::pow(std::abs(x - o.x_center), o.shape_exponent); }, t));
    }
    return out;
}

}  // namespace

TEST_CASE("oracle amplitude solves the amplitude ODE") {
    const double c0 = 0.2, A = 0.04, r = 2.0 / 0.3, al = r / (r - 1.0);
    CHECK(oracle_amplitude(0.0, c0, A, r, al) == doctest::Approx(c0).epsilon(1e-14));
    for (double t : {1.0, 100.0, 1e4}) {
        const double h = 1e-4 * t;
        const double dc = (oracle_amplitude(t + h, c0, A, r, al) - oracle_amplitude(t - h, c0, A, r, al)) / (2 * h);
        const double c = oracle_amplitude(t, c0, A, r, al);
        CHECK(dc == doctest::Approx(-A * std::pow(al, r) * std::pow(c, r)).epsilon(1e-6));
    }
}

TEST_CASE("exact self-similar data: zero deviation and the oracle exponent") {
    SelfSimilarOptions o;
    o.power = 2.0 / 0.3;
    o.shape_exponent = o.power / (o.power - 1.0);
    o.prefactor = 0.0416;
    o.c0 = 0.2;
    const auto snaps = exact_snapshots(o, log_spaced_times(1.0, 1e5, 20));
    const auto r = self_similar_check(snaps, o);
    CHECK(r.times.size() == 8);
    CHECK(r.collapse_deviation < 1e-12);
    CHECK(r.shape_deviation < 1e-12);
    CHECK(r.oracle_exponent == doctest::Approx(-0.3 / 1.7).epsilon(1e-14));
    CHECK(r.fitted_exponent == doctest::Approx(r.oracle_exponent).epsilon(1e-4));
    CHECK(r.virtual_origin == doctest::Approx(r.oracle_virtual_origin).epsilon(1e-3));
    // Near t0 the plain log-log slope is biased toward zero.
    CHECK(std::abs(r.raw_exponent) < std::abs(r.oracle_exponent));
    for (std::size_t k = 0; k < r.times.size(); ++k)
        CHECK(r.amplitudes[k] == doctest::Approx(r.oracle_amplitudes[k]).epsilon(1e-12));
}

TEST_CASE("insufficient snapshots") {
    SelfSimilarOptions o;
    o.prefactor = 0.005;
    const auto snaps = exact_snapshots(o, {1.0, 10.0, 2000.0, 5000.0});
    CHECK_THROWS_AS(self_similar_check(snaps, o), DomainError);
    o.t_min = 5.0;
    CHECK_NOTHROW(self_similar_check(snaps, o));
}

TEST_CASE("diffusive Hamiltonian run collapses onto the quadratic profile") {
    const double K = 0.01;
    HJRunConfig c;
    c.t_end = 1e5;
    c.snapshot_times = log_spaced_times(1.0, 1e5, 20);
    c.hamiltonian = Hamiltonian::from_functions(
        [=](double p) { return hamiltonian::hamiltonian_diffusive(p, K, 1.0); },
        [=](double p) { return K * p * std::exp(0.5 * p * p); }, "diffusive");
    const Grid1D g{0.0, 20.0, 128, true};
    const auto snaps = integrate(GridField::sample(g, [](double x) { return 0.2 * (x - 10) * (x - 10); }), c);
    SelfSimilarOptions o;
    o.prefactor = K / 2.0;
    const auto r = self_similar_check(snaps, o);
    MESSAGE("diffusive exponent " << r.fitted_exponent << " collapse " << r.collapse_deviation);
    CHECK(std::abs(r.fitted_exponent + 1.0) < 0.1);
    CHECK(r.collapse_deviation < 0.05);
}

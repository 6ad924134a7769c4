#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "subfront/ctrw.hpp"
#include "subfront/errors.hpp"
#include "subfront/kinetic.hpp"

using namespace subfront;
using namespace subfront::ctrw;

TEST_CASE("sample_waiting inverts the survival function") {
    CHECK(sample_waiting(1.0, 0.5) == 0.0);
    CHECK(sample_waiting(0.25, 0.5) == doctest::Approx(15.0).epsilon(1e-14));
    CHECK(sample_waiting(0.5, 0.3) == doctest::Approx(std::pow(2.0, 1.0 / 0.3) - 1.0).epsilon(1e-14));
    CHECK_THROWS_AS(sample_waiting(0.0, 0.5), DomainError);
    CHECK_THROWS_AS(sample_waiting(1.5, 0.5), DomainError);
    CHECK_THROWS_AS(sample_waiting(0.5, 1.0), DomainError);
    CHECK(sample_waiting(std::exp(-2.0), WaitingLaw::exponential(4.0)) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("waiting-time samples match the analytic CDF") {
    const double mu = 0.5;
    const std::size_t n = 1000000;
    auto rng = SplitMix64::for_walker(2024, 0);
    std::vector<double> a(n);
    for (auto& x : a) x = sample_waiting(rng.uniform_open0(), mu);
    std::sort(a.begin(), a.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double F = 1.0 - std::pow(1.0 + a[i], -mu);
        ks = std::max({ks, std::abs(F - static_cast<double>(i) / n), std::abs(F - static_cast<double>(i + 1) / n)});
    }
    MESSAGE("KS distance " << ks);
    CHECK(ks < 2e-3);
}

TEST_CASE("uniform draws lie in (0, 1]") {
    auto rng = SplitMix64::for_walker(1, 2);
    double lo = 1.0, hi = 0.0, mean = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform_open0();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        mean += u / 100000.0;
    }
    CHECK(lo > 0.0);
    CHECK(hi <= 1.0);
    CHECK(mean == doctest::Approx(0.5).epsilon(5e-3));
    CHECK(SplitMix64::for_walker(1, 2)() != SplitMix64::for_walker(1, 3)());
}

TEST_CASE("sigma = 0 keeps walkers at the start") {
    CtrwParams p;
    p.sigma = 0.0;
    auto e = WalkerEnsemble::create(1000, 5, p, 3.5);
    const auto r = simulate(e, 100.0, p, {1.0, 10.0, 100.0});
    for (double x : e.positions) CHECK(x == 3.5);
    for (double m : r.msd) CHECK(m == 0.0);
    CHECK(r.total_jumps > 0);
}

TEST_CASE("deterministic per seed and independent of the worker count") {
    CtrwParams p;
    p.workers = 1;
    auto a = WalkerEnsemble::create(5000, 99, p);
    const auto ra = simulate(a, 1000.0, p, log_sample_times(1.0, 1000.0, 10));
    p.workers = 4;
    auto b = WalkerEnsemble::create(5000, 99, p);
    const auto rb = simulate(b, 1000.0, p, log_sample_times(1.0, 1000.0, 10));
    CHECK(a.positions == b.positions);
    CHECK(ra.msd == rb.msd);
    CHECK(ra.jump_counts == rb.jump_counts);
    auto c = WalkerEnsemble::create(5000, 100, p);
    simulate(c, 1000.0, p, {});
    CHECK(c.positions != a.positions);
}

TEST_CASE("simulation can be continued") {
    CtrwParams p;
    auto a = WalkerEnsemble::create(2000, 3, p);
    simulate(a, 500.0, p, {});
    auto b = WalkerEnsemble::create(2000, 3, p);
    simulate(b, 200.0, p, {});
    simulate(b, 500.0, p, {});
    CHECK(a.positions == b.positions);
    CHECK(a.ages == b.ages);
    for (double age : a.ages) CHECK(age >= 0.0);
    CHECK_THROWS_AS(simulate(b, 400.0, p, {}), DomainError);
    CHECK_THROWS_AS(simulate(b, 600.0, p, {700.0}), DomainError);
}

TEST_CASE("subdiffusive MSD exponent and zero mean") {
    CtrwParams p;
    p.mu = 0.5;
    auto e = WalkerEnsemble::create(100000, 12345, p);
    const auto r = simulate(e, 1e4, p, log_sample_times(1.0, 1e4, 41));
    const auto f = fit_msd(r, 10.0);
    MESSAGE("MSD exponent " << f.exponent << " prefactor " << f.prefactor);
    CHECK(std::abs(f.exponent - 0.5) < 0.05);
    for (std::size_t k = 0; k < r.times.size(); ++k)
        CHECK(std::abs(r.mean_displacement[k]) <= 3.0 * r.displacement_stderr[k] + 1e-300);
}

TEST_CASE("exponential waits give normal diffusion") {
    CtrwParams p;
    p.exponential = true;
    p.rate = 1.0;
    p.sigma = 0.7;
    auto e = WalkerEnsemble::create(20000, 77, p);
    const auto r = simulate(e, 1000.0, p, log_sample_times(1.0, 1000.0, 31));
    const auto f = fit_msd(r, 10.0);
    CHECK(std::abs(f.exponent - 1.0) < 0.05);
    CHECK(f.prefactor == doctest::Approx(p.rate * p.sigma * p.sigma).epsilon(0.1));
    CHECK_THROWS_AS(fit_msd(r, 2000.0), DomainError);
}

TEST_CASE("jump rate matches the unscaled kinetic equation") {
    // eps = 1, v = 0, eta = 0: u(t) is the jump rate of walkers with uniform initial ages on [0, 1).
    ModelParams mp;
    mp.mu = 0.3;
    const Grid1D g{0.0, 20.0, 64, true};
    kinetic::KineticConfig kc;
    kc.epsilon = 1.0;
    kc.t_end = 4.0;
    kc.age_step = 0.05;
    const auto h = kinetic::run_kinetic(kinetic::InitialCondition::constant(0.0), mp, g, kc);

    CtrwParams p;
    p.mu = 0.3;
    p.initial_age = InitialAge::Uniform;
    auto e = WalkerEnsemble::create(400000, 31, p);
    std::vector<double> times;
    for (int k = 1; k <= 8; ++k) times.push_back(0.5 * k);
    const auto r = simulate(e, 4.0, p, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
        // Bin average of u by the trapezoid rule over the kinetic levels.
        const double t0 = k == 0 ? 0.0 : times[k - 1];
        double avg = 0.0;
        std::size_t cnt = 0;
        for (std::size_t l = 0; l < h.levels(); ++l) {
            const double t = h.time(l);
            if (t < t0 - 1e-9 || t > times[k] + 1e-9) continue;
            const double w = (std::abs(t - t0) < 1e-9 || std::abs(t - times[k]) < 1e-9) ? 0.5 : 1.0;
            avg += w * std::exp(h.log_u(l)[0]);
            ++cnt;
        }
        avg /= static_cast<double>(cnt - 1);
        const double rate = r.jump_rate(k, 0.0);
        const double se = std::sqrt(rate / (0.5 * 400000.0));
        MESSAGE("t " << times[k] << " MC " << rate << " kinetic " << avg);
        CHECK(std::abs(rate - avg) < 4.0 * se + 2e-3 * avg);
    }
}

TEST_CASE("empirical tail: bulk, monotonicity, flags and ordering against the kinetic solution") {
    const double eps = 0.2;
    CtrwParams p;
    p.mu = 0.3;
    auto e = WalkerEnsemble::create(200000, 8, p, 10.0 / eps);
    const auto r = simulate(e, 1.0 / eps, p, {1.0 / eps}, true);
    const std::vector<double> xs{10.0, 10.2, 10.4, 10.6, 10.8, 30.0};
    const auto tail = empirical_tail(r.snapshots[0], eps, xs, 0.1);
    CHECK(std::abs(tail[0].rate_estimate) < 2.0 * eps);
    for (std::size_t k = 1; k + 1 < xs.size(); ++k) {
        CHECK(!tail[k].flagged);
        CHECK(tail[k].rate_estimate > tail[k - 1].rate_estimate);
    }
    CHECK(tail.back().flagged);
    CHECK(tail.back().count == 0);
    CHECK(std::isnan(tail.back().rate_estimate));

    ModelParams mp;
    mp.mu = 0.3;
    const Grid1D g{0.0, 20.0, 400, true};
    kinetic::KineticConfig kc;
    kc.epsilon = eps;
    kc.t_end = 1.0;
    const auto h = kinetic::run_kinetic(kinetic::InitialCondition::bounded_quadratic(), mp, g, kc);
    const auto psi = kinetic::psi_eps(h, h.levels() - 1);
    for (std::size_t k = 1; k + 1 < xs.size(); ++k) {
        const auto i = static_cast<std::size_t>(std::lround(xs[k] / g.dx()));
        const auto j = static_cast<std::size_t>(std::lround(xs[k - 1] / g.dx()));
        CHECK((psi.values[i] > psi.values[j]) == (tail[k].rate_estimate > tail[k - 1].rate_estimate));
    }
    CHECK_THROWS_AS(empirical_tail({}, eps, xs, 0.1), DomainError);
}

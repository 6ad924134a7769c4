#include "subfront/hj_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "subfront/errors.hpp"

namespace subfront::hj {

Hamiltonian Hamiltonian::from_functions(std::function<double(double)> h,
                                        std::function<double(double)> dh, std::string name) {
    Hamiltonian out;
    out.value = [h](double, double p) { return h(p); };
    out.max_slope = [dh](double, double lo, double hi) {
        return std::max(std::abs(dh(lo)), std::abs(dh(hi)));
    };
    out.name = std::move(name);
    return out;
}

Hamiltonian Hamiltonian::from_table(hamiltonian::TabulatedHamiltonian h, std::string name) {
    auto shared = std::make_shared<const hamiltonian::TabulatedHamiltonian>(std::move(h));
    Hamiltonian out;
    out.value = [shared](double, double p) { return (*shared)(p); };
    out.max_slope = [shared](double, double lo, double hi) { return shared->max_abs_slope(lo, hi); };
    out.name = std::move(name);
    return out;
}

Hamiltonian Hamiltonian::zero() {
    return from_functions([](double) { return 0.0; }, [](double) { return 0.0; }, "zero");
}

Hamiltonian Hamiltonian::space_dependent_from(const ModelParams& params, double p_max,
                                              std::size_t n_points) {
    params.validate();
    if (!params.space_dependent())
        throw DomainError("space-dependent Hamiltonian needs mu(x)");
    struct Cache {
        std::mutex mutex;
        std::map<double, std::shared_ptr<const hamiltonian::TabulatedHamiltonian>> tables;
    };
    auto cache = std::make_shared<Cache>();
    auto mu_of_x = params.mu_of_x;
    const double sigma = params.sigma;
    auto lookup = [=](double x) {
        const double mu = mu_of_x(x);
        std::lock_guard lock(cache->mutex);
        auto& slot = cache->tables[mu];
        if (!slot) {
            const auto law = WaitingLaw::power_law(mu);
            slot = std::make_shared<const hamiltonian::TabulatedHamiltonian>(
                hamiltonian::build_table(law, sigma, p_max, n_points), law, sigma);
        }
        return slot;
    };
    Hamiltonian out;
    out.value = [lookup](double x, double p) { return (*lookup(x))(p); };
    out.max_slope = [lookup](double x, double lo, double hi) { return lookup(x)->max_abs_slope(lo, hi); };
    out.space_dependent = true;
    out.name = "H(x,p)";
    return out;
}

namespace {

inline double weno_combine(double v1, double v2, double v3, double v4, double v5) {
    const double phi1 = v1 / 3.0 - 7.0 * v2 / 6.0 + 11.0 * v3 / 6.0;
    const double phi2 = -v2 / 6.0 + 5.0 * v3 / 6.0 + v4 / 3.0;
    const double phi3 = v3 / 3.0 + 5.0 * v4 / 6.0 - v5 / 6.0;
    const double a = v1 - 2.0 * v2 + v3, b = v1 - 4.0 * v2 + 3.0 * v3;
    const double c = v2 - 2.0 * v3 + v4, d = v2 - v4;
    const double e = v3 - 2.0 * v4 + v5, f = 3.0 * v3 - 4.0 * v4 + v5;
    const double s1 = 13.0 / 12.0 * a * a + 0.25 * b * b;
    const double s2 = 13.0 / 12.0 * c * c + 0.25 * d * d;
    const double s3 = 13.0 / 12.0 * e * e + 0.25 * f * f;
    const double a1 = 0.1 / ((kWenoEpsilon + s1) * (kWenoEpsilon + s1));
    const double a2 = 0.6 / ((kWenoEpsilon + s2) * (kWenoEpsilon + s2));
    const double a3 = 0.3 / ((kWenoEpsilon + s3) * (kWenoEpsilon + s3));
    return (a1 * phi1 + a2 * phi2 + a3 * phi3) / (a1 + a2 + a3);
}

}  // namespace

Reconstruction weno5_reconstruct(std::span<const double> values, double dx) {
    const std::size_t n = values.size();
    if (n < 6) throw DomainError("weno5: grid too small for the 6-point stencil");
    std::vector<double> dplus(n);
    for (std::size_t i = 0; i < n; ++i) dplus[i] = (values[(i + 1) % n] - values[i]) / dx;
    auto d = [&](std::ptrdiff_t k) {
        const auto m = static_cast<std::ptrdiff_t>(n);
        return dplus[static_cast<std::size_t>(((k % m) + m) % m)];
    };
    Reconstruction r;
    r.p_minus.resize(n);
    r.p_plus.resize(n);
    for (std::size_t ui = 0; ui < n; ++ui) {
        const auto i = static_cast<std::ptrdiff_t>(ui);
        r.p_minus[ui] = weno_combine(d(i - 3), d(i - 2), d(i - 1), d(i), d(i + 1));
        r.p_plus[ui] = weno_combine(d(i + 2), d(i + 1), d(i), d(i - 1), d(i - 2));
    }
    return r;
}

Reconstruction weno5_reconstruct(const GridField& field) {
    if (!field.grid.periodic) throw DomainError("weno5: only periodic grids are supported");
    return weno5_reconstruct(field.values, field.grid.dx());
}

double lax_friedrichs_hamiltonian(double p_minus, double p_plus,
                                  const std::function<double(double)>& h, double alpha) {
    return h(0.5 * (p_minus + p_plus)) - 0.5 * alpha * (p_plus - p_minus);
}

void HJRunConfig::validate() const {
    if (!(cfl > 0.0 && cfl < 1.0)) throw DomainError("hj config: cfl must lie in (0, 1)");
    if (!(t_end > 0.0)) throw DomainError("hj config: t_end must be positive");
    if (snapshot_times.empty()) throw DomainError("hj config: empty snapshot list");
    if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end()))
        throw DomainError("hj config: snapshot times must be sorted");
    if (snapshot_times.front() < 0.0 || snapshot_times.back() > t_end)
        throw DomainError("hj config: snapshot times must lie in [0, t_end]");
    if (!hamiltonian.value || !hamiltonian.max_slope)
        throw DomainError("hj config: no Hamiltonian");
    if (alpha_inflation < 1.0) throw DomainError("hj config: alpha inflation below 1");
}

std::vector<double> log_spaced_times(double t_first, double t_end, std::size_t n_snapshots) {
    if (!(t_first > 0.0 && t_end >= t_first) || n_snapshots == 0)
        throw DomainError("log_spaced_times: need 0 < t_first <= t_end and n >= 1");
    std::vector<double> t(n_snapshots);
    if (n_snapshots == 1) return {t_end};
    const double l0 = std::log(t_first), l1 = std::log(t_end);
    for (std::size_t k = 0; k < n_snapshots; ++k)
        t[k] = std::exp(l0 + (l1 - l0) * static_cast<double>(k) / static_cast<double>(n_snapshots - 1));
    t.front() = t_first;
    t.back() = t_end;
    return t;
}

double step_alpha(const GridField& field, const Reconstruction& rec, const HJRunConfig& config) {
    if (config.alpha > 0.0) return config.alpha;
    const auto& H = config.hamiltonian;
    const std::size_t n = field.size();
    auto widen = [](double lo, double hi) {
        const double pad = 0.1 * std::max({std::abs(lo), std::abs(hi), 1e-12});
        return std::pair{lo - pad, hi + pad};
    };
    double amax = 0.0;
    if (!H.space_dependent) {
        double lo = rec.p_minus[0], hi = rec.p_minus[0];
        for (std::size_t i = 0; i < n; ++i) {
            lo = std::min({lo, rec.p_minus[i], rec.p_plus[i]});
            hi = std::max({hi, rec.p_minus[i], rec.p_plus[i]});
        }
        auto [a, b] = widen(lo, hi);
        amax = H.max_slope(field.grid.node(0), a, b);
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            auto [a, b] = widen(std::min(rec.p_minus[i], rec.p_plus[i]),
                                std::max(rec.p_minus[i], rec.p_plus[i]));
            amax = std::max(amax, H.max_slope(field.grid.node(i), a, b));
        }
    }
    return config.alpha_inflation * amax;
}

namespace {

std::pair<double, double> widen(double lo, double hi) {
    const double pad = 0.1 * std::max({std::abs(lo), std::abs(hi), 1e-12});
    return {lo - pad, hi + pad};
}

std::vector<double> rhs_from(const GridField& field, const Reconstruction& rec,
                             const HJRunConfig& config, double alpha) {
    const std::size_t n = field.size();
    std::vector<double> out(n);
    const auto& H = config.hamiltonian;
    const bool local = config.alpha <= 0.0 && config.local_dissipation;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = field.grid.node(i);
        const double pm = rec.p_minus[i], pp = rec.p_plus[i];
        double a = alpha;
        if (local) {
            auto [lo, hi] = widen(std::min(pm, pp), std::max(pm, pp));
            a = std::min(alpha, config.alpha_inflation * H.max_slope(x, lo, hi));
        }
        out[i] = -(H(x, 0.5 * (pm + pp)) - 0.5 * a * (pp - pm));
    }
    return out;
}

void check_finite(const GridField& f, const char* stage) {
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!std::isfinite(f.values[i])) {
            std::ostringstream os;
            os << "hj: non-finite value at node " << i << " (x=" << f.grid.node(i)
               << ") during " << stage << ", t=" << f.time;
            throw SchemeError(os.str());
        }
    }
}

}  // namespace

std::vector<double> hj_rhs(const GridField& field, const HJRunConfig& config, double alpha) {
    return rhs_from(field, weno5_reconstruct(field), config, alpha);
}

GridField rk3_advance(const GridField& field, double dt, const HJRunConfig& config, double alpha) {
    const double dx = field.grid.dx();
    if (!(dt > 0.0)) throw SchemeError("rk3: non-positive time step");
    if (dt * alpha > config.cfl * dx * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "rk3: CFL violation, dt=" << dt << " > cfl*dx/alpha=" << config.cfl * dx / alpha;
        throw SchemeError(os.str());
    }
    // Butcher form of SSP-RK3: exact fixed points when the right-hand side vanishes.
    const std::size_t n = field.size();
    GridField s1 = field;
    const auto l0 = hj_rhs(field, config, alpha);
    for (std::size_t i = 0; i < n; ++i) s1.values[i] = field.values[i] + dt * l0[i];
    check_finite(s1, "rk3 stage 1");

    GridField s2 = field;
    const auto l1 = hj_rhs(s1, config, alpha);
    for (std::size_t i = 0; i < n; ++i) s2.values[i] = field.values[i] + 0.25 * dt * (l0[i] + l1[i]);
    check_finite(s2, "rk3 stage 2");

    GridField out = field;
    const auto l2 = hj_rhs(s2, config, alpha);
    for (std::size_t i = 0; i < n; ++i)
        out.values[i] = field.values[i] + dt * ((l0[i] + l1[i]) / 6.0 + 2.0 * l2[i] / 3.0);
    out.time = field.time + dt;
    check_finite(out, "rk3 stage 3");
    return out;
}

GridField rk3_advance(const GridField& field, double dt, const HJRunConfig& config) {
    return rk3_advance(field, dt, config, step_alpha(field, weno5_reconstruct(field), config));
}

std::vector<GridField> integrate(const GridField& initial, const HJRunConfig& config,
                                 IntegrationStats* stats) {
    config.validate();
    if (!initial.all_finite()) throw SchemeError("hj: initial data not finite");
    const auto start = std::chrono::steady_clock::now();
    IntegrationStats local;
    std::vector<GridField> snapshots;
    snapshots.reserve(config.snapshot_times.size());
    GridField current = initial;
    const double dx = initial.grid.dx();
    for (double target : config.snapshot_times) {
        if (target < current.time - 1e-12 * std::max(1.0, target))
            throw DomainError("hj: snapshot time precedes the initial time");
        while (current.time < target) {
            if (++local.steps > config.max_steps) throw SchemeError("hj: step budget exhausted");
            const double alpha = step_alpha(current, weno5_reconstruct(current), config);
            local.max_alpha = std::max(local.max_alpha, alpha);
            double dt = config.cfl * dx / std::max(alpha, 1e-12);
            bool last = false;
            if (current.time + dt >= target * (1.0 - 1e-14)) {
                dt = target - current.time;
                last = true;
            }
            if (dt <= 0.0) break;
            current = rk3_advance(current, dt, config, alpha);
            if (last) current.time = target;
        }
        GridField snap = current;
        snap.time = target;
        snapshots.push_back(std::move(snap));
    }
    local.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (stats) *stats = local;
    return snapshots;
}

}  // namespace subfront::hj

#include "subfront/ctrw.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "subfront/errors.hpp"
#include "subfront/parallel.hpp"

namespace subfront::ctrw {

namespace {

constexpr std::size_t kBlock = 1024;

std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Box-Muller, cosine branch only, so a walker's stream carries no cached state between calls.
double standard_normal(SplitMix64& rng) {
    const double r = std::sqrt(-2.0 * std::log(rng.uniform_open0()));
    return r * std::cos(2.0 * std::numbers::pi * rng.uniform_open0());
}

}  // namespace

double sample_waiting(double u, double mu) {
    if (!(mu > 0.0 && mu < 1.0)) throw DomainError("sample_waiting: mu must lie in (0, 1)");
    if (!(u > 0.0 && u <= 1.0)) throw DomainError("sample_waiting: u must lie in (0, 1]");
    return std::expm1(-std::log(u) / mu);
}

double sample_waiting(double u, const WaitingLaw& law) {
    if (!(u > 0.0 && u <= 1.0)) throw DomainError("sample_waiting: u must lie in (0, 1]");
    return law.inverse_survival(u);
}

SplitMix64 SplitMix64::for_walker(std::uint64_t seed, std::uint64_t index) {
    return SplitMix64(mix(seed ^ mix(index + 0x9e3779b97f4a7c15ULL)));
}

SplitMix64::result_type SplitMix64::operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
}

double SplitMix64::uniform_open0() {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
}

WaitingLaw CtrwParams::law() const {
    return exponential ? WaitingLaw::exponential(rate) : WaitingLaw::power_law(mu);
}

void CtrwParams::validate() const {
    if (exponential) {
        if (!(rate > 0.0)) throw DomainError("ctrw: rate must be positive");
    } else if (!(mu > 0.0 && mu < 1.0)) {
        throw DomainError("ctrw: mu must lie in (0, 1)");
    }
    if (!(sigma >= 0.0)) throw DomainError("ctrw: sigma must be non-negative");
}

WalkerEnsemble WalkerEnsemble::create(std::size_t n_walkers, std::uint64_t seed, const CtrwParams& params,
                                      double x0) {
    params.validate();
    if (n_walkers == 0) throw DomainError("ctrw: need at least one walker");
    const auto law = params.law();
    WalkerEnsemble e;
    e.n_walkers = n_walkers;
    e.seed = seed;
    e.positions.assign(n_walkers, x0);
    e.start.assign(n_walkers, x0);
    e.ages.assign(n_walkers, 0.0);
    e.next_jump.resize(n_walkers);
    e.streams.reserve(n_walkers);
    for (std::size_t i = 0; i < n_walkers; ++i) {
        auto rng = SplitMix64::for_walker(seed, i);
        double a0 = 0.0;
        if (params.initial_age == InitialAge::Uniform) a0 = 1.0 - rng.uniform_open0();
        // Residual wait conditional on having survived to age a0.
        const double u = rng.uniform_open0();
        e.ages[i] = a0;
        e.last_jump.push_back(-a0);
        e.next_jump[i] = law.inverse_survival(u * law.survival(a0)) - a0;
        e.streams.push_back(rng);
    }
    return e;
}

double SimulationResult::jump_rate(std::size_t k, double clock0) const {
    const double t0 = k == 0 ? clock0 : times[k - 1];
    return static_cast<double>(jump_counts.at(k)) / (static_cast<double>(n_walkers) * (times[k] - t0));
}

SimulationResult simulate(WalkerEnsemble& e, double t_end, const CtrwParams& params,
                          const std::vector<double>& sample_times, bool keep_snapshots) {
    params.validate();
    if (!(t_end > e.clock)) throw DomainError("ctrw simulate: t_end must exceed the ensemble clock");
    for (std::size_t k = 0; k < sample_times.size(); ++k) {
        if (!(sample_times[k] > e.clock && sample_times[k] <= t_end) || (k > 0 && !(sample_times[k] > sample_times[k - 1])))
            throw DomainError("ctrw simulate: sample times must increase within (clock, t_end]");
    }
    const auto law = params.law();
    const std::size_t n = e.n_walkers, m = sample_times.size();
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    std::vector<std::vector<double>> sum(blocks, std::vector<double>(m, 0.0)), sumsq = sum;
    std::vector<std::vector<std::uint64_t>> jumps(blocks, std::vector<std::uint64_t>(m + 1, 0));
    SimulationResult r;
    r.times = sample_times;
    r.n_walkers = n;
    if (keep_snapshots) r.snapshots.assign(m, std::vector<double>(n));

    parallel_for(blocks, params.workers ? params.workers : default_workers(), [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) {
            for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) {
                auto& rng = e.streams[i];
                double pos = e.positions[i];
                double next = e.next_jump[i];
                double last = e.last_jump[i];
                auto advance_to = [&](double t, std::uint64_t& count) {
                    while (next <= t) {
                        if (params.sigma > 0.0) pos += params.sigma * standard_normal(rng);
                        last = next;
                        next += law.inverse_survival(rng.uniform_open0());
                        ++count;
                    }
                };
                for (std::size_t k = 0; k < m; ++k) {
                    advance_to(sample_times[k], jumps[b][k]);
                    const double d = pos - e.start[i];
                    sum[b][k] += d;
                    sumsq[b][k] += d * d;
                    if (keep_snapshots) r.snapshots[k][i] = pos;
                }
                advance_to(t_end, jumps[b][m]);
                e.positions[i] = pos;
                e.next_jump[i] = next;
                e.last_jump[i] = last;
                e.ages[i] = t_end - last;
            }
        }
    });

    const double nn = static_cast<double>(n);
    r.msd.assign(m, 0.0);
    r.mean_displacement.assign(m, 0.0);
    r.displacement_stderr.assign(m, 0.0);
    r.jump_counts.assign(m, 0);
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t k = 0; k < m; ++k) {
            r.mean_displacement[k] += sum[b][k];
            r.msd[k] += sumsq[b][k];
            r.jump_counts[k] += jumps[b][k];
        }
        for (std::size_t k = 0; k <= m; ++k) r.total_jumps += jumps[b][k];
    }
    for (std::size_t k = 0; k < m; ++k) {
        r.mean_displacement[k] /= nn;
        r.msd[k] /= nn;
        const double var = std::max(0.0, r.msd[k] - r.mean_displacement[k] * r.mean_displacement[k]);
        r.displacement_stderr[k] = std::sqrt(var / nn);
    }
    e.clock = t_end;
    return r;
}

std::vector<double> log_sample_times(double t_first, double t_last, std::size_t n) {
    if (!(t_first > 0.0 && t_last > t_first) || n < 2) throw DomainError("log_sample_times: need 0 < t_first < t_last, n >= 2");
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k)
        t[k] = t_first * std::pow(t_last / t_first, static_cast<double>(k) / static_cast<double>(n - 1));
    t.back() = t_last;
    return t;
}

MsdFit fit_msd(const SimulationResult& r, double t_min, double t_max) {
    std::vector<double> x, y;
    for (std::size_t k = 0; k < r.times.size(); ++k)
        if (r.times[k] >= t_min && r.times[k] <= t_max && r.msd[k] > 0.0) {
            x.push_back(std::log(r.times[k]));
            y.push_back(std::log(r.msd[k]));
        }
    if (x.size() < 2) throw DomainError("fit_msd: fewer than two samples in the fit window");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    MsdFit f;
    f.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.prefactor = std::exp((sy - f.exponent * sx) / n);
    f.points = x.size();
    return f;
}

std::vector<TailPoint> empirical_tail(const std::vector<double>& positions, double eps,
                                      const std::vector<double>& x_points, double bin_width) {
    if (!(eps > 0.0) || !(bin_width > 0.0)) throw DomainError("empirical_tail: eps and bin width must be positive");
    if (positions.empty()) throw DomainError("empirical_tail: no positions");
    std::vector<double> y(positions.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = eps * positions[i];
    std::sort(y.begin(), y.end());
    std::vector<TailPoint> out;
    for (double x : x_points) {
        TailPoint p;
        p.x = x;
        const auto lo = std::lower_bound(y.begin(), y.end(), x - 0.5 * bin_width);
        const auto hi = std::lower_bound(y.begin(), y.end(), x + 0.5 * bin_width);
        p.count = static_cast<std::uint64_t>(hi - lo);
        p.density = static_cast<double>(p.count) / (static_cast<double>(y.size()) * bin_width);
        p.flagged = p.count == 0;
        p.rate_estimate = p.flagged ? std::numeric_limits<double>::quiet_NaN() : -eps * std::log(p.density);
        out.push_back(p);
    }
    return out;
}

}  // namespace subfront::ctrw

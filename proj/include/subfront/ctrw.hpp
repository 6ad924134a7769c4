#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "subfront/model.hpp"

namespace subfront::ctrw {

// Inverse survival of the power law: u^{-1/mu} - 1. DomainError unless 0 < u <= 1.
double sample_waiting(double u, double mu);
// Same for any waiting law.
double sample_waiting(double u, const WaitingLaw& law);

// SplitMix64, usable as a UniformRandomBitGenerator. One stream per (seed, walker index).
class SplitMix64 {
public:
    using result_type = std::uint64_t;
    explicit SplitMix64(std::uint64_t state) : state_(state) {}
    static SplitMix64 for_walker(std::uint64_t seed, std::uint64_t index);
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();
    // Uniform on (0, 1].
    double uniform_open0();

private:
    std::uint64_t state_;
};

enum class InitialAge { Zero, Uniform };

struct CtrwParams {
    double mu = 0.5;
    double sigma = 1.0;
    bool exponential = false;   // constant-rate control
    double rate = 1.0;          // K for the exponential law
    InitialAge initial_age = InitialAge::Zero;
    std::size_t workers = 0;    // 0 selects the hardware concurrency

    WaitingLaw law() const;
    void validate() const;
};

struct WalkerEnsemble {
    std::size_t n_walkers = 0;
    std::vector<double> positions;
    std::vector<double> ages;         // age at `clock`
    std::vector<double> start;        // positions at creation
    std::vector<double> next_jump;    // absolute time of the pending jump
    std::vector<double> last_jump;    // absolute time of the latest jump (minus the initial age)
    std::vector<SplitMix64> streams;
    double clock = 0.0;
    std::uint64_t seed = 0;

    static WalkerEnsemble create(std::size_t n_walkers, std::uint64_t seed, const CtrwParams& params,
                                 double x0 = 0.0);
};

struct SimulationResult {
    std::vector<double> times;          // sample times
    std::vector<double> msd;            // mean (X_t - X_0)^2
    std::vector<double> mean_displacement;
    std::vector<double> displacement_stderr;
    // Jumps in (times[k-1], times[k]] (times[-1] = initial clock), integer counts.
    std::vector<std::uint64_t> jump_counts;
    // Positions at each sample time (only when requested).
    std::vector<std::vector<double>> snapshots;
    std::size_t n_walkers = 0;
    std::uint64_t total_jumps = 0;

    // Mean jump rate per walker over sample interval k.
    double jump_rate(std::size_t k, double clock0) const;
};

// Advances every walker to t_end. Waits are drawn from the law; each jump adds N(0, sigma^2).
// The last wait is truncated at t_end (position frozen), so the ensemble can be advanced again.
SimulationResult simulate(WalkerEnsemble& ensemble, double t_end, const CtrwParams& params,
                          const std::vector<double>& sample_times, bool keep_snapshots = false);

std::vector<double> log_sample_times(double t_first, double t_last, std::size_t n);

struct MsdFit {
    double exponent = 0.0;
    double prefactor = 0.0;    // msd ~ prefactor t^exponent
    std::size_t points = 0;
};
// Log-log regression of msd on the samples with t_min <= t <= t_max.
MsdFit fit_msd(const SimulationResult& r, double t_min = 10.0,
               double t_max = std::numeric_limits<double>::infinity());

struct TailPoint {
    double x = 0.0;
    std::uint64_t count = 0;
    double density = 0.0;
    double rate_estimate = 0.0;   // -eps ln density; NaN when flagged
    bool flagged = false;         // empty bin
};

// -eps ln(density of eps * X at x) from one snapshot of microscopic positions, with bins of
// width bin_width (macroscopic units) centred on the x points.
std::vector<TailPoint> empirical_tail(const std::vector<double>& positions, double eps,
                                      const std::vector<double>& x_points, double bin_width);

}  // namespace subfront::ctrw

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "subfront/grid.hpp"
#include "subfront/hamiltonian.hpp"

namespace subfront::hj {

// Convex Hamiltonian H(x, p) with a bound on |dH/dp| over a p-interval at x.
struct Hamiltonian {
    std::function<double(double x, double p)> value;
    std::function<double(double x, double p_lo, double p_hi)> max_slope;
    bool space_dependent = false;
    std::string name;

    double operator()(double x, double p) const { return value(x, p); }

    // H(p) with derivative dH; H convex so |H'| peaks at an end of the interval.
    static Hamiltonian from_functions(std::function<double(double)> h,
                                      std::function<double(double)> dh, std::string name);
    static Hamiltonian from_table(hamiltonian::TabulatedHamiltonian h, std::string name);
    static Hamiltonian zero();
    // Root-solved H(x, p) = H_{mu(x)}(p); tables are built per distinct mu on demand.
    static Hamiltonian space_dependent_from(const ModelParams& params, double p_max,
                                            std::size_t n_points);
};

struct Reconstruction {
    std::vector<double> p_minus;
    std::vector<double> p_plus;
};

// WENO5 left/right-biased derivative approximations on a periodic grid.
Reconstruction weno5_reconstruct(const GridField& field);
Reconstruction weno5_reconstruct(std::span<const double> values, double dx);

inline constexpr double kWenoEpsilon = 1e-6;

// H((p- + p+)/2) - alpha (p+ - p-)/2
double lax_friedrichs_hamiltonian(double p_minus, double p_plus,
                                  const std::function<double(double)>& h, double alpha);

struct HJRunConfig {
    double cfl = 0.4;
    double t_end = 1.0;
    std::vector<double> snapshot_times;
    Hamiltonian hamiltonian;
    // alpha <= 0 selects a per-step bound: alpha_inflation * max |H'| over the current
    // derivative range. A positive alpha is used as a fixed global dissipation bound.
    double alpha = 0.0;
    double alpha_inflation = 1.2;
    // With a per-step bound, also use a per-node alpha_i over [p-, p+] inside the flux
    // (local Lax-Friedrichs); the step size still follows the largest alpha_i.
    bool local_dissipation = true;
    std::size_t max_steps = 50'000'000;

    void validate() const;
};

// Default snapshot set: n_snapshots values equally spaced in ln(t) on [t_first, t_end].
std::vector<double> log_spaced_times(double t_first, double t_end, std::size_t n_snapshots);

// Dissipation bound used for a step from `field` (per-step or fixed).
double step_alpha(const GridField& field, const Reconstruction& rec, const HJRunConfig& config);

// Semi-discrete right-hand side -H_hat(p-, p+) at every node.
std::vector<double> hj_rhs(const GridField& field, const HJRunConfig& config, double alpha);

// One SSP-RK3 step of size dt with a fixed alpha. Throws SchemeError if dt > cfl dx / alpha.
GridField rk3_advance(const GridField& field, double dt, const HJRunConfig& config, double alpha);
GridField rk3_advance(const GridField& field, double dt, const HJRunConfig& config);

struct IntegrationStats {
    std::size_t steps = 0;
    double max_alpha = 0.0;
    double wall_seconds = 0.0;
};

// Integrates to every snapshot time (the last substep before each one is shortened).
std::vector<GridField> integrate(const GridField& initial, const HJRunConfig& config,
                                 IntegrationStats* stats = nullptr);

}  // namespace subfront::hj

#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "subfront/grid.hpp"
#include "subfront/model.hpp"

namespace subfront::kinetic {

// phi0_eps(x, a) = v(x) + eps * eta(x, a) on ages [0, 1).
struct InitialCondition {
    std::function<double(double)> v;
    std::function<double(double, double)> eta;  // empty means eta = 0
    double v_lipschitz = 0.0;   // recorded Lipschitz constant of v
    double c_xx = 0.0;          // recorded semi-concavity constant: v'' <= c_xx
    std::string name = "custom";

    bool has_eta() const { return static_cast<bool>(eta); }
    double eta_at(double x, double a) const { return eta ? eta(x, a) : 0.0; }
    // Checks v finite and bounded on the grid and exp(-inf_x eta(x, .)) integrable on [0, 1).
    void validate(const Grid1D& grid) const;
    // || exp(-inf_x eta(x, .)) ||_{L1(0,1)}, infimum taken over grid nodes.
    double eta_l1_norm(const Grid1D& grid) const;

    // v = 0.2 min((x - x_c)^2, 20), eta = 0.
    static InitialCondition bounded_quadratic(double x_center = 10.0, double coeff = 0.2,
                                              double cap = 20.0);
    static InitialCondition constant(double value);
};

struct KineticConfig {
    double epsilon = 0.1;
    double t_end = 2.0;
    double age_step = 0.1;          // dt = age_step * eps (rounded so t_end is a level)
    std::size_t age_nodes = 20;     // Gauss-Legendre nodes in the initial age a' in [0, 1)
    double kernel_cutoff = 8.0;     // Gaussian truncated at kernel_cutoff * eps * sigma
    bool point_kernel = false;      // omega replaced by a point mass (no spatial coupling)
    enum class Arithmetic { Automatic, Linear, Log };
    Arithmetic arithmetic = Arithmetic::Automatic;
    double log_below_eps = 0.05;    // Automatic selects Log for eps below this
    // Opt-in approximation: history levels older than tail_merge_age (in age units) are
    // merged in blocks of tail_stride levels. 0 disables.
    double tail_merge_age = 0.0;
    std::size_t tail_stride = 8;
    double fixed_point_tol = 1e-15;
    std::size_t fixed_point_max = 200;
    std::size_t workers = 0;        // 0 selects the hardware concurrency

    void validate() const;
    bool uses_log(double eps) const;
};

// Discrete eps-scaled Gaussian (std eps*sigma) on the grid, renormalized to sum 1.
struct SpatialKernel {
    std::vector<double> weights;   // offsets -half..half
    std::vector<double> log_weights;
    std::ptrdiff_t half = 0;

    static SpatialKernel gaussian(const Grid1D& grid, double std_dev, double cutoff);
    static SpatialKernel point();
    std::vector<double> apply(const std::vector<double>& u) const;
    std::vector<double> apply_log(const std::vector<double>& log_u) const;
};

// Product-trapezoid weights in age: cell m = [m h, (m+1) h] contributes left[m] to the hat
// function at its left node and right[m] to the one at its right node.
struct AgeWeights {
    double h = 0.0;
    std::vector<double> left;
    std::vector<double> right;

    static AgeWeights build(const WaitingLaw& law, double h, std::size_t cells);
    // Weight of history level offset j (age j h) when the history spans `levels` cells.
    double weight(std::size_t j, std::size_t levels) const;
};

// Record of u(t_k, .) = exp(-psi_eps(t_k, .)/eps), stored as log u = -psi/eps, together with
// the convolved history G*u per level and the split of each level into history and source.
class KineticHistory {
public:
    KineticHistory(const InitialCondition& ic, const ModelParams& params, const Grid1D& grid,
                   const KineticConfig& config);

    const Grid1D& grid() const { return grid_; }
    const KineticConfig& config() const { return config_; }
    const ModelParams& params() const { return params_; }
    const InitialCondition& initial_condition() const { return ic_; }
    const WaitingLaw& law() const { return law_; }
    double epsilon() const { return config_.epsilon; }
    double dt() const { return dt_; }
    std::size_t levels() const { return log_u_.size(); }
    std::size_t target_levels() const { return n_steps_ + 1; }
    double time(std::size_t k) const { return static_cast<double>(k) * dt_; }
    bool log_arithmetic() const { return log_mode_; }
    const AgeWeights& age_weights() const { return weights_; }
    const SpatialKernel& kernel() const { return kernel_; }

    const std::vector<double>& log_u(std::size_t k) const { return log_u_.at(k); }
    const std::vector<double>& log_history(std::size_t k) const { return log_hist_.at(k); }
    const std::vector<double>& log_source(std::size_t k) const { return log_source_.at(k); }
    std::size_t fixed_point_iterations(std::size_t k) const { return iterations_.at(k); }

    // Source term at time t: int_0^1 Phi(a + t/eps) (1+a)^mu [G * exp(-v/eps - eta(., a))] da.
    std::vector<double> log_source_at(double t) const;

    // Appends level K+1. Throws SchemeError on a positivity failure.
    void advance();
    void run();

private:
    void append_level(std::vector<double> log_u, std::vector<double> log_hist,
                      std::vector<double> log_src, std::size_t iterations);

    InitialCondition ic_;
    ModelParams params_;
    WaitingLaw law_;
    Grid1D grid_;
    KineticConfig config_;
    double dt_ = 0.0;
    std::size_t n_steps_ = 0;
    bool log_mode_ = false;
    std::size_t workers_ = 1;
    SpatialKernel kernel_;
    AgeWeights weights_;
    std::vector<double> age_nodes_, age_factor_;       // a'_q and w_q (1+a'_q)^mu
    std::vector<std::vector<double>> log_e_;           // log G*exp(-v/eps - eta(., a'_q)), one per q (or one)
    std::vector<std::vector<double>> log_u_, log_hist_, log_source_;
    std::vector<std::vector<double>> conv_lin_;        // G*u per level (linear arithmetic)
    std::vector<std::vector<double>> log_conv_;        // log G*u per level
    std::vector<std::size_t> iterations_;
};

// u(0, x) and psi_eps(0, x) = -eps ln u(0, x). With log_domain = false the exponentials are
// formed directly and a RangeError is raised when u(0, x) underflows.
GridField psi0_boundary(const InitialCondition& ic, const ModelParams& params, double eps,
                        const Grid1D& grid, bool log_domain = true);

KineticHistory run_kinetic(const InitialCondition& ic, const ModelParams& params, const Grid1D& grid,
                           const KineticConfig& config);

GridField psi_eps(const KineticHistory& h, std::size_t k);

// (A_eps, B_eps) at level k, evaluated with the run's quadrature. A + B = 1 up to the
// fixed-point tolerance.
std::pair<GridField, GridField> compute_A_B_split(const KineticHistory& h, std::size_t k);

struct SandwichCheck {
    double worst_lower_margin = 0.0;   // min over nodes/levels of B - lower
    double worst_upper_margin = 0.0;   // min over nodes/levels of upper - B
    double max_partition_error = 0.0;  // max |A + B - 1|
    bool holds(double slack) const { return worst_lower_margin >= -slack && worst_upper_margin >= -slack; }
};

// Sandwich Phi(t/eps)/Phi(0) e^{(psi(t)-psi(0))/eps} <= B <= Phi(1+t/eps)/Phi(1) e^{...},
// plus the partition identity, over every level of the run.
SandwichCheck check_sandwich(const KineticHistory& h);

// Explicit bound eps^mu 2^{1+mu} t^{-(1+mu)} [T + eps^{1-mu} K T^{1+mu}], K = (c_xx/2) sigma^2.
double b_decay_bound(double eps, double t, double T, double mu, double c_xx, double sigma);

struct BDecayEntry {
    double epsilon = 0.0;
    double max_b = 0.0;
    double bound = 0.0;
    bool within_bound = false;
    bool sandwich_holds = false;
};

struct BDecayReport {
    double t_fixed = 0.0;
    std::vector<BDecayEntry> entries;
    double fitted_exponent = 0.0;   // slope of ln max_x B against ln eps
    bool all_within_bound = false;
    bool all_sandwich = false;
};

// max_x B_eps at t_fixed (linear in time between levels) per run.
BDecayReport check_B_decay(const std::vector<const KineticHistory*>& runs, double t_fixed,
                           double slack = 1e-6);

struct BoundCheck {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    bool upper = true;       // measured <= bound (+slack) if upper, >= bound (-slack) otherwise
    double slack = 0.0;
    bool asserted = true;    // false: reported without a pass/fail bound
    double margin() const { return upper ? bound + slack - measured : measured - (bound - slack); }
    bool pass() const { return !asserted || margin() >= 0.0; }
};

struct BoundsReport {
    double epsilon = 0.0, t_end = 0.0, mu = 0.0;
    double psi_min = 0.0, psi_max = 0.0;
    double psi_x_min = 0.0, psi_x_max = 0.0;
    double psi_t_min = 0.0, psi_t_max = 0.0;
    double psi_xx_max = 0.0;
    double init_slope_min = 0.0, init_slope_max = 0.0;
    std::vector<BoundCheck> checks;
    bool all_pass() const;
};

struct BoundsSlack {
    double psi = 1e-9;
    double slope = 1e-3;
    double time_derivative = 1e-2;
    double second_difference = 1e-2;
};

BoundsReport check_theorem_bounds(const KineticHistory& h, const BoundsSlack& slack = {});

// Pseudo-equilibrium N(t, a) = (1+a)^{-mu} (1+t-a)^{mu-1} and nu_t(a) = beta(a) N(t,a)/N(t,0).
struct InstationaryValue {
    double n = 0.0;
    double nu = 0.0;
};
InstationaryValue instationary_measure(double t, double a, double mu);
// int_0^{1+T} nu_T(a) da by adaptive quadrature, T = t/eps.
double instationary_mass(double t, double eps, double mu);
// Closed form 1 / (1 + 1/(1 + t/eps)).
double instationary_mass_exact(double t, double eps);

struct ConvergenceEntry {
    double epsilon = 0.0;
    double sup_error = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceEntry> entries;
    bool monotone = false;
    std::vector<double> ratios;   // error(eps_k) / error(eps_{k+1})
};

struct ConvergenceWindow {
    double t_min = 0.5, t_max = 2.0;
    double x_min = 2.0, x_max = 18.0;
};

// Sup-norm distance between psi_eps and the reference snapshots (linear in time between
// snapshots) over the window. Runs and reference must share one grid.
ConvergenceReport convergence_study(const std::vector<const KineticHistory*>& runs,
                                    const std::vector<GridField>& reference,
                                    const ConvergenceWindow& window = {});

}  // namespace subfront::kinetic

#pragma once

#include <vector>

#include "subfront/grid.hpp"

namespace subfront::hj {

// Profiles psi(t,x) = c(t) |x - x_center|^shape_exponent, the exact solution when
// H(p) = prefactor |p|^power with shape_exponent = power / (power - 1).
struct SelfSimilarOptions {
    double x_center = 10.0;
    double shape_exponent = 2.0;
    double power = 2.0;
    double prefactor = 0.0;   // H ~ prefactor |p|^power near p = 0; <= 0 skips the ODE oracle
    double c0 = 0.2;          // initial amplitude, for the ODE oracle only
    double t_min = 1e3;       // snapshots before this are not used
    double core_halfwidth = 2.0;   // |x - x_center| below this is the numerical-diffusion zone
    double edge_margin = 0.5;      // distance kept from the (periodic) domain ends
    std::size_t min_snapshots = 3;
};

struct SelfSimilarReport {
    std::vector<double> times;
    std::vector<double> amplitudes;
    std::vector<double> oracle_amplitudes;   // empty without an oracle
    double fitted_exponent = 0.0;    // slope of ln c against ln(t + t0), t0 fitted
    double virtual_origin = 0.0;     // fitted t0
    double raw_exponent = 0.0;       // slope of ln c against ln t
    double oracle_exponent = 0.0;    // -1 / (power - 1)
    double oracle_virtual_origin = 0.0;
    double collapse_deviation = 0.0;   // max |psi_k/c_k - psi_ref/c_ref| / max psi_ref/c_ref
    double shape_deviation = 0.0;      // same, against the ansatz |x - x_center|^shape_exponent
    std::size_t zone_nodes = 0;

    double exponent_relative_error() const;
};

// Closed-form amplitude of c' = -A alpha^r c^r, c(0) = c0.
double oracle_amplitude(double t, double c0, double prefactor, double power, double shape_exponent);

// Throws DomainError when fewer than min_snapshots snapshots fall in [t_min, inf).
SelfSimilarReport self_similar_check(const std::vector<GridField>& snapshots,
                                     const SelfSimilarOptions& options);

}  // namespace subfront::hj

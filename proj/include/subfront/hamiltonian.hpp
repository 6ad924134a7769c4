#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "subfront/model.hpp"

namespace subfront::hamiltonian {

// Residence-time density mu (1+a)^{-1-mu}.
double phi_density(double a, double mu);

// Laplace transform of the residence-time density, with its complement 1 - value
// carried separately so that small-s evaluations keep full relative accuracy.
struct LaplaceValue {
    double value = 1.0;
    double complement = 0.0;
    double log_value() const;
};

LaplaceValue laplace_transform(double s, const WaitingLaw& law);
double phi_laplace(double s, double mu);
double phi_laplace(double s, const WaitingLaw& law);

// Gaussian jump MGF exp(sigma^2 p^2 / 2) and its logarithm.
double omega_mgf(double p, double sigma);
double log_omega_mgf(double p, double sigma);

// Largest |p| for which the root H of the dispersion relation stays representable.
double max_admissible_p(double sigma);

// H(p) >= 0 solving Laplace(H) = 1 / omega_mgf(p).
double hamiltonian_eval(double p, const WaitingLaw& law, double sigma);
double hamiltonian_eval(double p, const ModelParams& params);

// K (exp(sigma^2 p^2/2) - 1): closed form for the constant jump rate K.
double hamiltonian_diffusive(double p, double rate, double sigma);

// H(x, p) with mu replaced by mu(x).
double hamiltonian_x(double x, double p, const ModelParams& params);

// H'(p) by central differences, step 1e-5 max(1, |p|).
double hamiltonian_slope(double p, const WaitingLaw& law, double sigma);

// Small-p equivalent (sigma p)^{2/mu} (2 Gamma(1-mu))^{-1/mu}.
double small_p_asymptote(double p, double mu, double sigma);
double small_p_constant(double mu);

struct HamiltonianTable {
    std::vector<double> p_grid;
    std::vector<double> h_values;
    std::vector<double> h_slope;
    double alpha_bound = 0.0;
    double p_max = 0.0;            // effective half-width of the grid
    double p_max_requested = 0.0;
    bool clamped = false;          // p_max was reduced to max_admissible_p
    std::string law;

    double p_min() const { return p_grid.front(); }
    bool covers(double p) const { return p >= p_grid.front() && p <= p_grid.back(); }
    // Cubic Hermite interpolation of H and its derivative inside the grid.
    double value(double p) const;
    double slope(double p) const;
    // max |H'| over [p_lo, p_hi], using convexity (H' monotone).
    double max_abs_slope(double p_lo, double p_hi) const;

    void write_csv(std::ostream& os) const;
};

HamiltonianTable build_table(const WaitingLaw& law, double sigma, double p_max,
                             std::size_t n_points);
HamiltonianTable build_table(const ModelParams& params, double p_max, std::size_t n_points);

// Hamiltonian usable by the HJ solver: tabulated inside the table range, direct root
// solve outside.
class TabulatedHamiltonian {
public:
    TabulatedHamiltonian(HamiltonianTable table, WaitingLaw law, double sigma)
        : table_(std::move(table)), law_(law), sigma_(sigma) {}

    double operator()(double p) const;
    double slope(double p) const;
    double max_abs_slope(double p_lo, double p_hi) const;
    const HamiltonianTable& table() const { return table_; }

private:
    HamiltonianTable table_;
    WaitingLaw law_;
    double sigma_;
};

}  // namespace subfront::hamiltonian

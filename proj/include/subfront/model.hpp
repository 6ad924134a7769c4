#pragma once

#include <functional>
#include <optional>
#include <string>

namespace subfront {

// Residence-time law of the walk. The subdiffusive law has jump rate mu/(1+a); the
// exponential law (constant rate K) is the normal-diffusion control.
class WaitingLaw {
public:
    enum class Kind { PowerLaw, Exponential };

    static WaitingLaw power_law(double mu);
    static WaitingLaw exponential(double rate);

    Kind kind() const { return kind_; }
    // mu for the power law, K for the exponential law.
    double parameter() const { return param_; }

    double jump_rate(double a) const;           // beta(a)
    double cumulative_rate(double a) const;     // int_0^a beta
    double survival(double a) const;            // exp(-int_0^a beta)
    double density(double a) const;             // Phi(a) = beta(a) * survival(a)
    // Age a with survival(a) = w, w in (0, 1].
    double inverse_survival(double w) const;

    std::string describe() const;

private:
    WaitingLaw(Kind k, double p) : kind_(k), param_(p) {}
    Kind kind_;
    double param_;
};

// Subdiffusion exponent, Gaussian jump width and an optional slowly varying exponent mu(x).
struct ModelParams {
    double mu = 0.3;
    double sigma = 1.0;
    std::function<double(double)> mu_of_x;  // empty unless space-dependent
    // Closed sub-interval of (0,1) that bounds mu_of_x; checked at grid nodes by validate_on.
    double mu_x_min = 0.0;
    double mu_x_max = 0.0;

    void validate() const;
    bool space_dependent() const { return static_cast<bool>(mu_of_x); }
    double mu_at(double x) const { return mu_of_x ? mu_of_x(x) : mu; }
    WaitingLaw waiting_law() const { return WaitingLaw::power_law(mu); }
};

}  // namespace subfront

#include "subfront/model.hpp"

#include <cmath>
#include <sstream>

#include "subfront/errors.hpp"

namespace subfront {

WaitingLaw WaitingLaw::power_law(double mu) {
    if (!(mu > 0.0 && mu < 1.0)) throw DomainError("power-law waiting time needs 0 < mu < 1");
    return WaitingLaw(Kind::PowerLaw, mu);
}

WaitingLaw WaitingLaw::exponential(double rate) {
    if (!(rate > 0.0 && std::isfinite(rate)))
        throw DomainError("exponential waiting time needs a positive rate");
    return WaitingLaw(Kind::Exponential, rate);
}

double WaitingLaw::jump_rate(double a) const {
    return kind_ == Kind::PowerLaw ? param_ / (1.0 + a) : param_;
}

double WaitingLaw::cumulative_rate(double a) const {
    return kind_ == Kind::PowerLaw ? param_ * std::log1p(a) : param_ * a;
}

double WaitingLaw::survival(double a) const {
    return kind_ == Kind::PowerLaw ? std::pow(1.0 + a, -param_) : std::exp(-param_ * a);
}

double WaitingLaw::density(double a) const {
    if (a < 0.0) throw DomainError("residence-time density evaluated at negative age");
    return kind_ == Kind::PowerLaw ? param_ * std::pow(1.0 + a, -1.0 - param_)
                                   : param_ * std::exp(-param_ * a);
}

double WaitingLaw::inverse_survival(double w) const {
    if (!(w > 0.0 && w <= 1.0)) throw DomainError("inverse survival needs w in (0, 1]");
    if (kind_ == Kind::PowerLaw) return std::expm1(-std::log(w) / param_);
    return -std::log(w) / param_;
}

std::string WaitingLaw::describe() const {
    std::ostringstream os;
    if (kind_ == Kind::PowerLaw)
        os << "power_law(mu=" << param_ << ")";
    else
        os << "exponential(K=" << param_ << ")";
    return os.str();
}

void ModelParams::validate() const {
    if (!(mu > 0.0 && mu < 1.0)) throw DomainError("model: mu must lie in (0, 1)");
    if (!(sigma > 0.0 && std::isfinite(sigma))) throw DomainError("model: sigma must be > 0");
    if (mu_of_x) {
        if (!(mu_x_min > 0.0 && mu_x_max < 1.0 && mu_x_min <= mu_x_max))
            throw DomainError("model: mu(x) range must be a closed sub-interval of (0, 1)");
    }
}

}  // namespace subfront

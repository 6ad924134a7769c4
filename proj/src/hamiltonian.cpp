#include "subfront/hamiltonian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

#include "subfront/csv.hpp"
#include "subfront/errors.hpp"
#include "subfront/parallel.hpp"
#include "subfront/quadrature.hpp"

namespace subfront::hamiltonian {

namespace {

constexpr double kLogMax = 709.0;  // ~ log(DBL_MAX)
// Below this the small-p equivalent is exact to double precision (relative
// correction ~ H^{1-mu}).
constexpr double kAsymptoticFloor = 1e-200;

quad::AdaptiveResult integrate_checked(const std::function<double(double)>& f, double a,
                                       double b, std::span<const double> cuts,
                                       const char* what) {
    quad::AdaptiveOptions opts;
    opts.abs_tol = 1e-300;
    opts.rel_tol = 1e-13;
    opts.max_intervals = 6000;
    auto r = quad::gauss_kronrod(f, a, b, cuts, opts);
    if (!r.converged) throw ConvergenceError(std::string("laplace transform: ") + what +
                                             " quadrature did not reach tolerance");
    return r;
}

}  // namespace

double phi_density(double a, double mu) {
    if (a < 0.0) throw DomainError("phi_density: age must be non-negative");
    if (!(mu > 0.0 && mu < 1.0)) throw DomainError("phi_density: mu must lie in (0, 1)");
    return mu * std::pow(1.0 + a, -1.0 - mu);
}

double LaplaceValue::log_value() const {
    return complement < 0.5 ? std::log1p(-complement) : std::log(value);
}

LaplaceValue laplace_transform(double s, const WaitingLaw& law) {
    if (!(s >= 0.0)) throw DomainError("laplace transform: s must be non-negative");
    if (s == 0.0) return {1.0, 0.0};
    if (std::isinf(s)) return {0.0, 1.0};

    LaplaceValue out;
    if (s < 1.0) {
        // Inverse-survival substitution w = S(a): the transform is E[exp(-s A)] with
        // A = S^{-1}(w), w uniform on (0, 1]. The algebraic tail of the density becomes
        // the neighbourhood of w = 0, where the integrand is bounded.
        std::array<double, 3> cuts{};
        std::size_t nc = 0;
        for (double k : {10.0, 1.0, 0.1}) {
            const double w = law.survival(k / s);
            if (w > 0.0 && w < 1.0) cuts[nc++] = w;
        }
        std::span<const double> bp(cuts.data(), nc);
        auto complement = [&](double w) { return -std::expm1(-s * law.inverse_survival(w)); };
        out.complement = integrate_checked(complement, 0.0, 1.0, bp, "complement").value;
        if (out.complement < 0.5) {
            out.value = 1.0 - out.complement;
        } else {
            auto direct = [&](double w) { return std::exp(-s * law.inverse_survival(w)); };
            out.value = integrate_checked(direct, 0.0, 1.0, bp, "direct").value;
        }
    } else {
        // b = s a: Laplace(s) = (1/s) int_0^inf Phi(b/s) e^{-b} db, truncated at b = 60.
        static constexpr std::array<double, 4> cuts{1.0, 5.0, 15.0, 30.0};
        auto f = [&](double b) { return law.density(b / s) * std::exp(-b); };
        out.value = integrate_checked(f, 0.0, 60.0, cuts, "scaled").value / s;
        out.complement = 1.0 - out.value;
    }
    return out;
}

double phi_laplace(double s, const WaitingLaw& law) { return laplace_transform(s, law).value; }

double phi_laplace(double s, double mu) { return phi_laplace(s, WaitingLaw::power_law(mu)); }

double log_omega_mgf(double p, double sigma) { return 0.5 * sigma * sigma * p * p; }

double omega_mgf(double p, double sigma) {
    const double e = log_omega_mgf(p, sigma);
    if (e > kLogMax) throw RangeError("omega_mgf: sigma^2 p^2 / 2 exceeds the double exponent range");
    return std::exp(e);
}

double max_admissible_p(double sigma) { return std::sqrt(2.0 * (kLogMax - 10.0)) / sigma; }

double small_p_constant(double mu) { return std::pow(2.0 * std::tgamma(1.0 - mu), -1.0 / mu); }

double small_p_asymptote(double p, double mu, double sigma) {
    return std::pow(std::abs(sigma * p), 2.0 / mu) * small_p_constant(mu);
}

double hamiltonian_eval(double p, const WaitingLaw& law, double sigma) {
    if (!(sigma > 0.0)) throw DomainError("hamiltonian: sigma must be positive");
    const double target = log_omega_mgf(p, sigma);  // solve -log Laplace(H) = target
    if (!std::isfinite(target) || std::abs(p) > max_admissible_p(sigma))
        throw RangeError("hamiltonian: |p| beyond the representable range of the jump MGF");
    if (target == 0.0) return 0.0;

    double guess = 0.0;
    if (law.kind() == WaitingLaw::Kind::Exponential) {
        guess = law.parameter() * std::expm1(target);
    } else {
        const double mu = law.parameter();
        if (target < 1.0) {
            guess = std::pow(-std::expm1(-target) / std::tgamma(1.0 - mu), 1.0 / mu);
            if (guess < kAsymptoticFloor) return guess;
        } else {
            guess = mu * std::exp(target);
        }
    }

    auto g = [&](double y) { return -laplace_transform(std::exp(y), law).log_value() - target; };

    // Bracket ln H by geometric expansion around the guess (g is increasing in y).
    double y0 = std::log(guess);
    double lo = y0 - 0.5, hi = y0 + 0.5;
    double glo = g(lo), ghi = g(hi);
    double step = 1.0;
    for (int i = 0; glo > 0.0; ++i) {
        if (i > 200) throw ConvergenceError("hamiltonian: could not bracket the root from below");
        hi = lo;
        ghi = glo;
        lo -= step;
        step *= 2.0;
        glo = g(lo);
    }
    step = 1.0;
    for (int i = 0; ghi < 0.0; ++i) {
        if (i > 200) throw ConvergenceError("hamiltonian: could not bracket the root from above");
        lo = hi;
        glo = ghi;
        hi += step;
        step *= 2.0;
        ghi = g(hi);
    }

    // Illinois-modified secant inside the bracket.
    double y = 0.5 * (lo + hi);
    double gy = 0.0;
    int side = 0;
    for (int iter = 0; iter < 200; ++iter) {
        y = (lo * ghi - hi * glo) / (ghi - glo);
        if (!(y > lo && y < hi)) y = 0.5 * (lo + hi);
        gy = g(y);
        if (gy == 0.0) break;
        if ((gy < 0.0) == (glo < 0.0)) {
            lo = y;
            glo = gy;
            if (side == -1) ghi *= 0.5;
            side = -1;
        } else {
            hi = y;
            ghi = gy;
            if (side == 1) glo *= 0.5;
            side = 1;
        }
        if (hi - lo < 1e-14 * std::max(1.0, std::abs(y))) break;
        if (std::abs(gy) <= 1e-15 * std::max(target, 1e-300)) break;
    }
    const double h = std::exp(y);
    // Residual in the original variables: |Laplace(H) - 1/omega| <= 1e-12.
    if (std::exp(-target) * std::abs(std::expm1(-gy)) > 1e-12)
        throw ConvergenceError("hamiltonian: root refinement missed the 1e-12 residual tolerance");
    return h;
}

double hamiltonian_eval(double p, const ModelParams& params) {
    params.validate();
    return hamiltonian_eval(p, params.waiting_law(), params.sigma);
}

double hamiltonian_diffusive(double p, double rate, double sigma) {
    if (!(rate > 0.0)) throw DomainError("hamiltonian_diffusive: rate must be positive");
    const double e = log_omega_mgf(p, sigma);
    if (e > kLogMax) throw RangeError("hamiltonian_diffusive: exponent overflow");
    return rate * std::expm1(e);
}

double hamiltonian_x(double x, double p, const ModelParams& params) {
    if (!params.space_dependent())
        throw DomainError("hamiltonian_x: model has no space-dependent exponent mu(x)");
    const double mu = params.mu_of_x(x);
    if (!(mu > 0.0 && mu < 1.0)) throw DomainError("hamiltonian_x: mu(x) left (0, 1)");
    return hamiltonian_eval(p, WaitingLaw::power_law(mu), params.sigma);
}

double hamiltonian_slope(double p, const WaitingLaw& law, double sigma) {
    const double step = 1e-5 * std::max(1.0, std::abs(p));
    const double pmax = max_admissible_p(sigma);
    if (std::abs(p) + step > pmax) {
        const double q = std::copysign(std::abs(p) - step, p);
        return (hamiltonian_eval(p, law, sigma) - hamiltonian_eval(q, law, sigma)) / (p - q);
    }
    return (hamiltonian_eval(p + step, law, sigma) - hamiltonian_eval(p - step, law, sigma)) /
           (2.0 * step);
}

HamiltonianTable build_table(const WaitingLaw& law, double sigma, double p_max,
                             std::size_t n_points) {
    if (!(p_max > 0.0)) throw DomainError("build_table: p_max must be positive");
    if (n_points < 3) throw DomainError("build_table: need at least 3 points");

    HamiltonianTable t;
    t.law = law.describe();
    t.p_max_requested = p_max;
    t.p_max = std::min(p_max, max_admissible_p(sigma) * (1.0 - 1e-6));
    t.clamped = t.p_max < p_max;
    t.p_grid.resize(n_points);
    t.h_values.resize(n_points);
    t.h_slope.resize(n_points);
    const double denom = static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i)
        t.p_grid[i] = t.p_max * (2.0 * static_cast<double>(i) - denom) / denom;

    // Upper half computed (in parallel chunks), lower half mirrored: H even, H' odd.
    const std::size_t first = n_points / 2;
    const std::size_t count = n_points - first;
    parallel_for(count, default_workers(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const std::size_t i = first + k;
            const double p = t.p_grid[i];
            t.h_values[i] = hamiltonian_eval(p, law, sigma);
            t.h_slope[i] = p == 0.0 ? 0.0 : hamiltonian_slope(p, law, sigma);
        }
    });
    for (std::size_t i = first; i < n_points; ++i) {
        t.h_values[n_points - 1 - i] = t.h_values[i];
        t.h_slope[n_points - 1 - i] = -t.h_slope[i];
    }
    double smax = 0.0;
    for (double s : t.h_slope) smax = std::max(smax, std::abs(s));
    t.alpha_bound = 1.05 * smax;
    return t;
}

HamiltonianTable build_table(const ModelParams& params, double p_max, std::size_t n_points) {
    params.validate();
    return build_table(params.waiting_law(), params.sigma, p_max, n_points);
}

namespace {

struct Cell {
    std::size_t i;
    double t;
    double dp;
};

Cell locate(const HamiltonianTable& tab, double p) {
    const std::size_t n = tab.p_grid.size();
    const double dp = tab.p_grid[1] - tab.p_grid[0];
    double r = (p - tab.p_grid[0]) / dp;
    auto i = static_cast<std::size_t>(std::clamp(std::floor(r), 0.0, static_cast<double>(n - 2)));
    return {i, (p - tab.p_grid[i]) / dp, dp};
}

}  // namespace

double HamiltonianTable::value(double p) const {
    if (!covers(p)) throw DomainError("HamiltonianTable::value: p outside the tabulated range");
    const auto [i, s, dp] = locate(*this, p);
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return h00 * h_values[i] + h10 * dp * h_slope[i] + h01 * h_values[i + 1] +
           h11 * dp * h_slope[i + 1];
}

double HamiltonianTable::slope(double p) const {
    if (!covers(p)) throw DomainError("HamiltonianTable::slope: p outside the tabulated range");
    const auto [i, s, dp] = locate(*this, p);
    const double s2 = s * s;
    const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
    const double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
    return (d00 * h_values[i] + d01 * h_values[i + 1]) / dp + d10 * h_slope[i] +
           d11 * h_slope[i + 1];
}

double HamiltonianTable::max_abs_slope(double p_lo, double p_hi) const {
    return std::max(std::abs(slope(p_lo)), std::abs(slope(p_hi)));
}

void HamiltonianTable::write_csv(std::ostream& os) const {
    os << "p,H,Hp\n";
    for (std::size_t i = 0; i < p_grid.size(); ++i)
        os << csv::num(p_grid[i]) << ',' << csv::num(h_values[i]) << ',' << csv::num(h_slope[i])
           << '\n';
}

double TabulatedHamiltonian::operator()(double p) const {
    return table_.covers(p) ? table_.value(p) : hamiltonian_eval(p, law_, sigma_);
}

double TabulatedHamiltonian::slope(double p) const {
    return table_.covers(p) ? table_.slope(p) : hamiltonian_slope(p, law_, sigma_);
}

double TabulatedHamiltonian::max_abs_slope(double p_lo, double p_hi) const {
    return std::max(std::abs(slope(p_lo)), std::abs(slope(p_hi)));
}

}  // namespace subfront::hamiltonian

#include "subfront/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "subfront/errors.hpp"
#include "subfront/parallel.hpp"
#include "subfront/quadrature.hpp"

namespace subfront::kinetic {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
    const auto m = static_cast<std::ptrdiff_t>(n);
    return static_cast<std::size_t>(((i % m) + m) % m);
}

// Gauss-Legendre nodes/weights mapped to [0, 1].
std::pair<std::vector<double>, std::vector<double>> unit_rule(std::size_t n) {
    const auto& r = quad::gauss_legendre(n);
    std::vector<double> x(n), w(n);
    for (std::size_t q = 0; q < n; ++q) {
        x[q] = 0.5 * (r.nodes[q] + 1.0);
        w[q] = 0.5 * r.weights[q];
    }
    return {x, w};
}

SpatialKernel make_kernel(const ModelParams& params, const Grid1D& grid, double eps,
                          const KineticConfig& config) {
    if (config.point_kernel || params.sigma == 0.0) return SpatialKernel::point();
    return SpatialKernel::gaussian(grid, eps * params.sigma, config.kernel_cutoff);
}

// log of G * exp(-v/eps - eta(., a)) at a given initial age.
std::vector<double> log_initial_convolution(const InitialCondition& ic, const Grid1D& grid,
                                            double eps, double age, const SpatialKernel& kernel) {
    std::vector<double> l(grid.n_cells);
    for (std::size_t i = 0; i < grid.n_cells; ++i) {
        const double x = grid.node(i);
        l[i] = -ic.v(x) / eps - ic.eta_at(x, age);
    }
    return kernel.apply_log(l);
}

}  // namespace

// ---------------------------------------------------------------------------------------------

void InitialCondition::validate(const Grid1D& grid) const {
    if (!v) throw DomainError("initial condition: v missing");
    grid.validate();
    const std::size_t n = grid.n_cells;
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) {
        vals[i] = v(grid.node(i));
        if (!std::isfinite(vals[i])) throw DomainError("initial condition: v not finite on the grid");
    }
    if (v_lipschitz < 0.0) throw DomainError("initial condition: negative Lipschitz constant");
    for (std::size_t i = 0; i < n; ++i) {
        const double s = std::abs(vals[(i + 1) % n] - vals[i]) / grid.dx();
        if (s > v_lipschitz * (1.0 + 1e-9) + 1e-12) {
            std::ostringstream os;
            os << "initial condition: chord slope " << s << " exceeds the recorded Lipschitz constant "
               << v_lipschitz;
            throw DomainError(os.str());
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double d2 = (vals[(i + 1) % n] - 2.0 * vals[i] + vals[(i + n - 1) % n]) / (grid.dx() * grid.dx());
        if (d2 > c_xx * (1.0 + 1e-9) + 1e-9) {
            std::ostringstream os;
            os << "initial condition: second difference " << d2 << " exceeds c_xx = " << c_xx;
            throw DomainError(os.str());
        }
    }
    const double norm = eta_l1_norm(grid);
    if (!std::isfinite(norm) || !(norm > 0.0))
        throw DomainError("initial condition: exp(-inf eta) not integrable on [0,1)");
}

double InitialCondition::eta_l1_norm(const Grid1D& grid) const {
    if (!eta) return 1.0;
    const auto [a, w] = unit_rule(40);
    double total = 0.0;
    for (std::size_t q = 0; q < a.size(); ++q) {
        double inf = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < grid.n_cells; ++i) inf = std::min(inf, eta(grid.node(i), a[q]));
        total += w[q] * std::exp(-inf);
    }
    return total;
}

InitialCondition InitialCondition::bounded_quadratic(double x_center, double coeff, double cap) {
    InitialCondition ic;
    ic.v = [=](double x) { return coeff * std::min((x - x_center) * (x - x_center), cap); };
    ic.v_lipschitz = 2.0 * coeff * std::sqrt(cap);
    ic.c_xx = 2.0 * coeff;
    ic.name = "bounded_quadratic";
    return ic;
}

InitialCondition InitialCondition::constant(double value) {
    InitialCondition ic;
    ic.v = [=](double) { return value; };
    ic.name = "constant";
    return ic;
}

void KineticConfig::validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("kinetic config: epsilon must lie in (0, 1]");
    if (!(t_end > 0.0)) throw DomainError("kinetic config: t_end must be positive");
    if (!(age_step > 0.0)) throw DomainError("kinetic config: age_step must be positive");
    if (age_nodes < 2) throw DomainError("kinetic config: at least 2 age nodes");
    if (!(kernel_cutoff > 0.0)) throw DomainError("kinetic config: kernel cutoff must be positive");
    if (tail_merge_age < 0.0 || tail_stride == 0) throw DomainError("kinetic config: bad tail merge settings");
    if (!(fixed_point_tol > 0.0) || fixed_point_max == 0) throw DomainError("kinetic config: bad fixed-point settings");
}

bool KineticConfig::uses_log(double eps) const {
    switch (arithmetic) {
        case Arithmetic::Linear: return false;
        case Arithmetic::Log: return true;
        case Arithmetic::Automatic: break;
    }
    return eps < log_below_eps;
}

// ---------------------------------------------------------------------------------------------

SpatialKernel SpatialKernel::gaussian(const Grid1D& grid, double std_dev, double cutoff) {
    if (!(std_dev > 0.0)) throw DomainError("kernel: standard deviation must be positive");
    SpatialKernel k;
    const double dx = grid.dx();
    k.half = static_cast<std::ptrdiff_t>(std::floor(cutoff * std_dev / dx));
    if (static_cast<std::size_t>(2 * k.half + 1) > grid.n_cells)
        throw DomainError("kernel: truncated Gaussian wider than the periodic domain");
    double total = 0.0;
    for (std::ptrdiff_t m = -k.half; m <= k.half; ++m) {
        const double z = static_cast<double>(m) * dx / std_dev;
        k.weights.push_back(std::exp(-0.5 * z * z));
        total += k.weights.back();
    }
    for (double& w : k.weights) {
        w /= total;
        k.log_weights.push_back(std::log(w));
    }
    return k;
}

SpatialKernel SpatialKernel::point() {
    SpatialKernel k;
    k.weights = {1.0};
    k.log_weights = {0.0};
    return k;
}

std::vector<double> SpatialKernel::apply(const std::vector<double>& u) const {
    const std::size_t n = u.size();
    if (half == 0) return u;
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::ptrdiff_t m = -half; m <= half; ++m)
            s += weights[static_cast<std::size_t>(m + half)] * u[wrap(static_cast<std::ptrdiff_t>(i) - m, n)];
        out[i] = s;
    }
    return out;
}

std::vector<double> SpatialKernel::apply_log(const std::vector<double>& lu) const {
    const std::size_t n = lu.size();
    if (half == 0) return lu;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double mx = kNegInf;
        for (std::ptrdiff_t m = -half; m <= half; ++m)
            mx = std::max(mx, log_weights[static_cast<std::size_t>(m + half)] +
                                  lu[wrap(static_cast<std::ptrdiff_t>(i) - m, n)]);
        if (mx == kNegInf) {
            out[i] = kNegInf;
            continue;
        }
        double s = 0.0;
        for (std::ptrdiff_t m = -half; m <= half; ++m)
            s += std::exp(log_weights[static_cast<std::size_t>(m + half)] +
                          lu[wrap(static_cast<std::ptrdiff_t>(i) - m, n)] - mx);
        out[i] = mx + std::log(s);
    }
    return out;
}

// ---------------------------------------------------------------------------------------------

AgeWeights AgeWeights::build(const WaitingLaw& law, double h, std::size_t cells) {
    if (!(h > 0.0) || cells == 0) throw DomainError("age weights: need h > 0 and at least one cell");
    AgeWeights w;
    w.h = h;
    w.left.resize(cells);
    w.right.resize(cells);
    // First cell from the exact primitives of Phi and a Phi.
    double m0, m1;
    if (law.kind() == WaitingLaw::Kind::PowerLaw) {
        const double mu = law.parameter();
        m0 = -std::expm1(-mu * std::log1p(h));
        m1 = mu / (1.0 - mu) * std::expm1((1.0 - mu) * std::log1p(h)) - m0;
    } else {
        const double k = law.parameter();
        m0 = -std::expm1(-k * h);
        m1 = (m0 - k * h * std::exp(-k * h)) / k;
    }
    w.left[0] = m0 - m1 / h;
    w.right[0] = m1 / h;
    const auto& rule = quad::gauss_legendre(10);
    for (std::size_t m = 1; m < cells; ++m) {
        const double a0 = static_cast<double>(m) * h;
        double l = 0.0, r = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double s = 0.5 * (rule.nodes[q] + 1.0);
            const double f = 0.5 * h * rule.weights[q] * law.density(a0 + s * h);
            l += f * (1.0 - s);
            r += f * s;
        }
        w.left[m] = l;
        w.right[m] = r;
    }
    return w;
}

double AgeWeights::weight(std::size_t j, std::size_t levels) const {
    if (levels == 0 || levels > left.size() || j > levels) throw DomainError("age weights: index out of range");
    if (j == 0) return left[0];
    if (j == levels) return right[levels - 1];
    return right[j - 1] + left[j];
}

// ---------------------------------------------------------------------------------------------

KineticHistory::KineticHistory(const InitialCondition& ic, const ModelParams& params,
                               const Grid1D& grid, const KineticConfig& config)
    : ic_(ic), params_(params), law_(params.waiting_law()), grid_(grid), config_(config) {
    params_.validate();
    if (params_.space_dependent()) throw DomainError("kinetic solver: space-dependent mu is not supported");
    config_.validate();
    ic_.validate(grid_);
    if (!grid_.periodic) throw DomainError("kinetic solver: only periodic grids are supported");
    const double eps = config_.epsilon;
    n_steps_ = static_cast<std::size_t>(std::max(1.0, std::ceil(config_.t_end / (config_.age_step * eps) - 1e-9)));
    dt_ = config_.t_end / static_cast<double>(n_steps_);
    log_mode_ = config_.uses_log(eps);
    workers_ = config_.workers ? config_.workers : default_workers();
    if (grid_.n_cells < 256) workers_ = 1;
    kernel_ = make_kernel(params_, grid_, eps, config_);
    weights_ = AgeWeights::build(law_, dt_ / eps, n_steps_);

    auto [a, w] = unit_rule(config_.age_nodes);
    age_nodes_ = a;
    age_factor_.resize(a.size());
    for (std::size_t q = 0; q < a.size(); ++q) age_factor_[q] = w[q] / law_.survival(a[q]);
    if (ic_.has_eta()) {
        for (double aq : age_nodes_) log_e_.push_back(log_initial_convolution(ic_, grid_, eps, aq, kernel_));
    } else {
        log_e_.push_back(log_initial_convolution(ic_, grid_, eps, 0.0, kernel_));
    }

    const std::size_t levels = n_steps_ + 1;
    log_u_.reserve(levels);
    log_hist_.reserve(levels);
    log_source_.reserve(levels);
    auto src = log_source_at(0.0);
    append_level(src, std::vector<double>(grid_.n_cells, kNegInf), src, 0);
}

std::vector<double> KineticHistory::log_source_at(double t) const {
    const double shift = t / config_.epsilon;
    const std::size_t n = grid_.n_cells;
    if (log_e_.size() == 1) {
        double c = 0.0;
        for (std::size_t q = 0; q < age_nodes_.size(); ++q) c += age_factor_[q] * law_.density(age_nodes_[q] + shift);
        const double lc = std::log(c);
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = lc + log_e_[0][i];
        return out;
    }
    std::vector<double> out(n, kNegInf);
    for (std::size_t q = 0; q < age_nodes_.size(); ++q) {
        const double lc = std::log(age_factor_[q] * law_.density(age_nodes_[q] + shift));
        for (std::size_t i = 0; i < n; ++i) out[i] = log_add(out[i], lc + log_e_[q][i]);
    }
    return out;
}

void KineticHistory::append_level(std::vector<double> lu, std::vector<double> lh,
                                  std::vector<double> ls, std::size_t iterations) {
    for (std::size_t i = 0; i < lu.size(); ++i) {
        if (!std::isfinite(lu[i])) {
            std::ostringstream os;
            os << "kinetic: positivity lost at level " << log_u_.size() << ", node " << i
               << " (log u = " << lu[i] << "); refine the age step or use log arithmetic";
            throw SchemeError(os.str());
        }
    }
    if (log_mode_) {
        log_conv_.push_back(kernel_.apply_log(lu));
    } else {
        std::vector<double> u(lu.size());
        for (std::size_t i = 0; i < lu.size(); ++i) {
            u[i] = std::exp(lu[i]);
            if (!(u[i] > 0.0)) throw RangeError("kinetic: u underflows in linear arithmetic; use log arithmetic");
        }
        conv_lin_.push_back(kernel_.apply(u));
    }
    log_u_.push_back(std::move(lu));
    log_hist_.push_back(std::move(lh));
    log_source_.push_back(std::move(ls));
    iterations_.push_back(iterations);
}

void KineticHistory::advance() {
    const std::size_t K = levels() - 1;
    if (K >= n_steps_) throw DomainError("kinetic: run already reached t_end");
    const std::size_t cells = K + 1;   // the new level sees ages 0 .. (K+1) h
    const std::size_t n = grid_.n_cells;
    const double w0 = weights_.weight(0, cells);

    // (weight, level) pairs for the explicit part j = 1 .. K+1, older ones optionally merged.
    std::vector<std::pair<double, std::size_t>> terms;
    terms.reserve(cells);
    const double h = weights_.h;
    std::size_t j = 1;
    while (j <= cells) {
        const double age = static_cast<double>(j) * h;
        if (config_.tail_merge_age > 0.0 && age > config_.tail_merge_age && config_.tail_stride > 1) {
            const std::size_t end = std::min(cells, j + config_.tail_stride - 1);
            double wsum = 0.0;
            for (std::size_t jj = j; jj <= end; ++jj) wsum += weights_.weight(jj, cells);
            const std::size_t mid = (j + end) / 2;
            terms.emplace_back(wsum, cells - mid);
            j = end + 1;
        } else {
            terms.emplace_back(weights_.weight(j, cells), cells - j);
            ++j;
        }
    }

    const auto ls = log_source_at(time(K + 1));
    std::vector<double> lr(n);   // log of explicit history + source
    std::vector<double> lh1(n);  // log of explicit history
    if (log_mode_) {
        std::vector<double> lw(terms.size());
        for (std::size_t t = 0; t < terms.size(); ++t) lw[t] = std::log(terms[t].first);
        parallel_for(n, workers_, [&](std::size_t b, std::size_t e) {
            std::vector<double> mx(e - b, kNegInf), acc(e - b, 0.0);
            for (std::size_t t = 0; t < terms.size(); ++t) {
                const auto& c = log_conv_[terms[t].second];
                for (std::size_t i = b; i < e; ++i) mx[i - b] = std::max(mx[i - b], lw[t] + c[i]);
            }
            for (std::size_t t = 0; t < terms.size(); ++t) {
                const auto& c = log_conv_[terms[t].second];
                for (std::size_t i = b; i < e; ++i) acc[i - b] += std::exp(lw[t] + c[i] - mx[i - b]);
            }
            for (std::size_t i = b; i < e; ++i) {
                lh1[i] = mx[i - b] + std::log(acc[i - b]);
                lr[i] = log_add(lh1[i], ls[i]);
            }
        });
    } else {
        parallel_for(n, workers_, [&](std::size_t b, std::size_t e) {
            std::vector<double> acc(e - b, 0.0);
            for (const auto& [w, lvl] : terms) {
                const auto& c = conv_lin_[lvl];
                for (std::size_t i = b; i < e; ++i) acc[i - b] += w * c[i];
            }
            for (std::size_t i = b; i < e; ++i) {
                lh1[i] = std::log(acc[i - b]);
                lr[i] = std::log(acc[i - b] + std::exp(ls[i]));
            }
        });
    }

    // Implicit current level: u = w0 (G*u) + R, a contraction with factor w0.
    std::vector<double> lu(n);
    for (std::size_t i = 0; i < n; ++i) lu[i] = lr[i] - std::log1p(-w0);
    const double lw0 = std::log(w0);
    std::size_t it = 0;
    std::vector<double> lconv;
    for (; it < config_.fixed_point_max; ++it) {
        if (log_mode_) {
            lconv = kernel_.apply_log(lu);
        } else {
            std::vector<double> u(n);
            for (std::size_t i = 0; i < n; ++i) u[i] = std::exp(lu[i]);
            lconv = kernel_.apply(u);
            for (double& c : lconv) c = std::log(c);
        }
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double next = log_add(lw0 + lconv[i], lr[i]);
            change = std::max(change, std::abs(next - lu[i]));
            lu[i] = next;
        }
        if (change <= config_.fixed_point_tol) {
            ++it;
            break;
        }
    }
    if (it >= config_.fixed_point_max) throw ConvergenceError("kinetic: implicit level did not converge");

    // Total history integral with the final u (the convolution of the last iterate).
    std::vector<double> conv_final;
    if (log_mode_) {
        conv_final = kernel_.apply_log(lu);
    } else {
        std::vector<double> u(n);
        for (std::size_t i = 0; i < n; ++i) u[i] = std::exp(lu[i]);
        conv_final = kernel_.apply(u);
        for (double& c : conv_final) c = std::log(c);
    }
    std::vector<double> lh(n);
    for (std::size_t i = 0; i < n; ++i) lh[i] = log_add(lw0 + conv_final[i], lh1[i]);
    append_level(std::move(lu), std::move(lh), ls, it);
}

void KineticHistory::run() {
    while (levels() < target_levels()) advance();
}

// ---------------------------------------------------------------------------------------------

GridField psi0_boundary(const InitialCondition& ic, const ModelParams& params, double eps,
                        const Grid1D& grid, bool log_domain) {
    params.validate();
    ic.validate(grid);
    if (!(eps > 0.0)) throw DomainError("psi0_boundary: eps must be positive");
    KineticConfig cfg;
    cfg.epsilon = eps;
    const auto kernel = make_kernel(params, grid, eps, cfg);
    const auto law = params.waiting_law();
    const auto [a, w] = unit_rule(cfg.age_nodes);
    const std::size_t n = grid.n_cells;
    std::vector<double> psi(n);
    if (log_domain) {
        std::vector<double> lu(n, kNegInf);
        for (std::size_t q = 0; q < a.size(); ++q) {
            if (!ic.has_eta() && q > 0) break;
            const auto le = log_initial_convolution(ic, grid, eps, a[q], kernel);
            double c = 0.0;
            if (ic.has_eta()) {
                c = w[q] * law.density(a[q]) / law.survival(a[q]);
            } else {
                for (std::size_t r = 0; r < a.size(); ++r) c += w[r] * law.density(a[r]) / law.survival(a[r]);
            }
            for (std::size_t i = 0; i < n; ++i) lu[i] = log_add(lu[i], std::log(c) + le[i]);
        }
        for (std::size_t i = 0; i < n; ++i) psi[i] = -eps * lu[i];
    } else {
        std::vector<double> u(n, 0.0);
        for (std::size_t q = 0; q < a.size(); ++q) {
            std::vector<double> e(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double x = grid.node(i);
                e[i] = std::exp(-ic.v(x) / eps - ic.eta_at(x, a[q]));
            }
            const auto ce = kernel.apply(e);
            const double c = w[q] * law.density(a[q]) / law.survival(a[q]);
            for (std::size_t i = 0; i < n; ++i) u[i] += c * ce[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!(u[i] > 0.0)) {
                std::ostringstream os;
                os << "psi0_boundary: u(0,x) underflows at x=" << grid.node(i) << " for eps=" << eps;
                throw RangeError(os.str());
            }
            psi[i] = -eps * std::log(u[i]);
        }
    }
    return GridField(grid, std::move(psi), 0.0);
}

KineticHistory run_kinetic(const InitialCondition& ic, const ModelParams& params, const Grid1D& grid,
                           const KineticConfig& config) {
    KineticHistory h(ic, params, grid, config);
    h.run();
    return h;
}

GridField psi_eps(const KineticHistory& h, std::size_t k) {
    const auto& lu = h.log_u(k);
    std::vector<double> psi(lu.size());
    for (std::size_t i = 0; i < lu.size(); ++i) psi[i] = -h.epsilon() * lu[i];
    return GridField(h.grid(), std::move(psi), h.time(k));
}

std::pair<GridField, GridField> compute_A_B_split(const KineticHistory& h, std::size_t k) {
    const auto& lu = h.log_u(k);
    const auto& lh = h.log_history(k);
    const auto& ls = h.log_source(k);
    std::vector<double> a(lu.size()), b(lu.size());
    for (std::size_t i = 0; i < lu.size(); ++i) {
        a[i] = std::exp(lh[i] - lu[i]);
        b[i] = std::exp(ls[i] - lu[i]);
    }
    return {GridField(h.grid(), std::move(a), h.time(k)), GridField(h.grid(), std::move(b), h.time(k))};
}

SandwichCheck check_sandwich(const KineticHistory& h) {
    SandwichCheck s;
    s.worst_lower_margin = s.worst_upper_margin = std::numeric_limits<double>::infinity();
    const auto& law = h.law();
    const auto& lu0 = h.log_u(0);
    for (std::size_t k = 0; k < h.levels(); ++k) {
        const double T = h.time(k) / h.epsilon();
        const double lo = law.density(T) / law.density(0.0);
        const double hi = law.density(1.0 + T) / law.density(1.0);
        const auto [A, B] = compute_A_B_split(h, k);
        const auto& lu = h.log_u(k);
        for (std::size_t i = 0; i < lu.size(); ++i) {
            const double ratio = std::exp(lu0[i] - lu[i]);
            s.worst_lower_margin = std::min(s.worst_lower_margin, B.values[i] - lo * ratio);
            s.worst_upper_margin = std::min(s.worst_upper_margin, hi * ratio - B.values[i]);
            s.max_partition_error = std::max(s.max_partition_error, std::abs(A.values[i] + B.values[i] - 1.0));
        }
    }
    return s;
}

double b_decay_bound(double eps, double t, double T, double mu, double c_xx, double sigma) {
    if (!(t > 0.0) || t > T) throw DomainError("b_decay_bound: need 0 < t <= T");
    const double K = 0.5 * c_xx * sigma * sigma;
    return std::pow(eps, mu) * std::pow(2.0, 1.0 + mu) / std::pow(t, 1.0 + mu) *
           (T + std::pow(eps, 1.0 - mu) * K * std::pow(T, 1.0 + mu));
}

namespace {

// max_x B at time t, linear in time between the bracketing levels.
double max_b_at(const KineticHistory& h, double t) {
    const double pos = t / h.dt();
    auto k0 = static_cast<std::size_t>(std::floor(pos + 1e-9));
    if (k0 >= h.levels() - 1) {
        if (std::abs(pos - static_cast<double>(h.levels() - 1)) > 1e-6)
            throw DomainError("check_B_decay: t_fixed beyond the run");
        k0 = h.levels() - 1;
    }
    const double frac = std::clamp(pos - static_cast<double>(k0), 0.0, 1.0);
    const auto b0 = compute_A_B_split(h, k0).second;
    if (frac < 1e-9 || k0 + 1 >= h.levels()) return b0.max();
    const auto b1 = compute_A_B_split(h, k0 + 1).second;
    double m = 0.0;
    for (std::size_t i = 0; i < b0.size(); ++i) m = std::max(m, (1.0 - frac) * b0.values[i] + frac * b1.values[i]);
    return m;
}

}  // namespace

BDecayReport check_B_decay(const std::vector<const KineticHistory*>& runs, double t_fixed, double slack) {
    if (runs.size() < 2) throw DomainError("check_B_decay: need at least two runs");
    BDecayReport rep;
    rep.t_fixed = t_fixed;
    rep.all_within_bound = rep.all_sandwich = true;
    const Grid1D& g = runs.front()->grid();
    std::vector<double> le, lb;
    for (const auto* h : runs) {
        if (!(h->grid() == g)) throw DomainError("check_B_decay: runs on different grids");
        if (h->levels() != h->target_levels()) throw DomainError("check_B_decay: run not completed");
        BDecayEntry e;
        e.epsilon = h->epsilon();
        e.max_b = max_b_at(*h, t_fixed);
        e.bound = b_decay_bound(e.epsilon, t_fixed, h->config().t_end, h->params().mu,
                                h->initial_condition().c_xx, h->params().sigma);
        e.within_bound = e.max_b <= e.bound + slack;
        e.sandwich_holds = check_sandwich(*h).holds(slack);
        rep.all_within_bound = rep.all_within_bound && e.within_bound;
        rep.all_sandwich = rep.all_sandwich && e.sandwich_holds;
        le.push_back(std::log(e.epsilon));
        lb.push_back(std::log(e.max_b));
        rep.entries.push_back(e);
    }
    const double n = static_cast<double>(le.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < le.size(); ++i) {
        sx += le[i];
        sy += lb[i];
        sxx += le[i] * le[i];
        sxy += le[i] * lb[i];
    }
    rep.fitted_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return rep;
}

// ---------------------------------------------------------------------------------------------

bool BoundsReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass(); });
}

BoundsReport check_theorem_bounds(const KineticHistory& h, const BoundsSlack& slack) {
    const auto& g = h.grid();
    const auto& ic = h.initial_condition();
    const std::size_t n = g.n_cells;
    const double eps = h.epsilon(), dx = g.dx(), T = h.time(h.levels() - 1);
    const double mu = h.params().mu;
    const auto& law = h.law();

    BoundsReport r;
    r.epsilon = eps;
    r.t_end = T;
    r.mu = mu;

    std::vector<GridField> psi;
    for (std::size_t k = 0; k < h.levels(); ++k) psi.push_back(psi_eps(h, k));

    r.psi_min = r.psi_x_min = r.psi_t_min = std::numeric_limits<double>::infinity();
    r.psi_max = r.psi_x_max = r.psi_t_max = r.psi_xx_max = -std::numeric_limits<double>::infinity();
    for (const auto& p : psi) {
        r.psi_min = std::min(r.psi_min, p.min());
        r.psi_max = std::max(r.psi_max, p.max());
        for (std::size_t i = 0; i < n; ++i) {
            const double up = p.values[(i + 1) % n], dn = p.values[(i + n - 1) % n];
            const double sx = (up - dn) / (2.0 * dx);
            r.psi_x_min = std::min(r.psi_x_min, sx);
            r.psi_x_max = std::max(r.psi_x_max, sx);
            r.psi_xx_max = std::max(r.psi_xx_max, (up - 2.0 * p.values[i] + dn) / (dx * dx));
        }
    }
    for (std::size_t k = 1; k + 1 < psi.size(); ++k)
        for (std::size_t i = 0; i < n; ++i) {
            const double st = (psi[k + 1].values[i] - psi[k - 1].values[i]) / (2.0 * h.dt());
            r.psi_t_min = std::min(r.psi_t_min, st);
            r.psi_t_max = std::max(r.psi_t_max, st);
        }

    // Initial slope extremes of phi0 = v + eps eta over the grid and the age nodes.
    r.init_slope_min = std::numeric_limits<double>::infinity();
    r.init_slope_max = -std::numeric_limits<double>::infinity();
    const auto [ages, aw] = unit_rule(h.config().age_nodes);
    std::vector<double> age_list = ic.has_eta() ? ages : std::vector<double>{0.0};
    for (double a : age_list)
        for (std::size_t i = 0; i < n; ++i) {
            const double x0 = g.node(i), x1 = g.node((i + 1) % n);
            const double s = (ic.v(x1) + eps * ic.eta_at(x1, a) - ic.v(x0) - eps * ic.eta_at(x0, a)) / dx;
            r.init_slope_min = std::min(r.init_slope_min, s);
            r.init_slope_max = std::max(r.init_slope_max, s);
        }

    double inf_v = std::numeric_limits<double>::infinity(), sup_v = -inf_v;
    for (std::size_t i = 0; i < n; ++i) {
        inf_v = std::min(inf_v, ic.v(g.node(i)));
        sup_v = std::max(sup_v, ic.v(g.node(i)));
    }
    const double eta_norm = ic.eta_l1_norm(g);

    // Proof-level upper bound: sup v - eps ln min_x int_0^1 Phi(a + T/eps) e^{int beta} G*e^{-eta} da,
    // and the constant of the simple form with T = 0.
    std::vector<std::vector<double>> log_ge;
    for (double a : age_list) {
        std::vector<double> le(n);
        for (std::size_t i = 0; i < n; ++i) le[i] = -ic.eta_at(g.node(i), a);
        log_ge.push_back(h.kernel().apply_log(le));
    }
    auto worst_log_integral = [&](double shift) {
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t q = 0; q < ages.size(); ++q) {
                const double ge = std::exp(log_ge[ic.has_eta() ? q : 0][i]);
                s += aw[q] * law.density(ages[q] + shift) / law.survival(ages[q]) * ge;
            }
            worst = std::min(worst, std::log(s));
        }
        return worst;
    };
    const double upper_proof = sup_v - eps * worst_log_integral(T / eps);
    const double c_simple = -eps * worst_log_integral(0.0);
    const double upper_simple = sup_v + (1.0 + mu) * T + c_simple;
    const double lower_proof = inf_v - eps * std::log(law.jump_rate(0.0)) - eps * std::log(eta_norm);
    const double lower_simple = inf_v - std::abs(std::log(eta_norm));

    r.checks.push_back({"psi_lower_proof", r.psi_min, lower_proof, false, slack.psi});
    r.checks.push_back({"psi_lower_simple", r.psi_min, lower_simple, false, slack.psi});
    r.checks.push_back({"psi_upper_proof", r.psi_max, upper_proof, true, slack.psi});
    r.checks.push_back({"psi_upper_simple", r.psi_max, upper_simple, true, slack.psi});
    r.checks.push_back({"psi_x_lower", r.psi_x_min, r.init_slope_min, false, slack.slope});
    r.checks.push_back({"psi_x_upper", r.psi_x_max, r.init_slope_max, true, slack.slope});
    r.checks.push_back({"psi_t_upper", r.psi_t_max, mu * (1.0 + mu), true, slack.time_derivative});
    // -Phi'/Phi = (1+mu)/(1+a) for the power law, so the maximum-principle argument yields 1 + mu.
    r.checks.push_back({"psi_t_upper_one_plus_mu", r.psi_t_max, 1.0 + mu, true, slack.time_derivative});
    BoundCheck t_lower{"psi_t_lower", r.psi_t_min, 0.0, false, 0.0};
    t_lower.asserted = false;
    r.checks.push_back(t_lower);
    r.checks.push_back({"psi_xx_upper", r.psi_xx_max, ic.c_xx, true, slack.second_difference});
    return r;
}

// ---------------------------------------------------------------------------------------------

InstationaryValue instationary_measure(double t, double a, double mu) {
    if (!(t > 0.0)) throw DomainError("instationary measure: t must be positive");
    if (!(a >= 0.0 && a < 1.0 + t)) throw DomainError("instationary measure: need 0 <= a < 1 + t");
    if (!(mu > 0.0 && mu < 1.0)) throw DomainError("instationary measure: mu must lie in (0,1)");
    InstationaryValue v;
    v.n = std::pow(1.0 + a, -mu) * std::pow(1.0 + t - a, mu - 1.0);
    v.nu = mu * std::pow(1.0 + t, 1.0 - mu) / (std::pow(1.0 + a, 1.0 + mu) * std::pow(1.0 + t - a, 1.0 - mu));
    return v;
}

double instationary_mass(double t, double eps, double mu) {
    if (!(t > 0.0) || !(eps > 0.0)) throw DomainError("instationary mass: t and eps must be positive");
    const double T = t / eps;
    // a = 1 + T - s^{1/mu} removes the (1+T-a)^{mu-1} endpoint singularity.
    const double top = std::pow(1.0 + T, mu);
    const double scale = std::pow(1.0 + T, 1.0 - mu);
    auto f = [&](double s) { return scale * std::pow(2.0 + T - std::pow(s, 1.0 / mu), -1.0 - mu); };
    // Most of the mass sits at small a, i.e. s close to the top end.
    std::vector<double> brk;
    for (double a : {10.0, 1.0, 0.1})
        if (a < 1.0 + T) brk.push_back(std::pow(1.0 + T - a, mu));
    std::sort(brk.begin(), brk.end());
    quad::AdaptiveOptions opt;
    opt.rel_tol = 1e-14;
    const auto res = quad::gauss_kronrod(f, 0.0, top, brk, opt);
    if (!res.converged) throw ConvergenceError("instationary mass: quadrature did not converge");
    return res.value;
}

double instationary_mass_exact(double t, double eps) {
    return 1.0 / (1.0 + 1.0 / (1.0 + t / eps));
}

// ---------------------------------------------------------------------------------------------

ConvergenceReport convergence_study(const std::vector<const KineticHistory*>& runs,
                                    const std::vector<GridField>& reference,
                                    const ConvergenceWindow& window) {
    if (runs.empty() || reference.size() < 2) throw DomainError("convergence study: need runs and >= 2 reference snapshots");
    for (const auto& r : reference)
        if (!(r.grid == reference.front().grid)) throw DomainError("convergence study: mismatched reference grids");
    const Grid1D& g = reference.front().grid;
    ConvergenceReport rep;
    for (const auto* h : runs) {
        if (!(h->grid() == g)) throw DomainError("convergence study: mismatched grid between kinetic run and reference");
        double err = 0.0;
        bool any = false;
        for (std::size_t k = 0; k < h->levels(); ++k) {
            const double t = h->time(k);
            if (t < window.t_min - 1e-12 || t > window.t_max + 1e-12) continue;
            auto hi = std::lower_bound(reference.begin(), reference.end(), t,
                                       [](const GridField& f, double tt) { return f.time < tt; });
            if (hi == reference.end()) {
                if (std::abs(reference.back().time - t) > 1e-9) throw DomainError("convergence study: reference does not cover the window");
                hi = reference.end() - 1;
            }
            const GridField* b = &*hi;
            const GridField* a = hi == reference.begin() ? b : &*(hi - 1);
            const double w = b->time == a->time ? 1.0 : (t - a->time) / (b->time - a->time);
            if (w < -1e-9) throw DomainError("convergence study: reference does not cover the window");
            const auto p = psi_eps(*h, k);
            for (std::size_t i = 0; i < g.n_cells; ++i) {
                const double x = g.node(i);
                if (x < window.x_min || x > window.x_max) continue;
                const double ref = (1.0 - w) * a->values[i] + w * b->values[i];
                err = std::max(err, std::abs(p.values[i] - ref));
                any = true;
            }
        }
        if (!any) throw DomainError("convergence study: no level inside the window");
        rep.entries.push_back({h->epsilon(), err});
    }
    rep.monotone = true;
    for (std::size_t k = 1; k < rep.entries.size(); ++k) {
        rep.ratios.push_back(rep.entries[k - 1].sup_error / rep.entries[k].sup_error);
        if (!(rep.entries[k].sup_error < rep.entries[k - 1].sup_error)) rep.monotone = false;
    }
    return rep;
}

}  // namespace subfront::kinetic

#include "subfront/self_similar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "subfront/errors.hpp"

namespace subfront::hj {

namespace {

struct LineFit {
    double slope = 0.0, intercept = 0.0, sse = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        f.sse += r * r;
    }
    return f;
}

LineFit fit_with_origin(const std::vector<double>& t, const std::vector<double>& lc, double t0) {
    std::vector<double> lx(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) lx[i] = std::log(t[i] + t0);
    return fit_line(lx, lc);
}

}  // namespace

double SelfSimilarReport::exponent_relative_error() const {
    return std::abs(fitted_exponent / oracle_exponent - 1.0);
}

double oracle_amplitude(double t, double c0, double prefactor, double power, double shape_exponent) {
    const double r = power;
    const double k = (r - 1.0) * prefactor * std::pow(shape_exponent, r);
    return std::pow(std::pow(c0, 1.0 - r) + k * t, -1.0 / (r - 1.0));
}

SelfSimilarReport self_similar_check(const std::vector<GridField>& snapshots,
                                     const SelfSimilarOptions& opt) {
    if (!(opt.power > 1.0) || !(opt.shape_exponent > 1.0))
        throw DomainError("self-similar check: power and shape exponent must exceed 1");
    std::vector<const GridField*> used;
    for (const auto& s : snapshots)
        if (s.time >= opt.t_min && s.time > 0.0) used.push_back(&s);
    if (used.size() < std::max<std::size_t>(opt.min_snapshots, 3))
        throw DomainError("self-similar check: insufficient snapshots after t_min");

    const Grid1D& g = used.front()->grid;
    std::vector<std::size_t> zone;
    std::vector<double> shape;
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const double x = g.node(i);
        const double d = std::abs(x - opt.x_center);
        if (d < opt.core_halfwidth) continue;
        if (x - g.x_min < opt.edge_margin || g.x_max - x < opt.edge_margin) continue;
        zone.push_back(i);
        shape.push_back(std::pow(d, opt.shape_exponent));
    }
    if (zone.size() < 2) throw DomainError("self-similar check: empty evaluation zone");

    SelfSimilarReport rep;
    rep.zone_nodes = zone.size();
    double ww = 0.0;
    for (double w : shape) ww += w * w;
    for (const auto* s : used) {
        if (!(s->grid == g)) throw DomainError("self-similar check: snapshots on different grids");
        double pw = 0.0;
        for (std::size_t j = 0; j < zone.size(); ++j) pw += s->values[zone[j]] * shape[j];
        const double c = pw / ww;
        if (!(c > 0.0)) throw DomainError("self-similar check: non-positive amplitude");
        rep.times.push_back(s->time);
        rep.amplitudes.push_back(c);
    }

    const auto& ref = *used.back();
    const double c_ref = rep.amplitudes.back();
    const double shape_max = *std::max_element(shape.begin(), shape.end());
    double ref_max = 0.0;
    for (std::size_t j = 0; j < zone.size(); ++j) ref_max = std::max(ref_max, ref.values[zone[j]] / c_ref);
    for (std::size_t k = 0; k < used.size(); ++k) {
        const double c = rep.amplitudes[k];
        for (std::size_t j = 0; j < zone.size(); ++j) {
            const double v = used[k]->values[zone[j]] / c;
            rep.collapse_deviation =
                std::max(rep.collapse_deviation, std::abs(v - ref.values[zone[j]] / c_ref) / ref_max);
            rep.shape_deviation = std::max(rep.shape_deviation, std::abs(v - shape[j]) / shape_max);
        }
    }

    std::vector<double> lt(rep.times.size()), lc(rep.times.size());
    for (std::size_t k = 0; k < lt.size(); ++k) {
        lt[k] = std::log(rep.times[k]);
        lc[k] = std::log(rep.amplitudes[k]);
    }
    rep.raw_exponent = fit_line(lt, lc).slope;

    // Virtual origin: golden-section search on ln t0 for the least-squares line.
    double best_t0 = 0.0;
    double best_sse = fit_line(lt, lc).sse;
    double lo = std::log(1e-3 * rep.times.front()), hi = std::log(1e3 * rep.times.back());
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    auto sse_at = [&](double s) { return fit_with_origin(rep.times, lc, std::exp(s)).sse; };
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    double fa = sse_at(a), fb = sse_at(b);
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
        if (fa < fb) {
            hi = b, b = a, fb = fa;
            a = hi - gr * (hi - lo), fa = sse_at(a);
        } else {
            lo = a, a = b, fa = fb;
            b = lo + gr * (hi - lo), fb = sse_at(b);
        }
    }
    const double s_best = 0.5 * (lo + hi);
    if (sse_at(s_best) < best_sse) best_t0 = std::exp(s_best);
    rep.virtual_origin = best_t0;
    rep.fitted_exponent = fit_with_origin(rep.times, lc, best_t0).slope;

    rep.oracle_exponent = -1.0 / (opt.power - 1.0);
    if (opt.prefactor > 0.0) {
        const double r = opt.power;
        rep.oracle_virtual_origin =
            std::pow(opt.c0, 1.0 - r) / ((r - 1.0) * opt.prefactor * std::pow(opt.shape_exponent, r));
        for (double t : rep.times)
            rep.oracle_amplitudes.push_back(oracle_amplitude(t, opt.c0, opt.prefactor, r, opt.shape_exponent));
    }
    return rep;
}

}  // namespace subfront::hj

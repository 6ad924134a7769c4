#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace subfront::quad {

struct Rule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1], nodes ascending. Cached per n.
const Rule& gauss_legendre(std::size_t n);

// Integrates f over [a, b] with an n-point Gauss-Legendre rule.
double gauss_legendre_integrate(const std::function<double(double)>& f, double a, double b,
                                std::size_t n);

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t intervals = 0;
    bool converged = false;
};

struct AdaptiveOptions {
    double abs_tol = 1e-15;
    double rel_tol = 1e-13;
    std::size_t max_intervals = 4000;
};

// Globally adaptive Gauss-Kronrod 7/15 quadrature (QAG strategy: always bisect the
// interval with the largest error estimate). `breakpoints` are optional interior
// points used to seed the initial partition.
AdaptiveResult gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                             std::span<const double> breakpoints = {},
                             const AdaptiveOptions& opts = {});

}  // namespace subfront::quad

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qedk {

enum class GridRule { uniform_trapezoid, gauss_legendre, log_trapezoid };

inline const char* grid_rule_name(GridRule r) {
    switch (r) {
        case GridRule::uniform_trapezoid: return "uniform-trapezoid";
        case GridRule::gauss_legendre: return "gauss-legendre";
        case GridRule::log_trapezoid: return "log";
    }
    return "?";
}

// Quadrature grid for integrals over the reservoir frequency omega_k. The
// radial measure factors are the integrand's business; weights here quadrate
// plain d omega on (0, omega_max] (or [omega_min, omega_max] for the log rule).
struct FrequencyGrid {
    std::vector<double> nodes;
    std::vector<double> weights;
    GridRule rule = GridRule::uniform_trapezoid;
    double omega_max = 0.0;
    double omega_min = 0.0;

    std::size_t size() const { return nodes.size(); }
};

// Trapezoid on nodes i*h (i = 1..n) with the origin cell closed by the
// leading 1.5h weight; sum of weights equals omega_max exactly.
inline FrequencyGrid make_uniform_grid(int n, double omega_max) {
    if (n < 2 || !(omega_max > 0.0))
        throw std::invalid_argument("make_uniform_grid: need n >= 2 and omega_max > 0");
    FrequencyGrid g;
    g.rule = GridRule::uniform_trapezoid;
    g.omega_max = omega_max;
    double h = omega_max / n;
    g.nodes.resize(static_cast<std::size_t>(n));
    g.weights.assign(static_cast<std::size_t>(n), h);
    for (int i = 0; i < n; ++i) g.nodes[static_cast<std::size_t>(i)] = h * (i + 1);
    g.weights.front() = 1.5 * h;
    g.weights.back() = 0.5 * h;
    return g;
}

inline FrequencyGrid make_gauss_grid(int n, double omega_max) {
    if (n < 2 || !(omega_max > 0.0))
        throw std::invalid_argument("make_gauss_grid: need n >= 2 and omega_max > 0");
    FrequencyGrid g;
    g.rule = GridRule::gauss_legendre;
    g.omega_max = omega_max;
    g.nodes.resize(static_cast<std::size_t>(n));
    g.weights.resize(static_cast<std::size_t>(n));
    // Newton on Legendre P_n from the three-term recurrence
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double node = 0.5 * omega_max * (1.0 - x); // descending x -> ascending node
        double w = omega_max / ((1.0 - x * x) * pp * pp);
        g.nodes[static_cast<std::size_t>(i)] = node;
        g.weights[static_cast<std::size_t>(i)] = w;
    }
    return g;
}

// Uniform in ln(omega) between omega_min and omega_max, trapezoid weights in
// the log variable mapped back (w_i = omega_i * du). Used by the KK check.
inline FrequencyGrid make_log_grid(int n, double omega_min, double omega_max) {
    if (n < 2 || !(omega_min > 0.0) || !(omega_max > omega_min))
        throw std::invalid_argument("make_log_grid: need n >= 2 and 0 < omega_min < omega_max");
    FrequencyGrid g;
    g.rule = GridRule::log_trapezoid;
    g.omega_max = omega_max;
    g.omega_min = omega_min;
    double du = std::log(omega_max / omega_min) / (n - 1);
    g.nodes.resize(static_cast<std::size_t>(n));
    g.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double w = omega_min * std::exp(du * i);
        g.nodes[static_cast<std::size_t>(i)] = w;
        g.weights[static_cast<std::size_t>(i)] = w * du;
    }
    g.weights.front() *= 0.5;
    g.weights.back() *= 0.5;
    return g;
}

} // namespace qedk

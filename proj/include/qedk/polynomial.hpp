#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qedk/errors.hpp"

namespace qedk {

using cplx = std::complex<double>;
using cplxl = std::complex<long double>;

// Polynomials are coefficient vectors in ascending degree: c[0] + c[1] s + ...
using Poly = std::vector<double>;
using CPoly = std::vector<cplx>;

template <class Coeff, class S>
auto poly_eval(const std::vector<Coeff>& c, S s) {
    using R = decltype(Coeff{} * s);
    R r{};
    for (std::size_t i = c.size(); i-- > 0;) r = r * s + R(c[i]);
    return r;
}

inline Poly poly_trim(Poly c, double rel = 0.0) {
    double amax = 0.0;
    for (double v : c) amax = std::max(amax, std::abs(v));
    while (c.size() > 1 && std::abs(c.back()) <= rel * amax) c.pop_back();
    return c;
}

inline int poly_degree(const Poly& c) {
    for (std::size_t i = c.size(); i-- > 0;)
        if (c[i] != 0.0) return static_cast<int>(i);
    return 0;
}

template <class Coeff>
std::vector<Coeff> poly_add(const std::vector<Coeff>& a, const std::vector<Coeff>& b) {
    std::vector<Coeff> out(std::max(a.size(), b.size()), Coeff{});
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

template <class Coeff>
std::vector<Coeff> poly_scale(std::vector<Coeff> a, Coeff k) {
    for (auto& v : a) v *= k;
    return a;
}

template <class Coeff>
std::vector<Coeff> poly_mul(const std::vector<Coeff>& a, const std::vector<Coeff>& b) {
    if (a.empty() || b.empty()) return {Coeff{}};
    std::vector<Coeff> out(a.size() + b.size() - 1, Coeff{});
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

template <class Coeff>
std::vector<Coeff> poly_deriv(const std::vector<Coeff>& c) {
    if (c.size() <= 1) return {Coeff{}};
    std::vector<Coeff> out(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) out[i - 1] = c[i] * Coeff(double(i));
    return out;
}

inline CPoly to_cpoly(const Poly& p) {
    CPoly out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = cplx(p[i], 0.0);
    return out;
}

// Taylor coefficients of poly(p + u), ascending in u, via repeated synthetic
// division by (s - p). Long-double accumulation keeps multiple-pole residues
// usable after cancellation.
inline std::vector<cplxl> taylor_shift(const CPoly& c, cplx p) {
    std::vector<cplxl> work(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) work[i] = cplxl(c[i]);
    cplxl pl(p);
    std::vector<cplxl> out(c.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        cplxl rem{};
        for (std::size_t i = work.size(); i-- > 0;) rem = rem * pl + work[i];
        out[k] = rem;
        if (work.size() > 1) {
            std::vector<cplxl> q(work.size() - 1);
            cplxl acc{};
            for (std::size_t i = work.size(); i-- > 1;) {
                acc = acc * pl + work[i];
                q[i - 1] = acc;
            }
            work = std::move(q);
        } else {
            work = {cplxl{}};
        }
    }
    return out;
}

// First m coefficients of the power series num(u)/den(u) with den[0] != 0.
inline std::vector<cplxl> series_div(const std::vector<cplxl>& num,
                                     const std::vector<cplxl>& den, int m) {
    std::vector<cplxl> g(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        cplxl acc = k < static_cast<int>(num.size()) ? num[k] : cplxl{};
        for (int j = 1; j <= k; ++j) {
            cplxl dj = j < static_cast<int>(den.size()) ? den[j] : cplxl{};
            acc -= dj * g[k - j];
        }
        g[k] = acc / den[0];
    }
    return g;
}

// All roots of a real-coefficient polynomial via the companion-matrix
// eigenproblem. Leading/trailing negligible coefficients are stripped first;
// exact zero roots come from the trailing strip.
inline std::vector<cplx> poly_roots(const Poly& coeffs) {
    Poly c = poly_trim(coeffs, 1e-300);
    int n = poly_degree(c);
    c.resize(static_cast<std::size_t>(n) + 1);
    std::vector<cplx> roots;
    // deflate exact zeros at the origin
    std::size_t z = 0;
    while (z < c.size() - 1 && c[z] == 0.0) ++z;
    for (std::size_t i = 0; i < z; ++i) roots.emplace_back(0.0, 0.0);
    c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(z));
    n = static_cast<int>(c.size()) - 1;
    if (n >= 1) {
        Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
        for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
        for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[static_cast<std::size_t>(i)] / c.back();
        Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
        for (int i = 0; i < n; ++i) roots.emplace_back(es.eigenvalues()[i].real(), es.eigenvalues()[i].imag());
    }
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

struct RootCluster {
    cplx location;
    int multiplicity;
};

// Agglomerative clustering of near-coincident roots with a multiplicity-aware
// radius (an m-fold root splits by O(eps^(1/m)) under double-precision root
// finding), followed by a Newton polish on the (m-1)-th derivative, where a
// true m-fold root is a simple zero.
inline std::vector<RootCluster> merge_roots(std::vector<cplx> rts, const Poly* poly = nullptr) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    struct Cl {
        std::vector<cplx> members;
        cplx loc;
    };
    std::sort(rts.begin(), rts.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    std::vector<Cl> clusters;
    for (cplx r : rts) clusters.push_back({{r}, r});
    bool changed = true;
    while (changed && clusters.size() > 1) {
        changed = false;
        double bestd = 0.0;
        std::size_t bi = 0, bj = 0;
        bool have = false;
        for (std::size_t i = 0; i < clusters.size(); ++i)
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                double d = std::abs(clusters[i].loc - clusters[j].loc);
                if (!have || d < bestd) {
                    bestd = d;
                    bi = i;
                    bj = j;
                    have = true;
                }
            }
        double m = double(clusters[bi].members.size() + clusters[bj].members.size());
        cplx mid = 0.5 * (clusters[bi].loc + clusters[bj].loc);
        double tau = std::max(1e-9, 50.0 * std::pow(eps, 1.0 / m)) * (1.0 + std::abs(mid));
        if (bestd <= tau) {
            Cl merged;
            merged.members = clusters[bi].members;
            merged.members.insert(merged.members.end(), clusters[bj].members.begin(),
                                  clusters[bj].members.end());
            cplx s{};
            for (cplx v : merged.members) s += v;
            merged.loc = s / double(merged.members.size());
            clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
            clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bi));
            clusters.push_back(merged);
            changed = true;
        }
    }
    std::vector<RootCluster> out;
    for (auto& cl : clusters) {
        int m = static_cast<int>(cl.members.size());
        cplx loc = cl.loc;
        if (m > 1 && poly) {
            CPoly d = to_cpoly(*poly);
            for (int k = 0; k < m - 1; ++k) d = poly_deriv(d);
            CPoly dd = poly_deriv(d);
            cplx z = loc;
            for (int it = 0; it < 50; ++it) {
                cplx fz = poly_eval(d, z);
                cplx fpz = poly_eval(dd, z);
                if (fpz == cplx{}) break;
                cplx step = fz / fpz;
                z -= step;
                if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z))) break;
            }
            double tau = std::max(1e-9, 50.0 * std::pow(eps, 1.0 / double(m))) * (1.0 + std::abs(loc));
            if (std::abs(z - loc) <= tau) loc = z;
        }
        out.push_back({loc, m});
    }
    std::sort(out.begin(), out.end(), [](const RootCluster& a, const RootCluster& b) {
        if (a.location.real() != b.location.real()) return a.location.real() < b.location.real();
        return a.location.imag() < b.location.imag();
    });
    return out;
}

// Snap conjugate partners exactly and flatten near-real imaginary parts, so
// real-coefficient denominators carry an exactly conjugate-symmetric cache.
inline void pair_conjugates(std::vector<RootCluster>& cl) {
    std::vector<bool> used(cl.size(), false);
    for (std::size_t i = 0; i < cl.size(); ++i) {
        if (used[i]) continue;
        double ascale = 1.0 + std::abs(cl[i].location);
        if (std::abs(cl[i].location.imag()) <= 1e-10 * ascale) {
            cl[i].location = cplx(cl[i].location.real(), 0.0);
            used[i] = true;
            continue;
        }
        std::size_t best = i;
        double bestd = std::numeric_limits<double>::max();
        for (std::size_t j = 0; j < cl.size(); ++j) {
            if (j == i || used[j] || cl[j].multiplicity != cl[i].multiplicity) continue;
            double d = std::abs(cl[j].location - std::conj(cl[i].location));
            if (d < bestd) {
                bestd = d;
                best = j;
            }
        }
        if (best != i && bestd <= 1e-7 * ascale) {
            cplx avg = 0.5 * (cl[i].location + std::conj(cl[best].location));
            cl[i].location = avg;
            cl[best].location = std::conj(avg);
            used[i] = used[best] = true;
        } else {
            used[i] = true;
        }
    }
    std::sort(cl.begin(), cl.end(), [](const RootCluster& a, const RootCluster& b) {
        if (a.location.real() != b.location.real()) return a.location.real() < b.location.real();
        return a.location.imag() < b.location.imag();
    });
}

} // namespace qedk

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "qedk/errors.hpp"
#include "qedk/laplace.hpp"

namespace qedk {

// Natural units hbar = eps0 = mu0 = c = 1; omega_ref fixes the dimensionless
// time scale. Conversion back to SI is postprocessing, never done in numerics.
struct UnitsSystem {
    double omega_ref = 1.0;
    bool natural_units = true;
};

struct ZeroKernel {};

struct BoxKernel {
    double chi0;
    double delta;
};

struct StepKernel {
    double beta;
};

struct LorentzKernel {
    double omega0;
    double gamma;
    double omega_p;
    double nu0() const { return std::sqrt(omega0 * omega0 - gamma * gamma / 4.0); }
};

// chi sampled at t = dt, 2 dt, ..., n dt; linear interpolation between
// samples, constant on (0, dt] (so step-like kernels tabulate exactly),
// zero outside (0, n dt].
struct TabulatedKernel {
    std::vector<double> samples;
    double dt;
    double t_max() const { return dt * static_cast<double>(samples.size()); }
};

using SusceptibilityKernel =
    std::variant<ZeroKernel, BoxKernel, StepKernel, LorentzKernel, TabulatedKernel>;

inline void validate_kernel(const SusceptibilityKernel& k) {
    if (const auto* b = std::get_if<BoxKernel>(&k)) {
        if (!(b->chi0 > 0.0)) throw std::invalid_argument("box kernel: chi0 must be > 0");
        if (!(b->delta > 0.0)) throw std::invalid_argument("box kernel: delta must be > 0");
    } else if (const auto* s = std::get_if<StepKernel>(&k)) {
        if (!(s->beta > 0.0)) throw std::invalid_argument("step kernel: beta must be > 0");
    } else if (const auto* l = std::get_if<LorentzKernel>(&k)) {
        if (!(l->omega0 > 0.0)) throw std::invalid_argument("lorentz kernel: omega0 must be > 0");
        if (!(l->gamma >= 0.0)) throw std::invalid_argument("lorentz kernel: gamma must be >= 0");
        if (!(l->gamma < 2.0 * l->omega0))
            throw std::invalid_argument("lorentz kernel: gamma must be < 2*omega0 (nu0 real)");
        if (!(l->omega_p > 0.0)) throw std::invalid_argument("lorentz kernel: omega_p must be > 0");
    } else if (const auto* tb = std::get_if<TabulatedKernel>(&k)) {
        if (tb->samples.size() < 8)
            throw std::invalid_argument("tabulated kernel: need >= 8 samples");
        if (!(tb->dt > 0.0)) throw std::invalid_argument("tabulated kernel: dt must be > 0");
        for (double v : tb->samples)
            if (!std::isfinite(v)) throw std::invalid_argument("tabulated kernel: non-finite sample");
    }
}

struct MediumModel {
    SusceptibilityKernel chi_e = ZeroKernel{};
    SusceptibilityKernel chi_m = ZeroKernel{};
    UnitsSystem units{};

    MediumModel() = default;
    MediumModel(SusceptibilityKernel e, SusceptibilityKernel m, UnitsSystem u = {})
        : chi_e(std::move(e)), chi_m(std::move(m)), units(u) {
        validate_kernel(chi_e);
        validate_kernel(chi_m);
        if (!(units.omega_ref > 0.0)) throw std::invalid_argument("units: omega_ref must be > 0");
    }
};

inline MediumModel vacuum_medium() { return MediumModel{}; }

inline bool is_zero_kernel(const SusceptibilityKernel& k) {
    return std::holds_alternative<ZeroKernel>(k);
}

inline bool is_rational_kernel(const SusceptibilityKernel& k) {
    return std::holds_alternative<ZeroKernel>(k) || std::holds_alternative<StepKernel>(k) ||
           std::holds_alternative<LorentzKernel>(k);
}

inline double chi_time(const SusceptibilityKernel& k, double t) {
    if (t <= 0.0) return 0.0;
    if (std::holds_alternative<ZeroKernel>(k)) return 0.0;
    if (const auto* b = std::get_if<BoxKernel>(&k)) return t < b->delta ? b->chi0 / b->delta : 0.0;
    if (const auto* s = std::get_if<StepKernel>(&k)) return s->beta;
    if (const auto* l = std::get_if<LorentzKernel>(&k)) {
        double nu = l->nu0();
        return l->omega_p * l->omega_p * std::exp(-l->gamma * t / 2.0) * std::sin(nu * t) / nu;
    }
    const auto& tb = std::get<TabulatedKernel>(k);
    if (t > tb.t_max()) return 0.0;
    if (t <= tb.dt) return tb.samples.front();
    double u = t / tb.dt;
    auto i = static_cast<std::size_t>(u);
    if (i >= tb.samples.size()) return tb.samples.back();
    double frac = u - static_cast<double>(i);
    return tb.samples[i - 1] + (tb.samples[i] - tb.samples[i - 1]) * frac;
}

namespace detail {

// (1 - e^{-x})/x and (1 - (1+x) e^{-x})/x^2 with small-|x| series switches.
inline cplxl phi1(cplxl x) {
    if (std::abs(x) < 1e-4L)
        return cplxl(1.0L) - x / cplxl(2.0L) + x * x / cplxl(6.0L) - x * x * x / cplxl(24.0L);
    return (cplxl(1.0L) - std::exp(-x)) / x;
}

inline cplxl phi2(cplxl x) {
    if (std::abs(x) < 1e-4L)
        return cplxl(0.5L) - x / cplxl(3.0L) + x * x / cplxl(8.0L) - x * x * x / cplxl(30.0L);
    return (cplxl(1.0L) - (cplxl(1.0L) + x) * std::exp(-x)) / (x * x);
}

} // namespace detail

inline LaplaceFunction chi_laplace(const SusceptibilityKernel& k) {
    if (std::holds_alternative<ZeroKernel>(k)) return RationalLaplace({0.0}, {1.0});
    if (const auto* s = std::get_if<StepKernel>(&k)) return RationalLaplace({s->beta}, {0.0, 1.0});
    if (const auto* l = std::get_if<LorentzKernel>(&k))
        return RationalLaplace({l->omega_p * l->omega_p},
                               {l->omega0 * l->omega0, l->gamma, 1.0});
    if (const auto* b = std::get_if<BoxKernel>(&k)) {
        double chi0 = b->chi0, delta = b->delta;
        return GeneralLaplace{
            [chi0, delta](cplxl s) { return cplxl(chi0) * detail::phi1(s * cplxl(delta)); },
            0.0, 2.0 * std::numbers::pi / delta};
    }
    const auto& tb = std::get<TabulatedKernel>(k);
    auto samples = tb.samples;
    double dt = tb.dt;
    // exact transform of the piecewise-linear interpolant (compact support)
    auto fn = [samples, dt](cplxl s) {
        cplxl h(dt);
        cplxl x = s * h;
        cplxl total = cplxl(samples.front()) * h * detail::phi1(x); // flat piece on (0, dt]
        for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
            long double ti = dt * static_cast<long double>(i + 1);
            cplxl a(samples[i]);
            cplxl slope((samples[i + 1] - samples[i]) / dt);
            cplxl seg = a * h * detail::phi1(x) + slope * h * h * detail::phi2(x);
            total += std::exp(-s * cplxl(ti)) * seg;
        }
        return total;
    };
    return GeneralLaplace{fn, 0.0, 2.0 * std::numbers::pi / dt};
}

inline cplxl eval_laplace(const LaplaceFunction& f, cplxl s) {
    if (const auto* r = std::get_if<RationalLaplace>(&f)) return r->eval(s);
    return std::get<GeneralLaplace>(f).eval(s);
}

inline cplx permittivity(const MediumModel& medium, double omega, Branch branch) {
    if (!(omega > 0.0)) throw std::invalid_argument("permittivity: omega must be > 0");
    auto chie = chi_laplace(medium.chi_e);
    cplx s(0.0, branch == Branch::forward ? -omega : +omega);
    if (const auto* r = std::get_if<RationalLaplace>(&chie)) {
        for (const auto& pm : r->poles().poles)
            if (std::abs(cplx(s) - pm.location) <= 1e-12 * (1.0 + std::abs(pm.location)))
                throw PoleOnAxis("permittivity: evaluation point within 1e-12 of a pole at omega = " +
                                 std::to_string(omega));
    }
    cplxl v = eval_laplace(chie, cplxl(s));
    return cplx(1.0 + static_cast<double>(v.real()), static_cast<double>(v.imag()));
}

namespace detail {

// Long division a / b; returns true and the quotient when the remainder is
// negligible relative to a's coefficient scale.
inline bool poly_divides(const Poly& a, const Poly& b, Poly& quotient, double rel = 1e-10) {
    Poly bb = poly_trim(b, 0.0);
    int db = poly_degree(bb);
    if (db < 1) return false;
    Poly rem = poly_trim(a, 0.0);
    int da = poly_degree(rem);
    if (da < db) return false;
    double anorm = 0.0;
    for (double v : rem) anorm = std::max(anorm, std::abs(v));
    Poly q(static_cast<std::size_t>(da - db) + 1, 0.0);
    for (int d = da; d >= db; --d) {
        double c = rem[static_cast<std::size_t>(d)] / bb[static_cast<std::size_t>(db)];
        q[static_cast<std::size_t>(d - db)] = c;
        for (int j = 0; j <= db; ++j)
            rem[static_cast<std::size_t>(d - db + j)] -= c * bb[static_cast<std::size_t>(j)];
        rem[static_cast<std::size_t>(d)] = 0.0;
    }
    double rnorm = 0.0;
    for (double v : rem) rnorm = std::max(rnorm, std::abs(v));
    if (rnorm > rel * anorm) return false;
    quotient = poly_trim(q, 0.0);
    return true;
}

struct RationalChi {
    Poly num, den; // chi~ = num/den
};

inline RationalChi rational_chi(const SusceptibilityKernel& k) {
    if (std::holds_alternative<ZeroKernel>(k)) return {{0.0}, {1.0}};
    if (const auto* s = std::get_if<StepKernel>(&k)) return {{s->beta}, {0.0, 1.0}};
    const auto& l = std::get<LorentzKernel>(k);
    return {{l.omega_p * l.omega_p}, {l.omega0 * l.omega0, l.gamma, 1.0}};
}

} // namespace detail

// The reciprocal of the characteristic function
//   s^2 + omega_q^2 + s^2 chi~_e - omega_q^2 chi~_m,
// i.e. the response G~(omega_q, s) whose denominator carries the mode poles
// (find_poles on the result yields them) and whose inversion is the h kernel.
// Rational media: cleared to the polynomial pair {De*Dm, P} with common
// factors cancelled by exact division. Otherwise a callable.
inline LaplaceFunction mode_denominator(const MediumModel& medium, double omega_q) {
    if (!(omega_q > 0.0)) throw std::invalid_argument("mode_denominator: omega_q must be > 0");
    if (is_rational_kernel(medium.chi_e) && is_rational_kernel(medium.chi_m)) {
        auto e = detail::rational_chi(medium.chi_e);
        auto m = detail::rational_chi(medium.chi_m);
        double wq2 = omega_q * omega_q;
        Poly s2pw{wq2, 0.0, 1.0};
        Poly P = poly_add(poly_add(poly_mul(s2pw, poly_mul(e.den, m.den)),
                                   poly_mul(Poly{0.0, 0.0, 1.0}, poly_mul(e.num, m.den))),
                          poly_scale(poly_mul(m.num, e.den), -wq2));
        Poly num = poly_mul(e.den, m.den);
        for (const Poly* f : {&e.den, &m.den}) {
            Poly qn, qd;
            if (poly_degree(*f) >= 1 && detail::poly_divides(P, *f, qn) &&
                detail::poly_divides(num, *f, qd)) {
                P = qn;
                num = qd;
            }
        }
        return RationalLaplace(num, P);
    }
    auto chie = chi_laplace(medium.chi_e);
    auto chim = chi_laplace(medium.chi_m);
    double scale = omega_q;
    for (const LaplaceFunction* f : {&chie, &chim})
        if (const auto* g = std::get_if<GeneralLaplace>(f)) scale = std::max(scale, g->omega_scale);
    double wq2 = omega_q * omega_q;
    auto fn = [chie, chim, wq2](cplxl s) {
        return cplxl(1.0L) / (s * s + cplxl(wq2) + s * s * eval_laplace(chie, s) -
                              cplxl(wq2) * eval_laplace(chim, s));
    };
    return GeneralLaplace{fn, 0.0, scale};
}

} // namespace qedk

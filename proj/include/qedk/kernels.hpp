#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qedk/check_report.hpp"
#include "qedk/coupling.hpp"
#include "qedk/errors.hpp"
#include "qedk/laplace.hpp"
#include "qedk/medium.hpp"

namespace qedk {

// Time-domain kernels of one transverse mode. The public set (Z, r, h, xi,
// zeta, eta, Q) follows the mode solution; the mom_* handles are the bare
// canonical-momentum numerators consumed by the field layer, exposed here
// because they share the pole machinery. All handles take the nonnegative
// elapsed time; the branch folds the time direction into the kernel signs,
// so backward values are the forward ones conjugated for real media.
struct ModeKernels {
    double omega_q = 0.0;
    Branch branch = Branch::forward;
    std::string medium_label;
    PoleSet mode_poles; // reduced mode denominator (empty for non-rational media)

    std::function<cplx(double)> Z, r, h;                   // (t)
    std::function<cplx(double, double)> xi, zeta, eta, Q;  // (omega_k, t)
    std::function<double(double)> f, g;                    // coupling amplitudes, real >= 0

    // field-layer slots: time derivatives (Z_dot, xi_dot, xi_ddot), the
    // electric and magnetic momentum kernels, and the photonic momentum sum
    // (all bare, without coupling weights)
    std::function<cplx(double)> Z_dot, mom_photon;
    std::function<cplx(double, double)> xi_dot, xi_ddot, mom_electric, mom_magnetic;

    // the susceptibilities the kernels were built from (the field layer
    // needs chi_e for the displacement convolution)
    SusceptibilityKernel chi_e{ZeroKernel{}};
    SusceptibilityKernel chi_m{ZeroKernel{}};
};

namespace detail {

// Radius below which two would-be simple poles are one double pole to the
// root finder (the m = 2 cluster-merge radius).
inline double pole_collision_radius(cplx a, cplx b) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    cplx mid = 0.5 * (a + b);
    return std::max(1e-9, 50.0 * std::sqrt(eps)) * (1.0 + std::abs(mid));
}

inline void check_pole_collision(const std::vector<RootCluster>& poles, cplx extra,
                                 double omega_k, const char* who) {
    for (const auto& pm : poles) {
        if (std::abs(pm.location - extra) <= pole_collision_radius(pm.location, extra)) {
            std::ostringstream os;
            os << who << ": omega_k = " << omega_k << " collides with a pole at ("
               << pm.location.real() << ", " << pm.location.imag()
               << "); the residue sum assumes distinct poles";
            throw PoleOnAxis(os.str());
        }
    }
}

// SOR of num / (den_base * (s - extra)) with e^{+st}; the extra simple pole
// is appended to the base pole set.
inline cplx shifted_sor(const CPoly& num, const CPoly& den_base,
                        const std::vector<RootCluster>& base_poles, cplx extra, double t) {
    CPoly lin{-extra, cplx(1.0, 0.0)};
    CPoly den = poly_mul(den_base, lin);
    std::vector<RootCluster> poles = base_poles;
    poles.push_back({extra, 1});
    return sor_over(num, den, poles, t, +1);
}

// Rational-media backend: chi~_e = Ne/De, chi~_m = Nm/Dm cleared over the
// full (unreduced) characteristic polynomial
//   Pfull = s^2 (De+Ne) Dm + omega_q^2 (Dm-Nm) De.
// Removable factors shared with a numerator produce exact zero residues, so
// every kernel sums over the same pole set.
struct RationalMode {
    double omega_q = 0.0;
    int sigma = +1;
    std::vector<RootCluster> poles;    // Pfull roots
    std::vector<RootCluster> q_poles;  // De+Ne roots
    CPoly cP;                          // Pfull
    CPoly c_r;                         // s (De+Ne) Dm
    CPoly c_h;                         // De Dm
    CPoly c_sh;                        // s De Dm
    CPoly c_s2h;                       // s^2 De Dm
    CPoly c_z;                         // (s (De+Ne) - sigma i omega_q De) Dm
    CPoly c_zdot;                      // s c_z - Pfull, built without cancellation
    CPoly c_me;                        // (Dm-Nm) De
    CPoly c_mp;                        // (De+Ne) (sigma i s Dm + omega_q (Dm-Nm))
    CPoly c_De, c_DeNe;
};

inline std::shared_ptr<const RationalMode> build_rational_mode(const MediumModel& medium,
                                                               double omega_q, int sigma) {
    auto e = rational_chi(medium.chi_e);
    auto m = rational_chi(medium.chi_m);
    auto d = std::make_shared<RationalMode>();
    d->omega_q = omega_q;
    d->sigma = sigma;
    double wq2 = omega_q * omega_q;
    Poly s1{0.0, 1.0};
    Poly DeNe = poly_add(e.den, e.num);
    Poly DmNm = poly_add(m.den, poly_scale(m.num, -1.0));
    Poly Pfull = poly_add(poly_mul(Poly{0.0, 0.0, 1.0}, poly_mul(DeNe, m.den)),
                          poly_scale(poly_mul(DmNm, e.den), wq2));
    d->poles = compute_poles(Pfull).poles;
    d->q_poles = compute_poles(DeNe).poles;
    d->cP = to_cpoly(Pfull);
    Poly r_num = poly_mul(s1, poly_mul(DeNe, m.den));
    Poly h_num = poly_mul(e.den, m.den);
    d->c_r = to_cpoly(r_num);
    d->c_h = to_cpoly(h_num);
    d->c_sh = to_cpoly(poly_mul(s1, h_num));
    d->c_s2h = to_cpoly(poly_mul(s1, poly_mul(s1, h_num)));
    d->c_z = poly_add(to_cpoly(r_num),
                      poly_scale(to_cpoly(h_num), cplx(0.0, -sigma * omega_q)));
    d->c_me = to_cpoly(poly_mul(DmNm, e.den));
    // s Z~ - 1 has the leading terms of s c_z and Pfull cancel symbolically,
    // leaving -sigma i omega_q (s De Dm) - omega_q^2 (Dm-Nm) De
    d->c_zdot = poly_add(poly_scale(d->c_sh, cplx(0.0, -sigma * omega_q)),
                         poly_scale(d->c_me, cplx(-wq2, 0.0)));
    CPoly mp = poly_add(poly_scale(to_cpoly(poly_mul(s1, m.den)), cplx(0.0, sigma)),
                        to_cpoly(poly_scale(DmNm, omega_q)));
    d->c_mp = poly_mul(to_cpoly(DeNe), mp);
    d->c_De = to_cpoly(e.den);
    d->c_DeNe = to_cpoly(DeNe);
    return d;
}

inline void require_time(double t, const char* who) {
    if (!(t >= 0.0)) throw std::invalid_argument(std::string(who) + ": t must be >= 0");
}

inline void require_omega_k(double w, const char* who) {
    if (!(w > 0.0)) throw std::invalid_argument(std::string(who) + ": omega_k must be > 0");
}

// Non-rational backend: the characteristic function and chi~ evaluations are
// callables; kernels invert numerically. Values at t = 0 follow from the
// initial-value theorem and are returned exactly.
struct GeneralMode {
    double omega_q = 0.0;
    int sigma = +1;
    double scale = 1.0; // dominant oscillation rate hint for the contour
    LaplaceFunction chie{GeneralLaplace{}};
    LaplaceFunction chim{GeneralLaplace{}};

    cplxl P(cplxl s) const {
        cplxl wq2(omega_q * omega_q);
        return s * s + wq2 + s * s * eval_laplace(chie, s) - wq2 * eval_laplace(chim, s);
    }
};

inline cplx invert_general(const std::shared_ptr<const GeneralMode>& gm,
                           std::function<cplxl(cplxl)> fn, double extra_scale, double t) {
    GeneralLaplace F{std::move(fn), 0.0, std::max(gm->scale, extra_scale)};
    return invert_numeric(F, t);
}

} // namespace detail

// Builds the kernel handles for one mode. Rational media go through the
// residue path over the unreduced characteristic polynomial; box/tabulated
// media go through the numerical contour. zeta and eta shortcut to zero
// where the coupling amplitude vanishes (vacuum, lossless resonances), since
// the channel carries no weight there.
inline ModeKernels make_kernels(const MediumModel& medium, double omega_q, Branch branch) {
    if (!(omega_q > 0.0)) throw std::invalid_argument("make_kernels: omega_q must be > 0");
    int sigma = branch_sign(branch);

    ModeKernels K;
    K.omega_q = omega_q;
    K.branch = branch;
    K.medium_label = medium_label(medium);
    K.chi_e = medium.chi_e;
    K.chi_m = medium.chi_m;

    auto md = mode_denominator(medium, omega_q);
    if (const auto* r = std::get_if<RationalLaplace>(&md)) K.mode_poles = r->poles();

    SusceptibilityKernel ke = medium.chi_e, km = medium.chi_m;
    K.f = [ke](double w) { return std::sqrt(std::max(spectrum_value(ke, w), 0.0)); };
    K.g = [km](double w) { return std::sqrt(std::max(spectrum_value(km, w), 0.0)); };

    if (is_rational_kernel(medium.chi_e) && is_rational_kernel(medium.chi_m)) {
        auto d = detail::build_rational_mode(medium, omega_q, sigma);

        // Exact initial values short-circuit the t = 0 residue sums; the
        // limits follow from the initial value theorem, and this keeps the
        // two evaluation paths bit-identical at t = 0.
        auto plain = [d](const CPoly& num, double t, const char* who, cplx at0) {
            detail::require_time(t, who);
            if (t == 0.0) return at0;
            return detail::sor_over(num, d->cP, d->poles, t, +1);
        };
        auto shifted = [d](const CPoly& num, double omega_k, double t, const char* who,
                           cplx at0) {
            detail::require_omega_k(omega_k, who);
            detail::require_time(t, who);
            cplx extra(0.0, -d->sigma * omega_k);
            detail::check_pole_collision(d->poles, extra, omega_k, who);
            if (t == 0.0) return at0;
            return detail::shifted_sor(num, d->cP, d->poles, extra, t);
        };

        double wq = omega_q;
        int sg = sigma;
        K.Z = [d, plain](double t) { return plain(d->c_z, t, "kernel Z", cplx(1.0, 0.0)); };
        K.Z_dot = [d, plain, wq, sg](double t) {
            return plain(d->c_zdot, t, "kernel Z_dot", cplx(0.0, -sg * wq));
        };
        K.r = [d, plain](double t) { return plain(d->c_r, t, "kernel r", cplx(1.0, 0.0)); };
        K.h = [d, plain](double t) { return plain(d->c_h, t, "kernel h", cplx{}); };
        K.mom_photon = [d, plain, sg](double t) {
            return plain(d->c_mp, t, "kernel mom_photon", cplx(0.0, sg));
        };
        K.xi = [d, shifted](double w, double t) {
            return shifted(d->c_h, w, t, "kernel xi", cplx{});
        };
        K.xi_dot = [d, shifted](double w, double t) {
            return shifted(d->c_sh, w, t, "kernel xi_dot", cplx{});
        };
        K.xi_ddot = [d, shifted](double w, double t) {
            return shifted(d->c_s2h, w, t, "kernel xi_ddot", cplx(1.0, 0.0));
        };
        K.mom_electric = [d, shifted](double w, double t) {
            return shifted(d->c_me, w, t, "kernel mom_electric", cplx{});
        };
        K.mom_magnetic = [d, shifted](double w, double t) {
            return shifted(d->c_r, w, t, "kernel mom_magnetic", cplx{});
        };
        K.zeta = [f = K.f, xd = K.xi_dot](double w, double t) {
            double fv = f(w);
            if (fv == 0.0) {
                detail::require_omega_k(w, "kernel zeta");
                detail::require_time(t, "kernel zeta");
                return cplx{};
            }
            return fv * xd(w, t);
        };
        K.eta = [g = K.g, xi = K.xi](double w, double t) {
            double gv = g(w);
            if (gv == 0.0) {
                detail::require_omega_k(w, "kernel eta");
                detail::require_time(t, "kernel eta");
                return cplx{};
            }
            return gv * xi(w, t);
        };
        K.Q = [d](double w, double t) {
            detail::require_omega_k(w, "kernel Q");
            detail::require_time(t, "kernel Q");
            cplx extra(0.0, -d->sigma * w);
            detail::check_pole_collision(d->q_poles, extra, w, "kernel Q");
            if (t == 0.0) return cplx(1.0, 0.0);
            return detail::shifted_sor(d->c_De, d->c_DeNe, d->q_poles, extra, t);
        };
        return K;
    }

    auto gm = std::make_shared<detail::GeneralMode>();
    gm->omega_q = omega_q;
    gm->sigma = sigma;
    gm->chie = chi_laplace(medium.chi_e);
    gm->chim = chi_laplace(medium.chi_m);
    gm->scale = omega_q;
    for (const LaplaceFunction* fp : {&gm->chie, &gm->chim})
        if (const auto* g = std::get_if<GeneralLaplace>(fp))
            gm->scale = std::max(gm->scale, g->omega_scale);

    double wq = omega_q;
    K.Z = [gm, wq, sigma](double t) {
        detail::require_time(t, "kernel Z");
        if (t == 0.0) return cplx(1.0, 0.0);
        auto fn = [gm, wq, sigma](cplxl s) {
            return (s * (cplxl(1.0) + eval_laplace(gm->chie, s)) - cplxl(0.0, sigma * wq)) /
                   gm->P(s);
        };
        return detail::invert_general(gm, fn, 0.0, t);
    };
    K.Z_dot = [gm, wq, sigma](double t) {
        detail::require_time(t, "kernel Z_dot");
        if (t == 0.0) return cplx(0.0, -sigma * wq);
        auto fn = [gm, wq, sigma](cplxl s) {
            // s Z~ - 1 after cancelling s^2 (1 + chi_e) against P
            return (cplxl(0.0, -sigma * wq) * s -
                    cplxl(wq * wq) * (cplxl(1.0) - eval_laplace(gm->chim, s))) /
                   gm->P(s);
        };
        return detail::invert_general(gm, fn, 0.0, t);
    };
    K.r = [gm](double t) {
        detail::require_time(t, "kernel r");
        if (t == 0.0) return cplx(1.0, 0.0);
        auto fn = [gm](cplxl s) {
            return s * (cplxl(1.0) + eval_laplace(gm->chie, s)) / gm->P(s);
        };
        return detail::invert_general(gm, fn, 0.0, t);
    };
    K.h = [gm](double t) {
        detail::require_time(t, "kernel h");
        if (t == 0.0) return cplx{};
        auto fn = [gm](cplxl s) { return cplxl(1.0) / gm->P(s); };
        return detail::invert_general(gm, fn, 0.0, t);
    };
    K.mom_photon = [gm, wq, sigma](double t) {
        detail::require_time(t, "kernel mom_photon");
        if (t == 0.0) return cplx(0.0, static_cast<double>(sigma));
        auto fn = [gm, wq, sigma](cplxl s) {
            return (cplxl(1.0) + eval_laplace(gm->chie, s)) *
                   (cplxl(0.0, sigma) * s +
                    cplxl(wq) * (cplxl(1.0) - eval_laplace(gm->chim, s))) /
                   gm->P(s);
        };
        return detail::invert_general(gm, fn, 0.0, t);
    };
    auto shifted_gen = [gm](std::function<cplxl(cplxl)> top, double omega_k, double t,
                            const char* who) {
        detail::require_omega_k(omega_k, who);
        detail::require_time(t, who);
        if (t == 0.0) return cplx{};
        int sg = gm->sigma;
        auto fn = [gm, top = std::move(top), sg, omega_k](cplxl s) {
            return top(s) / (gm->P(s) * (s + cplxl(0.0, sg * omega_k)));
        };
        return detail::invert_general(gm, fn, omega_k, t);
    };
    K.xi = [shifted_gen](double w, double t) {
        return shifted_gen([](cplxl) { return cplxl(1.0); }, w, t, "kernel xi");
    };
    K.xi_dot = [shifted_gen](double w, double t) {
        return shifted_gen([](cplxl s) { return s; }, w, t, "kernel xi_dot");
    };
    K.xi_ddot = [gm, shifted_gen](double w, double t) {
        if (t == 0.0) {
            detail::require_omega_k(w, "kernel xi_ddot");
            return cplx(1.0, 0.0); // initial-value limit of s^3 / (P (s + i sg w))
        }
        return shifted_gen([](cplxl s) { return s * s; }, w, t, "kernel xi_ddot");
    };
    K.mom_electric = [gm, shifted_gen](double w, double t) {
        return shifted_gen(
            [gm](cplxl s) { return cplxl(1.0) - eval_laplace(gm->chim, s); }, w, t,
            "kernel mom_electric");
    };
    K.mom_magnetic = [gm, shifted_gen](double w, double t) {
        return shifted_gen(
            [gm](cplxl s) { return s * (cplxl(1.0) + eval_laplace(gm->chie, s)); }, w, t,
            "kernel mom_magnetic");
    };
    K.zeta = [f = K.f, xd = K.xi_dot](double w, double t) {
        double fv = f(w);
        if (fv == 0.0) {
            detail::require_omega_k(w, "kernel zeta");
            detail::require_time(t, "kernel zeta");
            return cplx{};
        }
        return fv * xd(w, t);
    };
    K.eta = [g = K.g, xi = K.xi](double w, double t) {
        double gv = g(w);
        if (gv == 0.0) {
            detail::require_omega_k(w, "kernel eta");
            detail::require_time(t, "kernel eta");
            return cplx{};
        }
        return gv * xi(w, t);
    };
    K.Q = [gm](double w, double t) {
        detail::require_omega_k(w, "kernel Q");
        detail::require_time(t, "kernel Q");
        if (t == 0.0) return cplx(1.0, 0.0);
        int sg = gm->sigma;
        auto fn = [gm, sg, w](cplxl s) {
            return cplxl(1.0) /
                   ((cplxl(1.0) + eval_laplace(gm->chie, s)) * (s + cplxl(0.0, sg * w)));
        };
        return detail::invert_general(gm, fn, w, t);
    };
    return K;
}

// Longitudinal response kernel Q(omega_k, t): inverse transform of
// 1 / ((1 + chi~_e(s)) (s + sigma i omega_k)). Standalone because it does
// not involve the mode frequency.
inline cplx kernel_Q(const MediumModel& medium, double omega_k, double t, Branch branch) {
    detail::require_omega_k(omega_k, "kernel_Q");
    detail::require_time(t, "kernel_Q");
    int sigma = branch_sign(branch);
    cplx extra(0.0, -sigma * omega_k);
    if (is_rational_kernel(medium.chi_e)) {
        auto e = detail::rational_chi(medium.chi_e);
        Poly DeNe = poly_add(e.den, e.num);
        auto ps = detail::compute_poles(DeNe);
        detail::check_pole_collision(ps.poles, extra, omega_k, "kernel_Q");
        return detail::shifted_sor(to_cpoly(e.den), to_cpoly(DeNe), ps.poles, extra, t);
    }
    if (t == 0.0) return cplx(1.0, 0.0);
    auto chie = chi_laplace(medium.chi_e);
    double scale = omega_k;
    if (const auto* g = std::get_if<GeneralLaplace>(&chie))
        scale = std::max(scale, g->omega_scale);
    auto fn = [chie, sigma, omega_k](cplxl s) {
        return cplxl(1.0) /
               ((cplxl(1.0) + eval_laplace(chie, s)) * (s + cplxl(0.0, sigma * omega_k)));
    };
    return invert_numeric(GeneralLaplace{fn, 0.0, scale}, t);
}

// Steady-state amplitude of the driven mode once every transient has decayed:
// the reciprocal of the characteristic function on the reservoir axis, with
// the electric / magnetic channel weightings attached.
struct AsymptoticAmplitudes {
    double omega_k = 0.0;
    double omega_q = 0.0;
    Branch branch = Branch::forward;
    cplx denominator; // omega_q^2 - omega_k^2 - omega_k^2 chi~_e - omega_q^2 chi~_m
    cplx amplitude;   // 1 / denominator
    cplx electric;    // amplitude * omega_k * f(omega_k)
    cplx magnetic;    // amplitude * omega_q * g(omega_k)
};

inline AsymptoticAmplitudes asymptotic_amplitude(const MediumModel& medium, double omega_k,
                                                 double omega_q, Branch branch) {
    if (!(omega_k > 0.0) || !(omega_q > 0.0))
        throw std::invalid_argument("asymptotic_amplitude: frequencies must be > 0");
    auto md = mode_denominator(medium, omega_q);
    const auto* rat = std::get_if<RationalLaplace>(&md);
    if (!rat)
        throw NotDissipative(
            "asymptotic_amplitude: stability is certified from the mode pole set, which "
            "needs rational susceptibilities (box/tabulated media are not certifiable)");
    if (!rat->poles().stable)
        throw NotDissipative(
            "asymptotic_amplitude: a mode pole has Re >= 0; the large-time limit does not "
            "exist");
    int sigma = branch_sign(branch);
    auto chie = chi_laplace(medium.chi_e);
    auto chim = chi_laplace(medium.chi_m);
    cplxl s(0.0L, static_cast<long double>(-sigma * omega_k));
    cplxl wk2(omega_k * omega_k), wq2(omega_q * omega_q);
    cplxl den = wq2 - wk2 - wk2 * eval_laplace(chie, s) - wq2 * eval_laplace(chim, s);

    AsymptoticAmplitudes out;
    out.omega_k = omega_k;
    out.omega_q = omega_q;
    out.branch = branch;
    out.denominator = cplx(static_cast<double>(den.real()), static_cast<double>(den.imag()));
    out.amplitude = cplx(1.0, 0.0) / out.denominator;
    out.electric =
        out.amplitude * omega_k * std::sqrt(std::max(spectrum_value(medium.chi_e, omega_k), 0.0));
    out.magnetic =
        out.amplitude * omega_q * std::sqrt(std::max(spectrum_value(medium.chi_m, omega_k), 0.0));
    return out;
}

// Pointwise identities between the kernels:
//   (a) Z = r - sigma i omega_q h,
//   (b) zeta = f * d(xi)/dt in elapsed time (the branch's time direction is
//       already folded into the kernels, so no extra sign appears here),
//   (c) Z(0) = 1 and dZ/dt(0) = -sigma i omega_q.
// max_residual is reported in units of each identity's tolerance (so the
// shared tolerance field is 1); params carries the raw worst residuals.
inline CheckReport kernel_consistency(const ModeKernels& k, const std::vector<double>& t_grid,
                                      const std::vector<double>& omega_k_grid) {
    if (t_grid.empty() || omega_k_grid.empty())
        throw std::invalid_argument("kernel_consistency: grids must be nonempty");
    const double tol_a = 1e-12, tol_b = 1e-6, tol_c = 1e-6;
    const double fd_b = 1e-5, fd_c = 1e-6;
    const double t_min_b = 1e-3; // central differences need room on both sides
    int sigma = branch_sign(k.branch);

    CheckReport rep;
    rep.check = "kernel-consistency";
    rep.medium = k.medium_label;
    rep.grid_n = omega_k_grid.size();
    rep.grid_omega_max = *std::max_element(omega_k_grid.begin(), omega_k_grid.end());

    double worst_a = 0.0;
    for (double t : t_grid) {
        cplx Z = k.Z(t);
        cplx want = k.r(t) - cplx(0.0, sigma * k.omega_q) * k.h(t);
        double res = std::abs(Z - want);
        worst_a = std::max(worst_a, res);
        rep.samples.push_back({t, std::abs(Z), std::abs(want), res});
    }

    double worst_b = 0.0;
    std::size_t skipped_collisions = 0;
    for (double w : omega_k_grid) {
        double fv = k.f(w);
        for (double t : t_grid) {
            if (t < t_min_b) continue;
            try {
                cplx z = k.zeta(w, t);
                if (fv == 0.0) {
                    worst_b = std::max(worst_b, std::abs(z));
                    continue;
                }
                cplx dx = (k.xi(w, t + fd_b) - k.xi(w, t - fd_b)) / (2.0 * fd_b);
                cplx want = fv * dx;
                double scale = std::max({std::abs(z), std::abs(want), 1e-12});
                worst_b = std::max(worst_b, std::abs(z - want) / scale);
            } catch (const PoleOnAxis&) {
                ++skipped_collisions;
                break;
            }
        }
    }

    cplx Z0 = k.Z(0.0);
    double worst_c = std::abs(Z0 - cplx(1.0, 0.0));
    cplx dZ = (-3.0 * Z0 + 4.0 * k.Z(fd_c) - k.Z(2.0 * fd_c)) / (2.0 * fd_c);
    worst_c = std::max(worst_c, std::abs(dZ - cplx(0.0, -sigma * k.omega_q)) / k.omega_q);

    rep.params["branch"] = k.branch == Branch::forward ? "forward" : "backward";
    rep.params["omega_q"] = k.omega_q;
    rep.params["worst_decomposition"] = worst_a;
    rep.params["worst_zeta_derivative"] = worst_b;
    rep.params["worst_initial_value"] = worst_c;
    rep.params["fd_step_zeta"] = fd_b;
    rep.params["fd_step_initial"] = fd_c;
    if (skipped_collisions > 0)
        rep.params["skipped_pole_collisions"] = skipped_collisions;

    rep.max_residual = std::max({worst_a / tol_a, worst_b / tol_b, worst_c / tol_c});
    rep.tolerance = 1.0;
    rep.pass = worst_a <= tol_a && worst_b <= tol_b && worst_c <= tol_c;
    return rep;
}

} // namespace qedk

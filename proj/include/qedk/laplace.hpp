#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qedk/errors.hpp"
#include "qedk/polynomial.hpp"

namespace qedk {

enum class Branch { forward, backward };

inline int branch_sign(Branch b) { return b == Branch::forward ? +1 : -1; }

struct PoleSet {
    std::vector<RootCluster> poles;
    bool stable = false;
};

namespace detail {

// Expand lead * prod (s - r_i)^{m_i} and compare against the stored
// denominator; the residual is the downstream-consumed conditioning metric.
inline double expansion_residual(const Poly& den, const std::vector<RootCluster>& poles) {
    std::vector<cplxl> acc{cplxl(1.0L)};
    for (const auto& pm : poles) {
        std::vector<cplxl> lin{cplxl(-pm.location), cplxl(1.0L)};
        for (int k = 0; k < pm.multiplicity; ++k) acc = poly_mul(acc, lin);
    }
    Poly d = poly_trim(den, 1e-300);
    int n = poly_degree(d);
    if (static_cast<int>(acc.size()) != n + 1) return std::numeric_limits<double>::infinity();
    long double lead = d[static_cast<std::size_t>(n)];
    long double scale = 0.0L;
    for (double v : d) scale = std::max(scale, std::abs((long double)v));
    long double worst = 0.0L;
    for (int i = 0; i <= n; ++i) {
        cplxl want = cplxl(i < static_cast<int>(d.size()) ? d[static_cast<std::size_t>(i)] : 0.0);
        cplxl got = acc[static_cast<std::size_t>(i)] * lead;
        worst = std::max(worst, std::abs(got - want));
    }
    return static_cast<double>(worst / scale);
}

inline PoleSet compute_poles(const Poly& den) {
    Poly d = poly_trim(den, 1e-300);
    if (poly_degree(d) < 1) return PoleSet{{}, true};
    auto clusters = merge_roots(poly_roots(d), &d);
    pair_conjugates(clusters);
    double res = expansion_residual(d, clusters);
    if (!(res <= 1e-8))
        throw IllConditioned("pole expansion residual " + std::to_string(res) +
                             " exceeds 1e-8; coefficients need higher precision");
    bool stable = true;
    for (const auto& pm : clusters) stable = stable && pm.location.real() < 0.0;
    return PoleSet{std::move(clusters), stable};
}

} // namespace detail

// Rational transfer function with real coefficients, ascending degree.
// Denominator roots are found at construction (companion matrix, cluster
// merge, conjugate pairing) so shared instances need no synchronization.
class RationalLaplace {
public:
    RationalLaplace(Poly num, Poly den)
        : num_(poly_trim(std::move(num), 0.0)), den_(poly_trim(std::move(den), 0.0)) {
        bool nonzero = false;
        for (double v : den_) nonzero = nonzero || v != 0.0;
        if (!nonzero) throw std::invalid_argument("RationalLaplace: zero denominator");
        poles_ = detail::compute_poles(den_);
    }

    const Poly& numerator() const { return num_; }
    const Poly& denominator() const { return den_; }
    const PoleSet& poles() const { return poles_; }

    cplx eval(cplx s) const { return poly_eval(num_, s) / poly_eval(den_, s); }
    cplxl eval(cplxl s) const {
        std::vector<long double> n(num_.begin(), num_.end()), d(den_.begin(), den_.end());
        return poly_eval(n, s) / poly_eval(d, s);
    }

private:
    Poly num_, den_;
    PoleSet poles_;
};

// Transfer function known only as a callable, analytic right of sigma0.
// omega_scale is a hint for the dominant oscillation frequency of the time
// function; contour parameters start from it and the convergence gates verify.
struct GeneralLaplace {
    std::function<cplxl(cplxl)> fn;
    double sigma0 = 0.0;
    double omega_scale = 1.0;

    cplxl eval(cplxl s) const { return fn(s); }
};

using LaplaceFunction = std::variant<RationalLaplace, GeneralLaplace>;

inline const PoleSet& find_poles(const RationalLaplace& f) {
    if (poly_degree(f.denominator()) < 1)
        throw std::invalid_argument("find_poles: denominator degree < 1");
    return f.poles();
}

namespace detail {

// Residue of num/den * e^{es * s * t} at one pole of multiplicity m: Taylor
// coefficients of both polynomials at the pole (dropping den's vanishing
// leading m), a short series division, then the (m-1)-term exponential rule.
inline cplxl residue_exp(const CPoly& num, const CPoly& den, const RootCluster& pm, double t,
                         int exp_sign) {
    auto dsh = taylor_shift(den, pm.location);
    dsh.erase(dsh.begin(), dsh.begin() + pm.multiplicity);
    auto nsh = taylor_shift(num, pm.location);
    auto g = series_div(nsh, dsh, pm.multiplicity);
    long double ts = exp_sign * (long double)t;
    cplxl acc{};
    long double fact = 1.0L;
    std::vector<long double> tpow(static_cast<std::size_t>(pm.multiplicity));
    long double tp = 1.0L;
    for (int j = 0; j < pm.multiplicity; ++j) {
        tpow[static_cast<std::size_t>(j)] = tp;
        tp *= ts;
    }
    std::vector<long double> fct(static_cast<std::size_t>(pm.multiplicity));
    for (int j = 0; j < pm.multiplicity; ++j) {
        fct[static_cast<std::size_t>(j)] = fact;
        fact *= (long double)(j + 1);
    }
    for (int k = 0; k < pm.multiplicity; ++k) {
        int j = pm.multiplicity - 1 - k;
        acc += g[static_cast<std::size_t>(k)] * tpow[static_cast<std::size_t>(j)] /
               fct[static_cast<std::size_t>(j)];
    }
    cplxl p(pm.location);
    return acc * std::exp(p * cplxl(ts));
}

inline cplx sor_over(const CPoly& num, const CPoly& den, const std::vector<RootCluster>& poles,
                     double t, int exp_sign) {
    cplxl total{};
    for (const auto& pm : poles) total += residue_exp(num, den, pm, t, exp_sign);
    return cplx(static_cast<double>(total.real()), static_cast<double>(total.imag()));
}

} // namespace detail

// Sum-of-residues inverse transform of a rational function: forward uses
// e^{+st}, backward e^{-st} (the lower-sign convention; callers pass t >= 0).
inline cplx invert_sor(const RationalLaplace& f, double t, Branch branch = Branch::forward) {
    if (t < 0.0) throw std::invalid_argument("invert_sor: t must be >= 0");
    if (poly_degree(f.denominator()) >= 1 && f.poles().poles.empty())
        throw PolesNotComputed("invert_sor: pole cache empty");
    return detail::sor_over(to_cpoly(f.numerator()), to_cpoly(f.denominator()), f.poles().poles,
                            t, branch == Branch::forward ? +1 : -1);
}

namespace detail {

constexpr double kEpsD = std::numeric_limits<double>::epsilon();

struct TalbotResult {
    cplx value;
    bool ok;
    double disagree;
    double rho;
};

// Fixed-Talbot evaluation over the full contour theta in (-pi, pi). The
// usual half-contour + Re[...] form assumes a real time function; the mode
// kernels here are complex, so both wings are summed explicitly.
inline TalbotResult talbot_full(const GeneralLaplace& F, double t, double gate = 1e-9) {
    const double pi = std::numbers::pi;
    int M0 = std::max(32, (int)std::ceil(10.0 * t * std::max(F.sigma0, 0.0)));
    double r = std::max(2.0 * M0 / (5.0 * t), (2.0 / pi) * 1.3 * F.omega_scale);

    auto run = [&](int M, double& peak) -> cplxl {
        cplxl total{};
        long double pk = 0.0L;
        bool finite = true;
        for (int j = 0; j < 2 * M; ++j) {
            long double th = -pi + (j + 0.5L) * pi / M;
            long double cth = std::cos(th), sth = std::sin(th);
            long double cot = cth / sth;
            long double sg = th + (th * cot - 1.0L) * cot;
            cplxl s = cplxl((long double)r) * cplxl(th) * (cplxl(cot) + cplxl(0.0L, 1.0L));
            cplxl term = std::exp(s * cplxl((long double)t)) * F.eval(s) *
                         (cplxl(1.0L) + cplxl(0.0L, 1.0L) * cplxl(sg));
            if (!std::isfinite((double)term.real()) || !std::isfinite((double)term.imag()))
                finite = false;
            total += term;
            pk = std::max(pk, std::abs(term));
        }
        peak = finite ? (double)(pk * (long double)r / (2.0L * M)) : std::numeric_limits<double>::infinity();
        if (!finite) return cplxl(std::numeric_limits<long double>::quiet_NaN());
        return cplxl((long double)r / (2.0L * M)) * total;
    };

    double pk1 = 0, pk2 = 0;
    cplxl f1 = run(M0, pk1);
    cplxl f2 = run(2 * M0, pk2);
    cplx v2((double)f2.real(), (double)f2.imag());
    double scale = std::max(std::abs(v2), 1e-300);
    double disagree = (double)std::abs(f1 - f2) / scale;
    double rho = kEpsD * std::max(pk1, pk2) / scale;
    bool finite = std::isfinite(v2.real()) && std::isfinite(v2.imag());
    // Both runs cancelling down to the round-off floor certifies a zero of
    // the time function at the method's absolute resolution.
    double noise = kEpsD * std::max(pk1, pk2);
    bool ok = finite && ((disagree <= gate && rho <= gate) ||
                         ((double)std::abs(f1) <= 1e3 * noise && std::abs(v2) <= 1e3 * noise));
    return {v2, ok, disagree, rho};
}

struct BromwichResult {
    cplx value;
    bool ok;
    double disagree;
    double noise_floor;
};

// Two-sided Bromwich line sum with Euler (binomial) acceleration; the k and
// -k terms are paired so complex time functions come out right.
inline BromwichResult bromwich_euler(const GeneralLaplace& F, double t, double gate = 3e-9) {
    const double pi = std::numbers::pi;
    const double A = 21.0;
    const int Mb = 16;
    long double a = A / (2.0L * t);
    int K0 = std::max(60, (int)std::ceil(1.6 * F.omega_scale * t / pi));

    long double peak_partial = 0.0L;
    auto run = [&](int K) -> cplxl {
        std::vector<cplxl> partial;
        partial.reserve(static_cast<std::size_t>(K) + 1);
        cplxl s0 = F.eval(cplxl(a, 0.0L));
        partial.push_back(s0);
        cplxl acc = s0;
        long double sgn = -1.0L;
        for (int k = 1; k <= K; ++k) {
            long double w = k * (long double)pi / t;
            cplxl term = F.eval(cplxl(a, w)) + F.eval(cplxl(a, -w));
            acc += cplxl(sgn) * term;
            partial.push_back(acc);
            sgn = -sgn;
        }
        for (const auto& p : partial) peak_partial = std::max(peak_partial, std::abs(p));
        // binomial average of the last Mb+1 partial sums
        cplxl avg{};
        long double binom = 1.0L;
        long double norm = std::pow(2.0L, (long double)Mb);
        for (int j = 0; j <= Mb; ++j) {
            avg += cplxl(binom) * partial[static_cast<std::size_t>(K - Mb + j)];
            binom = binom * (long double)(Mb - j) / (long double)(j + 1);
        }
        avg /= cplxl(norm);
        return std::exp(cplxl(A / 2.0L)) / cplxl(2.0L * t) * avg;
    };

    cplxl f1 = run(K0);
    cplxl f2 = run(2 * K0);
    cplx v2((double)f2.real(), (double)f2.imag());
    double scale = std::max(std::abs(v2), 1e-300);
    double disagree = (double)std::abs(f1 - f2) / scale;
    // Values at or below the sum's round-off resolution are zero to within
    // the method's absolute accuracy; a relative gate cannot apply there.
    double noise = kEpsD * (double)(std::exp(A / 2.0L) / (2.0L * t) * peak_partial);
    bool finite = std::isfinite(v2.real()) && std::isfinite(v2.imag());
    bool ok = finite && (disagree <= gate || std::abs(v2) <= 1e3 * noise);
    return {v2, ok, disagree, noise};
}

} // namespace detail

// Numerical inverse transform for non-rational kernels: fixed-Talbot contour
// with doubled-node and round-off gates, falling back to an Euler-accelerated
// Bromwich sum (which also covers delay factors e^{-s Delta} that blow up on
// the Talbot contour's left arms).
inline cplx invert_numeric(const GeneralLaplace& f, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("invert_numeric: t must be > 0");
    if (!std::isfinite(f.sigma0)) throw std::invalid_argument("invert_numeric: sigma0 not finite");
    auto tb = detail::talbot_full(f, t);
    if (tb.ok) return tb.value;
    auto bw = detail::bromwich_euler(f, t);
    if (bw.ok) return bw.value;
    if (bw.disagree > 1e-6 && std::abs(bw.value) > 1e3 * bw.noise_floor)
        throw ContourDivergence("invert_numeric: doubling the node count changes the result by " +
                                std::to_string(bw.disagree) + " relative (> 1e-6) at t = " +
                                std::to_string(t));
    return bw.value;
}

} // namespace qedk

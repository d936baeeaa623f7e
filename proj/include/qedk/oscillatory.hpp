#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace qedk {

namespace detail {

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (!std::isfinite(whole + left + right)) return whole;
    if (depth <= 0 ||
        std::abs(left + right - whole) <
            15.0 * std::max(tol, 1e-13 * (std::abs(left) + std::abs(right))))
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

} // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 28) {
    double fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

struct SineTransformResult {
    double value = 0.0;
    bool ok = false;
};

// I(w) = int_0^inf g(t) sin(w t) dt for decaying (or compactly supported)
// kernels: half-period chunks with adaptive Simpson inside, Euler (iterated
// pairwise) acceleration of the alternating chunk series, horizon doubling
// until the estimate stabilizes. Breakpoints split chunks at known kernel
// discontinuities, with interior cut points nudged off by 1e-13 so only
// one-sided limits are sampled. A second pass with tightened chunk tolerance
// runs when the result sits far below the leading-chunk scale (cancellation).
inline SineTransformResult sine_transform(const std::function<double(double)>& g, double w,
                                          double tol = 1e-12,
                                          const std::vector<double>& breakpoints = {}, int H0 = 32,
                                          int mtail = 24) {
    const double P = std::numbers::pi / w;
    double chunk_tol = tol * std::max(1.0, w) / 4.0;

    auto integrand = [&](double t) { return g(t) * std::sin(w * t); };

    auto chunk = [&](int k) {
        double a = k * P, b = (k + 1) * P;
        std::vector<double> cuts{a};
        for (double c : breakpoints)
            if (a < c && c < b) cuts.push_back(c);
        std::sort(cuts.begin() + 1, cuts.end());
        cuts.push_back(b);
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            double lo = cuts[i], hi = cuts[i + 1];
            if (i > 0) lo += 1e-13 * (1.0 + std::abs(lo));
            if (i + 2 < cuts.size()) hi -= 1e-13 * (1.0 + std::abs(hi));
            total += adaptive_simpson(integrand, lo, hi, chunk_tol);
        }
        return total;
    };

    std::vector<double> cache;
    auto chunks_upto = [&](int H) {
        while (static_cast<int>(cache.size()) < H) cache.push_back(chunk(static_cast<int>(cache.size())));
    };

    auto euler_tail = [](const double* c, int n) {
        std::vector<double> row(static_cast<std::size_t>(n));
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            s += c[i];
            row[static_cast<std::size_t>(i)] = s;
        }
        while (row.size() > 1) {
            for (std::size_t i = 0; i + 1 < row.size(); ++i) row[i] = 0.5 * (row[i] + row[i + 1]);
            row.pop_back();
        }
        return row[0];
    };

    auto estimate = [&](int H) {
        chunks_upto(H);
        double head = 0.0;
        for (int k = 0; k < H - mtail; ++k) head += cache[static_cast<std::size_t>(k)];
        return head + euler_tail(cache.data() + (H - mtail), mtail);
    };

    auto exploding = [&](int H) {
        double last = 0.0;
        for (int k = std::max(0, H - 4); k < H; ++k)
            last = std::max(last, std::abs(cache[static_cast<std::size_t>(k)]));
        return last > 1e6 * (std::abs(cache[0]) + 1e-300);
    };

    auto run = [&](int H, double& out) -> bool {
        double prev = estimate(H);
        for (int pass = 0; pass < 6; ++pass) {
            H *= 2;
            chunks_upto(H);
            bool finite = true;
            for (int k = 0; k < H; ++k) finite = finite && std::isfinite(cache[static_cast<std::size_t>(k)]);
            if (!finite || exploding(H)) {
                out = prev;
                return false;
            }
            double cur = estimate(H);
            if (std::abs(cur - prev) <= 1e-10 * std::max(std::abs(cur), 1e-300)) {
                out = cur;
                return true;
            }
            prev = cur;
        }
        out = prev;
        return false;
    };

    chunks_upto(H0);
    if (exploding(H0)) return {0.0, false};
    double val = 0.0;
    bool ok = run(H0, val);
    int Hend = static_cast<int>(cache.size());
    double scale = 0.0;
    for (int k = 0; k < std::min(8, Hend); ++k)
        scale = std::max(scale, std::abs(cache[static_cast<std::size_t>(k)]));
    double need = 1e-10 * std::max(std::abs(val), 1e-300) / std::max(Hend, 64);
    if (scale > 0.0 && std::abs(val) < 1e-4 * scale && need < chunk_tol) {
        chunk_tol = std::max(need, 5e-18 * scale);
        cache.clear();
        chunks_upto(H0);
        if (exploding(H0)) return {0.0, false};
        ok = run(H0, val);
    }
    return {val, ok};
}

} // namespace qedk

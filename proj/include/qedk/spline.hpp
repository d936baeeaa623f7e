#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qedk {

// Not-a-knot cubic spline. Stored in moments form (second derivatives at
// the knots); the not-a-knot end rows are eliminated into the first and
// last interior equations so a plain tridiagonal solve suffices.
class CubicSpline {
public:
  CubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
      throw std::invalid_argument("CubicSpline: need >= 2 matching (x, y) points");
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (!(x_[i + 1] > x_[i]))
        throw std::invalid_argument("CubicSpline: x must be strictly increasing");

    m_.assign(n, 0.0);
    if (n == 2) return;

    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];

    if (n == 3) {
      // both knots inactive: single parabola through the three points
      double r = 6.0 * ((y_[2] - y_[1]) / h[1] - (y_[1] - y_[0]) / h[0]);
      double m = r / (3.0 * (h[0] + h[1]));
      m_[0] = m_[1] = m_[2] = m;
      return;
    }

    // unknowns M_1 .. M_{n-2}; M_0 and M_{n-1} recovered from the
    // third-derivative continuity conditions at x_1 and x_{n-2}
    const std::size_t k = n - 2;
    std::vector<double> sub(k, 0.0), diag(k, 0.0), sup(k, 0.0), rhs(k, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      std::size_t j = i - 1;
      sub[j] = h[i - 1];
      diag[j] = 2.0 * (h[i - 1] + h[i]);
      sup[j] = h[i];
      rhs[j] = 6.0 * ((y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1]);
    }
    diag[0] += h[0] + h[0] * h[0] / h[1];
    sup[0] -= h[0] * h[0] / h[1];
    diag[k - 1] += h[n - 2] + h[n - 2] * h[n - 2] / h[n - 3];
    sub[k - 1] -= h[n - 2] * h[n - 2] / h[n - 3];

    for (std::size_t j = 1; j < k; ++j) {
      double w = sub[j] / diag[j - 1];
      diag[j] -= w * sup[j - 1];
      rhs[j] -= w * rhs[j - 1];
    }
    m_[n - 2] = rhs[k - 1] / diag[k - 1];
    for (std::size_t j = k - 1; j-- > 0;)
      m_[j + 1] = (rhs[j] - sup[j] * m_[j + 2]) / diag[j];

    m_[0] = m_[1] + (m_[1] - m_[2]) * h[0] / h[1];
    m_[n - 1] = m_[n - 2] + (m_[n - 2] - m_[n - 3]) * h[n - 2] / h[n - 3];
  }

  // evaluate on a known cell (no search); xq may sit anywhere, the cell's
  // cubic is extended as-is
  double eval_cell(std::size_t i, double xq) const {
    double h = x_[i + 1] - x_[i];
    double a = (x_[i + 1] - xq) / h;
    double b = (xq - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
  }

  double operator()(double xq) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), xq);
    std::size_t i = (it == x_.begin()) ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);
    return eval_cell(i, xq);
  }

  std::size_t cells() const { return x_.size() - 1; }

private:
  std::vector<double> x_, y_, m_;
};

} // namespace qedk

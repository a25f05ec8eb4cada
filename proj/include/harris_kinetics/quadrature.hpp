#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "error.hpp"

namespace hk::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights mu0 * (first component)^2.
inline Rule golub_welsch(const std::vector<double>& diag, const std::vector<double>& off, double mu0) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) J(i, i) = diag[i];
  for (int i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = off[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = es.eigenvalues()(i);
    const double c = es.eigenvectors()(0, i);
    r.weights[i] = mu0 * c * c;
  }
  return r;
}

template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  const double floor = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(left + right);
  if (depth <= 0 || std::abs(delta) <= std::max(15.0 * tol, floor))
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Gauss-Legendre rule on [-1, 1].
inline Rule gauss_legendre(int n) {
  require(n >= 1, "quadrature order must be positive");
  std::vector<double> diag(n, 0.0), off(n > 1 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  return detail::golub_welsch(diag, off, 2.0);
}

// Gauss-Legendre rule mapped to [a, b].
inline Rule gauss_legendre(int n, double a, double b) {
  Rule r = gauss_legendre(n);
  const double h = 0.5 * (b - a), c = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = c + h * r.nodes[i];
    r.weights[i] *= h;
  }
  return r;
}

// Gauss-Hermite rule for expectations under the standard normal law.
inline Rule gauss_hermite(int n) {
  require(n >= 1, "quadrature order must be positive");
  std::vector<double> diag(n, 0.0), off(n > 1 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(static_cast<double>(k));
  return detail::golub_welsch(diag, off, 1.0);
}

// Adaptive Simpson with absolute tolerance tol and a roundoff floor.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 50) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Composite Simpson on n (even) equal subintervals given node values.
inline double composite_simpson(const std::vector<double>& y, double h) {
  const std::size_t n = y.size() - 1;
  require(n >= 2 && n % 2 == 0, "composite Simpson needs an even number of subintervals");
  double s = y.front() + y.back();
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * y[i];
  return s * h / 3.0;
}

}  // namespace hk::quad

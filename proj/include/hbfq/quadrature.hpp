#pragma once

#include <cmath>

namespace hbfq {

struct QuadratureResult {
  double value = 0.0;
  /// Richardson estimate of the absolute error, summed over accepted panels.
  double error = 0.0;
  long evaluations = 0;
};

namespace detail {

template <class F>
void simpson_step(const F& f, double lo, double hi, double f_lo, double f_mid, double f_hi, double whole,
                  double tol, int level, int max_depth, QuadratureResult& acc) {
  const double mid = 0.5 * (lo + hi);
  const double lm = 0.5 * (lo + mid);
  const double rm = 0.5 * (mid + hi);
  const double f_lm = f(lm);
  const double f_rm = f(rm);
  acc.evaluations += 2;
  const double h = hi - lo;
  const double left = h / 12.0 * (f_lo + 4.0 * f_lm + f_mid);
  const double right = h / 12.0 * (f_mid + 4.0 * f_rm + f_hi);
  const double delta = left + right - whole;
  constexpr int kMinLevel = 3;
  const bool converged = level >= kMinLevel && std::abs(delta) <= 15.0 * tol;
  if (converged || level >= max_depth || mid <= lo || mid >= hi) {
    acc.value += left + right + delta / 15.0;
    acc.error += std::abs(delta) / 15.0;
    return;
  }
  simpson_step(f, lo, mid, f_lo, f_lm, f_mid, left, 0.5 * tol, level + 1, max_depth, acc);
  simpson_step(f, mid, hi, f_mid, f_rm, f_hi, right, 0.5 * tol, level + 1, max_depth, acc);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [lo, hi] to absolute tolerance `tol`.
/// The integrand must be smooth on the open interval; split at known kinks.
template <class F>
QuadratureResult adaptive_simpson(const F& f, double lo, double hi, double tol, int max_depth = 50) {
  QuadratureResult acc;
  if (!(hi > lo)) return acc;
  const double mid = 0.5 * (lo + hi);
  const double f_lo = f(lo);
  const double f_mid = f(mid);
  const double f_hi = f(hi);
  acc.evaluations = 3;
  const double whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
  detail::simpson_step(f, lo, hi, f_lo, f_mid, f_hi, whole, tol, 0, max_depth, acc);
  return acc;
}

}  // namespace hbfq

#pragma once

#include <vfb/types.hpp>

#include <algorithm>
#include <cmath>

namespace vfb {

/// Thomas algorithm for sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i].
/// sub[0] and sup[n-1] are ignored. Assumes diagonal dominance (no pivoting).
template <typename Scalar>
VectorX<Scalar> solve_tridiagonal(const VectorX<Scalar>& sub, const VectorX<Scalar>& diag,
                                  const VectorX<Scalar>& sup, const VectorX<Scalar>& rhs) {
  const Eigen::Index n = diag.size();
  VectorX<Scalar> c_prime(n), x(n);
  Scalar denom = diag[0];
  c_prime[0] = n > 1 ? sup[0] / denom : Scalar(0);
  x[0] = rhs[0] / denom;
  for (Eigen::Index i = 1; i < n; ++i) {
    denom = diag[i] - sub[i] * c_prime[i - 1];
    c_prime[i] = i + 1 < n ? sup[i] / denom : Scalar(0);
    x[i] = (rhs[i] - sub[i] * x[i - 1]) / denom;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) x[i] -= c_prime[i] * x[i + 1];
  return x;
}

/// Linear interpolation on the uniform grid x_j = x0 + j*dx, j = 0..size-1.
/// Values outside the grid are clamped to the end samples.
inline double interp_uniform(const Vector& values, double x0, double dx, double x) {
  const double s = (x - x0) / dx;
  const Eigen::Index last = values.size() - 1;
  if (s <= 0) return values[0];
  if (s >= static_cast<double>(last)) return values[last];
  const Eigen::Index j = static_cast<Eigen::Index>(s);
  const double frac = s - static_cast<double>(j);
  return values[j] + frac * (values[j + 1] - values[j]);
}

}  // namespace vfb

#pragma once

// Principal eigenvalue of the coupled Dirichlet problem
//
//   d phi'' + a11 phi + a12 psi = lambda phi,   a21 phi + a22 psi = lambda psi,
//   phi(l1) = phi(l2) = 0,
//
// with a12, a21 > 0 and a11, a22 < 0. The scalar Dirichlet eigenvalue
// rho1 = a11 - d pi^2 / (l2 - l1)^2 reduces the system to a 2x2 quadratic.

#include <vfb/model.hpp>
#include <vfb/types.hpp>

#include <cmath>
#include <numbers>
#include <optional>

namespace vfb {

template <typename Scalar>
struct BasicEigenProblem {
  Scalar d{1};
  Scalar a11{-1}, a12{1}, a21{1}, a22{-1};
  Scalar l1{-1}, l2{1};

  Scalar length() const { return l2 - l1; }

  void validate() const {
    if (!(d > Scalar(0))) throw Error(ErrorKind::validation, "eigen problem: d must be positive");
    if (!(a12 > Scalar(0)) || !(a21 > Scalar(0)))
      throw Error(ErrorKind::validation, "eigen problem: a12 and a21 must be positive");
    if (!(a11 < Scalar(0)) || !(a22 < Scalar(0)))
      throw Error(ErrorKind::validation, "eigen problem: a11 and a22 must be negative");
    if (!(l2 > l1)) throw Error(ErrorKind::validation, "eigen problem: need l1 < l2");
  }
};

using EigenProblem = BasicEigenProblem<double>;

/// cos(pi (2x - l2 - l1) / (2 (l2 - l1))): positive on (l1, l2), zero at both ends.
template <typename Scalar>
struct CosineMode {
  Scalar l1{-1}, l2{1};
  Scalar operator()(Scalar x) const {
    using std::cos;
    return cos(std::numbers::pi_v<Scalar> * (Scalar(2) * x - l2 - l1) / (Scalar(2) * (l2 - l1)));
  }
};

template <typename Scalar>
struct BasicEigenResult {
  Scalar rho1{};
  Scalar lambda1{};
  Scalar gamma_coeff{};  // a11 - a12 a21 / a22
  CosineMode<Scalar> phi;
  Scalar psi_scale{};    // psi = psi_scale * phi = a21 phi / (lambda1 - a22)

  Scalar psi(Scalar x) const { return psi_scale * phi(x); }
};

using EigenResult = BasicEigenResult<double>;

template <typename Scalar>
BasicEigenResult<Scalar> principal_eigenvalue(const BasicEigenProblem<Scalar>& ep) {
  using std::sqrt;
  ep.validate();
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar L = ep.length();
  BasicEigenResult<Scalar> r;
  r.rho1 = ep.a11 - ep.d * pi * pi / (L * L);
  r.gamma_coeff = ep.a11 - ep.a12 * ep.a21 / ep.a22;
  const Scalar diff = r.rho1 - ep.a22;
  const Scalar coupling = Scalar(4) * ep.a12 * ep.a21;
  const Scalar root = sqrt(diff * diff + coupling);
  const Scalar sum = r.rho1 + ep.a22;
  // Larger root of x^2 - sum x + (rho1 a22 - a12 a21). When sum < 0 the
  // smaller root is free of cancellation and Vieta gives the larger one.
  if (sum < Scalar(0)) {
    const Scalar lower = (sum - root) / Scalar(2);
    r.lambda1 = (r.rho1 * ep.a22 - ep.a12 * ep.a21) / lower;
  } else {
    r.lambda1 = (sum + root) / Scalar(2);
  }
  r.phi = CosineMode<Scalar>{ep.l1, ep.l2};
  r.psi_scale = ep.a21 / (r.lambda1 - ep.a22);
  return r;
}

/// Coefficients of the linearisation around a frozen uninfected level m:
/// a11 = -q, a12 = k, a21 = b m, a22 = -c.
template <typename Scalar>
BasicEigenProblem<Scalar> eigen_problem_for_model(Scalar m, const BasicModelParams<Scalar>& p, Scalar l1, Scalar l2) {
  if (!(m > Scalar(0))) throw Error(ErrorKind::validation, "eigen_for_model: m must be positive");
  BasicEigenProblem<Scalar> ep;
  ep.d = p.d();
  ep.a11 = -p.q();
  ep.a12 = p.k();
  ep.a21 = p.b() * m;
  ep.a22 = -p.c();
  ep.l1 = l1;
  ep.l2 = l2;
  return ep;
}

template <typename Scalar>
BasicEigenResult<Scalar> eigen_for_model(Scalar m, const BasicModelParams<Scalar>& p, Scalar l1, Scalar l2) {
  return principal_eigenvalue(eigen_problem_for_model(m, p, l1, l2));
}

template <typename Scalar>
struct BasicThresholds {
  Scalar gamma{};
  std::optional<Scalar> d_star;  // critical diffusion for the fixed interval
  std::optional<Scalar> l_star;  // critical interval length for the fixed d
};

using Thresholds = BasicThresholds<double>;

template <typename Scalar>
BasicThresholds<Scalar> thresholds(const BasicEigenProblem<Scalar>& ep) {
  using std::sqrt;
  ep.validate();
  const Scalar pi = std::numbers::pi_v<Scalar>;
  BasicThresholds<Scalar> t;
  t.gamma = ep.a11 - ep.a12 * ep.a21 / ep.a22;
  if (t.gamma > Scalar(0)) {
    t.d_star = t.gamma * ep.length() * ep.length() / (pi * pi);
    t.l_star = pi * sqrt(ep.d / t.gamma);
  }
  return t;
}

/// |lambda1| below this is reported as "at threshold".
inline constexpr double kThresholdBand = 1e-10;

struct PhiTilde {
  double phi_t;
  double lambda1;
};

/// Amplitude ratio of the decaying supersolution on (-l, l) with m = theta/a.
/// Requires lambda1 < 0, i.e. 2l below the critical width.
PhiTilde phi_tilde(const ModelParams& p, double l);

/// Rightmost eigenvalue of the second-order finite-difference discretisation
/// of the coupled problem on n interior nodes, found by shifted inverse
/// iteration on the assembled (2n)x(2n) operator.
double eigen_oracle(const EigenProblem& ep, int n);

}  // namespace vfb

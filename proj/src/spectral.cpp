#include <vfb/numerics.hpp>
#include <vfb/spectral.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace vfb {

PhiTilde phi_tilde(const ModelParams& p, double l) {
  if (!(l > 0)) throw Error(ErrorKind::validation, "phi_tilde: l must be positive");
  const EigenResult er = eigen_for_model(p.theta() / p.a(), p, -l, l);
  if (!(er.lambda1 < 0))
    throw Error(ErrorKind::precondition_violated, "phi_tilde: needs lambda1 < 0 on (-l, l) (2l below critical width)");
  PhiTilde out;
  out.lambda1 = er.lambda1;
  out.phi_t = (p.c() + er.lambda1) * p.a() / (p.b() * p.theta());

  // first amplitude relation: -d (pi/2l)^2 phi - q phi + k = lambda1 phi
  const double s = std::numbers::pi / (2 * l);
  const double lhs = -p.d() * s * s * out.phi_t - p.q() * out.phi_t + p.k();
  const double rhs = er.lambda1 * out.phi_t;
  const double scale = std::max({std::abs(lhs), std::abs(rhs), p.k()});
  if (std::abs(lhs - rhs) > 1e-10 * scale)
    throw Error(ErrorKind::non_convergence, "phi_tilde: amplitude relations inconsistent");
  return out;
}

namespace {

// (A - sigma I) x = b for the block operator [T + a11, a12; a21, a22] with
// T the Dirichlet second-difference matrix scaled by d/h^2. The psi block is
// diagonal, so it is eliminated and a tridiagonal system remains for phi.
void shifted_solve(const EigenProblem& ep, double h, double sigma, const Vector& b_phi, const Vector& b_psi,
                   Vector& phi, Vector& psi) {
  const Eigen::Index n = b_phi.size();
  const double dd = ep.d / (h * h);
  const double s22 = ep.a22 - sigma;
  const double schur = ep.a11 - sigma - ep.a12 * ep.a21 / s22;
  Vector sub = Vector::Constant(n, dd);
  Vector sup = Vector::Constant(n, dd);
  Vector diag = Vector::Constant(n, -2 * dd + schur);
  Vector rhs = b_phi - (ep.a12 / s22) * b_psi;
  phi = solve_tridiagonal(sub, diag, sup, rhs);
  psi = (b_psi - ep.a21 * phi) / s22;
}

}  // namespace

double eigen_oracle(const EigenProblem& ep, int n) {
  ep.validate();
  if (n < 16) throw Error(ErrorKind::validation, "eigen_oracle: need n >= 16 interior nodes");
  const double h = ep.length() / (n + 1);
  // W = diag(1, a12/a21) makes W A symmetric; W-inner products give a
  // Rayleigh quotient with quadratic accuracy.
  const double w_psi = ep.a12 / ep.a21;
  const auto wdot = [w_psi](const Vector& p1, const Vector& s1, const Vector& p2, const Vector& s2) {
    return p1.dot(p2) + w_psi * s1.dot(s2);
  };

  Vector phi(n), psi(n);
  for (int i = 0; i < n; ++i) phi[i] = static_cast<double>(i + 1) * (n - i);
  psi = phi;

  // Gershgorin bound puts the first shift strictly above the spectrum
  double sigma = std::max(ep.a11 + ep.a12, ep.a21 + ep.a22) + 1.0;
  double lambda = sigma;
  // eigenvalues of the discrete operator are only determined to about
  // eps * ||A||, and ||A|| grows like 4 d / h^2
  const double norm = 4 * ep.d / (h * h) + std::abs(ep.a11) + std::abs(ep.a12) + std::abs(ep.a21) + std::abs(ep.a22);
  const double tol = 64 * std::numeric_limits<double>::epsilon() * norm;
  constexpr int kWarmup = 40;
  constexpr int kMaxIter = 400;
  int settled = 0;
  for (int it = 0; it < kMaxIter; ++it) {
    Vector nphi, npsi;
    shifted_solve(ep, h, sigma, phi, psi, nphi, npsi);
    // (A - sigma)^{-1} x ~ x / (lambda - sigma) along the dominant eigenvector
    const double next = sigma + wdot(phi, psi, phi, psi) / wdot(phi, psi, nphi, npsi);
    const double vnorm = std::sqrt(wdot(nphi, npsi, nphi, npsi));
    if (!std::isfinite(vnorm) || vnorm == 0.0 || !std::isfinite(next))
      throw Error(ErrorKind::iteration_failure, "eigen_oracle: breakdown");
    phi = nphi / vnorm;
    psi = npsi / vnorm;
    if (phi.sum() < 0) {
      phi = -phi;
      psi = -psi;
    }
    const double change = std::abs(next - lambda);
    lambda = next;
    if (it >= kWarmup) {
      settled = change <= tol ? settled + 1 : 0;
      if (settled >= 2) break;
      // shift just above the current estimate; the offset keeps the solve
      // away from exact singularity
      sigma = lambda + 1e-6 * std::max(1.0, std::abs(lambda));
    }
    if (it + 1 == kMaxIter) throw Error(ErrorKind::iteration_failure, "eigen_oracle: no convergence");
  }

  // principal eigenvector must be positive in both components
  if (phi.minCoeff() <= 0 || psi.minCoeff() <= 0)
    throw Error(ErrorKind::iteration_failure, "eigen_oracle: converged to a non-principal eigenvector");
  return lambda;
}

}  // namespace vfb

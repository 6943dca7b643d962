#include <vfb/numerics.hpp>
#include <vfb/spectral.hpp>
#include <vfb/steady.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

namespace vfb {

namespace {

struct Discretisation {
  double m, l, dx;
  int n;            // total nodes including the two boundary nodes
  double d, q, kbm_c, shift;
  double boundary;  // Dirichlet value at both ends
};

double source(const Discretisation& D, double w) { return D.kbm_c * w / ((1 + w) * (1 + w)); }

struct IterationResult {
  Vector w;
  long sweeps = 0;
  bool converged = false;
  bool collapsed = false;
  bool monotone = true;
};

// One step of (-d D2 + q + K) w_new = G(w) + K w; direction +1 expects a
// nondecreasing sequence, -1 nonincreasing.
IterationResult iterate(const Discretisation& D, Vector w, int direction, const BvpOptions& opts, double level) {
  const int ni = D.n - 2;
  const double dd = D.d / (D.dx * D.dx);
  const Vector sub = Vector::Constant(ni, -dd);
  const Vector sup = Vector::Constant(ni, -dd);
  const Vector diag = Vector::Constant(ni, 2 * dd + D.q + D.shift);
  IterationResult r;
  Vector rhs(ni);
  double prev_change = 0;
  for (long sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    for (int i = 0; i < ni; ++i) rhs[i] = source(D, w[i]) + D.shift * w[i];
    rhs[0] += dd * D.boundary;
    rhs[ni - 1] += dd * D.boundary;
    Vector next = solve_tridiagonal(sub, diag, sup, rhs);
    const double slack = 1e-13 * std::max(1.0, next.cwiseAbs().maxCoeff());
    if (direction > 0 && (next - w).minCoeff() < -slack) r.monotone = false;
    if (direction < 0 && (next - w).maxCoeff() > slack) r.monotone = false;
    const double change = (next - w).cwiseAbs().maxCoeff();
    w = std::move(next);
    r.sweeps = sweep;
    if (direction < 0 && D.boundary == 0.0 && w.maxCoeff() < opts.collapse * level) {
      r.collapsed = true;
      r.converged = true;
      break;
    }
    // Near the existence threshold the contraction factor approaches 1, so a
    // small step says little about the distance to the limit.
    const double rho = prev_change > 0 ? change / prev_change : 0.0;
    prev_change = change;
    const double remaining = rho < 1 ? change / (1 - rho) : change;
    if (sweep > 2 && remaining < opts.tol * level && change < opts.tol * level) {
      r.converged = true;
      break;
    }
  }
  r.w = std::move(w);
  return r;
}

double residual(const Discretisation& D, const Vector& w) {
  const int ni = D.n - 2;
  const double dd = D.d / (D.dx * D.dx);
  double worst = 0;
  for (int i = 0; i < ni; ++i) {
    const double left = i > 0 ? w[i - 1] : D.boundary;
    const double right = i + 1 < ni ? w[i + 1] : D.boundary;
    const double r = -dd * (left - 2 * w[i] + right) + D.q * w[i] - source(D, w[i]);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

Discretisation make_discretisation(double m, const ModelParams& p, double l, int n, double boundary) {
  if (!(m > 0)) throw Error(ErrorKind::validation, "steady: m must be positive");
  if (!(l > 0)) throw Error(ErrorKind::validation, "steady: l must be positive");
  if (n < 64) throw Error(ErrorKind::validation, "steady: grid needs at least 64 nodes");
  Discretisation D;
  D.m = m;
  D.l = l;
  D.n = n;
  D.dx = 2 * l / (n - 1);
  D.d = p.d();
  D.q = p.q();
  D.kbm_c = p.k() * p.b() * m / p.c();
  // G(w) = kbm w / (c (1+w)^2) has G' >= -kbm/(27c) on w >= 0
  D.shift = D.kbm_c / 27.0;
  D.boundary = boundary;
  return D;
}

BvpSolution assemble(const Discretisation& D, const ModelParams& p, const Vector& interior) {
  BvpSolution s;
  s.l = D.l;
  s.grid.resize(D.n);
  s.w_vals.resize(D.n);
  for (int i = 0; i < D.n; ++i) s.grid[i] = -D.l + i * D.dx;
  s.grid[D.n - 1] = D.l;
  s.w_vals[0] = s.w_vals[D.n - 1] = D.boundary;
  s.w_vals.segment(1, D.n - 2) = interior;
  s.v_vals.resize(D.n);
  for (int i = 0; i < D.n; ++i) s.v_vals[i] = p.b() * D.m * s.w_vals[i] / (p.c() * (1 + s.w_vals[i]));
  s.residual = residual(D, interior);
  return s;
}

}  // namespace

BvpSolution solve_dirichlet_bvp(double m, const ModelParams& p, double l, int n, const BvpOptions& opts) {
  const Discretisation D = make_discretisation(m, p, l, n, 0.0);
  const int ni = n - 2;
  const double lambda1 = eigen_for_model(m, p, -l, l).lambda1;

  // constant upper solution: w_hat(m) when it exists, otherwise any constant
  const bool has_hat = p.k() * p.b() * m > p.q() * p.c();
  const double upper = has_hat ? w_hat(m, p).w_hat : 1.0;
  IterationResult down = iterate(D, Vector::Constant(ni, upper), -1, opts, upper);

  BvpSolution s;
  if (down.collapsed) {
    s = assemble(D, p, Vector::Zero(ni));
    s.status = BvpStatus::no_positive_solution;
  } else {
    s = assemble(D, p, down.w);
    s.status = down.converged ? BvpStatus::positive : BvpStatus::undecided;
  }
  s.lambda1 = lambda1;
  s.converged = down.converged;
  s.iterations = down.sweeps;
  s.monotone = down.monotone;

  if (!down.converged) {
    std::ostringstream os;
    os << "iteration cap reached near the existence threshold (lambda1 = " << lambda1 << ")";
    s.diagnostic = os.str();
    return s;
  }
  if (s.status != BvpStatus::positive) return s;

  // Lower solution delta * phi with phi the discrete principal Dirichlet mode;
  // delta is halved until the discrete lower-solution inequality holds.
  Vector phi(ni);
  for (int i = 0; i < ni; ++i) phi[i] = std::sin(std::numbers::pi * (i + 1) / (n - 1));
  const double dd = D.d / (D.dx * D.dx);
  double delta = 1e-3 * upper;
  for (int halving = 0; halving < 80 && !s.lower_found; ++halving, delta *= 0.5) {
    bool ok = true;
    for (int i = 0; i < ni && ok; ++i) {
      const double w = delta * phi[i];
      const double left = i > 0 ? delta * phi[i - 1] : 0.0;
      const double right = i + 1 < ni ? delta * phi[i + 1] : 0.0;
      ok = -dd * (left - 2 * w + right) + D.q * w <= source(D, w);
    }
    if (ok) s.lower_found = true;
  }
  if (!s.lower_found) {
    s.diagnostic = "no discrete lower solution found; uniqueness not cross-checked";
    return s;
  }
  const IterationResult up = iterate(D, delta * phi, +1, opts, upper);
  s.monotone = s.monotone && up.monotone;
  if (up.converged) {
    s.uniqueness_gap = (up.w - down.w).cwiseAbs().maxCoeff();
  } else {
    s.diagnostic = "iteration from the lower solution hit the sweep cap";
  }
  return s;
}

BvpSolution solve_bvp_with_boundary_value(double m, const ModelParams& p, double l, double boundary_value, int n,
                                          const BvpOptions& opts) {
  const HatPair<double> hat = w_hat(m, p);
  if (!(boundary_value >= hat.w_hat * (1 - 1e-14)))
    throw Error(ErrorKind::precondition_violated, "steady: boundary value must be at least w_hat(m)");
  const Discretisation D = make_discretisation(m, p, l, n, boundary_value);
  const int ni = n - 2;
  const IterationResult down = iterate(D, Vector::Constant(ni, boundary_value), -1, opts, boundary_value);
  const IterationResult up = iterate(D, Vector::Zero(ni), +1, opts, boundary_value);

  BvpSolution s = assemble(D, p, down.w);
  s.lambda1 = eigen_for_model(m, p, -l, l).lambda1;
  s.converged = down.converged;
  s.iterations = down.sweeps;
  s.status = down.converged ? BvpStatus::positive : BvpStatus::undecided;
  s.monotone = down.monotone && up.monotone;
  s.lower_found = true;
  if (up.converged) s.uniqueness_gap = (up.w - down.w).cwiseAbs().maxCoeff();
  if (!down.converged) s.diagnostic = "iteration cap reached";
  return s;
}

}  // namespace vfb

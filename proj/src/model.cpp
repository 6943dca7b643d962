#include <vfb/model.hpp>

#include <algorithm>
#include <cmath>

namespace vfb {

DerivedConstants derived_constants(const ModelParams& p, const InitialData& init) {
  DerivedConstants dc;
  dc.r0 = basic_reproduction_number(p);
  dc.lambda_cap = critical_width(p);
  dc.d_cap = critical_diffusion(p);
  dc.u_bound = std::max(init.u0.sup(), p.theta() / p.a());
  return dc;
}

std::array<double, 3> ode_baseline_equilibrium(const ModelParams& p) {
  const double kb = p.k() * p.b();
  return {p.q() * p.c() / kb, p.theta() / p.c() - p.a() * p.q() / kb,
          p.theta() * p.k() / (p.q() * p.c()) - p.a() / p.b()};
}

namespace {

using State = std::array<double, 3>;

State bilinear_rhs(const State& s, const ModelParams& p) {
  const double infection = p.b() * s[0] * s[2];
  return {p.theta() - p.a() * s[0] - infection, infection - p.c() * s[1], p.k() * s[1] - p.q() * s[2]};
}

State axpy(const State& x, double h, const State& k) { return {x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2]}; }

State rk4(const State& s, double dt, const ModelParams& p) {
  const State k1 = bilinear_rhs(s, p);
  const State k2 = bilinear_rhs(axpy(s, dt / 2, k1), p);
  const State k3 = bilinear_rhs(axpy(s, dt / 2, k2), p);
  const State k4 = bilinear_rhs(axpy(s, dt, k3), p);
  State out;
  for (int i = 0; i < 3; ++i) out[i] = s[i] + dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

bool admissible(const State& s) { return std::all_of(s.begin(), s.end(), [](double x) { return x >= -1e-10; }); }

}  // namespace

std::vector<OdeSample> ode_baseline(const ModelParams& p, const State& init, double t_end, double dt,
                                    const OdeBaselineOptions& opts) {
  if (!(dt > 0)) throw Error(ErrorKind::validation, "ode_baseline: dt must be positive");
  if (!(t_end >= 0)) throw Error(ErrorKind::validation, "ode_baseline: t_end must be nonnegative");
  if (!std::all_of(init.begin(), init.end(), [](double x) { return x >= 0 && std::isfinite(x); }))
    throw Error(ErrorKind::validation, "ode_baseline: initial triple must be nonnegative");

  std::vector<OdeSample> out;
  State s = init;
  double t = 0;
  out.push_back({t, s[0], s[1], s[2]});
  long step = 0;
  const long n_steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  for (long n = 0; n < n_steps; ++n) {
    const double h = std::min(dt, t_end - t);
    // substeps at halved size when a full step leaves the positive cone
    int halvings = 0;
    State next = rk4(s, h, p);
    while (!admissible(next)) {
      if (++halvings > opts.max_halvings)
        throw Error(ErrorKind::step_rejected, "ode_baseline: step rejected, component went negative");
      const int pieces = 1 << halvings;
      next = s;
      for (int i = 0; i < pieces && admissible(next); ++i) next = rk4(next, h / pieces, p);
    }
    s = next;
    t = (n + 1 == n_steps) ? t_end : t + h;
    ++step;
    if (step % opts.sample_every == 0 || n + 1 == n_steps) out.push_back({t, s[0], s[1], s[2]});
  }
  return out;
}

}  // namespace vfb

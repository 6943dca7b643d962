#include <vfb/numerics.hpp>
#include <vfb/solver.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace vfb {

namespace {

// ARS(2,2,2): implicit diagonal gamma, explicit weights (delta, 1 - delta).
const double kGamma = 1.0 - 1.0 / std::numbers::sqrt2;
const double kDelta = 1.0 - 1.0 / (2.0 * kGamma);

constexpr double kClipCount = 1e-14;   // negatives below this are counted
constexpr double kClipReject = 1e-8;   // negatives below this reject the step
constexpr double kMinWidth = 1e-6;

double grid_step(const SimState& s) { return 2.0 / static_cast<double>(s.y_grid.size() - 1); }

double left_speed(const Vector& z, double g, double h, double dy, double mu) {
  // one-sided 3-point derivative at y = -1 with z(-1) = 0
  const double slope = (4 * z[1] - z[2]) / (2 * dy);
  return std::min(0.0, -mu * 2.0 / (h - g) * slope);
}

double right_speed(const Vector& z, double g, double h, double dy, double beta) {
  const Eigen::Index N = z.size() - 1;
  const double slope = (-4 * z[N - 1] + z[N - 2]) / (2 * dy);
  return std::max(0.0, -beta * 2.0 / (h - g) * slope);
}

// Upwind derivative for a term zeta * f_y: characteristics move with -zeta,
// so zeta > 0 takes information from the right. Second order where the
// stencil fits, first order next to the boundary.
double upwind(const Vector& f, Eigen::Index i, double zeta, double dy) {
  const Eigen::Index N = f.size() - 1;
  if (zeta > 0) {
    if (i + 2 <= N) return (-3 * f[i] + 4 * f[i + 1] - f[i + 2]) / (2 * dy);
    return (f[i + 1] - f[i]) / dy;
  }
  if (i - 2 >= 0) return (3 * f[i] - 4 * f[i - 1] + f[i - 2]) / (2 * dy);
  return (f[i] - f[i - 1]) / dy;
}

double w_from_grid(const Vector& z, double g, double h, double dy, double x) {
  if (x <= g || x >= h) return 0.0;
  return interp_uniform(z, -1.0, dy, (2 * x - h - g) / (h - g));
}

struct Stage {
  double g = 0, h = 0;
  Vector z, r, u;
  double gp = 0, hp = 0;
  TransformCoeffs tc;
  Vector ez, er, eu;  // explicit tendencies; eu only on the active u nodes
};

struct Context {
  const ModelParams& p;
  const Vector& y;
  double dy;
  double u_x0;
  double u_dx;
  const std::vector<Eigen::Index>& active;  // u nodes that may meet w during the step
};

void evaluate(Stage& st, const Context& c) {
  const ModelParams& p = c.p;
  const Eigen::Index n = st.z.size();
  st.gp = left_speed(st.z, st.g, st.h, c.dy, p.mu());
  st.hp = right_speed(st.z, st.g, st.h, c.dy, p.beta());
  st.tc = TransformCoeffs::from(st.g, st.h, st.gp, st.hp);
  const double diff = p.d() * st.tc.xi;
  const double half = 0.5 * (st.h - st.g);
  const double mid = 0.5 * (st.h + st.g);

  st.ez = Vector::Zero(n);
  st.er = Vector::Zero(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double zeta = st.tc.zeta_at(c.y[i]);
    // central differences while the cell Peclet number stays below 2
    const double adv_z = std::abs(zeta) * c.dy <= 2 * diff ? zeta * (st.z[i + 1] - st.z[i - 1]) / (2 * c.dy)
                                                            : zeta * upwind(st.z, i, zeta, c.dy);
    st.ez[i] = adv_z + f3(st.r[i], st.z[i], p);
    const double u_here = interp_uniform(st.u, c.u_x0, c.u_dx, half * c.y[i] + mid);
    st.er[i] = f2(u_here, st.r[i], st.z[i], p) + zeta * upwind(st.r, i, zeta, c.dy);
  }

  st.eu.resize(static_cast<Eigen::Index>(c.active.size()));
  for (std::size_t k = 0; k < c.active.size(); ++k) {
    const Eigen::Index j = c.active[k];
    const double x = c.u_x0 + static_cast<double>(j) * c.u_dx;
    st.eu[static_cast<Eigen::Index>(k)] = f1(st.u[j], w_from_grid(st.z, st.g, st.h, c.dy, x), p);
  }
}

// (I - alpha D2) z = rhs on the interior with z = 0 at both ends.
Vector implicit_diffusion(const Vector& rhs, double alpha) {
  const Eigen::Index n = rhs.size();
  const Eigen::Index ni = n - 2;
  const Vector off = Vector::Constant(ni, -alpha);
  const Vector diag = Vector::Constant(ni, 1 + 2 * alpha);
  Vector out = Vector::Zero(n);
  out.segment(1, ni) = solve_tridiagonal(off, diag, off, Vector(rhs.segment(1, ni)));
  return out;
}

Vector second_difference(const Vector& z, double dy) {
  const Eigen::Index n = z.size();
  Vector out = Vector::Zero(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) out[i] = (z[i - 1] - 2 * z[i] + z[i + 1]) / (dy * dy);
  return out;
}

// Clips small negatives to zero. Returns false when a value is negative
// beyond the rejection threshold or not finite.
bool clip(Vector& v, long& clips) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) return false;
    if (v[i] < 0) {
      if (v[i] < -kClipReject) return false;
      if (v[i] < -kClipCount) ++clips;
      v[i] = 0;
    }
  }
  v[0] = 0;
  v[v.size() - 1] = 0;
  return true;
}

bool limit_u(Vector& u, double bound) {
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    if (!std::isfinite(u[j]) || !(u[j] > 0)) return false;
    if (u[j] > bound) u[j] = bound;
  }
  return true;
}

struct Attempt {
  bool ok = false;
  SimState next;
};

Attempt attempt(const SimState& s, const ModelParams& p, double dt) {
  const double dy = grid_step(s);
  const double u_x0 = s.u_grid[0];
  const double theta_a = p.theta() / p.a();
  const double pad = 2 * dt * std::max(std::abs(s.g_speed), std::abs(s.h_speed)) + 2 * s.u_dx;
  std::vector<Eigen::Index> active;
  std::vector<char> is_active(static_cast<std::size_t>(s.u_grid.size()), 0);
  for (Eigen::Index j = 0; j < s.u_grid.size(); ++j) {
    if (s.u_grid[j] >= s.g - pad && s.u_grid[j] <= s.h + pad) {
      active.push_back(j);
      is_active[static_cast<std::size_t>(j)] = 1;
    }
  }
  const Context ctx{p, s.y_grid, dy, u_x0, s.u_dx, active};
  long clips = 0;

  // u on inactive nodes relaxes exactly toward theta/a
  const auto relax = [&](const Vector& u_start, Vector& u_out, double tau) {
    const double decay = std::exp(-p.a() * tau);
    for (Eigen::Index j = 0; j < u_start.size(); ++j)
      if (!is_active[static_cast<std::size_t>(j)]) u_out[j] = theta_a + (u_start[j] - theta_a) * decay;
  };

  Stage s0;
  s0.g = s.g;
  s0.h = s.h;
  s0.z = s.z_vals;
  s0.r = s.r_vals;
  s0.u = s.u_vals;
  evaluate(s0, ctx);

  const double tg = kGamma * dt;
  Stage s2;
  s2.g = s0.g + tg * s0.gp;
  s2.h = s0.h + tg * s0.hp;
  const double xi2 = 4.0 / ((s2.h - s2.g) * (s2.h - s2.g));
  s2.z = implicit_diffusion(s0.z + tg * s0.ez, tg * p.d() * xi2 / (dy * dy));
  s2.r = s0.r + tg * s0.er;
  s2.u = s0.u;
  relax(s0.u, s2.u, tg);
  for (std::size_t k = 0; k < active.size(); ++k) s2.u[active[k]] += tg * s0.eu[static_cast<Eigen::Index>(k)];
  if (!clip(s2.z, clips) || !clip(s2.r, clips) || !limit_u(s2.u, s.u_bound + 1e-12)) return {};
  evaluate(s2, ctx);

  SimState out = s;
  out.g = std::min(s0.g, s0.g + dt * (kDelta * s0.gp + (1 - kDelta) * s2.gp));
  out.h = std::max(s0.h, s0.h + dt * (kDelta * s0.hp + (1 - kDelta) * s2.hp));
  if (out.h - out.g < kMinWidth) throw Error(ErrorKind::front_collapse, "front collapse: h - g fell below 1e-6");
  const double xi1 = 4.0 / ((out.h - out.g) * (out.h - out.g));
  const Vector explicit_part = s0.z + dt * (kDelta * s0.ez + (1 - kDelta) * s2.ez) +
                              dt * (1 - kGamma) * p.d() * xi2 * second_difference(s2.z, dy);
  out.z_vals = implicit_diffusion(explicit_part, tg * p.d() * xi1 / (dy * dy));
  out.r_vals = s0.r + dt * (kDelta * s0.er + (1 - kDelta) * s2.er);
  out.u_vals = s0.u;
  relax(s0.u, out.u_vals, dt);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    out.u_vals[active[k]] += dt * (kDelta * s0.eu[kk] + (1 - kDelta) * s2.eu[kk]);
  }
  if (!clip(out.z_vals, clips) || !clip(out.r_vals, clips) || !limit_u(out.u_vals, s.u_bound + 1e-12)) return {};

  out.t = s.t + dt;
  out.g_speed = left_speed(out.z_vals, out.g, out.h, dy, p.mu());
  out.h_speed = right_speed(out.z_vals, out.g, out.h, dy, p.beta());
  out.clip_count += clips;
  out.dt_last = dt;
  out.steps += 1;
  return {true, std::move(out)};
}

double stable_dt(const SimState& s, const ModelParams& p, const StepperConfig& cfg) {
  const double dy = grid_step(s);
  const TransformCoeffs tc = TransformCoeffs::from(s.g, s.h, s.g_speed, s.h_speed);
  const double zeta_max = std::abs(tc.zeta0) + std::abs(tc.zeta1);
  const double speed = std::max(std::abs(s.g_speed), std::abs(s.h_speed));
  const double inf = std::numeric_limits<double>::infinity();
  const double dt_adv = zeta_max > 0 ? dy / zeta_max : inf;
  const double dt_front = speed > 0 ? dy * s.width() / (2 * speed) : inf;
  const double rate = std::max({p.a() + p.b(), p.c(), p.q() + p.k() * s.max_v()});
  const double dt_react = 0.5 / rate;
  return std::min(cfg.cfl_safety * std::min({dt_adv, dt_front, dt_react}), cfg.dt_max);
}

}  // namespace

void StepperConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw Error(ErrorKind::validation, "stepper." + msg); };
  if (n_y < 65) fail("n_y must be at least 65");
  if (n_y % 2 == 0) fail("n_y must be odd");
  if (!(dt_init > 0)) fail("dt_init must be positive");
  if (!(dt_max > 0)) fail("dt_max must be positive");
  if (!(cfl_safety > 0 && cfl_safety <= 0.9)) fail("cfl_safety must lie in (0, 0.9]");
  if (!(t_end > 0)) fail("t_end must be positive");
  if (!(X >= 0)) fail("X must be nonnegative");
  if (!(u_spacing >= 0)) fail("u_spacing must be nonnegative");
  if (!(snapshot_every > 0)) fail("snapshot_every must be positive");
  if (max_retries < 0) fail("max_retries must be nonnegative");
  if (max_steps < 1) fail("max_steps must be positive");
  if (!(tolerances.w_dead_rel > 0)) fail("tolerances.w_dead_rel must be positive");
  if (!(tolerances.front_still > 0)) fail("tolerances.front_still must be positive");
  if (tolerances.window < 1) fail("tolerances.window must be at least 1");
}

TransformCoeffs TransformCoeffs::from(double g, double h, double g_speed, double h_speed) {
  const double L = h - g;
  TransformCoeffs tc;
  tc.xi = 4.0 / (L * L);
  tc.zeta0 = (h_speed + g_speed) / L;
  tc.zeta1 = (h_speed - g_speed) / L;
  return tc;
}

double SimState::w_at(double x) const { return w_from_grid(z_vals, g, h, grid_step(*this), x); }
double SimState::v_at(double x) const { return w_from_grid(r_vals, g, h, grid_step(*this), x); }
double SimState::u_at(double x) const { return interp_uniform(u_vals, u_grid[0], u_dx, x); }

SimState initialize(const ModelParams& p, const InitialData& init, const StepperConfig& cfg) {
  cfg.validate();
  const double h0 = p.h0();
  validate_initial_data(init, h0);

  SimState s;
  const Eigen::Index n = cfg.n_y;
  s.y_grid = Vector::LinSpaced(n, -1.0, 1.0);
  s.y_grid[(n - 1) / 2] = 0.0;
  s.z_vals.resize(n);
  s.r_vals.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.z_vals[i] = init.w0(h0 * s.y_grid[i]);
    s.r_vals[i] = init.v0(h0 * s.y_grid[i]);
  }
  s.z_vals[0] = s.z_vals[n - 1] = 0;
  s.r_vals[0] = s.r_vals[n - 1] = 0;
  s.g = -h0;
  s.h = h0;

  const DerivedConstants dc = derived_constants(p, init);
  const double X = cfg.X > 0 ? cfg.X : (dc.lambda_cap ? h0 + 4 * *dc.lambda_cap : 4 * h0);
  s.u_dx = cfg.u_spacing > 0 ? cfg.u_spacing : 2 * h0 / static_cast<double>(n - 1);
  const auto half = static_cast<Eigen::Index>(std::ceil(X / s.u_dx - 1e-9));
  if (half * s.u_dx < h0) throw Error(ErrorKind::validation, "stepper.X must cover the initial interval");
  s.u_grid.resize(2 * half + 1);
  s.u_vals.resize(2 * half + 1);
  for (Eigen::Index j = 0; j <= 2 * half; ++j) {
    s.u_grid[j] = static_cast<double>(j - half) * s.u_dx;
    s.u_vals[j] = init.u0(s.u_grid[j]);
  }
  s.u_bound = dc.u_bound;

  const double dy = grid_step(s);
  s.g_speed = left_speed(s.z_vals, s.g, s.h, dy, p.mu());
  s.h_speed = right_speed(s.z_vals, s.g, s.h, dy, p.beta());
  s.dt_next = std::min(cfg.dt_init, cfg.dt_max);
  s.initial_max_w = s.z_vals.maxCoeff();
  s.blowup_scale = std::max({1.0, s.initial_max_w, s.r_vals.maxCoeff(), p.b() * s.u_bound / p.c(),
                             p.k() * p.b() * s.u_bound / (p.c() * p.q())});
  return s;
}

SimState step(const SimState& s, const ModelParams& p, const StepperConfig& cfg, double dt_cap) {
  double dt = std::min(s.dt_next, stable_dt(s, p, cfg));
  bool halved = false;
  for (int attempt_no = 0; attempt_no <= cfg.max_retries; ++attempt_no) {
    const double used = std::min(dt, dt_cap);
    Attempt a = attempt(s, p, used);
    if (a.ok) {
      SimState& out = a.next;
      out.rejections = s.rejections + attempt_no;
      out.dt_next = std::min(halved ? dt : 2 * dt, cfg.dt_max);
      const double limit = 1e3 * s.blowup_scale;
      if (out.z_vals.maxCoeff() > limit || out.r_vals.maxCoeff() > limit)
        throw Error(ErrorKind::non_convergence, "solution exceeded 1e3 times its a-priori scale");
      return std::move(out);
    }
    dt *= 0.5;
    halved = true;
  }
  std::ostringstream os;
  os << "step rejected " << cfg.max_retries + 1 << " times at t = " << s.t << " (last dt = " << 2 * dt << ")";
  throw Error(ErrorKind::step_rejected, os.str());
}

void extend_u_grid(SimState& s, const ModelParams& p, const Profile& u0, double new_X) {
  const Eigen::Index old_half = (s.u_grid.size() - 1) / 2;
  const auto new_half = static_cast<Eigen::Index>(std::ceil(new_X / s.u_dx - 1e-9));
  if (new_half <= old_half) return;
  const double theta_a = p.theta() / p.a();
  const double decay = std::exp(-p.a() * s.t);
  Vector grid(2 * new_half + 1), vals(2 * new_half + 1);
  const Eigen::Index shift = new_half - old_half;
  for (Eigen::Index j = 0; j <= 2 * new_half; ++j) {
    grid[j] = static_cast<double>(j - new_half) * s.u_dx;
    const Eigen::Index old = j - shift;
    vals[j] = (old >= 0 && old <= 2 * old_half) ? s.u_vals[old] : theta_a + (u0(grid[j]) - theta_a) * decay;
  }
  s.u_grid = std::move(grid);
  s.u_vals = std::move(vals);
}

ProfileSnapshot snapshot(const SimState& s) {
  ProfileSnapshot snap;
  snap.t = s.t;
  snap.g = s.g;
  snap.h = s.h;
  snap.x = s.u_grid;
  snap.u = s.u_vals;
  const Eigen::Index n = s.u_grid.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  snap.v.resize(n);
  snap.w.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double x = s.u_grid[j];
    const bool inside = x >= s.g && x <= s.h;
    snap.v[j] = inside ? s.v_at(x) : nan;
    snap.w[j] = inside ? s.w_at(x) : nan;
  }
  return snap;
}

namespace {

SeriesRow series_row(const SimState& s) {
  return {s.t, s.g, s.h, s.width(), s.max_w(), s.max_v(), s.u_at(0.0)};
}

}  // namespace

RunOutcome run(const ModelParams& p, const InitialData& init, const StepperConfig& cfg) {
  SimState s = initialize(p, init, cfg);
  RunOutcome out;
  out.constants = derived_constants(p, init);
  ClassifierMemory mem = make_classifier_memory(s.initial_max_w, cfg.tolerances);

  const auto record = [&](const SimState& st) {
    if (!out.series.empty() && !(st.t > out.series.back().t)) return;
    out.series.push_back(series_row(st));
    if (cfg.keep_profiles) out.profiles.push_back(snapshot(st));
  };

  record(s);
  out.classification = classify_online(s, out.constants, cfg.tolerances, mem);
  out.max_width = s.width();
  const bool stop = cfg.stop_on_decision;

  long k_snap = 1;
  while (!(stop && out.classification.definite()) && s.t < cfg.t_end) {
    if (s.steps >= cfg.max_steps) break;
    const double X = s.X();
    const double margin = std::max(0.1 * X, 10 * s.u_dx);
    if (s.h > X - margin || -s.g > X - margin) extend_u_grid(s, p, init.u0, 1.5 * X);

    const double target = std::min(static_cast<double>(k_snap) * cfg.snapshot_every, cfg.t_end);
    s = step(s, p, cfg, target - s.t);
    const bool at_target = s.t >= target - 1e-12 * std::max(1.0, target);
    if (at_target) s.t = target;
    out.max_width = std::max(out.max_width, s.width());

    if (!out.classification.definite()) out.classification = classify_online(s, out.constants, cfg.tolerances, mem);
    if (at_target) {
      record(s);
      if (target >= static_cast<double>(k_snap) * cfg.snapshot_every) ++k_snap;
    }
  }
  record(s);

  out.final_width = s.width();
  if (out.constants.lambda_cap) out.width_over_lambda = out.final_width / *out.constants.lambda_cap;
  out.center_triple = {s.u_at(0.0), s.v_at(0.0), s.w_at(0.0)};
  if (out.constants.r0 > 1) out.equilibrium = equilibrium_full(p);
  out.final_state = std::move(s);
  return out;
}

}  // namespace vfb

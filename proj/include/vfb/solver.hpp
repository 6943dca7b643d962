#pragma once

// Free-boundary solver. w and v live on the straightened grid y in [-1, 1]
// through x = ((h - g) y + h + g) / 2; u lives on a fixed physical grid.
//
//   z_t = d xi z_yy + zeta z_y + f3(r, z)
//   r_t = f2(u(x), r, z) + zeta r_y
//   u_t = f1(u, w(x))
//   g' = -mu w_x(g),  h' = -beta w_x(h)
//
// Time stepping is the two-stage IMEX scheme ARS(2,2,2): diffusion implicit,
// everything else explicit. The explicit tableau also advances g and h.

#include <vfb/classification.hpp>
#include <vfb/initial_data.hpp>
#include <vfb/model.hpp>
#include <vfb/types.hpp>

#include <limits>
#include <optional>
#include <vector>

namespace vfb {

struct StepperConfig {
  int n_y = 257;
  double dt_init = 1e-3;
  double dt_max = 1e-2;
  double cfl_safety = 0.4;
  double t_end = 200;
  double X = 0;               // physical half-width of the u grid; 0 picks the default
  double u_spacing = 0;       // u grid spacing; 0 means 2 h0 / (n_y - 1)
  double snapshot_every = 1.0;
  bool stop_on_decision = true;
  bool keep_profiles = true;
  int max_retries = 8;
  long max_steps = 20000000;
  Tolerances tolerances;

  void validate() const;
};

/// xi = 4/(h-g)^2 and zeta(y) = zeta0 + zeta1 * y.
struct TransformCoeffs {
  double xi = 0;
  double zeta0 = 0;
  double zeta1 = 0;

  static TransformCoeffs from(double g, double h, double g_speed, double h_speed);
  double zeta_at(double y) const { return zeta0 + zeta1 * y; }
};

struct SimState {
  double t = 0;
  double g = 0, h = 0;
  Vector y_grid;
  Vector z_vals;
  Vector r_vals;
  Vector u_grid;
  Vector u_vals;
  double g_speed = 0, h_speed = 0;

  double u_dx = 0;         // spacing of u_grid (symmetric, node at x = 0)
  double u_bound = 0;      // A1 = max(sup u0, theta/a)
  double dt_next = 0;      // proposal for the next step
  double dt_last = 0;
  long steps = 0;
  long clip_count = 0;
  long rejections = 0;
  double initial_max_w = 0;
  double blowup_scale = 0;

  double width() const { return h - g; }
  double X() const { return u_grid.size() ? u_grid[u_grid.size() - 1] : 0.0; }
  double max_w() const { return z_vals.maxCoeff(); }
  double max_v() const { return r_vals.maxCoeff(); }
  /// w and v at a physical point; zero outside [g, h].
  double w_at(double x) const;
  double v_at(double x) const;
  double u_at(double x) const;
};

SimState initialize(const ModelParams& p, const InitialData& init, const StepperConfig& cfg);

/// One accepted step of size at most min(s.dt_next, CFL bounds, dt_cap).
/// Rejected attempts are retried at half size up to cfg.max_retries times.
SimState step(const SimState& s, const ModelParams& p, const StepperConfig& cfg,
              double dt_cap = std::numeric_limits<double>::infinity());

/// Appends u nodes on both sides so that the grid reaches at least new_X.
/// New nodes get the exact relaxation of u0 to time s.t.
void extend_u_grid(SimState& s, const ModelParams& p, const Profile& u0, double new_X);

struct SeriesRow {
  double t, g, h, width, max_w, max_v, u_center;
};

/// Profiles sampled on the u grid; v and w are NaN outside [g, h].
struct ProfileSnapshot {
  double t = 0, g = 0, h = 0;
  Vector x, u, v, w;
};

struct RunOutcome {
  Classification classification;
  std::vector<SeriesRow> series;
  std::vector<ProfileSnapshot> profiles;
  SimState final_state;
  DerivedConstants constants;
  double final_width = 0;
  double width_over_lambda = std::numeric_limits<double>::quiet_NaN();
  std::array<double, 3> center_triple{};
  std::optional<EquilibriumTriple<double>> equilibrium;
  double max_width = 0;
};

RunOutcome run(const ModelParams& p, const InitialData& init, const StepperConfig& cfg);

ProfileSnapshot snapshot(const SimState& s);

}  // namespace vfb

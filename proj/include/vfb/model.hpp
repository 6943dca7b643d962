#pragma once

// Model parameters, reaction terms, and the algebraic equilibria of the
// virus/infected/uninfected system. Everything here is templated on the
// scalar type; the solver instantiates it with double.

#include <vfb/initial_data.hpp>
#include <vfb/types.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace vfb {

/// The ten positive scalars of the model, in plain aggregate form.
template <typename Scalar>
struct ParamSet {
  Scalar d{1};      // diffusion of w
  Scalar theta{1};  // uninfected-cell production
  Scalar a{1};      // uninfected-cell death
  Scalar b{1};      // infection coefficient
  Scalar c{1};      // infected-cell death
  Scalar k{1};      // virion production
  Scalar q{1};      // virion death
  Scalar mu{1};     // left-front expansion coefficient
  Scalar beta{1};   // right-front expansion coefficient
  Scalar h0{1};     // initial half-width
};

/// Validated model parameters. Construction rejects non-finite or
/// non-positive values, so every formula downstream may assume positivity.
template <typename Scalar>
class BasicModelParams {
 public:
  explicit BasicModelParams(const ParamSet<Scalar>& v) : v_(v) {
    check(v_.d, "d");
    check(v_.theta, "theta");
    check(v_.a, "a");
    check(v_.b, "b");
    check(v_.c, "c");
    check(v_.k, "k");
    check(v_.q, "q");
    check(v_.mu, "mu");
    check(v_.beta, "beta");
    check(v_.h0, "h0");
  }

  Scalar d() const { return v_.d; }
  Scalar theta() const { return v_.theta; }
  Scalar a() const { return v_.a; }
  Scalar b() const { return v_.b; }
  Scalar c() const { return v_.c; }
  Scalar k() const { return v_.k; }
  Scalar q() const { return v_.q; }
  Scalar mu() const { return v_.mu; }
  Scalar beta() const { return v_.beta; }
  Scalar h0() const { return v_.h0; }
  Scalar gamma() const { return std::max(v_.mu, v_.beta); }

  const ParamSet<Scalar>& values() const { return v_; }

  /// Rescales mu and beta jointly so that max(mu, beta) == gamma.
  BasicModelParams with_gamma(Scalar gamma) const {
    ParamSet<Scalar> v = v_;
    const Scalar s = gamma / this->gamma();
    v.mu *= s;
    v.beta *= s;
    return BasicModelParams(v);
  }
  BasicModelParams with_h0(Scalar h0) const {
    ParamSet<Scalar> v = v_;
    v.h0 = h0;
    return BasicModelParams(v);
  }
  BasicModelParams with_d(Scalar d) const {
    ParamSet<Scalar> v = v_;
    v.d = d;
    return BasicModelParams(v);
  }

 private:
  static void check(Scalar x, const char* name) {
    using std::isfinite;
    if (!isfinite(x)) throw Error(ErrorKind::validation, std::string("model.") + name + " must be finite");
    if (!(x > Scalar(0))) throw Error(ErrorKind::validation, std::string("model.") + name + " must be positive");
  }

  ParamSet<Scalar> v_;
};

using ModelParams = BasicModelParams<double>;

namespace detail {
template <typename Scalar>
void require_nonnegative_w(Scalar w) {
  if (w < Scalar(0)) throw Error(ErrorKind::domain, "reaction terms require w >= 0");
}
}  // namespace detail

// Reaction terms with saturating infection and production rates.

template <typename Scalar>
Scalar f1(Scalar u, Scalar w, const BasicModelParams<Scalar>& p) {
  detail::require_nonnegative_w(w);
  return p.theta() - p.a() * u - p.b() * u * w / (Scalar(1) + w);
}

template <typename Scalar>
Scalar f2(Scalar u, Scalar v, Scalar w, const BasicModelParams<Scalar>& p) {
  detail::require_nonnegative_w(w);
  return p.b() * u * w / (Scalar(1) + w) - p.c() * v;
}

template <typename Scalar>
Scalar f3(Scalar v, Scalar w, const BasicModelParams<Scalar>& p) {
  detail::require_nonnegative_w(w);
  return p.k() * v / (Scalar(1) + w) - p.q() * w;
}

template <typename Scalar>
Scalar basic_reproduction_number(const BasicModelParams<Scalar>& p) {
  return p.theta() * p.k() * p.b() / (p.a() * p.c() * p.q());
}

/// Critical width pi*sqrt(acd/(theta*k*b - acq)); absent when R0 <= 1.
template <typename Scalar>
std::optional<Scalar> critical_width(const BasicModelParams<Scalar>& p) {
  using std::sqrt;
  const Scalar excess = p.theta() * p.k() * p.b() - p.a() * p.c() * p.q();
  if (!(excess > Scalar(0))) return std::nullopt;
  return std::numbers::pi_v<Scalar> * sqrt(p.a() * p.c() * p.d() / excess);
}

/// Critical diffusion 4 h0^2 q (R0 - 1) / pi^2; absent when R0 <= 1.
template <typename Scalar>
std::optional<Scalar> critical_diffusion(const BasicModelParams<Scalar>& p) {
  const Scalar r0 = basic_reproduction_number(p);
  if (!(r0 > Scalar(1))) return std::nullopt;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  return Scalar(4) * p.h0() * p.h0() * p.q() * (r0 - Scalar(1)) / (pi * pi);
}

struct DerivedConstants {
  double r0 = 0;
  std::optional<double> lambda_cap;
  std::optional<double> d_cap;
  double u_bound = 0;  // A1 = max(sup u0, theta/a)
};

DerivedConstants derived_constants(const ModelParams& p, const InitialData& init);

template <typename Scalar>
struct EquilibriumTriple {
  Scalar u_star{}, v_star{}, w_star{};
};

/// Unique positive root of f1 = f2 = f3 = 0. Throws no_positive_root when R0 <= 1.
///
/// The w-equation (a+b) w^2 + (2a+b) w + a(1 - R0) = 0 is solved with the
/// cancellation-free form w = -2C / (B + sqrt(B^2 - 4AC)).
template <typename Scalar>
EquilibriumTriple<Scalar> equilibrium_full(const BasicModelParams<Scalar>& p) {
  using std::sqrt;
  const Scalar r0 = basic_reproduction_number(p);
  if (!(r0 > Scalar(1)))
    throw Error(ErrorKind::no_positive_root, "positive equilibrium requires R0 > 1");
  const Scalar A = p.a() + p.b();
  const Scalar B = Scalar(2) * p.a() + p.b();
  // a(1 - R0) computed as (acq - theta k b)/(cq) to keep the sign exact
  const Scalar C = (p.a() * p.c() * p.q() - p.theta() * p.k() * p.b()) / (p.c() * p.q());
  const Scalar w = Scalar(-2) * C / (B + sqrt(B * B - Scalar(4) * A * C));
  EquilibriumTriple<Scalar> e;
  e.w_star = w;
  e.u_star = p.c() * p.q() * (Scalar(1) + w) * (Scalar(1) + w) / (p.k() * p.b());
  e.v_star = p.q() * w * (Scalar(1) + w) / p.k();
  return e;
}

template <typename Scalar>
struct HatPair {
  Scalar v_hat{}, w_hat{};
};

/// Positive root of f2(m, v, w) = f3(v, w) = 0 for a frozen uninfected level m.
template <typename Scalar>
HatPair<Scalar> w_hat(Scalar m, const BasicModelParams<Scalar>& p) {
  using std::sqrt;
  const Scalar ratio = p.k() * p.b() * m / (p.q() * p.c());
  if (!(ratio > Scalar(1)))
    throw Error(ErrorKind::threshold_violated, "w_hat requires k*b*m > q*c");
  HatPair<Scalar> r;
  r.w_hat = (ratio - Scalar(1)) / (sqrt(ratio) + Scalar(1));
  r.v_hat = p.b() * m * r.w_hat / (p.c() * (Scalar(1) + r.w_hat));
  return r;
}

// Baseline bilinear ODE system (no saturation, no space).

struct OdeSample {
  double t, u, v, w;
};

struct OdeBaselineOptions {
  int sample_every = 1;
  int max_halvings = 20;
};

/// Fixed-step classical RK4 on u' = theta - a u - b u w, v' = b u w - c v,
/// w' = k v - q w. Steps that push a component below -1e-10 are retried at
/// half size.
std::vector<OdeSample> ode_baseline(const ModelParams& p, const std::array<double, 3>& init,
                                    double t_end, double dt, const OdeBaselineOptions& opts = {});

/// Endemic equilibrium of the bilinear system; meaningful when R0 > 1.
std::array<double, 3> ode_baseline_equilibrium(const ModelParams& p);

}  // namespace vfb

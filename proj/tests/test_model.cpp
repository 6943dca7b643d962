#include <vfb/model.hpp>

#include <doctest.h>

#include <random>

using namespace vfb;

namespace {

ModelParams reference(double h0 = 1.0) {
  ParamSet<double> v{1, 1, 1, 2, 1, 2, 1, 1, 1, h0};
  return ModelParams(v);
}

}  // namespace

TEST_CASE("reference constants") {
  const ModelParams p = reference();
  CHECK(basic_reproduction_number(p) == doctest::Approx(4.0).epsilon(1e-15));
  REQUIRE(critical_width(p));
  CHECK(*critical_width(p) == doctest::Approx(1.8137993642342178).epsilon(1e-14));
  REQUIRE(critical_diffusion(p));
  CHECK(*critical_diffusion(p) == doctest::Approx(1.2158542037080533).epsilon(1e-14));
}

TEST_CASE("thresholds are absent at or below R0 = 1") {
  ParamSet<double> v{1, 1, 1, 1, 1, 1, 1, 1, 1, 1};  // R0 = 1 exactly
  const ModelParams p(v);
  CHECK(basic_reproduction_number(p) == 1.0);
  CHECK_FALSE(critical_width(p));
  CHECK_FALSE(critical_diffusion(p));
  CHECK_THROWS_AS(equilibrium_full(p), Error);
}

TEST_CASE("validation names the offending parameter") {
  ParamSet<double> v{-1, 1, 1, 2, 1, 2, 1, 1, 1, 1};
  try {
    ModelParams p(v);
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::validation);
    CHECK(std::string(e.what()) == "model.d must be positive");
  }
  v.d = 1;
  v.h0 = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH(ModelParams{v}, "model.h0 must be finite");
}

TEST_CASE("reaction terms reject negative w") {
  const ModelParams p = reference();
  CHECK_THROWS_AS(f1(1.0, -1e-3, p), Error);
  CHECK_THROWS_AS(f3(1.0, -1e-3, p), Error);
  CHECK(f1(1.0, 0.0, p) == doctest::Approx(0.0));
  CHECK(f2(1.0, 0.5, 1.0, p) == doctest::Approx(1.0 - 0.5));
  CHECK(f3(1.0, 1.0, p) == doctest::Approx(1.0 - 1.0));
}

TEST_CASE("positive equilibrium") {
  const ModelParams p = reference();
  const auto e = equilibrium_full(p);
  CHECK(e.u_star == doctest::Approx(0.5891972930813327).epsilon(1e-14));
  CHECK(e.v_star == doctest::Approx(0.4108027069186673).epsilon(1e-14));
  CHECK(e.w_star == doctest::Approx(0.5351837584879964).epsilon(1e-14));
  CHECK(std::abs(f1(e.u_star, e.w_star, p)) < 1e-14);
  CHECK(std::abs(f2(e.u_star, e.v_star, e.w_star, p)) < 1e-14);
  CHECK(std::abs(f3(e.v_star, e.w_star, p)) < 1e-14);
}

TEST_CASE("equilibrium solves the reaction system for random parameters") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.2, 3.0);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    ParamSet<double> v{U(rng), U(rng), U(rng), U(rng), U(rng), U(rng), U(rng), 1, 1, 1};
    const ModelParams p(v);
    if (basic_reproduction_number(p) <= 1) continue;
    const auto e = equilibrium_full(p);
    CHECK(e.u_star > 0);
    CHECK(e.v_star > 0);
    CHECK(e.w_star > 0);
    const double scale = std::max({p.theta(), e.v_star, e.w_star});
    CHECK(std::abs(f1(e.u_star, e.w_star, p)) < 1e-12 * scale * 10);
    CHECK(std::abs(f2(e.u_star, e.v_star, e.w_star, p)) < 1e-12 * scale * 10);
    CHECK(std::abs(f3(e.v_star, e.w_star, p)) < 1e-12 * scale * 10);
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("critical diffusion and critical width describe the same threshold") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.3, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    ParamSet<double> v{U(rng), U(rng), U(rng), U(rng), U(rng), U(rng), U(rng), 1, 1, U(rng)};
    const ModelParams p(v);
    if (basic_reproduction_number(p) <= 1.05) continue;
    const double D = *critical_diffusion(p);
    const double L = *critical_width(p);
    if (std::abs(p.d() - D) < 1e-9 * D) continue;
    CHECK((p.d() <= D) == (p.h0() >= L / 2));
  }
}

TEST_CASE("w_hat") {
  const ModelParams p = reference();
  const auto hat = w_hat(1.0, p);
  CHECK(hat.w_hat == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(hat.v_hat == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(f2(1.0, hat.v_hat, hat.w_hat, p)) < 1e-15);
  CHECK(std::abs(f3(hat.v_hat, hat.w_hat, p)) < 1e-15);
  // k b m = q c
  CHECK_THROWS_AS(w_hat(0.25, p), Error);
  // w_hat increases with m
  CHECK(w_hat(2.0, p).w_hat > w_hat(1.0, p).w_hat);
}

TEST_CASE("long double instantiation agrees with double") {
  ParamSet<long double> v{1, 1, 1, 2, 1, 2, 1, 1, 1, 1};
  const BasicModelParams<long double> p(v);
  const auto e = equilibrium_full(p);
  CHECK(static_cast<double>(e.w_star) == doctest::Approx(0.5351837584879964).epsilon(1e-15));
  CHECK(static_cast<double>(*critical_width(p)) == doctest::Approx(1.8137993642342178).epsilon(1e-15));
}

TEST_CASE("derived constants") {
  const ModelParams p = reference(0.4);
  const InitialData init = InitialData::cosine(0.4, 1, 1, 2.0);
  const DerivedConstants dc = derived_constants(p, init);
  CHECK(dc.r0 == doctest::Approx(4.0));
  CHECK(dc.u_bound == 2.0);
  const DerivedConstants dc2 = derived_constants(p, InitialData::cosine(0.4, 1, 1, 0.5));
  CHECK(dc2.u_bound == 1.0);
}

TEST_CASE("bilinear ODE baseline") {
  const ModelParams p = reference();
  const auto eq = ode_baseline_equilibrium(p);
  CHECK(eq[0] == doctest::Approx(0.25));
  CHECK(eq[1] == doctest::Approx(0.75));
  CHECK(eq[2] == doctest::Approx(1.5));

  const auto traj = ode_baseline(p, {1.0, 0.1, 0.1}, 400.0, 0.01, {100, 20});
  const OdeSample& last = traj.back();
  CHECK(last.t == doctest::Approx(400.0));
  CHECK(std::abs(last.u - 0.25) < 1e-6);
  CHECK(std::abs(last.v - 0.75) < 1e-6);
  CHECK(std::abs(last.w - 1.5) < 1e-6);

  ParamSet<double> v{1, 1, 1, 0.5, 1, 1, 1, 1, 1, 1};  // R0 = 0.5
  const auto decay = ode_baseline(ModelParams(v), {1.0, 0.5, 0.5}, 200.0, 0.01, {1000, 20});
  CHECK(std::abs(decay.back().u - 1.0) < 1e-6);
  CHECK(decay.back().v < 1e-6);
  CHECK(decay.back().w < 1e-6);
  for (const auto& s : decay) {
    CHECK(s.v >= 0);
    CHECK(s.w >= 0);
  }
}

TEST_CASE("infection terms cancel in f1 + f2") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 4.0);
  const ModelParams p = reference();
  for (int i = 0; i < 200; ++i) {
    const double u = U(rng), v = U(rng), w = U(rng);
    CHECK(f1(u, w, p) + f2(u, v, w, p) == doctest::Approx(p.theta() - p.a() * u - p.c() * v).epsilon(1e-13));
  }
}

TEST_CASE("ODE baseline started at its equilibrium stays there") {
  const ModelParams p = reference();
  const auto traj = ode_baseline(p, ode_baseline_equilibrium(p), 50.0, 0.01, {500, 20});
  for (const auto& s : traj) {
    CHECK(std::abs(s.u - 0.25) < 1e-10);
    CHECK(std::abs(s.v - 0.75) < 1e-10);
    CHECK(std::abs(s.w - 1.5) < 1e-10);
  }
}

#include <vfb/classify.hpp>
#include <vfb/spectral.hpp>

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace vfb;

namespace {

constexpr double kLambda = 1.8137993642342178;
constexpr double kPhiT = 0.42504346344108216;

ModelParams reference(double h0 = 0.4, double gamma = 1.0) {
  ParamSet<double> v{1, 1, 1, 2, 1, 2, 1, gamma, gamma, h0};
  return ModelParams(v);
}

SimState state(double g, double h, double max_w, double speed) {
  SimState s;
  s.g = g;
  s.h = h;
  s.z_vals = Vector::Constant(5, 0.0);
  s.z_vals[2] = max_w;
  s.r_vals = Vector::Zero(5);
  s.g_speed = -speed;
  s.h_speed = speed;
  return s;
}

Certificate as_certificate(const CertificateResult& r) {
  REQUIRE(std::holds_alternative<Certificate>(r));
  return std::get<Certificate>(r);
}

// int_0^inf M exp(lambda t + A (1 - e^{-a t})) dt as a convergent series
double series_integral(double M, double lambda, double A, double a) {
  double sum = 0, term = 1;
  for (int n = 0; n < 200; ++n) {
    if (n > 0) term *= -A / n;
    sum += term / (n * a - lambda);
  }
  return M * std::exp(A) * sum;
}

}  // namespace

TEST_CASE("fresh state with 2 h0 < Lambda is undetermined") {
  const ModelParams p = reference();
  const DerivedConstants dc = derived_constants(p, InitialData::cosine(0.4, 1, 1, 1));
  Tolerances tol;
  ClassifierMemory mem = make_classifier_memory(1.0, tol);
  const Classification c = classify_online(state(-0.4, 0.4, 1.0, 1.0), dc, tol, mem);
  CHECK(c.verdict == Verdict::undetermined);
  CHECK(c.rule == "none");
  CHECK_FALSE(c.definite());
}

TEST_CASE("S1 fires at the interpolated crossing time") {
  const ModelParams p = reference();
  const DerivedConstants dc = derived_constants(p, InitialData::cosine(0.4, 1, 1, 1));
  Tolerances tol;
  ClassifierMemory mem = make_classifier_memory(1.0, tol);
  SimState a = state(-0.8, 0.8, 1.0, 1.0);
  a.t = 1.0;
  CHECK_FALSE(classify_online(a, dc, tol, mem).definite());
  SimState b = state(-1.0, 1.0, 1.0, 1.0);
  b.t = 2.0;
  const Classification c = classify_online(b, dc, tol, mem);
  CHECK(c.verdict == Verdict::spreading);
  CHECK(c.rule == "S1");
  CHECK(c.t_decided == doctest::Approx(1.0 + (kLambda - 1.6) / 0.4));
}

TEST_CASE("S1 never fires when R0 <= 1") {
  ParamSet<double> v{1, 1, 1, 0.5, 1, 2, 1, 1, 1, 0.4};
  const ModelParams p(v);
  const DerivedConstants dc = derived_constants(p, InitialData::cosine(0.4, 1, 1, 1));
  Tolerances tol;
  ClassifierMemory mem = make_classifier_memory(1.0, tol);
  CHECK_FALSE(classify_online(state(-50, 50, 1.0, 1.0), dc, tol, mem).definite());
}

TEST_CASE("V1 needs a full window of dead, still steps") {
  const ModelParams p = reference();
  const DerivedConstants dc = derived_constants(p, InitialData::cosine(0.4, 1, 1, 1));
  Tolerances tol;
  tol.window = 5;
  ClassifierMemory mem = make_classifier_memory(2.0, tol);
  CHECK(mem.w_dead == doctest::Approx(2e-5));
  const SimState dead = state(-0.5, 0.5, 1e-5, 1e-8);
  for (int i = 0; i < 4; ++i) CHECK_FALSE(classify_online(dead, dc, tol, mem).definite());
  // a moving front resets the streak
  CHECK_FALSE(classify_online(state(-0.5, 0.5, 1e-5, 1e-6), dc, tol, mem).definite());
  for (int i = 0; i < 4; ++i) CHECK_FALSE(classify_online(dead, dc, tol, mem).definite());
  const Classification c = classify_online(dead, dc, tol, mem);
  CHECK(c.verdict == Verdict::vanishing);
  CHECK(c.rule == "V1");
}

TEST_CASE("certificate with u0 = theta/a is a pure exponential") {
  const ModelParams p = reference();
  // v0 = cos, w0 = phi_t cos gives M = 1
  const InitialData init = InitialData::cosine(0.4, 1.0, kPhiT, 1.0);
  const Certificate c = as_certificate(vanishing_certificate(p, init, 0.8));
  CHECK(c.lambda1 == doctest::Approx(-0.14991307311783568).epsilon(1e-12));
  CHECK(c.phi_t == doctest::Approx(kPhiT).epsilon(1e-12));
  CHECK(c.M == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.delta == 0.0);
  CHECK(c.integral == doctest::Approx(1.0 / 0.14991307311783568).epsilon(1e-12));
  CHECK(c.mu0 == doctest::Approx(0.0538886780437297).epsilon(1e-10));
  CHECK(c.mu0 == doctest::Approx((0.64 - 0.16) * 0.14991307311783568 / (std::numbers::pi * kPhiT)).epsilon(1e-12));
}

TEST_CASE("certificate with an excess of u0 matches the series integral") {
  const ModelParams p = reference();
  const InitialData init = InitialData::cosine(0.4, 1.0, kPhiT, 2.0);
  const Certificate c = as_certificate(vanishing_certificate(p, init, 0.8));
  CHECK(c.delta == 1.0);
  const double A = kPhiT * 2.0 * 1.0 / 1.0;
  CHECK(c.integral == doctest::Approx(series_integral(1.0, c.lambda1, A, 1.0)).epsilon(1e-10));
  CHECK(c.integral == doctest::Approx(14.206243038671046).epsilon(1e-10));
  CHECK(c.mu0 == doctest::Approx(0.025303394275436512).epsilon(1e-10));
}

TEST_CASE("amplitude scales mu0 inversely") {
  const ModelParams p = reference();
  const Certificate one = as_certificate(vanishing_certificate(p, InitialData::cosine(0.4, 1, 1, 1), 0.8));
  const Certificate two = as_certificate(vanishing_certificate(p, InitialData::cosine(0.4, 2, 2, 1), 0.8));
  CHECK(one.M == doctest::Approx(1.0 / kPhiT));
  CHECK(two.mu0 == doctest::Approx(one.mu0 / 2));
}

TEST_CASE("certificate not applicable") {
  const ModelParams p = reference();
  const InitialData init = InitialData::cosine(0.4, 1, 1, 1);
  CHECK(std::holds_alternative<NotApplicable>(vanishing_certificate(p, init, 0.3)));
  CHECK(std::holds_alternative<NotApplicable>(vanishing_certificate(p, init, 1.0)));
}

TEST_CASE("optimised certificate is at least as good as the default") {
  const ModelParams p = reference();
  const InitialData init = InitialData::cosine(0.4, 1, 1, 1);
  const double l0 = default_certificate_l(p);
  CHECK(l0 == doctest::Approx((0.4 + kLambda / 2) / 2));
  const Certificate base = as_certificate(vanishing_certificate(p, init, l0));
  const Certificate best = as_certificate(optimize_certificate(p, init));
  CHECK(best.mu0 >= base.mu0);
  CHECK(best.l > 0.4);
  CHECK(best.l < kLambda / 2);
}

TEST_CASE("axis parsing") {
  const Axis a = Axis::parse("h0=0.1:0.9:5");
  CHECK(a.name == "h0");
  CHECK(a.n == 5);
  const auto v = a.values();
  REQUIRE(v.size() == 5);
  CHECK(v.front() == 0.1);
  CHECK(v.back() == 0.9);
  CHECK(v[2] == doctest::Approx(0.5));
  CHECK(Axis::parse("gamma=2:2:1").values() == std::vector<double>{2.0});
  CHECK_THROWS_AS(Axis::parse("x=1:2:3"), Error);
  CHECK_THROWS_AS(Axis::parse("d=1:2"), Error);
  CHECK_THROWS_AS(Axis::parse("d=1:2:0"), Error);
  CHECK_THROWS_AS(Axis::parse("d=2:1:3"), Error);
  CHECK_THROWS_AS(Axis::parse("d=1:2:3x"), Error);
}

TEST_CASE("analytic sweep cells") {
  const ModelParams p = reference();
  const InitialData init = InitialData::cosine(0.4, 1, 1, 1);
  StepperConfig cfg;
  cfg.n_y = 129;
  // Lambda/2 is about 0.907 at d = 1 and shrinks with d, so every cell is forced
  const auto cells = sweep(p, init, {Axis::parse("h0=0.95:1.5:3"), Axis::parse("d=0.5:1:2")}, cfg, 2);
  REQUIRE(cells.size() == 6);
  for (const SweepCell& c : cells) {
    CHECK(c.source == "analytic");
    CHECK(c.verdict == "Spreading");
    CHECK(c.r0 == doctest::Approx(4.0));
  }
  CHECK(cells[0].h0 == 0.95);
  CHECK(cells[0].d == 0.5);
  CHECK(cells[1].d == 1.0);

  ParamSet<double> v{1, 1, 1, 0.5, 1, 2, 1, 1, 1, 0.4};
  const auto low = sweep(ModelParams(v), init, {Axis::parse("gamma=0.5:5:4")}, cfg, 3);
  REQUIRE(low.size() == 4);
  for (const SweepCell& c : low) {
    CHECK(c.verdict == "Vanishing");
    CHECK(c.source == "analytic");
    CHECK_FALSE(c.lambda_cap);
  }
}

TEST_CASE("sweep order does not depend on the thread count") {
  const ModelParams p = reference(0.4, 0.02);
  const InitialData init = InitialData::cosine(0.4, 1, 1, 1);
  StepperConfig cfg;
  cfg.n_y = 65;
  cfg.t_end = 20;
  const std::vector<Axis> axes{Axis::parse("gamma=0.01:2:3"), Axis::parse("h0=0.3:1:2")};
  const auto a = sweep(p, init, axes, cfg, 1);
  const auto b = sweep(p, init, axes, cfg, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].h0 == b[i].h0);
    CHECK(a[i].gamma == b[i].gamma);
    CHECK(a[i].verdict == b[i].verdict);
    CHECK(a[i].source == b[i].source);
  }
  // h0-major ordering
  CHECK(a[0].h0 == 0.3);
  CHECK(a[1].h0 == 0.3);
  CHECK(a[0].gamma < a[1].gamma);
}

TEST_CASE("threshold search rejects a bad bracket") {
  const ModelParams p = reference();
  const InitialData init = InitialData::cosine(0.4, 1, 1, 1);
  StepperConfig cfg;
  cfg.n_y = 65;
  cfg.t_end = 50;
  CHECK_THROWS_AS(threshold_search(p, init, cfg, 0.5, 0.1, 0.05), Error);
  CHECK_THROWS_AS(threshold_search(p, init, cfg, 0.1, 0.5, 0.0), Error);
}

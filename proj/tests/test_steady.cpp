#include <vfb/spectral.hpp>
#include <vfb/steady.hpp>

#include <doctest.h>

using namespace vfb;

namespace {

ModelParams reference() {
  ParamSet<double> v{1, 1, 1, 2, 1, 2, 1, 1, 1, 1};
  return ModelParams(v);
}

double center(const BvpSolution& s) { return s.w_vals[(s.w_vals.size() - 1) / 2]; }

}  // namespace

TEST_CASE("no positive solution below the critical length") {
  const ModelParams p = reference();
  // lambda1 on (-0.8, 0.8) at m = 1 is about -0.15
  const BvpSolution s = solve_dirichlet_bvp(1.0, p, 0.8, 401);
  CHECK(s.status == BvpStatus::no_positive_solution);
  CHECK(s.converged);
  CHECK(s.lambda1 < 0);
  CHECK(s.w_vals.maxCoeff() == 0.0);
}

TEST_CASE("positive solution above the critical length") {
  const ModelParams p = reference();
  const BvpSolution s = solve_dirichlet_bvp(1.0, p, 2.0, 801);
  REQUIRE(s.status == BvpStatus::positive);
  CHECK(s.converged);
  CHECK(s.monotone);
  CHECK(s.lower_found);
  CHECK(s.residual < 1e-8);
  CHECK(s.uniqueness_gap < 1e-8);
  CHECK(s.w_vals[0] == 0.0);
  CHECK(s.w_vals[s.w_vals.size() - 1] == 0.0);
  const double hat = w_hat(1.0, p).w_hat;
  for (Eigen::Index i = 0; i < s.w_vals.size(); ++i) {
    CHECK(s.w_vals[i] >= 0);
    CHECK(s.w_vals[i] <= hat + 1e-12);
    CHECK(s.v_vals[i] == doctest::Approx(2.0 * s.w_vals[i] / (1 + s.w_vals[i])));
    // even data and operator
    CHECK(std::abs(s.w_vals[i] - s.w_vals[s.w_vals.size() - 1 - i]) < 1e-9);
  }
}

TEST_CASE("maximum grows with l") {
  const ModelParams p = reference();
  double prev = 0;
  for (double l : {1.0, 1.5, 2.5, 4.0}) {
    const BvpSolution s = solve_dirichlet_bvp(1.0, p, l, 801);
    REQUIRE(s.status == BvpStatus::positive);
    CHECK(s.w_vals.maxCoeff() > prev);
    prev = s.w_vals.maxCoeff();
  }
}

TEST_CASE("large l approaches w_hat") {
  const BvpSolution s = solve_dirichlet_bvp(1.0, reference(), 20.0, 4000);
  REQUIRE(s.status == BvpStatus::positive);
  CHECK(std::abs(center(s) - 1.0) < 1e-3);
}

TEST_CASE("boundary-value variant") {
  const ModelParams p = reference();
  const double hat = w_hat(1.0, p).w_hat;

  SUBCASE("boundary value w_hat gives the constant solution") {
    const BvpSolution s = solve_bvp_with_boundary_value(1.0, p, 1.5, hat, 401);
    CHECK((s.w_vals.array() - hat).abs().maxCoeff() < 1e-10);
  }

  SUBCASE("sandwich, monotone in l, and the large-l limit") {
    const double K = 2.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double l : {1.0, 2.0, 4.0, 20.0}) {
      const BvpSolution upper = solve_bvp_with_boundary_value(1.0, p, l, K, 2001);
      REQUIRE(upper.converged);
      CHECK(upper.residual < 1e-8);
      CHECK(upper.uniqueness_gap < 1e-8);
      CHECK(upper.w_vals.maxCoeff() <= K);
      CHECK(upper.w_vals.minCoeff() > 0);
      CHECK(center(upper) < prev);
      prev = center(upper);
      const BvpSolution lower = solve_dirichlet_bvp(1.0, p, l, 2001);
      CHECK((upper.w_vals - lower.w_vals).minCoeff() >= -1e-12);
    }
    CHECK(std::abs(prev - hat) < 1e-3);
  }

  CHECK_THROWS_AS(solve_bvp_with_boundary_value(1.0, p, 1.0, 0.5, 401), Error);
}

TEST_CASE("existence follows the eigenvalue sign across m") {
  const ModelParams p = reference();
  for (double m : {0.3, 0.6, 1.5, 3.0}) {
    for (double l : {0.5, 1.0, 2.0, 3.5}) {
      const BvpSolution s = solve_dirichlet_bvp(m, p, l, 401);
      if (std::abs(s.lambda1) < 1e-2) continue;
      CHECK((s.status == BvpStatus::positive) == (s.lambda1 > 0));
    }
  }
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(solve_dirichlet_bvp(1.0, reference(), 1.0, 32), Error);
  CHECK_THROWS_AS(solve_dirichlet_bvp(1.0, reference(), -1.0, 401), Error);
}

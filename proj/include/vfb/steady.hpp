#pragma once

// Positive steady states of the (v, w) subsystem with u frozen at m:
//
//   -d w'' + q w = k b m w / (c (1 + w)^2),   v = b m w / (c (1 + w))
//
// on (-l, l) with w(+-l) = 0 (or w(+-l) = K for the boundary-value variant),
// computed by monotone iteration between an upper and a lower solution.

#include <vfb/model.hpp>
#include <vfb/types.hpp>

#include <string>

namespace vfb {

enum class BvpStatus { positive, no_positive_solution, undecided };

constexpr const char* to_string(BvpStatus s) {
  switch (s) {
    case BvpStatus::positive: return "positive";
    case BvpStatus::no_positive_solution: return "no_positive_solution";
    case BvpStatus::undecided: return "undecided";
  }
  return "unknown";
}

struct BvpOptions {
  double tol = 1e-10;         // estimated distance to the limit, relative to the starting level
  long max_sweeps = 200000;
  double collapse = 1e-9;     // iterate below collapse * upper level counts as zero
};

struct BvpSolution {
  double l = 0;
  Vector grid;
  Vector w_vals;
  Vector v_vals;
  BvpStatus status = BvpStatus::undecided;
  bool converged = false;
  long iterations = 0;       // sweeps of the iteration started at the upper solution
  double lambda1 = 0;        // closed-form principal eigenvalue on (-l, l)
  double residual = 0;       // sup-norm residual of the discrete equation
  bool monotone = true;      // every sweep moved in the expected direction
  double uniqueness_gap = 0; // sup |from-above - from-below| when both were run
  bool lower_found = false;
  std::string diagnostic;
};

/// Dirichlet problem. Existence is decided by the iteration itself: the
/// sequence started at the upper solution either settles on a positive
/// limit or collapses to zero. Near the existence threshold the iteration
/// stalls and the result is reported as undecided.
BvpSolution solve_dirichlet_bvp(double m, const ModelParams& p, double l, int n, const BvpOptions& opts = {});

/// Same interior equation with w(+-l) = boundary_value >= w_hat(m).
BvpSolution solve_bvp_with_boundary_value(double m, const ModelParams& p, double l, double boundary_value, int n,
                                          const BvpOptions& opts = {});

}  // namespace vfb

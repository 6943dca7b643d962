#pragma once

#include <vfb/model.hpp>

#include <limits>
#include <string>

namespace vfb {

struct SimState;

/// Thresholds of the heuristic vanishing rule.
struct Tolerances {
  double w_dead_rel = 1e-5;   // max w below this fraction of its initial maximum
  double front_still = 1e-7;  // max front speed below this
  int window = 50;            // ... for this many consecutive accepted steps
};

enum class Verdict { spreading, vanishing, undetermined };

constexpr const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::spreading: return "Spreading";
    case Verdict::vanishing: return "Vanishing";
    case Verdict::undetermined: return "Undetermined";
  }
  return "Unknown";
}

/// rule is "S1" (width reached the critical width, rigorous), "V1" (dead
/// infection with still fronts, heuristic) or "none".
struct Classification {
  Verdict verdict = Verdict::undetermined;
  std::string rule = "none";
  double t_decided = std::numeric_limits<double>::quiet_NaN();

  bool definite() const { return verdict != Verdict::undetermined; }
};

/// Per-run memory for the online rules: the V1 streak and the previous
/// width sample used to interpolate the S1 crossing time.
struct ClassifierMemory {
  double w_dead = 0;
  int streak = 0;
  bool has_prev = false;
  double prev_t = 0;
  double prev_width = 0;
};

ClassifierMemory make_classifier_memory(double initial_max_w, const Tolerances& tol);

/// First match wins: S1, then V1, else Undetermined. Call once per accepted step.
Classification classify_online(const SimState& s, const DerivedConstants& dc, const Tolerances& tol,
                               ClassifierMemory& mem);

}  // namespace vfb

#pragma once

#include <vfb/classification.hpp>
#include <vfb/solver.hpp>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace vfb {

/// Explicit supersolution bound: any gamma = max(mu, beta) <= mu0 vanishes.
struct Certificate {
  double l = 0;
  double lambda1 = 0;
  double phi_t = 0;
  double M = 0;
  double delta = 0;      // sup u0 excess over theta/a (clamped at 0)
  double integral = 0;   // int_0^inf f(s) ds
  double mu0 = 0;
};

struct NotApplicable {
  std::string reason;
};

using CertificateResult = std::variant<Certificate, NotApplicable>;

/// Smallest M with v0 <= M cos(pi x/(2 h0)) and w0 <= phi_t M cos(pi x/(2 h0)).
double certificate_amplitude(const InitialData& init, double h0, double phi_t);

CertificateResult vanishing_certificate(const ModelParams& p, const InitialData& init, double l);

/// l = (h0 + Lambda/2) / 2, or 2 h0 when R0 <= 1.
double default_certificate_l(const ModelParams& p);

/// Maximises mu0 over l in (h0, Lambda/2) (or (h0, 10 h0) when R0 <= 1).
CertificateResult optimize_certificate(const ModelParams& p, const InitialData& init);

struct Probe {
  double gamma = 0;
  Verdict verdict = Verdict::undetermined;  // as classified by the run
  Verdict effective = Verdict::undetermined;  // after resolving Undetermined
  bool flagged = false;     // Undetermined resolved by the width rule
  bool simulated = true;    // false when certified without running
  double max_width = 0;
  std::string rule;
};

struct ThresholdBracket {
  double mu_lo = 0;
  double mu_hi = 0;
  std::vector<Probe> probes;
  int flips = 0;
  bool audit_clean = false;
};

/// Bisection on gamma, scaling mu and beta jointly. A lo at or below the
/// certificate's mu0 counts as Vanishing without simulation. Undetermined
/// probes go to Spreading when the width passed 0.9 Lambda, otherwise to
/// Vanishing, and are flagged.
ThresholdBracket threshold_search(const ModelParams& p, const InitialData& init, const StepperConfig& cfg, double lo,
                                  double hi, double rel_tol, std::optional<double> certified_mu0 = std::nullopt);

struct Axis {
  std::string name;  // h0, d or gamma
  double lo = 0, hi = 0;
  int n = 1;

  std::vector<double> values() const;
  /// Parses "name=LO:HI:N".
  static Axis parse(const std::string& text);
};

struct SweepCell {
  double h0 = 0, d = 0, gamma = 0;
  double r0 = 0;
  std::optional<double> lambda_cap;
  std::string verdict;   // Spreading, Vanishing, Undetermined or Error
  std::string source;    // analytic or simulated
  std::string error;
};

/// Cells in h0-major, then d, then gamma order. Runs on `threads` workers
/// (0 picks the hardware concurrency); output order never depends on it.
std::vector<SweepCell> sweep(const ModelParams& base, const InitialData& init, const std::vector<Axis>& axes,
                             const StepperConfig& cfg, unsigned threads = 0);

}  // namespace vfb

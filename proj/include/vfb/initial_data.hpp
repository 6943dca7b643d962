#pragma once

#include <vfb/types.hpp>

#include <string>
#include <variant>
#include <vector>

namespace vfb {

/// One initial profile: a constant, amplitude*cos(pi x / (2 half_width)),
/// or tabulated samples with linear interpolation.
class Profile {
 public:
  struct Constant {
    double value;
  };
  struct Cosine {
    double amplitude;
    double half_width;
  };
  struct Tabulated {
    std::vector<double> x;
    std::vector<double> y;
  };

  /// Behaviour outside the tabulated range (or outside [-L, L] for Cosine).
  enum class Outside { clamp, zero };

  static Profile constant(double value);
  static Profile cosine(double amplitude, double half_width);
  static Profile tabulated(std::vector<double> x, std::vector<double> y, Outside outside);

  double operator()(double x) const;
  double sup() const;

  /// sup over (-L, L) of value(x) / cos(pi x / (2L)), including the
  /// endpoint limits obtained from the one-sided slopes.
  double cosine_envelope(double half_width) const;

  /// Slope at x from the inside of [-L, L]: right-sided at -L, left-sided at +L.
  double one_sided_slope(double x, bool from_right) const;

  /// Same profile on a rescaled support: x -> x * factor.
  Profile rescaled(double factor) const;

  bool is_constant() const { return std::holds_alternative<Constant>(rep_); }
  bool is_cosine() const { return std::holds_alternative<Cosine>(rep_); }
  bool is_tabulated() const { return std::holds_alternative<Tabulated>(rep_); }
  const std::variant<Constant, Cosine, Tabulated>& rep() const { return rep_; }

 private:
  Profile(std::variant<Constant, Cosine, Tabulated> rep, Outside outside) : rep_(std::move(rep)), outside_(outside) {}

  std::variant<Constant, Cosine, Tabulated> rep_;
  Outside outside_ = Outside::clamp;
};

struct InitialData {
  Profile u0 = Profile::constant(1.0);
  Profile v0 = Profile::cosine(1.0, 1.0);
  Profile w0 = Profile::cosine(1.0, 1.0);

  /// u0 constant, v0 = v_amp cos(pi x/(2 h0)), w0 = w_amp cos(pi x/(2 h0)).
  static InitialData cosine(double h0, double v_amp, double w_amp, double u0);

  /// Maps the v0/w0 support from [-h0_old, h0_old] to [-h0_new, h0_new].
  InitialData with_half_width(double h0_old, double h0_new) const;
};

/// Checks the initial-data constraints on [-h0, h0]: v0 and w0 vanish at the
/// ends, w0 has strictly nonzero inward slope there, u0 > 0 everywhere and
/// v0, w0 > 0 inside. Throws invalid_initial_data naming the violated clause.
void validate_initial_data(const InitialData& init, double h0);

}  // namespace vfb

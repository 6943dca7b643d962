#pragma once

#include <vfb/classify.hpp>
#include <vfb/model.hpp>
#include <vfb/solver.hpp>
#include <vfb/steady.hpp>

#include <json.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace vfb {

struct InitialConfig {
  std::string profile = "cosine";     // "cosine" or "samples"
  double amplitude = 1.0;
  std::optional<double> v_amplitude;  // defaults to amplitude
  std::optional<double> w_amplitude;  // defaults to amplitude
  std::optional<double> u0;           // constant u0; defaults to theta/a
  std::string samples;                // CSV x,v,w on [-h0, h0] for profile "samples"
  std::string u0_samples;             // optional CSV x,u
};

struct OutputConfig {
  std::string directory = "vfb_out";
  bool profiles = true;
  bool series = true;
};

struct RunConfig {
  ParamSet<double> model;
  InitialConfig initial;
  StepperConfig stepper;
  OutputConfig outputs;
  std::string base_dir = ".";  // sample paths are resolved against this

  ModelParams params() const { return ModelParams(model); }
  /// Builds and validates the initial data.
  InitialData initial_data() const;
};

/// Strict parse: unknown keys are rejected with their key path, omitted
/// initial/stepper/outputs fields take defaults, every invariant is checked.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& base_dir = ".");

/// Every field with defaults resolved; feeding it back reproduces the run.
nlohmann::json effective_config(const RunConfig& cfg);

/// %.17g; NaN and infinities print as "nan"/"inf" (CSV writers print NaN as blank).
std::string format_number(double x);

/// JSON text with all floating-point numbers printed to 17 significant digits.
std::string dump_json(const nlohmann::json& j, int indent = 2);

nlohmann::json to_json(const Certificate& c);
nlohmann::json to_json(const ThresholdBracket& b);
nlohmann::json to_json(const Classification& c);
nlohmann::json summary_json(const RunOutcome& out, const std::optional<Certificate>& cert = std::nullopt,
                            const std::optional<ThresholdBracket>& bracket = std::nullopt);

void write_profiles_csv(std::ostream& os, const std::vector<ProfileSnapshot>& profiles);
void write_series_csv(std::ostream& os, const std::vector<SeriesRow>& series);
void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells);
void write_bvp_csv(std::ostream& os, const BvpSolution& s);
void write_ode_csv(std::ostream& os, const std::vector<OdeSample>& samples);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace vfb

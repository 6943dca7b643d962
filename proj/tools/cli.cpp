#include <cli.hpp>

#include <vfb/classify.hpp>
#include <vfb/io.hpp>
#include <vfb/spectral.hpp>
#include <vfb/steady.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <sstream>

namespace vfb::cli {

namespace {

using nlohmann::json;

std::string prepare_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::validation, "cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

std::string join(const std::string& dir, const std::string& name) { return (std::filesystem::path(dir) / name).string(); }

void report(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  err << "error: " << message << '\n';
  json j = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
  err << dump_json(j, -1) << '\n';
}

std::optional<Certificate> default_certificate(const ModelParams& p, const InitialData& init) {
  const CertificateResult r = vanishing_certificate(p, init, default_certificate_l(p));
  if (const auto* c = std::get_if<Certificate>(&r)) return *c;
  return std::nullopt;
}

struct Options {
  std::string config;
  std::string out_dir;
  double m = 0, l = 0, boundary = 0;
  int n = 1001;
  double lo = 0, hi = 0, rtol = 0.05;
  double t_end = 0, dt = 1e-2;
  int every = 10;
  unsigned threads = 0;
  bool optimize = false;
  bool no_certificate = false;
  std::vector<std::string> axes;
};

int cmd_simulate(const Options& o, std::ostream& out) {
  const RunConfig rc = parse_config(o.config);
  const ModelParams p = rc.params();
  const InitialData init = rc.initial_data();
  const std::string dir = prepare_dir(o.out_dir.empty() ? rc.outputs.directory : o.out_dir);
  write_text_file(join(dir, "effective_config.json"), dump_json(effective_config(rc)) + "\n");

  const RunOutcome res = run(p, init, rc.stepper);
  const std::optional<Certificate> cert = default_certificate(p, init);
  if (rc.outputs.series) {
    std::ostringstream os;
    write_series_csv(os, res.series);
    write_text_file(join(dir, "series.csv"), os.str());
  }
  if (rc.outputs.profiles && rc.stepper.keep_profiles) {
    std::ostringstream os;
    write_profiles_csv(os, res.profiles);
    write_text_file(join(dir, "profiles.csv"), os.str());
  }
  write_text_file(join(dir, "summary.json"), dump_json(summary_json(res, cert)) + "\n");
  out << "verdict=" << to_string(res.classification.verdict) << " rule=" << res.classification.rule
      << " t_decided=" << format_number(res.classification.t_decided) << " t_final=" << format_number(res.final_state.t)
      << " final_width=" << format_number(res.final_width) << " r0=" << format_number(res.constants.r0) << '\n';
  return 0;
}

int cmd_eigen(const Options& o, std::ostream& out) {
  const RunConfig rc = parse_config(o.config);
  const ModelParams p = rc.params();
  if (!(o.l > 0)) throw Error(ErrorKind::validation, "--l must be positive");
  const EigenProblem ep = eigen_problem_for_model(o.m, p, -o.l, o.l);
  const EigenResult er = principal_eigenvalue(ep);
  const Thresholds th = thresholds(ep);
  json j = {{"m", o.m},
            {"l1", ep.l1},
            {"l2", ep.l2},
            {"rho1", er.rho1},
            {"lambda1", er.lambda1},
            {"gamma_coeff", er.gamma_coeff},
            {"psi_scale", er.psi_scale},
            {"at_threshold", std::abs(er.lambda1) < kThresholdBand},
            {"d_star", th.d_star ? json(*th.d_star) : json(nullptr)},
            {"l_star", th.l_star ? json(*th.l_star) : json(nullptr)}};
  out << dump_json(j) << '\n';
  return 0;
}

int cmd_steady(const Options& o, std::ostream& out, bool with_boundary) {
  const RunConfig rc = parse_config(o.config);
  const ModelParams p = rc.params();
  const BvpSolution s = with_boundary ? solve_bvp_with_boundary_value(o.m, p, o.l, o.boundary, o.n)
                                      : solve_dirichlet_bvp(o.m, p, o.l, o.n);
  const Eigen::Index mid = (s.grid.size() - 1) / 2;
  json j = {{"m", o.m},
            {"l", s.l},
            {"n", static_cast<long>(s.grid.size())},
            {"status", to_string(s.status)},
            {"converged", s.converged},
            {"iterations", s.iterations},
            {"lambda1", s.lambda1},
            {"residual", s.residual},
            {"monotone", s.monotone},
            {"uniqueness_gap", s.uniqueness_gap},
            {"center_w", s.w_vals[mid]},
            {"center_v", s.v_vals[mid]},
            {"max_w", s.w_vals.maxCoeff()},
            {"diagnostic", s.diagnostic}};
  if (with_boundary) j["boundary"] = o.boundary;
  out << dump_json(j) << '\n';
  if (!o.out_dir.empty()) {
    std::ostringstream os;
    write_bvp_csv(os, s);
    write_text_file(join(prepare_dir(o.out_dir), "steady_profile.csv"), os.str());
  }
  return s.converged ? 0 : 3;
}

int cmd_thresholds(const Options& o, std::ostream& out) {
  const RunConfig rc = parse_config(o.config);
  const ModelParams p = rc.params();
  const DerivedConstants dc = derived_constants(p, rc.initial_data());
  json j = {{"r0", dc.r0},
            {"lambda_cap", dc.lambda_cap ? json(*dc.lambda_cap) : json(nullptr)},
            {"d_cap", dc.d_cap ? json(*dc.d_cap) : json(nullptr)},
            {"u_bound", dc.u_bound},
            {"initial_width_supercritical", dc.lambda_cap ? json(2 * p.h0() >= *dc.lambda_cap) : json(false)}};
  if (dc.r0 > 1) {
    const auto e = equilibrium_full(p);
    j["equilibrium_triple"] = {e.u_star, e.v_star, e.w_star};
    const auto hat = w_hat(p.theta() / p.a(), p);
    j["w_hat"] = hat.w_hat;
    j["v_hat"] = hat.v_hat;
  } else {
    j["equilibrium_triple"] = nullptr;
  }
  out << dump_json(j) << '\n';
  return 0;
}

int cmd_certificate(const Options& o, std::ostream& out) {
  const RunConfig rc = parse_config(o.config);
  const ModelParams p = rc.params();
  const InitialData init = rc.initial_data();
  const CertificateResult r = o.optimize ? optimize_certificate(p, init)
                                         : vanishing_certificate(p, init, o.l > 0 ? o.l : default_certificate_l(p));
  json j;
  if (const auto* c = std::get_if<Certificate>(&r)) {
    j = {{"applicable", true}, {"certificate", to_json(*c)}};
  } else {
    j = {{"applicable", false}, {"reason", std::get<NotApplicable>(r).reason}};
  }
  out << dump_json(j) << '\n';
  return 0;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const RunConfig rc = parse_config(o.config);
  std::vector<Axis> axes;
  for (const auto& a : o.axes) axes.push_back(Axis::parse(a));
  const auto cells = sweep(rc.params(), rc.initial_data(), axes, rc.stepper, o.threads);
  std::ostringstream os;
  write_sweep_csv(os, cells);
  out << os.str();
  if (!o.out_dir.empty()) write_text_file(join(prepare_dir(o.out_dir), "sweep.csv"), os.str());
  return 0;
}

int cmd_threshold_search(const Options& o, std::ostream& out) {
  const RunConfig rc = parse_config(o.config);
  const ModelParams p = rc.params();
  const InitialData init = rc.initial_data();
  std::optional<Certificate> cert;
  if (!o.no_certificate) {
    const CertificateResult r = optimize_certificate(p, init);
    if (const auto* c = std::get_if<Certificate>(&r)) cert = *c;
  }
  const ThresholdBracket br =
      threshold_search(p, init, rc.stepper, o.lo, o.hi, o.rtol, cert ? std::optional<double>(cert->mu0) : std::nullopt);
  json j = {{"threshold_bracket", to_json(br)}, {"certificate", cert ? to_json(*cert) : json(nullptr)}};
  out << dump_json(j) << '\n';
  if (!o.out_dir.empty()) write_text_file(join(prepare_dir(o.out_dir), "threshold_search.json"), dump_json(j) + "\n");
  if (!br.audit_clean) {
    std::ostringstream os;
    os << "monotonicity audit failed: " << br.flips << " verdict flips across probes";
    throw Error(ErrorKind::monotonicity_violation, os.str());
  }
  return 0;
}

int cmd_ode(const Options& o, std::ostream& out) {
  const RunConfig rc = parse_config(o.config);
  const ModelParams p = rc.params();
  const InitialData init = rc.initial_data();
  if (!(o.t_end > 0)) throw Error(ErrorKind::validation, "--t-end must be positive");
  if (!(o.dt > 0)) throw Error(ErrorKind::validation, "--dt must be positive");
  if (o.every < 1) throw Error(ErrorKind::validation, "--every must be at least 1");
  OdeBaselineOptions opts;
  opts.sample_every = o.every;
  const auto samples = ode_baseline(p, {init.u0(0.0), init.v0(0.0), init.w0(0.0)}, o.t_end, o.dt, opts);
  std::ostringstream os;
  write_ode_csv(os, samples);
  out << os.str();
  if (!o.out_dir.empty()) write_text_file(join(prepare_dir(o.out_dir), "ode_baseline.csv"), os.str());
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Free-boundary virus infection model toolkit", "vfb"};
  app.require_subcommand(1);
  Options o;

  const auto config = [&](CLI::App* sub) { sub->add_option("--config", o.config, "JSON config file")->required(); };

  auto* simulate = app.add_subcommand("simulate", "Run the free-boundary simulation");
  config(simulate);
  simulate->add_option("--out", o.out_dir, "Output directory (overrides outputs.directory)");

  auto* eigen = app.add_subcommand("eigen", "Principal eigenvalue on (-L, L) for a frozen level m");
  config(eigen);
  eigen->add_option("--m", o.m, "Frozen uninfected level")->required();
  eigen->add_option("--l", o.l, "Half-width L")->required();

  auto* steady = app.add_subcommand("steady", "Positive steady state on (-L, L)");
  config(steady);
  steady->add_option("--m", o.m, "Frozen uninfected level")->required();
  steady->add_option("--l", o.l, "Half-width L")->required();
  auto* boundary = steady->add_option("--boundary", o.boundary, "Boundary value instead of zero");
  steady->add_option("--n", o.n, "Grid nodes including endpoints")->capture_default_str();
  steady->add_option("--out", o.out_dir, "Directory for steady_profile.csv");

  auto* thresholds_cmd = app.add_subcommand("thresholds", "R0, critical width and critical diffusion");
  config(thresholds_cmd);

  auto* certificate = app.add_subcommand("certificate", "Vanishing certificate mu0");
  config(certificate);
  certificate->add_option("--l", o.l, "Certificate half-width (default (h0 + Lambda/2)/2)");
  certificate->add_flag("--optimize", o.optimize, "Choose l to maximise mu0");

  auto* sweep_cmd = app.add_subcommand("sweep", "Verdict table over parameter axes");
  config(sweep_cmd);
  sweep_cmd->add_option("--axis", o.axes, "name=LO:HI:N with name in {h0, d, gamma}")->required();
  sweep_cmd->add_option("--threads", o.threads, "Worker threads (0 = hardware)");
  sweep_cmd->add_option("--out", o.out_dir, "Directory for sweep.csv");

  auto* search = app.add_subcommand("threshold-search", "Bisection for the spreading threshold in gamma");
  config(search);
  search->add_option("--lo", o.lo, "Vanishing endpoint")->required();
  search->add_option("--hi", o.hi, "Spreading endpoint")->required();
  search->add_option("--rtol", o.rtol, "Relative bracket width")->capture_default_str();
  search->add_flag("--no-certificate", o.no_certificate, "Simulate lo even if certified");
  search->add_option("--out", o.out_dir, "Directory for threshold_search.json");

  auto* ode = app.add_subcommand("ode-baseline", "Bilinear ODE system without space");
  config(ode);
  ode->add_option("--t-end", o.t_end, "Final time")->required();
  ode->add_option("--dt", o.dt, "RK4 step")->capture_default_str();
  ode->add_option("--every", o.every, "Print every N-th step")->capture_default_str();
  ode->add_option("--out", o.out_dir, "Directory for ode_baseline.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report(err, "usage", e.what(), 2);
    err << app.help();
    return 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(o, out);
    if (eigen->parsed()) return cmd_eigen(o, out);
    if (steady->parsed()) return cmd_steady(o, out, boundary->count() > 0);
    if (thresholds_cmd->parsed()) return cmd_thresholds(o, out);
    if (certificate->parsed()) return cmd_certificate(o, out);
    if (sweep_cmd->parsed()) return cmd_sweep(o, out);
    if (search->parsed()) return cmd_threshold_search(o, out);
    if (ode->parsed()) return cmd_ode(o, out);
  } catch (const Error& e) {
    const int code = is_input_error(e.kind()) ? 2 : 3;
    report(err, to_string(e.kind()), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    report(err, "internal", e.what(), 3);
    return 3;
  }
  report(err, "usage", "no subcommand given", 2);
  return 2;
}

}  // namespace vfb::cli

#include <vfb/io.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace vfb {

using nlohmann::json;

namespace {

Error invalid(const std::string& msg) { return Error(ErrorKind::validation, msg); }

// Tracks which keys of one object were consumed so leftovers can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw invalid((path_.empty() ? "config" : path_) + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key) {
    if (!has(key)) throw invalid(name(key) + " is required");
    const json& v = raw(key);
    if (!v.is_number()) throw invalid(name(key) + " must be a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }
  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  long integer(const std::string& key, long fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (v.is_number_integer()) return v.get<long>();
    if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) return static_cast<long>(v.get<double>());
    throw invalid(name(key) + " must be an integer");
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw invalid(name(key) + " must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw invalid(name(key) + " must be a string");
    return v.get<std::string>();
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw invalid("unknown key '" + name(item.key()) + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void positive(double x, const std::string& name) {
  if (!(x > 0) || !std::isfinite(x)) throw invalid(name + " must be positive");
}

// Reads a CSV with a header row and returns the requested columns.
std::vector<std::vector<double>> read_columns(const std::string& path, const std::vector<std::string>& wanted) {
  std::ifstream in(path);
  if (!in) throw invalid("cannot open sample file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw invalid("sample file '" + path + "' is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell.erase(0, cell.find_first_not_of(" \t\r"));
      cell.erase(cell.find_last_not_of(" \t\r") + 1);
      header.push_back(cell);
    }
  }
  std::vector<std::size_t> index;
  for (const auto& w : wanted) {
    const auto it = std::find(header.begin(), header.end(), w);
    if (it == header.end()) throw invalid("sample file '" + path + "' has no column '" + w + "'");
    index.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  std::vector<std::vector<double>> cols(wanted.size());
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw invalid("sample file '" + path + "' line " + std::to_string(row) + ": bad number '" + cell + "'");
      }
    }
    for (std::size_t k = 0; k < index.size(); ++k) {
      if (index[k] >= vals.size())
        throw invalid("sample file '" + path + "' line " + std::to_string(row) + ": missing column");
      cols[k].push_back(vals[index[k]]);
    }
  }
  return cols;
}

std::string resolve(const std::string& base, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base) / p).string();
}

void emit(std::string& out, const json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& item : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += json(item.key()).dump();
        out += indent < 0 ? ":" : ": ";
        emit(out, item.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += indent < 0 ? "," : ", ";
        first = false;
        emit(out, v, indent, depth + 1);
      }
      out += ']';
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_number(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
json number_or_null(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::string csv_number(double x) { return std::isnan(x) ? std::string() : format_number(x); }

}  // namespace

InitialData RunConfig::initial_data() const {
  const ModelParams p = params();
  const double h0 = p.h0();
  const double u0 = initial.u0.value_or(p.theta() / p.a());
  InitialData init;
  if (initial.profile == "cosine") {
    init = InitialData::cosine(h0, initial.v_amplitude.value_or(initial.amplitude),
                               initial.w_amplitude.value_or(initial.amplitude), u0);
  } else {
    const auto cols = read_columns(resolve(base_dir, initial.samples), {"x", "v", "w"});
    init.u0 = Profile::constant(u0);
    init.v0 = Profile::tabulated(cols[0], cols[1], Profile::Outside::zero);
    init.w0 = Profile::tabulated(cols[0], cols[2], Profile::Outside::zero);
  }
  if (!initial.u0_samples.empty()) {
    const auto cols = read_columns(resolve(base_dir, initial.u0_samples), {"x", "u"});
    init.u0 = Profile::tabulated(cols[0], cols[1], Profile::Outside::clamp);
  }
  validate_initial_data(init, h0);
  return init;
}

RunConfig parse_config_text(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << "config parse error at line " << line << ", column " << col << ": " << e.what();
    throw invalid(os.str());
  }

  RunConfig cfg;
  cfg.base_dir = base_dir;
  ObjectReader top(doc, "");
  if (!top.has("model")) throw invalid("model is required");

  ObjectReader m(top.raw("model"), "model");
  ParamSet<double>& ps = cfg.model;
  ps.d = m.number("d");
  ps.theta = m.number("theta");
  ps.a = m.number("a");
  ps.b = m.number("b");
  ps.c = m.number("c");
  ps.k = m.number("k");
  ps.q = m.number("q");
  ps.mu = m.number("mu");
  ps.beta = m.number("beta");
  ps.h0 = m.number("h0");
  m.finish();
  const ModelParams p(ps);

  if (top.has("initial")) {
    ObjectReader in(top.raw("initial"), "initial");
    InitialConfig& ic = cfg.initial;
    ic.profile = in.string("profile", ic.profile);
    if (ic.profile != "cosine" && ic.profile != "samples")
      throw invalid("initial.profile must be \"cosine\" or \"samples\"");
    ic.amplitude = in.number("amplitude", ic.amplitude);
    ic.v_amplitude = in.optional_number("v_amplitude");
    ic.w_amplitude = in.optional_number("w_amplitude");
    ic.u0 = in.optional_number("u0");
    ic.samples = in.string("samples", "");
    ic.u0_samples = in.string("u0_samples", "");
    in.finish();
    if (ic.profile == "samples" && ic.samples.empty())
      throw invalid("initial.samples is required when initial.profile is \"samples\"");
  }
  positive(cfg.initial.amplitude, "initial.amplitude");
  if (cfg.initial.v_amplitude) positive(*cfg.initial.v_amplitude, "initial.v_amplitude");
  if (cfg.initial.w_amplitude) positive(*cfg.initial.w_amplitude, "initial.w_amplitude");
  if (cfg.initial.u0) positive(*cfg.initial.u0, "initial.u0");

  if (top.has("stepper")) {
    ObjectReader st(top.raw("stepper"), "stepper");
    StepperConfig& sc = cfg.stepper;
    sc.n_y = static_cast<int>(st.integer("n_y", sc.n_y));
    sc.dt_init = st.number("dt_init", sc.dt_init);
    sc.dt_max = st.number("dt_max", sc.dt_max);
    sc.cfl_safety = st.number("cfl_safety", sc.cfl_safety);
    sc.t_end = st.number("t_end", sc.t_end);
    sc.X = st.number("X", sc.X);
    sc.u_spacing = st.number("u_spacing", sc.u_spacing);
    sc.snapshot_every = st.number("snapshot_every", sc.snapshot_every);
    sc.stop_on_decision = st.boolean("stop_on_decision", sc.stop_on_decision);
    sc.keep_profiles = st.boolean("keep_profiles", sc.keep_profiles);
    sc.max_retries = static_cast<int>(st.integer("max_retries", sc.max_retries));
    sc.max_steps = st.integer("max_steps", sc.max_steps);
    if (st.has("tolerances")) {
      ObjectReader tl(st.raw("tolerances"), "stepper.tolerances");
      sc.tolerances.w_dead_rel = tl.number("w_dead_rel", sc.tolerances.w_dead_rel);
      sc.tolerances.front_still = tl.number("front_still", sc.tolerances.front_still);
      sc.tolerances.window = static_cast<int>(tl.integer("window", sc.tolerances.window));
      tl.finish();
    }
    st.finish();
  }
  cfg.stepper.validate();

  if (top.has("outputs")) {
    ObjectReader out(top.raw("outputs"), "outputs");
    cfg.outputs.directory = out.string("directory", cfg.outputs.directory);
    cfg.outputs.profiles = out.boolean("profiles", cfg.outputs.profiles);
    cfg.outputs.series = out.boolean("series", cfg.outputs.series);
    out.finish();
  }
  top.finish();

  // builds the profiles and runs the initial-data checks before any computation
  (void)cfg.initial_data();
  (void)p;
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_config_text(ss.str(), dir.empty() ? "." : dir);
}

json effective_config(const RunConfig& cfg) {
  const ModelParams p = cfg.params();
  const ParamSet<double>& m = cfg.model;
  json j;
  j["model"] = {{"d", m.d}, {"theta", m.theta}, {"a", m.a}, {"b", m.b}, {"c", m.c},
                {"k", m.k}, {"q", m.q}, {"mu", m.mu}, {"beta", m.beta}, {"h0", m.h0}};
  const InitialConfig& ic = cfg.initial;
  json init = {{"profile", ic.profile},
               {"amplitude", ic.amplitude},
               {"v_amplitude", ic.v_amplitude.value_or(ic.amplitude)},
               {"w_amplitude", ic.w_amplitude.value_or(ic.amplitude)},
               {"u0", ic.u0.value_or(p.theta() / p.a())}};
  if (!ic.samples.empty()) init["samples"] = resolve(cfg.base_dir, ic.samples);
  if (!ic.u0_samples.empty()) init["u0_samples"] = resolve(cfg.base_dir, ic.u0_samples);
  j["initial"] = init;
  const StepperConfig& s = cfg.stepper;
  j["stepper"] = {{"n_y", s.n_y},
                  {"dt_init", s.dt_init},
                  {"dt_max", s.dt_max},
                  {"cfl_safety", s.cfl_safety},
                  {"t_end", s.t_end},
                  {"X", s.X},
                  {"u_spacing", s.u_spacing},
                  {"snapshot_every", s.snapshot_every},
                  {"stop_on_decision", s.stop_on_decision},
                  {"keep_profiles", s.keep_profiles},
                  {"max_retries", s.max_retries},
                  {"max_steps", s.max_steps},
                  {"tolerances",
                   {{"w_dead_rel", s.tolerances.w_dead_rel},
                    {"front_still", s.tolerances.front_still},
                    {"window", s.tolerances.window}}}};
  j["outputs"] = {{"directory", cfg.outputs.directory},
                  {"profiles", cfg.outputs.profiles},
                  {"series", cfg.outputs.series}};
  return j;
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dump_json(const json& j, int indent) {
  std::string out;
  emit(out, j, indent, 0);
  return out;
}

json to_json(const Classification& c) {
  return {{"verdict", to_string(c.verdict)}, {"rule", c.rule}, {"t_decided", number_or_null(c.t_decided)}};
}

json to_json(const Certificate& c) {
  return {{"l", c.l},         {"lambda1", c.lambda1},   {"phi_t", c.phi_t}, {"M", c.M},
          {"delta", c.delta}, {"integral", c.integral}, {"mu0", c.mu0}};
}

json to_json(const ThresholdBracket& b) {
  json probes = json::array();
  for (const Probe& p : b.probes)
    probes.push_back({{"gamma", p.gamma},
                      {"verdict", to_string(p.verdict)},
                      {"effective", to_string(p.effective)},
                      {"flagged", p.flagged},
                      {"simulated", p.simulated},
                      {"rule", p.rule},
                      {"max_width", p.max_width}});
  return {{"mu_lo", b.mu_lo}, {"mu_hi", b.mu_hi}, {"flips", b.flips}, {"audit_clean", b.audit_clean},
          {"probes", probes}};
}

json summary_json(const RunOutcome& out, const std::optional<Certificate>& cert,
                  const std::optional<ThresholdBracket>& bracket) {
  json j;
  j["classification"] = to_json(out.classification);
  j["r0"] = out.constants.r0;
  j["lambda_cap"] = number_or_null(out.constants.lambda_cap);
  j["d_cap"] = number_or_null(out.constants.d_cap);
  j["final_width"] = out.final_width;
  j["max_width"] = out.max_width;
  j["width_over_lambda"] = number_or_null(out.width_over_lambda);
  j["t_final"] = out.final_state.t;
  j["center_triple"] = {out.center_triple[0], out.center_triple[1], out.center_triple[2]};
  j["equilibrium_triple"] = out.equilibrium
                                ? json{out.equilibrium->u_star, out.equilibrium->v_star, out.equilibrium->w_star}
                                : json(nullptr);
  j["clip_count"] = out.final_state.clip_count;
  j["steps"] = out.final_state.steps;
  j["rejections"] = out.final_state.rejections;
  j["front_speeds"] = {out.final_state.g_speed, out.final_state.h_speed};
  if (cert) j["certificate"] = to_json(*cert);
  if (bracket) j["threshold_bracket"] = to_json(*bracket);
  return j;
}

void write_profiles_csv(std::ostream& os, const std::vector<ProfileSnapshot>& profiles) {
  os << "t,x,u,v,w\n";
  for (const ProfileSnapshot& s : profiles)
    for (Eigen::Index j = 0; j < s.x.size(); ++j)
      os << format_number(s.t) << ',' << format_number(s.x[j]) << ',' << format_number(s.u[j]) << ','
         << csv_number(s.v[j]) << ',' << csv_number(s.w[j]) << '\n';
}

void write_series_csv(std::ostream& os, const std::vector<SeriesRow>& series) {
  os << "t,g,h,width,max_w,max_v,u_center\n";
  for (const SeriesRow& r : series)
    os << format_number(r.t) << ',' << format_number(r.g) << ',' << format_number(r.h) << ','
       << format_number(r.width) << ',' << format_number(r.max_w) << ',' << format_number(r.max_v) << ','
       << format_number(r.u_center) << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells) {
  os << "h0,d,gamma,r0,lambda_cap,verdict,source\n";
  for (const SweepCell& c : cells)
    os << format_number(c.h0) << ',' << format_number(c.d) << ',' << format_number(c.gamma) << ','
       << format_number(c.r0) << ',' << (c.lambda_cap ? format_number(*c.lambda_cap) : std::string()) << ','
       << c.verdict << ',' << c.source << '\n';
}

void write_bvp_csv(std::ostream& os, const BvpSolution& s) {
  os << "x,v,w\n";
  for (Eigen::Index i = 0; i < s.grid.size(); ++i)
    os << format_number(s.grid[i]) << ',' << format_number(s.v_vals[i]) << ',' << format_number(s.w_vals[i]) << '\n';
}

void write_ode_csv(std::ostream& os, const std::vector<OdeSample>& samples) {
  os << "t,u,v,w\n";
  for (const OdeSample& s : samples)
    os << format_number(s.t) << ',' << format_number(s.u) << ',' << format_number(s.v) << ',' << format_number(s.w)
       << '\n';
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::validation, "cannot write '" + path + "'");
  out << contents;
  if (!out) throw Error(ErrorKind::validation, "write failed for '" + path + "'");
}

}  // namespace vfb

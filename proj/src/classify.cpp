#include <vfb/classify.hpp>
#include <vfb/spectral.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace vfb {

ClassifierMemory make_classifier_memory(double initial_max_w, const Tolerances& tol) {
  ClassifierMemory mem;
  mem.w_dead = tol.w_dead_rel * initial_max_w;
  return mem;
}

Classification classify_online(const SimState& s, const DerivedConstants& dc, const Tolerances& tol,
                               ClassifierMemory& mem) {
  Classification c;
  const double width = s.width();
  if (dc.r0 > 1 && dc.lambda_cap && width >= *dc.lambda_cap) {
    const double cap = *dc.lambda_cap;
    c.verdict = Verdict::spreading;
    c.rule = "S1";
    c.t_decided = s.t;
    if (mem.has_prev && mem.prev_width < cap && width > mem.prev_width)
      c.t_decided = mem.prev_t + (cap - mem.prev_width) / (width - mem.prev_width) * (s.t - mem.prev_t);
  } else {
    const bool dead = s.max_w() < mem.w_dead;
    const bool still = std::max(std::abs(s.g_speed), std::abs(s.h_speed)) < tol.front_still;
    mem.streak = dead && still ? mem.streak + 1 : 0;
    if (mem.streak >= tol.window) {
      c.verdict = Verdict::vanishing;
      c.rule = "V1";
      c.t_decided = s.t;
    }
  }
  mem.has_prev = true;
  mem.prev_t = s.t;
  mem.prev_width = width;
  return c;
}

double certificate_amplitude(const InitialData& init, double h0, double phi_t) {
  return std::max(init.v0.cosine_envelope(h0), init.w0.cosine_envelope(h0) / phi_t);
}

CertificateResult vanishing_certificate(const ModelParams& p, const InitialData& init, double l) {
  const double h0 = p.h0();
  if (!(l > h0)) return NotApplicable{"certificate half-width l must exceed h0"};
  const double lambda1 = eigen_for_model(p.theta() / p.a(), p, -l, l).lambda1;
  if (!(lambda1 < 0)) return NotApplicable{"principal eigenvalue on (-l, l) is not negative (2l >= Lambda)"};

  Certificate cert;
  cert.l = l;
  const PhiTilde pt = phi_tilde(p, l);
  cert.lambda1 = pt.lambda1;
  cert.phi_t = pt.phi_t;
  cert.M = certificate_amplitude(init, h0, cert.phi_t);
  if (!(cert.M > 0) || !std::isfinite(cert.M))
    return NotApplicable{"initial data admit no finite cosine envelope"};
  cert.delta = std::max(0.0, init.u0.sup() - p.theta() / p.a());

  // f(t) = M exp(lambda1 t + A (1 - e^{-a t})) with A = phi_t b delta / a
  const double A = cert.phi_t * p.b() * cert.delta / p.a();
  const double a = p.a();
  const auto f = [&](double t) { return cert.M * std::exp(lambda1 * t + A * (1 - std::exp(-a * t))); };
  if (A == 0.0) {
    cert.integral = cert.M / -lambda1;
  } else {
    // f <= M e^A e^{lambda1 t} and the total is at least M / (-lambda1), so
    // this horizon leaves a relative tail below 1e-12
    const double T = (A + 27.7) / -lambda1;
    double err = 0;
    cert.integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, T, 20, 1e-14, &err);
  }
  cert.mu0 = (l * l - h0 * h0) / (std::numbers::pi * cert.phi_t * cert.integral);
  return cert;
}

double default_certificate_l(const ModelParams& p) {
  const auto cap = critical_width(p);
  if (!cap) return 2 * p.h0();
  return 0.5 * (p.h0() + 0.5 * *cap);
}

CertificateResult optimize_certificate(const ModelParams& p, const InitialData& init) {
  const auto cap = critical_width(p);
  const double lo = p.h0();
  const double hi = cap ? 0.5 * *cap : 10 * p.h0();
  if (!(hi > lo)) return NotApplicable{"no admissible l: 2 h0 >= Lambda"};
  const auto negative_mu0 = [&](double l) {
    const CertificateResult r = vanishing_certificate(p, init, l);
    const auto* c = std::get_if<Certificate>(&r);
    return c ? -c->mu0 : 0.0;
  };
  const double span = hi - lo;
  const auto best = boost::math::tools::brent_find_minima(negative_mu0, lo + 1e-9 * span, hi - 1e-9 * span, 40);
  return vanishing_certificate(p, init, best.first);
}

namespace {

Probe run_probe(const ModelParams& p, const InitialData& init, const StepperConfig& cfg, double gamma, double cap) {
  Probe pr;
  pr.gamma = gamma;
  const RunOutcome out = run(p.with_gamma(gamma), init, cfg);
  pr.verdict = out.classification.verdict;
  pr.rule = out.classification.rule;
  pr.max_width = out.max_width;
  pr.effective = pr.verdict;
  if (pr.verdict == Verdict::undetermined) {
    pr.flagged = true;
    pr.effective = pr.max_width >= 0.9 * cap ? Verdict::spreading : Verdict::vanishing;
  }
  return pr;
}

}  // namespace

ThresholdBracket threshold_search(const ModelParams& p, const InitialData& init, const StepperConfig& cfg, double lo,
                                  double hi, double rel_tol, std::optional<double> certified_mu0) {
  const auto cap = critical_width(p);
  if (!cap || !(2 * p.h0() < *cap))
    throw Error(ErrorKind::precondition_violated, "threshold search needs R0 > 1 and 2 h0 < Lambda");
  if (!(rel_tol > 0)) throw Error(ErrorKind::validation, "rtol must be positive");
  if (!(lo > 0) || !(hi > lo)) throw Error(ErrorKind::validation, "need 0 < lo < hi");

  ThresholdBracket br;
  Probe low;
  if (certified_mu0 && lo <= *certified_mu0) {
    low.gamma = lo;
    low.verdict = low.effective = Verdict::vanishing;
    low.rule = "certificate";
    low.simulated = false;
  } else {
    low = run_probe(p, init, cfg, lo, *cap);
  }
  br.probes.push_back(low);
  if (low.effective != Verdict::vanishing) {
    std::ostringstream os;
    os << "bracket invalid: lo = " << lo << " does not vanish";
    throw Error(ErrorKind::bracket_invalid, os.str());
  }
  const Probe high = run_probe(p, init, cfg, hi, *cap);
  br.probes.push_back(high);
  if (high.effective != Verdict::spreading) {
    std::ostringstream os;
    os << "bracket invalid: hi = " << hi << " does not spread";
    throw Error(ErrorKind::bracket_invalid, os.str());
  }

  while ((hi - lo) / hi > rel_tol) {
    const double mid = 0.5 * (lo + hi);
    const Probe pr = run_probe(p, init, cfg, mid, *cap);
    br.probes.push_back(pr);
    (pr.effective == Verdict::spreading ? hi : lo) = mid;
  }
  br.mu_lo = lo;
  br.mu_hi = hi;

  std::vector<Probe> sorted = br.probes;
  std::sort(sorted.begin(), sorted.end(), [](const Probe& x, const Probe& y) { return x.gamma < y.gamma; });
  bool spreading_seen = false;
  bool vanishing_after_spreading = false;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i].effective != sorted[i - 1].effective) ++br.flips;
    if (sorted[i].effective == Verdict::spreading) spreading_seen = true;
    if (spreading_seen && sorted[i].effective == Verdict::vanishing) vanishing_after_spreading = true;
  }
  br.audit_clean = br.flips == 1 && !vanishing_after_spreading;
  return br;
}

std::vector<double> Axis::values() const {
  if (n == 1) return {lo};
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  v.back() = hi;
  return v;
}

Axis Axis::parse(const std::string& text) {
  const auto fail = [&]() -> Axis {
    throw Error(ErrorKind::validation, "axis must look like name=LO:HI:N, got '" + text + "'");
  };
  const auto eq = text.find('=');
  if (eq == std::string::npos) return fail();
  Axis a;
  a.name = text.substr(0, eq);
  if (a.name != "h0" && a.name != "d" && a.name != "gamma")
    throw Error(ErrorKind::validation, "axis name must be h0, d or gamma, got '" + a.name + "'");
  std::istringstream rest(text.substr(eq + 1));
  char c1 = 0, c2 = 0;
  if (!(rest >> a.lo >> c1 >> a.hi >> c2 >> a.n) || c1 != ':' || c2 != ':') return fail();
  std::string tail;
  if (rest >> tail) return fail();
  if (a.n < 1) throw Error(ErrorKind::validation, "axis " + a.name + ": N must be at least 1");
  if (!(a.lo > 0) || !(a.hi >= a.lo)) throw Error(ErrorKind::validation, "axis " + a.name + ": need 0 < LO <= HI");
  return a;
}

std::vector<SweepCell> sweep(const ModelParams& base, const InitialData& init, const std::vector<Axis>& axes,
                             const StepperConfig& cfg, unsigned threads) {
  std::vector<double> h0s{base.h0()}, ds{base.d()}, gammas{base.gamma()};
  for (const Axis& a : axes) {
    if (a.name == "h0") h0s = a.values();
    else if (a.name == "d") ds = a.values();
    else if (a.name == "gamma") gammas = a.values();
    else throw Error(ErrorKind::validation, "unknown sweep axis '" + a.name + "'");
  }

  std::vector<SweepCell> cells;
  for (double h0 : h0s)
    for (double d : ds)
      for (double gamma : gammas) {
        SweepCell c;
        c.h0 = h0;
        c.d = d;
        c.gamma = gamma;
        cells.push_back(c);
      }

  const auto work = [&](SweepCell& c) {
    try {
      const ModelParams p = base.with_h0(c.h0).with_d(c.d).with_gamma(c.gamma);
      c.r0 = basic_reproduction_number(p);
      c.lambda_cap = critical_width(p);
      if (c.r0 <= 1) {
        c.verdict = to_string(Verdict::vanishing);
        c.source = "analytic";
      } else if (2 * c.h0 >= *c.lambda_cap) {
        c.verdict = to_string(Verdict::spreading);
        c.source = "analytic";
      } else {
        c.source = "simulated";
        const RunOutcome out = run(p, init.with_half_width(base.h0(), c.h0), cfg);
        c.verdict = to_string(out.classification.verdict);
      }
    } catch (const std::exception& e) {
      c.verdict = "Error";
      if (c.source.empty()) c.source = "simulated";
      c.error = e.what();
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, cells.size())));
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++) work(cells[i]);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return cells;
}

}  // namespace vfb

#include <vfb/initial_data.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace vfb {

namespace {

constexpr double pi = std::numbers::pi;

[[noreturn]] void invalid(const std::string& clause) {
  throw Error(ErrorKind::invalid_initial_data, "invalid initial data: " + clause);
}

}  // namespace

Profile Profile::constant(double value) { return Profile(Constant{value}, Outside::clamp); }

Profile Profile::cosine(double amplitude, double half_width) {
  if (!(half_width > 0)) throw Error(ErrorKind::validation, "cosine profile needs a positive half width");
  return Profile(Cosine{amplitude, half_width}, Outside::zero);
}

Profile Profile::tabulated(std::vector<double> x, std::vector<double> y, Outside outside) {
  if (x.size() != y.size() || x.size() < 3)
    throw Error(ErrorKind::validation, "tabulated profile needs at least 3 (x, y) samples of equal length");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw Error(ErrorKind::validation, "tabulated profile has a non-finite sample");
    if (i > 0 && !(x[i] > x[i - 1]))
      throw Error(ErrorKind::validation, "tabulated profile abscissae must be strictly increasing");
  }
  return Profile(Tabulated{std::move(x), std::move(y)}, outside);
}

double Profile::operator()(double x) const {
  if (const auto* c = std::get_if<Constant>(&rep_)) return c->value;
  if (const auto* c = std::get_if<Cosine>(&rep_)) {
    if (std::abs(x) >= c->half_width) return 0.0;
    return c->amplitude * std::cos(pi * x / (2.0 * c->half_width));
  }
  const auto& t = std::get<Tabulated>(rep_);
  if (x <= t.x.front()) return (outside_ == Outside::zero && x < t.x.front()) ? 0.0 : t.y.front();
  if (x >= t.x.back()) return (outside_ == Outside::zero && x > t.x.back()) ? 0.0 : t.y.back();
  const auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - t.x.begin());
  const double s = (x - t.x[j - 1]) / (t.x[j] - t.x[j - 1]);
  return t.y[j - 1] + s * (t.y[j] - t.y[j - 1]);
}

double Profile::sup() const {
  if (const auto* c = std::get_if<Constant>(&rep_)) return c->value;
  if (const auto* c = std::get_if<Cosine>(&rep_)) return std::max(c->amplitude, 0.0);
  const auto& t = std::get<Tabulated>(rep_);
  double s = *std::max_element(t.y.begin(), t.y.end());
  if (outside_ == Outside::zero) s = std::max(s, 0.0);
  return s;
}

double Profile::one_sided_slope(double x, bool from_right) const {
  if (std::holds_alternative<Constant>(rep_)) return 0.0;
  if (const auto* c = std::get_if<Cosine>(&rep_)) {
    const double L = c->half_width;
    return -c->amplitude * pi / (2.0 * L) * std::sin(pi * x / (2.0 * L));
  }
  const auto& t = std::get<Tabulated>(rep_);
  auto it = std::lower_bound(t.x.begin(), t.x.end(), x);
  std::size_t j = static_cast<std::size_t>(it - t.x.begin());
  if (from_right) {
    j = std::min(j, t.x.size() - 2);
    return (t.y[j + 1] - t.y[j]) / (t.x[j + 1] - t.x[j]);
  }
  j = std::clamp<std::size_t>(j, 1, t.x.size() - 1);
  return (t.y[j] - t.y[j - 1]) / (t.x[j] - t.x[j - 1]);
}

double Profile::cosine_envelope(double L) const {
  if (const auto* c = std::get_if<Constant>(&rep_)) {
    // a nonzero constant cannot sit under a profile vanishing at +-L
    return c->value > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  if (const auto* c = std::get_if<Cosine>(&rep_)) {
    if (std::abs(c->half_width - L) <= 1e-12 * L) return std::max(c->amplitude, 0.0);
    // narrower support: sup of A cos(pi x/2l0)/cos(pi x/2L) attained at x = 0
    if (c->half_width < L) return std::max(c->amplitude, 0.0);
    return std::numeric_limits<double>::infinity();
  }
  const auto& t = std::get<Tabulated>(rep_);
  double env = 0.0;
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    const double x = t.x[i];
    if (std::abs(x) >= L * (1.0 - 1e-12)) continue;
    env = std::max(env, t.y[i] / std::cos(pi * x / (2.0 * L)));
  }
  // endpoint limits: value/cos -> slope / (-+ pi/(2L))
  const double scale = pi / (2.0 * L);
  env = std::max(env, one_sided_slope(-L, true) / scale);
  env = std::max(env, -one_sided_slope(L, false) / scale);
  return env;
}

Profile Profile::rescaled(double factor) const {
  if (std::holds_alternative<Constant>(rep_)) return *this;
  if (const auto* c = std::get_if<Cosine>(&rep_)) return cosine(c->amplitude, c->half_width * factor);
  Tabulated t = std::get<Tabulated>(rep_);
  for (double& x : t.x) x *= factor;
  return Profile(std::move(t), outside_);
}

InitialData InitialData::cosine(double h0, double v_amp, double w_amp, double u0) {
  InitialData d;
  d.u0 = Profile::constant(u0);
  d.v0 = Profile::cosine(v_amp, h0);
  d.w0 = Profile::cosine(w_amp, h0);
  return d;
}

InitialData InitialData::with_half_width(double h0_old, double h0_new) const {
  InitialData d = *this;
  d.v0 = v0.rescaled(h0_new / h0_old);
  d.w0 = w0.rescaled(h0_new / h0_old);
  return d;
}

void validate_initial_data(const InitialData& init, double h0) {
  const auto describe = [](double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
  };

  // u0 > 0 on the real line and bounded
  if (const auto* c = std::get_if<Profile::Constant>(&init.u0.rep())) {
    if (!(c->value > 0) || !std::isfinite(c->value)) invalid("u0 must be positive everywhere");
  } else if (const auto* t = std::get_if<Profile::Tabulated>(&init.u0.rep())) {
    for (double y : t->y)
      if (!(y > 0)) invalid("u0 must be positive everywhere (sample " + describe(y) + ")");
  } else {
    invalid("u0 must be a constant or tabulated profile");
  }

  const double scale = std::max({init.v0.sup(), init.w0.sup(), 1e-300});
  for (const char* name : {"v0", "w0"}) {
    const Profile& prof = (name[0] == 'v') ? init.v0 : init.w0;
    if (prof.is_constant()) invalid(std::string(name) + " must vanish at +-h0");
    if (const auto* c = std::get_if<Profile::Cosine>(&prof.rep())) {
      if (std::abs(c->half_width - h0) > 1e-12 * h0)
        invalid(std::string(name) + " cosine support must be [-h0, h0]");
      if (!(c->amplitude > 0)) invalid(std::string(name) + " must be positive in (-h0, h0)");
      continue;
    }
    const auto& t = std::get<Profile::Tabulated>(prof.rep());
    if (std::abs(t.x.front() + h0) > 1e-9 * h0 || std::abs(t.x.back() - h0) > 1e-9 * h0)
      invalid(std::string(name) + " samples must span exactly [-h0, h0]");
    if (std::abs(t.y.front()) > 1e-12 * scale)
      invalid(std::string(name) + "(-h0) must be 0 (got " + describe(t.y.front()) + ")");
    if (std::abs(t.y.back()) > 1e-12 * scale)
      invalid(std::string(name) + "(h0) must be 0 (got " + describe(t.y.back()) + ")");
    for (std::size_t i = 1; i + 1 < t.y.size(); ++i)
      if (!(t.y[i] > 0))
        invalid(std::string(name) + " must be positive in (-h0, h0) (x = " + describe(t.x[i]) + ")");
  }
  if (!(init.w0.one_sided_slope(-h0, true) > 0)) invalid("w0'(-h0) must be > 0");
  if (!(init.w0.one_sided_slope(h0, false) < 0)) invalid("w0'(h0) must be < 0");
}

}  // namespace vfb

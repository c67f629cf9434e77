#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "oscillab/asympt.hpp"
#include "oscillab/conditions.hpp"
#include "oscillab/filters.hpp"
#include "oscillab/integrate.hpp"
#include "oscillab/resolvent.hpp"
#include "oscillab/svg.hpp"

namespace oscillab {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "config line " + std::to_string(line) +
                                          ": " + what
                                    : "config: " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct ScenarioConfig {
  std::string name;
  std::string family;
  std::string forcing = "zero";
  double omega = 0.0;
  double xi0 = 0.0, xi1 = 0.0;
  double horizon = 0.0;  // 0 -> 400 periods
  double tol = 1e-10;
  std::vector<std::pair<double, double>> windows;
  std::string description;

  double resolved_horizon() const {
    return horizon > 0.0 ? horizon : 400.0 * 2.0 * kPi / std::abs(omega);
  }
};

// ---------------------------------------------------------------------------
// Descriptor parsing ("power:a=1,b=1", "bessel", "powerdecay:g=2", ...)

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline double parse_number(const std::string& s, int line, const std::string& key) {
  const std::string v = trim(s);
  if (v.empty()) throw ConfigError(line, "empty number for key '" + key + "'");
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size())
    throw ConfigError(line, "malformed number '" + v + "' for key '" + key + "'");
  return x;
}

inline std::map<std::string, double> parse_params(const std::string& text,
                                                  const std::string& where) {
  std::map<std::string, double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError(0, "descriptor '" + where + "': expected key=value");
    out[trim(item.substr(0, eq))] = parse_number(item.substr(eq + 1), 0, where);
  }
  return out;
}

inline double require_param(const std::map<std::string, double>& params,
                            const std::string& key, const std::string& where) {
  const auto it = params.find(key);
  if (it == params.end())
    throw ConfigError(0, "descriptor '" + where + "': missing parameter '" + key + "'");
  return it->second;
}

}  // namespace detail

inline DampingFamily family_from_descriptor(const std::string& desc) {
  const auto colon = desc.find(':');
  const std::string kind = detail::trim(desc.substr(0, colon));
  const std::string rest =
      colon == std::string::npos ? "" : desc.substr(colon + 1);
  if (kind == "bessel") return bessel_family();
  if (kind == "power") {
    const auto params = detail::parse_params(rest, desc);
    return power_family(detail::require_param(params, "a", desc),
                        detail::require_param(params, "b", desc));
  }
  throw ConfigError(0, "unknown family descriptor '" + desc + "'");
}

inline ForcingSpec forcing_from_descriptor(const std::string& desc,
                                           double omega) {
  const auto colon = desc.find(':');
  const std::string kind = detail::trim(desc.substr(0, colon));
  const std::string rest =
      colon == std::string::npos ? "" : desc.substr(colon + 1);
  if (kind.empty() || kind == "zero") return zero_forcing();
  if (kind == "powerdecay") {
    const auto params = detail::parse_params(rest, desc);
    return power_decay_forcing(detail::require_param(params, "g", desc));
  }
  if (kind == "expdecay") {
    const auto params = detail::parse_params(rest, desc);
    return exp_decay_forcing(detail::require_param(params, "k", desc));
  }
  if (kind == "resonant") {
    const auto params = detail::parse_params(rest, desc);
    return resonant_forcing(detail::require_param(params, "g", desc), omega);
  }
  throw ConfigError(0, "unknown forcing descriptor '" + desc + "'");
}

// ---------------------------------------------------------------------------
// Config files: flat key=value lines, optional [section] headers, '#' comments.

inline ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  bool have_name = false, have_family = false, have_omega = false;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = detail::trim(raw);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[' && s.back() == ']') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, "expected key=value, got '" + s + "'");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (key == "name") {
      cfg.name = value;
      have_name = !value.empty();
    } else if (key == "family") {
      cfg.family = value;
      have_family = !value.empty();
    } else if (key == "forcing") {
      cfg.forcing = value.empty() ? "zero" : value;
    } else if (key == "omega") {
      cfg.omega = detail::parse_number(value, line, key);
      have_omega = true;
    } else if (key == "xi0") {
      cfg.xi0 = detail::parse_number(value, line, key);
    } else if (key == "xi1") {
      cfg.xi1 = detail::parse_number(value, line, key);
    } else if (key == "horizon") {
      cfg.horizon = detail::parse_number(value, line, key);
    } else if (key == "tol") {
      cfg.tol = detail::parse_number(value, line, key);
    } else if (key == "window") {
      const auto comma = value.find(',');
      if (comma == std::string::npos)
        throw ConfigError(line, "window expects 'lo,hi'");
      cfg.windows.emplace_back(
          detail::parse_number(value.substr(0, comma), line, key),
          detail::parse_number(value.substr(comma + 1), line, key));
    } else {
      throw ConfigError(line, "unknown key '" + key + "'");
    }
  }
  if (!have_name) throw ConfigError(0, "missing required key 'name'");
  if (!have_family) throw ConfigError(0, "missing required key 'family'");
  if (!have_omega) throw ConfigError(0, "missing required key 'omega'");
  if (cfg.omega == 0.0) throw ConfigError(0, "omega must be nonzero");
  if (!(cfg.tol >= 1e-13 && cfg.tol <= 1e-6))
    throw ConfigError(0, "tol outside [1e-13, 1e-6]");
  return cfg;
}

// ---------------------------------------------------------------------------
// Built-in scenarios

inline const std::vector<ScenarioConfig>& builtin_scenarios() {
  static const std::vector<ScenarioConfig> scenarios = [] {
    std::vector<ScenarioConfig> v;
    ScenarioConfig c;

    c = {};
    c.name = "bessel-unforced";
    c.family = "bessel";
    c.forcing = "zero";
    c.omega = 1.0;
    c.xi0 = 0.76519768655796655;   // J0(1)
    c.xi1 = -0.44005058574493352;  // -J1(1)
    c.horizon = 20000.0;
    c.description = "unforced p=1/t start on the Bessel J0 branch";
    v.push_back(c);

    c = {};
    c.name = "bessel-forced";
    c.family = "bessel";
    c.forcing = "powerdecay:g=2";
    c.omega = 1.0;
    c.horizon = 20000.0;
    c.description = "p=1/t with integrably decaying forcing, rest start";
    v.push_back(c);

    c = {};
    c.name = "power-decay";
    c.family = "power:a=1,b=1";
    c.forcing = "powerdecay:g=2";
    c.omega = 1.0;
    c.horizon = 20000.0;
    c.description = "p=1/(1+t) with f=(1+t)^-2, rest start";
    v.push_back(c);

    c = {};
    c.name = "power-unforced";
    c.family = "power:a=1,b=1";
    c.forcing = "zero";
    c.omega = 1.0;
    c.xi0 = 1.0;
    c.horizon = 20000.0;
    c.description = "unforced p=1/(1+t), unit displacement start";
    v.push_back(c);

    c = {};
    c.name = "resonant-counterexample";
    c.family = "power:a=1,b=1";
    c.forcing = "resonant:g=0.5";
    c.omega = 1.0;
    c.horizon = 20000.0;
    c.description = "forcing tuned so the first filter rings at omega";
    v.push_back(c);
    return v;
  }();
  return scenarios;
}

inline const ScenarioConfig* find_builtin(const std::string& name) {
  for (const auto& c : builtin_scenarios())
    if (c.name == name) return &c;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Certifications

struct Certification {
  std::string name;
  std::string check;  // the inequality being certified
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
  double margin = 0.0;
};

namespace detail {

inline Certification cert_leq(std::string name, std::string check, double value,
                              double bound) {
  Certification c;
  c.name = std::move(name);
  c.check = std::move(check);
  c.value = value;
  c.bound = bound;
  c.pass = value <= bound;
  c.margin = bound - value;
  return c;
}

}  // namespace detail

struct ScenarioSystem {
  DampingFamily family;
  ForcingSpec forcing;
  SystemSpec spec;
  double horizon = 0.0;
};

inline ScenarioSystem make_system(const ScenarioConfig& cfg) {
  ScenarioSystem sys;
  sys.family = family_from_descriptor(cfg.family);
  sys.forcing = forcing_from_descriptor(cfg.forcing, cfg.omega);
  sys.spec = SystemSpec{cfg.omega, cfg.xi0, cfg.xi1, sys.family.t0};
  sys.horizon = cfg.resolved_horizon();
  const double periods =
      (sys.horizon - sys.family.t0) * std::abs(cfg.omega) / (2.0 * kPi);
  if (periods < 40.0)
    throw ConfigError(0, "horizon shorter than 40 oscillation periods");
  return sys;
}

/// Randomized algebraic identity checks (fixed seed, deterministic).
inline std::vector<Certification> algebra_certifications() {
  std::vector<Certification> certs;
  std::mt19937 rng(0x05EED5u);
  std::uniform_real_distribution<double> uw(0.5, 5.0), ut(0.0, 100.0);
  double worst_m = 0.0, worst_c = 0.0, worst_f = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double w = uw(rng), t = ut(rng);
    const double w2 = w * w;
    const auto m = oscillation_matrix(w, t);
    worst_m = std::max(worst_m,
                       std::abs(m.det - w * (w2 + 1.0)) / (w * (w2 + 1.0)));
    const auto cc = c_coefficients(w, t);
    const double norm = cc.C1 * cc.C1 + cc.C2 * cc.C2;
    const double target = w2 * (w2 + 1.0) * (w2 + 1.0);
    worst_c = std::max(worst_c, std::abs(norm - target) / target);
    const auto ft = forcing_transform(w);
    worst_f = std::max(worst_f, std::abs(ft.det - (w2 * w2 + w * w)));
  }
  certs.push_back(detail::cert_leq(
      "algebra-oscillation-det",
      "max rel |det M(t) - w(w^2+1)| <= 1e-12 over 1000 random (w,t)", worst_m,
      1e-12));
  certs.push_back(detail::cert_leq(
      "algebra-c-norm",
      "max rel |C1^2+C2^2 - w^2(w^2+1)^2| <= 1e-12 over 1000 random (w,t)",
      worst_c, 1e-12));
  certs.push_back(detail::cert_leq(
      "algebra-forcing-det", "det [[w^2,w],[-w,w^2]] == w^4 + w^2 exactly",
      worst_f, 0.0));
  return certs;
}

/// Green's function and weight-integral certifications for one family.
inline std::vector<Certification> resolvent_certifications(
    const DampingFamily& fam, const SystemSpec& spec) {
  std::vector<Certification> certs;
  const double w = spec.omega;
  const double t0 = fam.t0;
  const double period = 2.0 * kPi / w;

  {  // Gronwall bound on G along t-grids from several launch points.
    double worst = 0.0;
    for (double ds : {0.0, 1.0, 3.0, 7.0, 15.0}) {
      const double s = t0 + ds;
      std::vector<double> ts;
      for (double t = s; t <= s + 60.0; t += period / 32.0) ts.push_back(t);
      worst = std::max(worst, certify_gronwall(fam, w, s, ts));
    }
    certs.push_back(detail::cert_leq(
        "gronwall-bound", "max |G(t,s)| w exp(-Q(s)/w) <= 1 everywhere sampled",
        worst, 1.0));
  }
  {  // First-order expansion error bound at a 10x10 (s, t) lattice.
    double worst_excess = -1e300;
    const double s_off[] = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 24.0, 32.0};
    const double t_off[] = {0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0, 16.0, 20.0, 25.0};
    for (double ds : s_off)
      for (double dt : t_off) {
        const auto e = certify_expansion_error(fam, w, t0 + ds, t0 + ds + dt);
        worst_excess = std::max(worst_excess, std::abs(e.actual) - e.bound);
      }
    certs.push_back(detail::cert_leq(
        "expansion-error",
        "|G - sin/w + (1/w^2) int sin sin q| <= exp(Q/w) Q^2/(2 w^3) at 100 pairs",
        worst_excess, 0.0));
  }
  {  // Picard iterates against direct integration.
    double worst = 0.0;
    for (double ds : {0.0, 1.0, 2.0, 5.0, 10.0})
      for (double dt : {1.0, 2.0, 5.0}) {
        const double s = t0 + ds;
        const double g_pic = green_picard(fam, w, s, s + dt, 6);
        const double g_dir = green_state(fam, w, s, s + dt).G;
        worst = std::max(worst, std::abs(g_pic - g_dir));
      }
    certs.push_back(detail::cert_leq(
        "picard-direct", "|picard(6 sweeps) - direct G| <= 1e-8 at 15 pairs",
        worst, 1e-8));
  }
  {  // Uniform weight integrals.
    double worst_margin = 1e300;
    for (double dt : {10.0, 100.0, 1000.0}) {
      const auto rep = certify_L1_weights(fam, w, t0 + dt);
      worst_margin = std::min(worst_margin, rep.min_margin());
    }
    certs.push_back(detail::cert_leq(
        "l1-weights",
        "int E p <= 2, p(t) int E <= 2, int E |q| <= p(t0) at t0 + {10,100,1000}",
        -worst_margin, 0.0));
  }
  {  // Kernel diagonal values.
    double worst_k1 = 0.0, worst_rt = 0.0;
    for (double dt : {1.0, 10.0, 50.0}) {
      const auto ks = kernels_at(fam, spec, t0 + dt, t0 + dt);
      worst_k1 = std::max(worst_k1, std::abs(ks.K1 - 1.0));
      worst_rt = std::max(worst_rt, std::abs(ks.R_t - 1.0));
    }
    certs.push_back(detail::cert_leq("k1-diagonal", "|K1(t,t) - 1| <= 1e-9",
                                     worst_k1, 1e-9));
    certs.push_back(detail::cert_leq("resolvent-t-diagonal",
                                     "|R_t(t,t) - 1| <= 1e-6", worst_rt, 1e-6));
  }
  {  // Wronskian of the fundamental pair stays at 1.
    auto rhs = [&](double t, const RkState<4>& y, RkState<4>& d) {
      const double c = w * w + residual_potential(fam, t);
      d[0] = y[1];
      d[1] = -c * y[0];
      d[2] = y[3];
      d[3] = -c * y[2];
    };
    std::vector<double> ts;
    for (double t = t0; t <= t0 + 100.0; t += period / 8.0) ts.push_back(t);
    double worst = 0.0;
    RkState<4> y0{1.0, 0.0, 0.0, 1.0};
    rk_integrate<4>(rhs, t0, y0, ts.back(), 1e-12, 1e-12, ts,
                    [&](std::size_t, double, const RkState<4>& y) {
                      worst = std::max(
                          worst, std::abs(y[0] * y[3] - y[1] * y[2] - 1.0));
                    },
                    kPi / w);
    certs.push_back(detail::cert_leq(
        "wronskian", "|u1 u2' - u1' u2 - 1| <= 1e-9 on [t0, t0+100]", worst,
        1e-9));
  }
  return certs;
}

/// Cross-method certifications that need trajectories: the damping-removal
/// cross-check, the filter oracle equivalences, and the weighted L3 identity.
inline std::vector<Certification> pipeline_certifications(
    const ScenarioSystem& sys, const ScenarioConfig& cfg) {
  std::vector<Certification> certs;
  const double w = sys.spec.omega, w2 = w * w;
  const double t0 = sys.family.t0;

  {  // Transformed-equation cross-check over a bounded prefix.
    const double span = std::min(100.0, sys.horizon - t0);
    const Grid grid = Grid::for_oscillator(t0, t0 + span, w);
    const double disc =
        integrate_undamped_crosscheck(sys.spec, sys.family, sys.forcing, grid, cfg.tol);
    certs.push_back(detail::cert_leq(
        "liouville-crosscheck",
        "max |rho u - x| <= 1e-6 between the damped and transformed systems",
        disc, 1e-6));
  }

  // Fine short run for quadrature-grade comparisons.
  const double span = std::min(50.0, sys.horizon - t0);
  const double fine_dt = 0.01 / std::max(1.0, w2);
  const auto n = static_cast<std::size_t>(std::ceil(span / fine_dt)) + 1;
  const Grid fine{t0, t0 + span, n};
  const Trajectory ft =
      integrate_forced(sys.spec, sys.family, sys.forcing, fine, 1e-12);

  {  // Filter cascade against direct quadrature.
    std::size_t stride = 1;
    while (ft.spacing() * static_cast<double>(stride + 1) <= 0.1 / w2) ++stride;
    std::vector<double> sub;
    for (std::size_t i = 0; i < ft.size(); i += stride) sub.push_back(ft.t[i]);
    const auto [q1, q2] = y_filters_quadrature(sys.forcing, w, sub);
    double worst1 = 0.0, worst2 = 0.0;
    for (std::size_t k = 0; k < sub.size(); ++k) {
      worst1 = std::max(worst1, std::abs(q1.values[k] - ft.y1[k * stride]));
      worst2 = std::max(worst2, std::abs(q2.values[k] - ft.y2[k * stride]));
    }
    certs.push_back(detail::cert_leq(
        "filter-y1-quadrature",
        "max |cascade y1 - quadrature y1| <= 1e-6 on [t0, t0+50]", worst1, 1e-6));
    certs.push_back(detail::cert_leq(
        "filter-y2-quadrature",
        "max |cascade y2 - quadrature y2| <= 1e-6 on [t0, t0+50]", worst2, 1e-6));
  }
  if (sys.spec.xi0 == 0.0 && sys.spec.xi1 == 0.0) {
    const auto recon = y2_from_x(ft, sys.family, w, 10);
    double worst = 0.0;
    for (std::size_t k = 0; k < recon.times.size(); ++k)
      worst = std::max(worst, std::abs(recon.values[k] - ft.y2[k * 10]));
    certs.push_back(detail::cert_leq(
        "filter-k3-reconstruction",
        "max |x + int K3 x - y2| <= 1e-6 on [t0, t0+50]", worst, 1e-6));
  }
  {  // A(t) W(t) two ways, and the normalized channel against quadrature.
    std::vector<double> ay2(ft.size()), cay2(ft.size());
    for (std::size_t i = 0; i < ft.size(); ++i) {
      ay2[i] = std::exp(ft.logA[i]) * ft.y2[i];
      cay2[i] = std::cos(w * ft.t[i]) * ay2[i];
    }
    const auto cum = cumulative_sampled(cay2, ft.spacing());
    double worst_w = 0.0, scale_w = 0.0, worst_u = 0.0;
    for (std::size_t j = ft.size() / 10; j < ft.size(); j += ft.size() / 10) {
      const double direct = weighted_l3_direct(ft, j);
      const double chan = weighted_l3_channels(ft, j);
      worst_w = std::max(worst_w, std::abs(direct - chan));
      scale_w = std::max(scale_w, std::abs(chan));
      const double au2 = std::exp(ft.logA[j]) * ft.U2[j];
      worst_u = std::max(worst_u, std::abs(au2 - cum[j]) /
                                      std::max(1.0, std::abs(au2)));
    }
    certs.push_back(detail::cert_leq(
        "weighted-l3-identity",
        "rel |int A L3 y2 - (C1 Ic + C2 Is)| <= 1e-8 on [t0, t0+50]",
        worst_w / std::max(scale_w, 1e-30), 1e-8));
    certs.push_back(detail::cert_leq(
        "u2-normalization",
        "rel |A U2 - int cos(ws) A y2| <= 1e-7 on [t0, t0+50]", worst_u, 1e-7));
  }
  return certs;
}

/// The `certify` entry point: algebra plus resolvent certifications only.
inline std::vector<Certification> run_certifications(const ScenarioConfig& cfg) {
  const ScenarioSystem sys = make_system(cfg);
  auto certs = algebra_certifications();
  auto more = resolvent_certifications(sys.family, sys.spec);
  certs.insert(certs.end(), more.begin(), more.end());
  return certs;
}

// ---------------------------------------------------------------------------
// Full scenario run

struct RunReport {
  ScenarioConfig config;
  std::vector<ConditionVerdict> verdicts;
  std::vector<EnvelopeFit> fits;
  std::vector<Certification> certifications;
  LimitEstimate limits;
  bool have_predicted = false;
  double pred_c1 = 0.0, pred_c2 = 0.0;
  PreservationReport preservation;
  ConverseReport converse;
  bool equivalence_ok = true;
  std::vector<std::string> artifacts;

  bool all_certifications_pass() const {
    for (const auto& c : certifications)
      if (!c.pass) return false;
    return true;
  }
  int exit_code() const {
    return (all_certifications_pass() && equivalence_ok) ? 0 : 2;
  }
};

namespace detail {

inline std::string evidence_json(const std::map<std::string, double>& ev) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : ev) {
    if (!first) out += ",";
    first = false;
    out += "\"" + k + "\":";
    out += std::isfinite(v) ? fmt_sig(v, 12) : std::string("null");
  }
  out += "}";
  return out;
}

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += "\"";
  return out;
}

}  // namespace detail

inline void write_report(std::ostream& os, const RunReport& r);

inline std::vector<std::string> emit_plots(const RunReport& report,
                                           const Trajectory& tr,
                                           const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> paths;
  const double w = tr.omega;

  {  // State with the fitted decay envelope overlay.
    const double amp = report.preservation.second_fit.amplitude;
    SvgSeries sx{"x(t)", "#1f77b4", tr.t, tr.x};
    SvgSeries env_hi{"+amp/A", "#d62728", tr.t, {}};
    SvgSeries env_lo{"-amp/A", "#d62728", tr.t, {}};
    env_hi.ys.resize(tr.size());
    env_lo.ys.resize(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
      env_hi.ys[i] = amp * std::exp(-tr.logA[i]);
      env_lo.ys[i] = -env_hi.ys[i];
    }
    const SvgSeries series[] = {sx, env_hi, env_lo};
    const std::string path = (fs::path(out_dir) / "x_envelope.svg").string();
    std::ofstream os(path, std::ios::binary);
    write_svg_plot(os, report.config.name + ": state and decay envelope", series);
    paths.push_back(path);
  }
  {  // Normalized weighted integrals of y2.
    const SvgSeries series[] = {{"U2", "#1f77b4", tr.t, tr.U2},
                                {"V2", "#2ca02c", tr.t, tr.V2}};
    const std::string path =
        (fs::path(out_dir) / "normalized_integrals.svg").string();
    std::ofstream os(path, std::ios::binary);
    write_svg_plot(os, report.config.name + ": normalized integrals", series);
    paths.push_back(path);
  }
  {  // Rescaled state against the fitted sinusoid on the late window.
    const auto& fit = report.preservation.second_fit;
    SvgSeries sax{"A(t)x(t)", "#1f77b4", {}, {}};
    SvgSeries sfit{"fit", "#d62728", {}, {}};
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (tr.t[i] < fit.window_lo || tr.t[i] > fit.window_hi) continue;
      sax.xs.push_back(tr.t[i]);
      sax.ys.push_back(std::exp(tr.logA[i]) * tr.x[i]);
      sfit.xs.push_back(tr.t[i]);
      sfit.ys.push_back(fit.c_sin * std::sin(w * tr.t[i]) +
                        fit.c_cos * std::cos(w * tr.t[i]));
    }
    const SvgSeries series[] = {sax, sfit};
    const std::string path =
        (fs::path(out_dir) / "weighted_state_fit.svg").string();
    std::ofstream os(path, std::ios::binary);
    write_svg_plot(os, report.config.name + ": rescaled state vs fit", series);
    paths.push_back(path);
  }
  return paths;
}

inline RunReport run_scenario(const ScenarioConfig& cfg,
                              const std::string& out_dir) {
  namespace fs = std::filesystem;
  const ScenarioSystem sys = make_system(cfg);
  RunReport report;
  report.config = cfg;

  const Grid grid =
      Grid::for_oscillator(sys.family.t0, sys.horizon, sys.spec.omega);
  const Trajectory tr =
      integrate_forced(sys.spec, sys.family, sys.forcing, grid, cfg.tol);

  report.verdicts = statement_verdicts(tr);
  report.equivalence_ok = equivalence_consistent(report.verdicts);
  report.limits = estimate_limits(tr);
  if (report.limits.converged) {
    std::tie(report.pred_c1, report.pred_c2) =
        predicted_constants(report.limits, sys.spec.omega);
    report.have_predicted = true;
  }

  if (cfg.windows.empty()) {
    const double t0 = sys.family.t0, H = sys.horizon;
    const double q1 = t0 + 0.25 * (H - t0), mid = t0 + 0.5 * (H - t0);
    report.fits.push_back(envelope_fit(tr, q1, mid));
    report.fits.push_back(envelope_fit(tr, mid, H));
  } else {
    for (const auto& [lo, hi] : cfg.windows)
      report.fits.push_back(envelope_fit(tr, lo, hi));
  }
  report.preservation = preservation_check(tr, report.limits);
  report.converse = converse_check(tr);

  report.certifications = algebra_certifications();
  {
    auto more = resolvent_certifications(sys.family, sys.spec);
    report.certifications.insert(report.certifications.end(), more.begin(),
                                 more.end());
    more = pipeline_certifications(sys, cfg);
    report.certifications.insert(report.certifications.end(), more.begin(),
                                 more.end());
  }

  // Artifacts.
  fs::create_directories(out_dir);
  {
    const std::string path = (fs::path(out_dir) / "trajectory.csv").string();
    std::ofstream os(path, std::ios::binary);
    tr.write_csv(os);
    report.artifacts.push_back(path);
  }
  {
    std::vector<KernelSet> rows;
    for (double ds : {0.0, 2.0, 5.0, 10.0})
      for (double dt : {0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
        const double s = sys.family.t0 + ds;
        rows.push_back(kernels_at(sys.family, sys.spec, s + dt, s));
      }
    const std::string path = (fs::path(out_dir) / "kernels.csv").string();
    std::ofstream os(path, std::ios::binary);
    write_kernel_csv(os, rows);
    report.artifacts.push_back(path);
  }
  {
    const std::string path = (fs::path(out_dir) / "verdicts.csv").string();
    std::ofstream os(path, std::ios::binary);
    os << "scenario,statement,result,evidence_json\n";
    for (const auto& v : report.verdicts)
      os << cfg.name << ',' << to_string(v.statement) << ','
         << to_string(v.result) << ','
         << detail::csv_quote(detail::evidence_json(v.evidence)) << '\n';
    report.artifacts.push_back(path);
  }
  {
    const std::string path = (fs::path(out_dir) / "fits.csv").string();
    std::ofstream os(path, std::ios::binary);
    os << "scenario,window_lo,window_hi,c_sin,c_cos,amplitude,phase,residual_rms\n";
    for (const auto& f : report.fits)
      os << cfg.name << ',' << fmt17(f.window_lo) << ',' << fmt17(f.window_hi)
         << ',' << fmt17(f.c_sin) << ',' << fmt17(f.c_cos) << ','
         << fmt17(f.amplitude) << ',' << fmt17(f.phase) << ','
         << fmt17(f.residual_rms) << '\n';
    report.artifacts.push_back(path);
  }
  {
    auto svg_paths = emit_plots(report, tr, out_dir);
    report.artifacts.insert(report.artifacts.end(), svg_paths.begin(),
                            svg_paths.end());
  }
  {
    const std::string path = (fs::path(out_dir) / "report.txt").string();
    std::ofstream os(path, std::ios::binary);
    write_report(os, report);
    report.artifacts.push_back(path);
  }
  return report;
}

inline void write_report(std::ostream& os, const RunReport& r) {
  const auto& c = r.config;
  os << "scenario: " << c.name << "\n"
     << "family:   " << c.family << "\n"
     << "forcing:  " << c.forcing << "\n"
     << "omega:    " << fmt_sig(c.omega, 12) << "\n"
     << "xi0, xi1: " << fmt_sig(c.xi0, 12) << ", " << fmt_sig(c.xi1, 12) << "\n"
     << "horizon:  " << fmt_sig(c.resolved_horizon(), 12) << "\n"
     << "tol:      " << fmt_sig(c.tol, 6) << "\n\n";

  os << "certifications:\n";
  for (const auto& cert : r.certifications)
    os << "  " << (cert.pass ? "PASS" : "FAIL") << ' ' << cert.name
       << "  value=" << fmt_sig(cert.value, 6)
       << " bound=" << fmt_sig(cert.bound, 6)
       << " margin=" << fmt_sig(cert.margin, 6) << "\n        check: "
       << cert.check << "\n";

  os << "\nverdicts:\n";
  for (const auto& v : r.verdicts)
    os << "  (" << to_string(v.statement) << ") " << to_string(v.result)
       << "  " << detail::evidence_json(v.evidence) << "\n";
  os << "equivalence consistency: " << (r.equivalence_ok ? "ok" : "VIOLATED")
     << "\n";

  os << "\nlimit estimates: Ic=" << fmt_sig(r.limits.Ic, 12)
     << " Is=" << fmt_sig(r.limits.Is, 12)
     << " tail=" << fmt_sig(r.limits.tail_bound, 6)
     << " converged=" << (r.limits.converged ? "yes" : "no") << "\n";
  if (r.have_predicted)
    os << "predicted sinusoid constants: c1=" << fmt_sig(r.pred_c1, 12)
       << " c2=" << fmt_sig(r.pred_c2, 12) << "\n";

  os << "\nfits:\n";
  for (const auto& f : r.fits)
    os << "  [" << fmt_sig(f.window_lo, 8) << ", " << fmt_sig(f.window_hi, 8)
       << "] c_sin=" << fmt_sig(f.c_sin, 12) << " c_cos=" << fmt_sig(f.c_cos, 12)
       << " amplitude=" << fmt_sig(f.amplitude, 12)
       << " phase=" << fmt_sig(f.phase, 12)
       << " rms=" << fmt_sig(f.residual_rms, 6) << "\n";

  const auto& p = r.preservation;
  os << "\npreservation: " << (p.preserved ? "preserved" : "not preserved")
     << " (weighted-filter trend " << (p.y2_small_o ? "down" : "not down")
     << ", amplitude drift " << fmt_sig(p.amplitude_drift, 6) << ", phase drift "
     << fmt_sig(p.phase_drift, 6) << ")\n";
  if (p.w_prediction_available)
    os << "weighted L3 state: predicted (c1, c2)=(" << fmt_sig(p.w_pred_c1, 12)
       << ", " << fmt_sig(p.w_pred_c2, 12) << ") fitted (" << fmt_sig(p.w_fit_sin, 12)
       << ", " << fmt_sig(p.w_fit_cos, 12) << ")\n";
  os << "converse: sin " << (r.converse.sin_converged ? "converged" : "open")
     << ", cos " << (r.converse.cos_converged ? "converged" : "open") << "\n";

  os << "\nartifacts:\n";
  for (const auto& a : r.artifacts)
    os << "  " << std::filesystem::path(a).filename().string() << "\n";
  os << "\nexit code: " << r.exit_code() << "\n";
}

}  // namespace oscillab

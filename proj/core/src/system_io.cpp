#include "hltp/system_io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hltp/errors.hpp"

namespace hltp {

using nlohmann::json;

namespace {

template <class T>
void get_optional(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

// Adds a*cos(theta + phi) or a*sin(theta + phi) at harmonic index k.
void add_trig(FourierMatrix& f, int i, int j, int k, double a, double phi, bool sine) {
  if (k > f.band()) return;
  const cdouble e = std::polar(1.0, phi);
  if (k == 0) {
    f.phasor(0)(i, j) += sine ? a * std::sin(phi) : a * std::cos(phi);
    return;
  }
  if (sine) {
    f.phasor(k)(i, j) += a * e / cdouble(0.0, 2.0);
    f.phasor(-k)(i, j) -= a * std::conj(e) / cdouble(0.0, 2.0);
  } else {
    f.phasor(k)(i, j) += 0.5 * a * e;
    f.phasor(-k)(i, j) += 0.5 * a * std::conj(e);
  }
}

int waveform_band(const WaveformSpec& w) {
  const int h = w.harmonic.value_or(1);
  if (w.type == "const") return 0;
  if (w.type == "cos" || w.type == "sin") return h;
  if (!w.band) throw ParseError("waveform '" + w.type + "' requires a band");
  return *w.band;
}

void add_waveform(FourierMatrix& f, int i, int j, const WaveformSpec& w) {
  const double a = w.amplitude.value_or(1.0);
  const int h = w.harmonic.value_or(1);
  const double phi = w.phase.value_or(0.0);
  constexpr double pi = std::numbers::pi;
  if (h < 1) throw ParseError("waveform harmonic must be >= 1");
  if (w.type == "const") {
    f.phasor(0)(i, j) += a;
  } else if (w.type == "cos") {
    add_trig(f, i, j, h, a, phi, false);
  } else if (w.type == "sin") {
    add_trig(f, i, j, h, a, phi, true);
  } else if (w.type == "square") {
    for (int q = 1; q * h <= *w.band; q += 2) add_trig(f, i, j, q * h, 4.0 * a / (pi * q), phi, true);
  } else if (w.type == "triangle") {
    for (int q = 1; q * h <= *w.band; q += 2) {
      add_trig(f, i, j, q * h, 8.0 * a / (pi * pi * q * q), phi, false);
    }
  } else if (w.type == "sawtooth") {
    for (int q = 1; q * h <= *w.band; ++q) {
      const double sign = (q % 2 == 1) ? 1.0 : -1.0;
      add_trig(f, i, j, q * h, sign * 2.0 * a / (pi * q), phi, true);
    }
  } else {
    throw ParseError("unknown waveform type '" + w.type + "'");
  }
}

}  // namespace

void to_json(json& j, const TermSpec& s) { j = json{{"k", s.k}, {"re", s.re}, {"im", s.im}}; }

void from_json(const json& j, TermSpec& s) {
  s.k = j.at("k").get<int>();
  s.re = j.value("re", 0.0);
  s.im = j.value("im", 0.0);
}

void to_json(json& j, const WaveformSpec& s) {
  j = json{{"type", s.type}};
  put_optional(j, "amplitude", s.amplitude);
  put_optional(j, "harmonic", s.harmonic);
  put_optional(j, "phase", s.phase);
  put_optional(j, "band", s.band);
}

void from_json(const json& j, WaveformSpec& s) {
  s.type = j.at("type").get<std::string>();
  get_optional(j, "amplitude", s.amplitude);
  get_optional(j, "harmonic", s.harmonic);
  get_optional(j, "phase", s.phase);
  get_optional(j, "band", s.band);
}

void to_json(json& j, const EntrySpec& s) {
  j = json{{"row", s.row}, {"col", s.col}};
  put_optional(j, "terms", s.terms);
  put_optional(j, "waveforms", s.waveforms);
}

void from_json(const json& j, EntrySpec& s) {
  s.row = j.at("row").get<int>();
  s.col = j.at("col").get<int>();
  get_optional(j, "terms", s.terms);
  get_optional(j, "waveforms", s.waveforms);
}

void to_json(json& j, const MatrixSpec& s) {
  j = json{{"rows", s.rows}, {"cols", s.cols}, {"entries", s.entries}};
  put_optional(j, "period", s.period);
  put_optional(j, "real", s.real);
}

void from_json(const json& j, MatrixSpec& s) {
  s.rows = j.value("rows", 1);
  s.cols = j.value("cols", 1);
  get_optional(j, "period", s.period);
  get_optional(j, "real", s.real);
  s.entries = j.at("entries").get<std::vector<EntrySpec>>();
}

void to_json(json& j, const SystemSpec& s) {
  j = json{{"period", s.period}, {"A", s.A}};
  put_optional(j, "name", s.name);
  put_optional(j, "description", s.description);
  put_optional(j, "B", s.B);
  put_optional(j, "Q", s.Q);
  put_optional(j, "R", s.R);
}

void from_json(const json& j, SystemSpec& s) {
  s.period = j.at("period").get<double>();
  s.A = j.at("A").get<MatrixSpec>();
  get_optional(j, "name", s.name);
  get_optional(j, "description", s.description);
  get_optional(j, "B", s.B);
  get_optional(j, "Q", s.Q);
  get_optional(j, "R", s.R);
}

void to_json(json& j, const ScenarioSpec& s) {
  json segs = json::array();
  for (const auto& seg : s.segments) {
    json js{{"t", {seg.t0, seg.t1}}};
    put_optional(js, "u_ref", seg.u_ref);
    put_optional(js, "x_d", seg.x_d);
    segs.push_back(js);
  }
  j = json{{"x0", s.x0}, {"segments", segs}};
  put_optional(j, "m", s.m);
  put_optional(j, "output_step", s.output_step);
  put_optional(j, "rel_tol", s.rel_tol);
}

void from_json(const json& j, ScenarioSpec& s) {
  s.x0 = j.at("x0").get<std::vector<double>>();
  s.segments.clear();
  for (const auto& js : j.at("segments")) {
    SegmentSpec seg;
    const auto t = js.at("t").get<std::vector<double>>();
    if (t.size() != 2) throw ParseError("segment \"t\" must be [t_start, t_end]");
    seg.t0 = t[0];
    seg.t1 = t[1];
    get_optional(js, "u_ref", seg.u_ref);
    get_optional(js, "x_d", seg.x_d);
    s.segments.push_back(seg);
  }
  get_optional(j, "m", s.m);
  get_optional(j, "output_step", s.output_step);
  get_optional(j, "rel_tol", s.rel_tol);
}

FourierMatrix build_matrix(const MatrixSpec& spec, double fallback_period) {
  const double T = spec.period.value_or(fallback_period);
  if (!(T > 0.0)) throw ParseError("matrix period must be positive");
  if (spec.rows < 1 || spec.cols < 1) throw ParseError("matrix shape must be positive");
  const bool real = spec.real.value_or(false);
  int band = 0;
  for (const auto& e : spec.entries) {
    if (e.row < 0 || e.row >= spec.rows || e.col < 0 || e.col >= spec.cols) {
      std::ostringstream os;
      os << "entry (" << e.row << "," << e.col << ") outside a " << spec.rows << "x" << spec.cols
         << " matrix";
      throw ParseError(os.str());
    }
    if (e.terms) {
      for (const auto& t : *e.terms) band = std::max(band, std::abs(t.k));
    }
    if (e.waveforms) {
      for (const auto& w : *e.waveforms) band = std::max(band, waveform_band(w));
    }
  }
  FourierMatrix f(T, spec.rows, spec.cols, band);
  bool has_waveform = false;
  for (const auto& e : spec.entries) {
    if (e.terms) {
      std::vector<bool> seen(2 * band + 1, false);
      for (const auto& t : *e.terms) seen[t.k + band] = true;
      for (const auto& t : *e.terms) {
        f.phasor(t.k)(e.row, e.col) += cdouble(t.re, t.im);
        if (real && t.k > 0 && !seen[-t.k + band]) {
          f.phasor(-t.k)(e.row, e.col) += cdouble(t.re, -t.im);
        }
      }
    }
    if (e.waveforms) {
      for (const auto& w : *e.waveforms) add_waveform(f, e.row, e.col, w);
      has_waveform = true;
    }
  }
  if (real || has_waveform) {
    const double defect = f.conjugate_symmetry_defect();
    if (real && defect > 1e-12 * (1.0 + f.l2_norm())) {
      std::ostringstream os;
      os << "matrix flagged real but its terms are not conjugate symmetric (defect " << defect
         << ")";
      throw ParseError(os.str());
    }
    if (real || !spec.real.has_value()) f.make_real();
  }
  return f;
}

LtpSystem build_system(const SystemSpec& spec) {
  LtpSystem sys;
  sys.name = spec.name.value_or("");
  sys.period = spec.period;
  sys.A = build_matrix(spec.A, spec.period);
  if (sys.A.rows() != sys.A.cols()) throw ParseError("system matrix A must be square");
  auto check_period = [&](const FourierMatrix& f, const char* what) {
    if (std::abs(f.period() - sys.period) > 1e-12 * sys.period) {
      throw ParseError(std::string("period of ") + what + " differs from the system period");
    }
  };
  check_period(sys.A, "A");
  if (spec.B) {
    sys.B = build_matrix(*spec.B, spec.period);
    check_period(*sys.B, "B");
  }
  if (spec.Q) {
    sys.Q = build_matrix(*spec.Q, spec.period);
    check_period(*sys.Q, "Q");
  }
  if (spec.R) {
    sys.R = build_matrix(*spec.R, spec.period);
    check_period(*sys.R, "R");
  }
  return sys;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

SystemSpec load_system_spec(const std::string& path) {
  const json j = read_json_file(path);
  try {
    return j.get<SystemSpec>();
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

LtpSystem load_system(const std::string& path) {
  SystemSpec spec = load_system_spec(path);
  try {
    return build_system(spec);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

ScenarioSpec load_scenario_spec(const std::string& path) {
  const json j = read_json_file(path);
  try {
    return j.get<ScenarioSpec>();
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

TrackingScenario build_scenario(const ScenarioSpec& spec, double period, int input_dim) {
  TrackingScenario sc;
  sc.x0 = Eigen::Map<const Eigen::VectorXd>(spec.x0.data(), spec.x0.size());
  if (spec.m) sc.m = *spec.m;
  if (spec.output_step) sc.output_step = *spec.output_step;
  if (spec.rel_tol) sc.ode.rel_tol = *spec.rel_tol;
  for (const auto& s : spec.segments) {
    TrackingSegment seg;
    seg.t_start = s.t0;
    seg.t_end = s.t1;
    if (s.u_ref && s.x_d) throw ParseError("segment has both u_ref and x_d");
    if (s.u_ref) {
      FourierMatrix u = build_matrix(*s.u_ref, period);
      if (u.cols() != 1 || u.rows() != input_dim) throw ParseError("u_ref has the wrong shape");
      seg.u_ref = PhasorVector::from(u);
    }
    if (s.x_d) {
      FourierMatrix x = build_matrix(*s.x_d, period);
      if (x.cols() != 1 || x.rows() != static_cast<int>(spec.x0.size())) {
        throw ParseError("x_d has the wrong shape");
      }
      seg.x_d = PhasorVector::from(x);
    }
    sc.segments.push_back(seg);
  }
  return sc;
}

}  // namespace hltp

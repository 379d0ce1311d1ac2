#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hltp/fourier.hpp"
#include "hltp/lq_control.hpp"

namespace hltp {

// Declarative description of a periodic matrix, mirroring the JSON schema
//   { "rows": r, "cols": c, "period": T?, "real": bool?,
//     "entries": [ { "row": i, "col": j,
//                    "terms": [ {"k": int, "re": x, "im": y} ],
//                    "waveforms": [ {"type": ..., "amplitude": a, "harmonic": h,
//                                    "phase": phi, "band": b} ] } ] }
// Waveform types: const, cos, sin, square, triangle, sawtooth. Series
// waveforms keep harmonics q*h <= band, each term carrying the phase:
//   square    (4a/pi)     sum_{q odd} sin(q h w t + phi) / q
//   triangle  (8a/pi^2)   sum_{q odd} cos(q h w t + phi) / q^2
//   sawtooth  (2a/pi)     sum_{q>=1} (-1)^{q+1} sin(q h w t + phi) / q
// With "real": true, terms given only for k > 0 are mirrored to -k.
struct TermSpec {
  int k = 0;
  double re = 0.0;
  double im = 0.0;
};

struct WaveformSpec {
  std::string type;
  std::optional<double> amplitude;
  std::optional<int> harmonic;
  std::optional<double> phase;
  std::optional<int> band;
};

struct EntrySpec {
  int row = 0;
  int col = 0;
  std::optional<std::vector<TermSpec>> terms;
  std::optional<std::vector<WaveformSpec>> waveforms;
};

struct MatrixSpec {
  int rows = 1;
  int cols = 1;
  std::optional<double> period;
  std::optional<bool> real;
  std::vector<EntrySpec> entries;
};

struct SystemSpec {
  std::optional<std::string> name;
  std::optional<std::string> description;
  double period = 1.0;
  MatrixSpec A;
  std::optional<MatrixSpec> B, Q, R;
};

struct SegmentSpec {
  double t0 = 0.0, t1 = 0.0;
  std::optional<MatrixSpec> u_ref;
  std::optional<MatrixSpec> x_d;
};

struct ScenarioSpec {
  std::vector<double> x0;
  std::vector<SegmentSpec> segments;
  std::optional<int> m;
  std::optional<double> output_step;
  std::optional<double> rel_tol;
};

void to_json(nlohmann::json& j, const TermSpec& s);
void from_json(const nlohmann::json& j, TermSpec& s);
void to_json(nlohmann::json& j, const WaveformSpec& s);
void from_json(const nlohmann::json& j, WaveformSpec& s);
void to_json(nlohmann::json& j, const EntrySpec& s);
void from_json(const nlohmann::json& j, EntrySpec& s);
void to_json(nlohmann::json& j, const MatrixSpec& s);
void from_json(const nlohmann::json& j, MatrixSpec& s);
void to_json(nlohmann::json& j, const SystemSpec& s);
void from_json(const nlohmann::json& j, SystemSpec& s);
void to_json(nlohmann::json& j, const ScenarioSpec& s);
void from_json(const nlohmann::json& j, ScenarioSpec& s);

// Realizes a declarative matrix; the spec's own period wins over the
// fallback. Throws ParseError on invalid content.
FourierMatrix build_matrix(const MatrixSpec& spec, double fallback_period);

struct LtpSystem {
  std::string name;
  double period = 1.0;
  FourierMatrix A;
  std::optional<FourierMatrix> B, Q, R;
};

LtpSystem build_system(const SystemSpec& spec);

// File helpers; throw ParseError with the path on failure.
nlohmann::json read_json_file(const std::string& path);
SystemSpec load_system_spec(const std::string& path);
LtpSystem load_system(const std::string& path);
ScenarioSpec load_scenario_spec(const std::string& path);

TrackingScenario build_scenario(const ScenarioSpec& spec, double period, int input_dim);

}  // namespace hltp

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <hltp/lq_control.hpp>
#include <hltp/system_io.hpp>

#include "output.hpp"

namespace hltp::cli {

struct FloquetArgs {
  std::string system;
  int samples = 256;
  int band = -1;
};

struct SpectrumArgs {
  std::string system;
  std::vector<int> m;
};

struct LyapArgs {
  std::string system;
  int m = 16;
  double eps = 1e-8;
  bool adaptive = false;
  int m0 = 8;
  int m_max = 128;
  bool full_truncated = false;
  bool oracle_check = false;
};

struct RiccatiArgs {
  std::string system;
  double eps = 1e-5;
  int m0 = 8;
  int m_max = 128;
  double outer_tol = 1e-9;
  std::string k0;  // optional JSON matrix file
  bool oracle_check = false;
  std::optional<int> full_truncated;
  bool fixed_m = false;
};

struct EquilibriumArgs {
  std::string system;
  std::string u_ref;  // exactly one of u_ref and x_d
  std::string x_d;
  int m = 32;
  int input_band = -1;
};

struct SimulateArgs {
  std::string system;
  std::string scenario;
  RiccatiArgs gain;       // used unless gain_file is set or open_loop
  std::string gain_file;  // JSON matrix file with K(t)
  int gain_band = -1;     // reconstruct K with |k| <= gain_band; -1 keeps all
  bool open_loop = false;
};

struct ReproArgs {
  std::vector<std::string> figures;
  std::string data_dir;
  int threads = 1;
};

// Each command writes its artifacts into out and returns the "results"
// section of report.json.
nlohmann::json run_floquet(const FloquetArgs& a, OutDir& out);
nlohmann::json run_spectrum(const SpectrumArgs& a, OutDir& out);
nlohmann::json run_lyap(const LyapArgs& a, OutDir& out);
nlohmann::json run_riccati(const RiccatiArgs& a, OutDir& out);
nlohmann::json run_equilibrium(const EquilibriumArgs& a, OutDir& out);
nlohmann::json run_simulate(const SimulateArgs& a, OutDir& out);
nlohmann::json run_repro(const ReproArgs& a, OutDir& out);

std::vector<std::string> figure_ids();

// Shared by the subcommands and repro.
nlohmann::json write_spectrum_csv(const LtpSystem& sys, const std::vector<int>& ms, const std::string& path);
void write_simulation_csv(const std::string& path, const SimulationResult& r);
nlohmann::json simulation_report(const SimulationResult& r);

}  // namespace hltp::cli

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <thread>

#include <CLI11.hpp>

#include <hltp/errors.hpp>
#include <hltp/system_io.hpp>

#include "commands.hpp"

using namespace hltp;
using namespace hltp::cli;
using nlohmann::json;

namespace {

// HARMONIC_LTP_THREADS caps parallelism; unset means all hardware threads.
int thread_cap() {
  const int hw = std::max(1u, std::thread::hardware_concurrency());
  const char* env = std::getenv("HARMONIC_LTP_THREADS");
  if (!env || !*env) return hw;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw ParseError(std::string("HARMONIC_LTP_THREADS must be a positive integer, got '") + env + "'");
  return static_cast<int>(std::min<long>(v, hw));
}

json echo_file(const std::string& path) {
  if (path.empty()) return nullptr;
  return {{"path", path}, {"content", read_json_file(path)}};
}

void add_riccati_flags(CLI::App* c, RiccatiArgs& r) {
  c->add_option("--eps", r.eps, "target accuracy")->capture_default_str();
  c->add_option("--m0", r.m0, "initial truncation")->capture_default_str();
  c->add_option("--m-max", r.m_max, "largest truncation")->capture_default_str();
  c->add_option("--outer-tol", r.outer_tol, "stop when ||S(k) - S(k-1)|| falls below")->capture_default_str();
  c->add_option("--k0", r.k0, "JSON matrix file with a stabilizing initial gain")->check(CLI::ExistingFile);
  c->add_flag("--fixed-m", r.fixed_m, "keep m = m0 for every Kleinman step");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic analysis and LQ control of linear time-periodic systems"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_dir = ".";
  long seed = 0;
  app.add_option("--out-dir", out_dir, "directory for report.json and CSV artifacts")->capture_default_str();
  app.add_option("--seed", seed, "seed echoed in the report; commands are deterministic")->capture_default_str();
  app.set_version_flag("--version", HLTP_VERSION);

  FloquetArgs fa;
  auto* floquet = app.add_subcommand("floquet", "Floquet factorization A(t) -> W(t), Lambda");
  floquet->add_option("system", fa.system, "system JSON file")->required()->check(CLI::ExistingFile);
  floquet->add_option("--samples", fa.samples, "time grid size")->capture_default_str();
  floquet->add_option("--band", fa.band, "phasor band of W (-1: samples/2 - 1)")->capture_default_str();

  SpectrumArgs sa;
  auto* spectrum = app.add_subcommand("spectrum", "classified spectrum of the truncated harmonic operator");
  spectrum->add_option("system", sa.system, "system JSON file")->required()->check(CLI::ExistingFile);
  spectrum->add_option("--m", sa.m, "truncation order, repeatable")->required()->allow_extra_args(false);

  LyapArgs la;
  auto* lyap = app.add_subcommand("lyap", "harmonic Lyapunov equation");
  lyap->add_option("system", la.system, "system JSON file")->required()->check(CLI::ExistingFile);
  lyap->add_option("--m", la.m, "truncation order (fixed mode)")->capture_default_str();
  lyap->add_option("--eps", la.eps, "residual target (adaptive mode)")->capture_default_str();
  lyap->add_flag("--adaptive", la.adaptive, "grow m until the symbol residual is below eps");
  lyap->add_option("--m0", la.m0, "initial m (adaptive mode)")->capture_default_str();
  lyap->add_option("--m-max", la.m_max, "largest m (adaptive mode)")->capture_default_str();
  lyap->add_flag("--full-truncated", la.full_truncated, "also solve the dense truncated equation at m_used");
  lyap->add_flag("--oracle-check", la.oracle_check, "compare with the time-domain solution");

  RiccatiArgs ra;
  int ra_full = -1;
  auto* riccati = app.add_subcommand("riccati", "harmonic Riccati equation by Kleinman iteration");
  riccati->add_option("system", ra.system, "system JSON file")->required()->check(CLI::ExistingFile);
  add_riccati_flags(riccati, ra);
  riccati->add_flag("--oracle-check", ra.oracle_check, "compare with the time-domain solution");
  riccati->add_option("--full-truncated", ra_full, "also solve the dense truncated equation at this m");

  EquilibriumArgs ea;
  auto* equilibrium = app.add_subcommand("equilibrium", "harmonic equilibrium from an input or a target state");
  equilibrium->add_option("system", ea.system, "system JSON file")->required()->check(CLI::ExistingFile);
  auto* u_opt = equilibrium->add_option("--u-ref", ea.u_ref, "JSON matrix file with u_ref(t)")->check(CLI::ExistingFile);
  auto* x_opt = equilibrium->add_option("--x-d", ea.x_d, "JSON matrix file with the target x_d(t)")->check(CLI::ExistingFile);
  u_opt->excludes(x_opt);
  equilibrium->add_option("--m", ea.m, "truncation order")->capture_default_str();
  equilibrium->add_option("--input-band", ea.input_band, "input harmonics kept by --x-d (-1: m/2)")->capture_default_str();

  SimulateArgs ma;
  ma.gain.eps = 1e-5;
  ma.gain.m_max = 256;
  auto* simulate = app.add_subcommand("simulate", "closed-loop tracking of a segment scenario");
  simulate->add_option("system", ma.system, "system JSON file")->required()->check(CLI::ExistingFile);
  simulate->add_option("scenario", ma.scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
  add_riccati_flags(simulate, ma.gain);
  auto* g_opt = simulate->add_option("--gain", ma.gain_file, "JSON matrix file with K(t) instead of solving")
                    ->check(CLI::ExistingFile);
  auto* ol_opt = simulate->add_flag("--open-loop", ma.open_loop, "simulate with K = 0");
  g_opt->excludes(ol_opt);
  simulate->add_option("--gain-band", ma.gain_band, "keep gain phasors |k| <= this (-1: all)")->capture_default_str();

  ReproArgs pa;
  pa.data_dir = std::string(HLTP_DATA_DIR) + "/systems";
  auto* repro = app.add_subcommand("repro", "regenerate figure data from the bundled systems");
  repro->add_option("figures", pa.figures, "figure ids (fig2 .. fig11) or 'all'")->required();
  repro->add_option("--data-dir", pa.data_dir, "directory with the bundled system files")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ParseError("").exit_code();
  }

  CLI::App* cmd = app.get_subcommands().front();
  json report = {{"command", cmd->get_name()}, {"version", version_info()}};
  json args = json::array();
  for (int i = 1; i < argc; ++i) args.push_back(argv[i]);
  report["inputs"] = {{"argv", args}, {"seed", seed}};

  std::unique_ptr<OutDir> out;
  int status = 0;
  try {
    const int threads = thread_cap();
    report["inputs"]["threads"] = threads;
    out = std::make_unique<OutDir>(out_dir);
    if (ra_full >= 0) ra.full_truncated = ra_full;
    pa.threads = threads;

    const std::string& system = cmd == floquet    ? fa.system
                                : cmd == spectrum ? sa.system
                                : cmd == lyap     ? la.system
                                : cmd == riccati  ? ra.system
                                : cmd == equilibrium ? ea.system
                                : cmd == simulate ? ma.system
                                                  : std::string();
    report["inputs"]["system"] = echo_file(system);
    if (cmd == simulate) report["inputs"]["scenario"] = echo_file(ma.scenario);

    json results;
    if (cmd == floquet) results = run_floquet(fa, *out);
    else if (cmd == spectrum) results = run_spectrum(sa, *out);
    else if (cmd == lyap) results = run_lyap(la, *out);
    else if (cmd == riccati) results = run_riccati(ra, *out);
    else if (cmd == equilibrium) results = run_equilibrium(ea, *out);
    else if (cmd == simulate) results = run_simulate(ma, *out);
    else results = run_repro(pa, *out);
    report["status"] = "ok";
    report["results"] = results;
  } catch (const hltp::Error& e) {
    std::fprintf(stderr, "hltp %s: %s\n", cmd->get_name().c_str(), e.what());
    status = e.exit_code();
    report["status"] = "error";
    report["error"] = {{"message", e.what()}, {"exit_code", status}};
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hltp %s: internal error: %s\n", cmd->get_name().c_str(), e.what());
    status = InternalError("").exit_code();
    report["status"] = "error";
    report["error"] = {{"message", e.what()}, {"exit_code", status}};
  }

  if (out) {
    try {
      const std::string path = out->path("report.json");
      report["files"] = out->files();
      write_json(path, report);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "hltp: %s\n", e.what());
      if (status == 0) status = InternalError("").exit_code();
    }
  }
  return status;
}

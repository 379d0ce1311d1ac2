#include "commands.hpp"

#include <cmath>
#include <cstdio>

#include <hltp/errors.hpp>
#include <hltp/floquet.hpp>
#include <hltp/lq_control.hpp>
#include <hltp/lyapunov.hpp>
#include <hltp/riccati.hpp>
#include <hltp/spectra.hpp>
#include <hltp/system_io.hpp>
#include <hltp/toeplitz.hpp>

namespace hltp::cli {

using nlohmann::json;

namespace {

const FourierMatrix& require(const std::optional<FourierMatrix>& f, const char* what, const std::string& file) {
  if (!f) throw ParseError(file + ": system has no " + what);
  return *f;
}

FourierMatrix load_matrix(const std::string& path, double period) {
  return build_matrix(read_json_file(path).get<MatrixSpec>(), period);
}

double phasor_distance(const FourierMatrix& a, const FourierMatrix& b) {
  const int band = std::max(a.band(), b.band());
  return (a.with_band(band) - b.with_band(band)).l2_norm();
}

const char* class_name(SpectrumClass c) {
  switch (c) {
    case SpectrumClass::Lambda1: return "L1";
    case SpectrumClass::Lambda2Plus: return "L2+";
    case SpectrumClass::Lambda2Minus: return "L2-";
  }
  return "?";
}

KleinmanConfig kleinman_config(const RiccatiArgs& a, double period) {
  KleinmanConfig cfg;
  cfg.eps = a.eps;
  cfg.m0 = a.m0;
  cfg.m_max = a.m_max;
  cfg.outer_tol = a.outer_tol;
  cfg.fixed_m = a.fixed_m;
  if (!a.k0.empty()) cfg.K0 = load_matrix(a.k0, period);
  return cfg;
}

json riccati_report(const RiccatiSolution& s) {
  json iters = json::array();
  for (const auto& it : s.log) {
    iters.push_back({{"index", it.index},
                     {"m", it.m},
                     {"lyapunov_residual", it.lyapunov_residual},
                     {"change", it.change},
                     {"monotone_margin", it.monotone_margin},
                     {"min_eigenvalue", it.min_eigenvalue},
                     {"closed_loop_radius", it.closed_loop_radius},
                     {"gain_tail", it.gain_tail}});
  }
  return {{"iterations", s.iterations},
          {"m_final", s.m_final},
          {"residual_riccati", s.residual_riccati},
          {"eta", s.eta},
          {"eps", s.eps},
          {"eps_achieved", s.eps_achieved},
          {"bound_eta_eps2", s.bound_eta_eps2},
          {"certificate_ok", s.certificate_ok},
          {"closed_loop_radius", s.closed_loop_radius},
          {"monotone_margins", s.monotone_log},
          {"log", iters}};
}

json equilibrium_report(const HarmonicEquilibrium& e) {
  return {{"m", e.m},
          {"residual", e.residual},
          {"truncation_residual", e.truncation_residual},
          {"cost", e.cost},
          {"gradient_norm", e.gradient_norm},
          {"rank_deficient", e.rank_deficient}};
}

}  // namespace

json run_floquet(const FloquetArgs& a, OutDir& out) {
  const LtpSystem sys = load_system(a.system);
  FloquetOptions opts;
  opts.grid_samples = a.samples;
  opts.band_out = a.band;
  const FloquetFactorization fac = floquet_factorize(sys.A, opts);

  const TimeGrid grid(sys.period, a.samples);
  FILE* fp = std::fopen(out.path("W.csv").c_str(), "w");
  if (!fp) throw Error("cannot write W.csv");
  std::fprintf(fp, "t,row,col,re,im\n");
  for (int i = 0; i < grid.size(); ++i) {
    const MatrixXcd W = fac.W.evaluate(grid.time(i));
    for (int r = 0; r < W.rows(); ++r)
      for (int c = 0; c < W.cols(); ++c)
        std::fprintf(fp, "%.17g,%d,%d,%.17g,%.17g\n", grid.time(i), r, c, W(r, c).real(), W(r, c).imag());
  }
  std::fclose(fp);
  write_phasors_csv(out.path("W_phasors.csv"), fac.W);

  json defective = json::array();
  for (bool d : fac.defective) defective.push_back(d);
  const json res = {{"multipliers", to_json(fac.mu)},
                    {"base_eigenvalues", to_json(fac.lambda)},
                    {"Lambda", to_json(fac.Lambda)},
                    {"defective", defective},
                    {"defective_suspect", fac.defective_suspect},
                    {"spectral_radius", fac.mu.cwiseAbs().maxCoeff()},
                    {"exact_is_hurwitz", HarmonicSpectrum::from(fac).is_hurwitz()},
                    {"residuals",
                     {{"floquet_identity", fac.floquet_identity},
                      {"periodicity", fac.periodicity_error},
                      {"periodicity_amplification", fac.periodicity_amplification},
                      {"dW", fac.residual_dW},
                      {"dWinv", fac.residual_dWinv},
                      {"liouville", fac.monodromy.liouville_error}}},
                    {"eigvec_condition", fac.eigvec_condition},
                    {"W_band", fac.W.band()}};
  write_json(out.path("floquet.json"), res);
  return res;
}

json write_spectrum_csv(const LtpSystem& sys, const std::vector<int>& ms, const std::string& path) {
  if (ms.empty()) throw ParseError("spectrum: at least one --m is required");
  const FloquetFactorization fac = floquet_factorize(sys.A);
  const HarmonicSpectrum exact = HarmonicSpectrum::from(fac);

  FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw Error("cannot write " + path);
  std::fprintf(fp, "re,im,class,m,residual\n");
  json per_m = json::array();
  for (int m : ms) {
    if (m < 0) {
      std::fclose(fp);
      throw ParseError("spectrum: --m must be non-negative");
    }
    const SpectrumClassification c = classify(truncated_spectrum(sys.A, m).eigs, m, exact, {}, &sys.A, &fac);
    for (Eigen::Index i = 0; i < c.eigs.size(); ++i) {
      std::fprintf(fp, "%.17g,%.17g,%s,%d,%.17g\n", c.eigs(i).real(), c.eigs(i).imag(), class_name(c.cls[i]), m,
                   c.residuals[i]);
    }
    double max_re = -INFINITY;
    for (auto z : c.lambda2_plus) max_re = std::max(max_re, z.real());
    per_m.push_back({{"m", m},
                     {"lambda1", c.lambda1.size()},
                     {"lambda2_plus", c.lambda2_plus.size()},
                     {"lambda2_minus", c.lambda2_minus.size()},
                     {"max_real_lambda2_plus", c.lambda2_plus.empty() ? json(nullptr) : json(max_re)},
                     {"tol", c.tol},
                     {"j0", c.j0},
                     {"borderline", c.borderline.size()},
                     {"truncation_is_hurwitz", c.truncation_is_hurwitz}});
  }
  std::fclose(fp);
  return {{"base_eigenvalues", to_json(exact.base())},
          {"exact_is_hurwitz", exact.is_hurwitz()},
          {"truncations", per_m}};
}

json run_spectrum(const SpectrumArgs& a, OutDir& out) {
  return write_spectrum_csv(load_system(a.system), a.m, out.path("spectrum.csv"));
}

json run_lyap(const LyapArgs& a, OutDir& out) {
  const LtpSystem sys = load_system(a.system);
  const FourierMatrix& Q = require(sys.Q, "Q", a.system);
  const LyapunovSolution sol =
      a.adaptive ? solve_adaptive(sys.A, Q, a.eps, a.m0, a.m_max) : solve_symbol_lyapunov(sys.A, Q, a.m);
  write_phasors_csv(out.path("P_phasors.csv"), sol.P);

  json history = json::array();
  for (const auto& [m, r] : sol.history) history.push_back({{"m", m}, {"residual", r}});
  json res = {{"mode", a.adaptive ? "adaptive" : "fixed"},
              {"m_used", sol.m_used},
              {"residual_symbol", sol.residual_symbol},
              {"residual_time", sol.residual_time},
              {"positive_definite", sol.positive_definite},
              {"min_eigenvalue", sol.min_eigenvalue},
              {"asymmetry", sol.asymmetry},
              {"rcond", sol.rcond},
              {"history", history}};
  if (a.adaptive) res["eps"] = a.eps;

  if (a.oracle_check) {
    const FourierMatrix P_or = time_domain_oracle(sys.A, Q);
    write_phasors_csv(out.path("P_oracle_phasors.csv"), P_or);
    res["oracle"] = {{"phasor_distance", phasor_distance(sol.P, P_or)}, {"oracle_band", P_or.band()}};
  }
  if (a.full_truncated) {
    const int n = sys.A.rows();
    const TruncatedLyapunov t = solve_truncated_full(sys.A, Q, sol.m_used, &sol.P);
    write_matrix_csv(out.path("P_m.csv"), t.P_m, t.m, n);
    write_matrix_csv(out.path("delta_P.csv"), t.delta, t.m, n);
    write_real_matrix_csv(out.path("defect_P.csv"), t.defect_map, t.m, n);
    res["full_truncated"] = {{"m", t.m},
                             {"delta_max", t.delta.cwiseAbs().maxCoeff()},
                             {"defect_max_log10", t.defect_map.maxCoeff()}};
  }
  return res;
}

json run_riccati(const RiccatiArgs& a, OutDir& out) {
  const LtpSystem sys = load_system(a.system);
  const FourierMatrix& B = require(sys.B, "B", a.system);
  const FourierMatrix& Q = require(sys.Q, "Q", a.system);
  const FourierMatrix& R = require(sys.R, "R", a.system);
  const RiccatiSolution sol = kleinman_solve(sys.A, B, Q, R, kleinman_config(a, sys.period));
  write_phasors_csv(out.path("S_phasors.csv"), sol.S);
  write_phasors_csv(out.path("K_phasors.csv"), sol.K);
  json res = riccati_report(sol);
  res["config"] = {{"eps", a.eps},     {"m0", a.m0},           {"m_max", a.m_max},
                   {"fixed_m", a.fixed_m}, {"outer_tol", a.outer_tol}, {"k0", a.k0.empty() ? json(nullptr) : json(a.k0)}};

  if (a.oracle_check) {
    const FourierMatrix S_or = time_domain_riccati_oracle(sys.A, B, Q, R);
    write_phasors_csv(out.path("S_oracle_phasors.csv"), S_or);
    res["oracle"] = {{"phasor_distance", phasor_distance(sol.S, S_or)}, {"oracle_band", S_or.band()}};
  }
  if (a.full_truncated) {
    const int m = *a.full_truncated;
    const int n = sys.A.rows();
    const TruncatedRiccati t = full_truncated_riccati(sys.A, B, Q, R, m, &sol.S, &sol.K);
    write_matrix_csv(out.path("P_m.csv"), t.P_m, m, n);
    write_matrix_csv(out.path("K_m.csv"), t.K_m, m, n);
    write_real_matrix_csv(out.path("defect_P.csv"), t.defect_P, m, n);
    write_real_matrix_csv(out.path("defect_K.csv"), t.defect_K, m, n);
    write_matrix_csv(out.path("delta_P.csv"), t.delta_P, m, n);
    write_matrix_csv(out.path("delta_K.csv"), t.delta_K, m, n);
    res["full_truncated"] = {{"m", m},
                             {"delta_P_max", t.delta_P.cwiseAbs().maxCoeff()},
                             {"delta_K_max", t.delta_K.cwiseAbs().maxCoeff()}};
  }
  return res;
}

json run_equilibrium(const EquilibriumArgs& a, OutDir& out) {
  if (a.u_ref.empty() == a.x_d.empty()) throw ParseError("equilibrium: give exactly one of --u-ref and --x-d");
  const LtpSystem sys = load_system(a.system);
  const FourierMatrix& B = require(sys.B, "B", a.system);
  HarmonicEquilibrium eq;
  if (!a.u_ref.empty()) {
    const FourierMatrix u = load_matrix(a.u_ref, sys.period);
    if (u.cols() != 1 || u.rows() != B.cols()) throw ParseError(a.u_ref + ": expected a column with one row per input");
    eq = equilibrium_from_input(sys.A, B, PhasorVector::from(u), a.m);
  } else {
    const FourierMatrix x = load_matrix(a.x_d, sys.period);
    if (x.cols() != 1 || x.rows() != sys.A.rows()) throw ParseError(a.x_d + ": expected a column with one row per state");
    eq = nearest_equilibrium(sys.A, B, PhasorVector::from(x), a.m, a.input_band);
  }
  write_phasor_vector_csv(out.path("X_ref.csv"), eq.X_ref);
  write_phasor_vector_csv(out.path("U_ref.csv"), eq.U_ref);
  json res = equilibrium_report(eq);
  res["mode"] = a.u_ref.empty() ? "nearest" : "from_input";
  return res;
}

json run_simulate(const SimulateArgs& a, OutDir& out) {
  const LtpSystem sys = load_system(a.system);
  const FourierMatrix& B = require(sys.B, "B", a.system);
  const TrackingScenario sc = build_scenario(load_scenario_spec(a.scenario), sys.period, B.cols());

  json res;
  FourierMatrix K;
  if (a.open_loop) {
    K = FourierMatrix::zero(sys.period, B.cols(), sys.A.rows());
    res["gain"] = "zero";
  } else if (!a.gain_file.empty()) {
    K = load_matrix(a.gain_file, sys.period);
    res["gain"] = a.gain_file;
  } else {
    const RiccatiSolution sol = kleinman_solve(sys.A, B, require(sys.Q, "Q", a.system),
                                               require(sys.R, "R", a.system), kleinman_config(a.gain, sys.period));
    K = sol.K;
    res["gain"] = "kleinman";
    res["riccati"] = {{"iterations", sol.iterations},
                      {"m_final", sol.m_final},
                      {"certificate_ok", sol.certificate_ok},
                      {"closed_loop_radius", sol.closed_loop_radius}};
  }
  if (a.gain_band >= 0) {
    const ReconstructedGain g = reconstruct_gain(K, a.gain_band);
    K = g.K;
    res["gain_band"] = a.gain_band;
    res["gain_tail_energy"] = g.tail_energy;
  }
  write_phasors_csv(out.path("K_phasors.csv"), K);

  const SimulationResult r = simulate_closed_loop(sys.A, B, K, sc);
  write_simulation_csv(out.path("simulation.csv"), r);
  res.update(simulation_report(r));
  return res;
}

void write_simulation_csv(const std::string& path, const SimulationResult& r) {
  FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw Error("cannot write " + path);
  const long n = r.x.empty() ? 0 : r.x[0].size(), p = r.u.empty() ? 0 : r.u[0].size();
  std::fprintf(fp, "t");
  for (long i = 1; i <= n; ++i) std::fprintf(fp, ",x%ld", i);
  for (long i = 1; i <= p; ++i) std::fprintf(fp, ",u%ld", i);
  for (long i = 1; i <= n; ++i) std::fprintf(fp, ",xref%ld", i);
  std::fprintf(fp, ",err\n");
  for (size_t s = 0; s < r.t.size(); ++s) {
    std::fprintf(fp, "%.17g", r.t[s]);
    for (long i = 0; i < n; ++i) std::fprintf(fp, ",%.17g", r.x[s](i));
    for (long i = 0; i < p; ++i) std::fprintf(fp, ",%.17g", r.u[s](i));
    for (long i = 0; i < n; ++i) std::fprintf(fp, ",%.17g", r.xref[s](i));
    std::fprintf(fp, ",%.17g\n", r.err[s]);
  }
  std::fclose(fp);
}

json simulation_report(const SimulationResult& r) {
  json segs = json::array();
  for (const auto& seg : r.segments) {
    segs.push_back({{"t", {seg.t_start, seg.t_end}},
                    {"terminal_error", seg.terminal_error},
                    {"xref_norm", seg.xref_norm},
                    {"relative_error", seg.relative_error},
                    {"imag_leakage", seg.imag_leakage},
                    {"equilibrium", equilibrium_report(seg.equilibrium)}});
  }
  return {{"segments", segs},
          {"max_state_norm", r.max_state_norm},
          {"divergence_time", r.divergence_time ? json(*r.divergence_time) : json(nullptr)},
          {"gain_imag_leakage", r.gain_imag_leakage}};
}

}  // namespace hltp::cli

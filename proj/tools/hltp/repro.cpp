#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#include <hltp/errors.hpp>
#include <hltp/floquet.hpp>
#include <hltp/lq_control.hpp>
#include <hltp/lyapunov.hpp>
#include <hltp/riccati.hpp>
#include <hltp/system_io.hpp>
#include <hltp/toeplitz.hpp>

#include "commands.hpp"

namespace hltp::cli {

using nlohmann::json;

namespace {

Eigen::MatrixXd log10_abs(const MatrixXcd& M) { return M.cwiseAbs().array().log10().matrix(); }

// Inputs and expensive intermediates shared between figures. Each lazy
// member is computed once, whichever figure asks first.
class Context {
 public:
  explicit Context(std::string data_dir) : dir_(std::move(data_dir)) {}

  const LtpSystem& scalar() { return once(scalar_flag_, scalar_, [&] { return load("scalar1d.json"); }); }
  const LtpSystem& spectrum_example() { return once(boundary_flag_, boundary_, [&] { return load("boundary2x2.json"); }); }
  const LtpSystem& periodic() { return once(unstable_flag_, unstable_, [&] { return load("unstable2x2.json"); }); }

  // Reference solution of the scalar Lyapunov equation, well past the
  // point where the phasors stop changing.
  const FourierMatrix& scalar_reference() {
    return once(pref_flag_, pref_, [&] { return solve_symbol_lyapunov(scalar().A, *scalar().Q, 96).P; });
  }

  // Certified Kleinman solution of the 2x2 example.
  const RiccatiSolution& gain() {
    return once(gain_flag_, gain_, [&] {
      const LtpSystem& s = periodic();
      KleinmanConfig cfg;
      cfg.eps = 1e-5;
      cfg.m_max = 256;
      return kleinman_solve(s.A, *s.B, *s.Q, *s.R, cfg);
    });
  }

  const TruncatedRiccati& truncated_riccati(int m) {
    std::once_flag* flag;
    {
      std::lock_guard lock(map_mu_);
      flag = &trunc_flags_[m];
    }
    std::call_once(*flag, [&] {
      const LtpSystem& s = periodic();
      const RiccatiSolution& g = gain();
      TruncatedRiccati t = full_truncated_riccati(s.A, *s.B, *s.Q, *s.R, m, &g.S, &g.K);
      std::lock_guard lock(map_mu_);
      trunc_[m] = std::move(t);
    });
    std::lock_guard lock(map_mu_);
    return trunc_.at(m);
  }

  TrackingScenario scenario() {
    return build_scenario(load_scenario_spec(dir_ + "/unstable2x2_scenario.json"), periodic().period, 1);
  }

 private:
  LtpSystem load(const std::string& name) { return load_system(dir_ + "/" + name); }

  template <class T, class F>
  const T& once(std::once_flag& flag, T& slot, F make) {
    std::call_once(flag, [&] { slot = make(); });
    return slot;
  }

  std::string dir_;
  std::once_flag scalar_flag_, boundary_flag_, unstable_flag_, pref_flag_, gain_flag_;
  LtpSystem scalar_, boundary_, unstable_;
  FourierMatrix pref_;
  RiccatiSolution gain_;
  std::mutex map_mu_;
  std::map<int, std::once_flag> trunc_flags_;
  std::map<int, TruncatedRiccati> trunc_;
};

struct Figure {
  std::string id;
  std::string description;
  json plot;  // hint for an external plotting script
  std::function<json(Context&, OutDir&, std::vector<std::string>&)> run;
};

// Registers a file with both the job and the figure's manifest entry.
std::string file(OutDir& out, std::vector<std::string>& files, const std::string& name) {
  files.push_back(name);
  return out.path(name);
}

json fig2(Context& c, OutDir& out, std::vector<std::string>& files) {
  const LtpSystem& s = c.scalar();
  json res = json::array();
  for (int m : {8, 16, 32, 64}) {
    const TruncatedLyapunov t = solve_truncated_full(s.A, *s.Q, m);
    write_real_matrix_csv(file(out, files, "fig2_defect_m" + std::to_string(m) + ".csv"), t.defect_map, m, 1);
    res.push_back({{"m", m}, {"max_log10_defect", t.defect_map.maxCoeff()}});
  }
  return res;
}

json fig3(Context& c, OutDir& out, std::vector<std::string>& files) {
  return write_spectrum_csv(c.spectrum_example(), {20, 40}, file(out, files, "fig3_spectrum.csv"));
}

json fig4(Context& c, OutDir& out, std::vector<std::string>& files) {
  const LtpSystem& s = c.scalar();
  std::vector<std::vector<double>> rows;
  for (int m = 2; m <= 40; m += 2) {
    const LyapunovSolution sol = solve_symbol_lyapunov(s.A, *s.Q, m);
    rows.push_back({double(m), sol.residual_symbol, sol.residual_time});
  }
  write_table_csv(file(out, files, "fig4_residual.csv"), {"m", "residual_symbol", "residual_time"}, rows);
  return {{"m_min", 2}, {"m_max", 40}, {"final_residual", rows.back()[1]}};
}

json fig5(Context& c, OutDir& out, std::vector<std::string>& files) {
  const LtpSystem& s = c.scalar();
  std::vector<std::vector<double>> rows;
  for (int m = 8; m <= 32; m += 4) {
    const FourierMatrix P = solve_symbol_lyapunov(s.A, *s.Q, m).P;
    for (int k = -P.band(); k <= P.band(); ++k) rows.push_back({double(m), double(k), std::abs(P.phasor(k)(0, 0))});
  }
  write_table_csv(file(out, files, "fig5_phasor_moduli.csv"), {"m", "k", "abs"}, rows);
  return {{"m", {8, 12, 16, 20, 24, 28, 32}}};
}

json fig6(Context& c, OutDir& out, std::vector<std::string>& files) {
  const LtpSystem& s = c.scalar();
  const FourierMatrix& ref = c.scalar_reference();
  json res = json::array();
  for (int m : {16, 32, 64}) {
    const TruncatedLyapunov t = solve_truncated_full(s.A, *s.Q, m, &ref);
    write_real_matrix_csv(file(out, files, "fig6_delta_m" + std::to_string(m) + ".csv"), log10_abs(t.delta), m, 1);
    res.push_back({{"m", m}, {"delta_max", t.delta.cwiseAbs().maxCoeff()}});
  }
  return res;
}

json fig7(Context& c, OutDir& out, std::vector<std::string>& files) {
  json res = json::array();
  for (int m : {16, 32}) {
    const TruncatedRiccati& t = c.truncated_riccati(m);
    write_real_matrix_csv(file(out, files, "fig7_defect_P_m" + std::to_string(m) + ".csv"), t.defect_P, m, 2);
    write_real_matrix_csv(file(out, files, "fig7_defect_K_m" + std::to_string(m) + ".csv"), t.defect_K, m, 2);
    res.push_back({{"m", m}, {"max_log10_defect_P", t.defect_P.maxCoeff()}, {"max_log10_defect_K", t.defect_K.maxCoeff()}});
  }
  return res;
}

json fig8(Context& c, OutDir& out, std::vector<std::string>& files) {
  json res = json::array();
  for (int m : {16, 32}) {
    const TruncatedRiccati& t = c.truncated_riccati(m);
    write_real_matrix_csv(file(out, files, "fig8_delta_P_m" + std::to_string(m) + ".csv"), log10_abs(t.delta_P), m, 2);
    res.push_back({{"m", m}, {"delta_max", t.delta_P.cwiseAbs().maxCoeff()}});
  }
  return res;
}

json fig9(Context& c, OutDir& out, std::vector<std::string>& files) {
  const LtpSystem& s = c.periodic();
  const SimulationResult r = simulate_closed_loop(s.A, *s.B, c.gain().K, c.scenario());
  write_simulation_csv(file(out, files, "fig9_tracking.csv"), r);
  return simulation_report(r);
}

json fig10(Context& c, OutDir& out, std::vector<std::string>& files) {
  json res = json::array();
  for (int m : {16, 32}) {
    const TruncatedRiccati& t = c.truncated_riccati(m);
    write_real_matrix_csv(file(out, files, "fig10_delta_K_m" + std::to_string(m) + ".csv"), log10_abs(t.delta_K), m, 2);
    res.push_back({{"m", m}, {"delta_max", t.delta_K.cwiseAbs().maxCoeff()}});
  }
  return res;
}

json fig11(Context& c, OutDir& out, std::vector<std::string>& files) {
  const LtpSystem& s = c.periodic();
  const FourierMatrix& K = c.gain().K;
  std::vector<std::vector<double>> radii;
  for (int m0 : {10, 20, 50}) {
    const ReconstructedGain g = reconstruct_gain(K, std::min(m0, K.band()));
    radii.push_back({double(m0), spectral_radius_of_monodromy(s.A - multiply(*s.B, g.K)), g.tail_energy});
  }
  write_table_csv(file(out, files, "fig11_radii.csv"), {"m0", "closed_loop_radius", "tail_energy"}, radii);
  std::vector<std::vector<double>> moduli;
  for (int k = -K.band(); k <= K.band(); ++k)
    for (int j = 0; j < K.cols(); ++j) moduli.push_back({double(k), double(j), std::abs(K.phasor(k)(0, j))});
  write_table_csv(file(out, files, "fig11_gain_moduli.csv"), {"k", "col", "abs"}, moduli);
  json res = json::array();
  for (const auto& r : radii) res.push_back({{"m0", r[0]}, {"closed_loop_radius", r[1]}, {"tail_energy", r[2]}});
  return {{"radii", res}, {"gain_band", K.band()}};
}

const std::vector<Figure>& figures() {
  static const std::vector<Figure> figs{
      {"fig2", "toeplicity defect of the full truncated Lyapunov solution, scalar example, m = 8, 16, 32, 64",
       {{"kind", "heatmap"}, {"value", "log10 defect"}}, fig2},
      {"fig3", "truncated harmonic spectrum at m = 20 and 40 with L1 / L2+ / L2- classes",
       {{"kind", "scatter"}, {"x", "re"}, {"y", "im"}, {"color", "class"}, {"facet", "m"}}, fig3},
      {"fig4", "symbol Lyapunov residual against m, scalar example",
       {{"kind", "line"}, {"x", "m"}, {"y", "residual_symbol"}, {"yscale", "log"}}, fig4},
      {"fig5", "moduli of the Lyapunov solution phasors against m, scalar example",
       {{"kind", "line"}, {"x", "k"}, {"y", "abs"}, {"group", "m"}, {"yscale", "log"}}, fig5},
      {"fig6", "log10 |P_m - T_m(P)| for the full truncated Lyapunov solution, scalar example",
       {{"kind", "heatmap"}, {"value", "log10 abs"}}, fig6},
      {"fig7", "toeplicity defect of the full truncated Riccati solution and gain, 2x2 example",
       {{"kind", "heatmap"}, {"value", "log10 defect"}}, fig7},
      {"fig8", "log10 |P_m - T_m(S)| for the full truncated Riccati solution, 2x2 example",
       {{"kind", "heatmap"}, {"value", "log10 abs"}}, fig8},
      {"fig9", "closed-loop tracking of the three-segment scenario",
       {{"kind", "line"}, {"x", "t"}, {"y", {"x1", "x2", "xref1", "xref2", "u1"}}}, fig9},
      {"fig10", "log10 |K_m - T_m(K)| for the full truncated gain, 2x2 example",
       {{"kind", "heatmap"}, {"value", "log10 abs"}}, fig10},
      {"fig11", "closed-loop spectral radius of reconstructed gains and gain phasor moduli",
       {{"kind", "line"}, {"x", "k"}, {"y", "abs"}, {"group", "col"}, {"yscale", "log"}}, fig11},
  };
  return figs;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::vector<std::string> figure_ids() {
  std::vector<std::string> ids;
  for (const auto& f : figures()) ids.push_back(f.id);
  return ids;
}

json run_repro(const ReproArgs& a, OutDir& out) {
  std::vector<const Figure*> todo;
  for (const auto& id : a.figures) {
    if (id == "all") {
      todo.clear();
      for (const auto& f : figures()) todo.push_back(&f);
      break;
    }
    auto it = std::find_if(figures().begin(), figures().end(), [&](const Figure& f) { return f.id == id; });
    if (it == figures().end()) throw ParseError("repro: unknown figure id '" + id + "'");
    if (std::find(todo.begin(), todo.end(), &*it) == todo.end()) todo.push_back(&*it);
  }
  if (todo.empty()) throw ParseError("repro: no figure id given");

  Context ctx(a.data_dir);
  std::vector<json> results(todo.size());
  std::vector<std::vector<std::string>> files(todo.size());
  std::vector<std::exception_ptr> errors(todo.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i; (i = next++) < todo.size();) {
      try {
        results[i] = todo[i]->run(ctx, out, files[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(a.threads, static_cast<int>(todo.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  json manifest = {{"generated_at", utc_timestamp()}, {"figures", json::object()}};
  json res = json::object();
  for (size_t i = 0; i < todo.size(); ++i) {
    manifest["figures"][todo[i]->id] = {
        {"description", todo[i]->description}, {"files", files[i]}, {"plot", todo[i]->plot}};
    res[todo[i]->id] = results[i];
  }
  write_json(out.path("manifest.json"), manifest);
  return {{"figures", res}, {"threads", workers}};
}

}  // namespace hltp::cli

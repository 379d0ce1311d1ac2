#include <string>

#include <benchmark/benchmark.h>

#include <hltp/floquet.hpp>
#include <hltp/fourier.hpp>
#include <hltp/lyapunov.hpp>
#include <hltp/riccati.hpp>
#include <hltp/spectra.hpp>
#include <hltp/system_io.hpp>
#include <hltp/toeplitz.hpp>

using namespace hltp;

namespace {

const LtpSystem& system(const std::string& name) {
  static const LtpSystem boundary = load_system(std::string(HLTP_DATA_DIR) + "/systems/boundary2x2.json");
  static const LtpSystem unstable = load_system(std::string(HLTP_DATA_DIR) + "/systems/unstable2x2.json");
  return name == "unstable2x2" ? unstable : boundary;
}

void BM_Toeplitz(benchmark::State& st) {
  const FourierMatrix& A = system("boundary2x2").A;
  for (auto _ : st) benchmark::DoNotOptimize(toeplitz(A, st.range(0)).data().data());
}
BENCHMARK(BM_Toeplitz)->Arg(16)->Arg(64)->Arg(256);

void BM_Multiply(benchmark::State& st) {
  const FourierMatrix A = system("unstable2x2").A.with_band(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(multiply(A, A).band());
}
BENCHMARK(BM_Multiply)->Arg(9)->Arg(64)->Arg(256);

void BM_FloquetFactorize(benchmark::State& st) {
  const FourierMatrix& A = system("boundary2x2").A;
  for (auto _ : st) benchmark::DoNotOptimize(floquet_factorize(A).mu.data());
}
BENCHMARK(BM_FloquetFactorize)->Unit(benchmark::kMillisecond);

void BM_TruncatedSpectrum(benchmark::State& st) {
  const FourierMatrix& A = system("boundary2x2").A;
  for (auto _ : st) benchmark::DoNotOptimize(truncated_spectrum(A, st.range(0)).eigs.data());
}
BENCHMARK(BM_TruncatedSpectrum)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

// Symbol solve against the dense truncated solve at n = 2.
void BM_SymbolLyapunov(benchmark::State& st) {
  const LtpSystem& s = system("boundary2x2");
  for (auto _ : st) benchmark::DoNotOptimize(solve_symbol_lyapunov(s.A, *s.Q, st.range(0)).residual_symbol);
}
BENCHMARK(BM_SymbolLyapunov)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_TruncatedFullLyapunov(benchmark::State& st) {
  const LtpSystem& s = system("boundary2x2");
  for (auto _ : st) benchmark::DoNotOptimize(solve_truncated_full(s.A, *s.Q, st.range(0)).P_m.data());
}
BENCHMARK(BM_TruncatedFullLyapunov)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_KleinmanFixedM(benchmark::State& st) {
  const LtpSystem& s = system("unstable2x2");
  KleinmanConfig cfg;
  cfg.m0 = st.range(0);
  cfg.fixed_m = true;
  for (auto _ : st) benchmark::DoNotOptimize(kleinman_solve(s.A, *s.B, *s.Q, *s.R, cfg).iterations);
}
BENCHMARK(BM_KleinmanFixedM)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

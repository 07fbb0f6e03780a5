#include <benchmark/benchmark.h>

#include <colprune/linalg.hpp>

// The packaged benchmark_main archive carries LTO bytecode tied to one GCC
// release, so the entry point lives here instead.
int main(int argc, char** argv) {
  colprune::enable_flush_to_zero();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}

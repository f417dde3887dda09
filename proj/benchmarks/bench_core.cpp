#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "gnslab/asymmetry.hpp"
#include "gnslab/functionals.hpp"
#include "gnslab/gns_params.hpp"
#include "gnslab/grid_function.hpp"
#include "gnslab/radial.hpp"
#include "gnslab/rearrange.hpp"

namespace {

using namespace gnslab;

GridFunction gaussian_2d(std::size_t cells, double half_width) {
  const double h = 2.0 * half_width / static_cast<double>(cells);
  return GridFunction::sample({cells, cells}, {h, h},
                              [](std::span<const double> x) {
                                return std::exp(-(x[0] * x[0] + x[1] * x[1]));
                              });
}

void bm_lr_norm(benchmark::State& state) {
  const GridFunction u = gaussian_2d(256, 8.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lr_norm(u, 3.0));
  }
}
BENCHMARK(bm_lr_norm);

void bm_grad_lp_norm(benchmark::State& state) {
  const GridFunction u = gaussian_2d(256, 8.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(grad_lp_norm(u, 2.0));
  }
}
BENCHMARK(bm_grad_lp_norm);

void bm_schwarz_rearrange(benchmark::State& state) {
  const GridFunction u = gaussian_2d(256, 8.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(schwarz_rearrange(u));
  }
}
BENCHMARK(bm_schwarz_rearrange);

void bm_radial_solve_level(benchmark::State& state) {
  const GnsParams params = make_params(2, 1.5, 1.5, 2.5);
  MinimizeOptions opts;
  opts.resolution = 256;
  opts.budget = 120;
  for (auto _ : state) {
    benchmark::DoNotOptimize(minimize_radial(params, opts));
  }
}
BENCHMARK(bm_radial_solve_level)->Unit(benchmark::kMillisecond);

void bm_witness_eval(benchmark::State& state) {
  const GnsParams params = make_params(2, 1.5, 1.5, 2.5);
  MinimizeOptions opts;
  opts.resolution = 512;
  const RadialSolveResult solved = minimize_radial(params, opts);
  OptimizerWitness w;
  w.a = 1.1;
  w.b = 0.9;
  w.x0 = {0.25, -0.5};
  w.profile = solved.profile;
  const GridFunction u = gaussian_2d(256, 8.0);
  for (auto _ : state) {
    const GridFunction g = eval_witness(w, u.shape(), u.spacing());
    benchmark::DoNotOptimize(lr_norm_pow(g, params.q));
  }
}
BENCHMARK(bm_witness_eval)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "grosslab/hamiltonians.hpp"
#include "grosslab/spectral.hpp"

using namespace grosslab;

namespace {

const Space& medium_space() {
  static Space sp = [] {
    ModelConfig cfg;
    cfg.dimension = 1;
    cfg.torus_length = 2.0 * M_PI;
    cfg.sites_per_dim = 10;
    cfg.nmax = 3;
    cfg.form_factor.kind = FormFactorKind::polaron;
    cfg.coupling = 1.0;
    cfg.K = 1.4;
    cfg.lambda_list = {2.5, 4.5};
    cfg.seed = 1;
    return build_space(cfg);
  }();
  return sp;
}

}  // namespace

static void BM_field_apply(benchmark::State& state) {
  const Space& sp = medium_space();
  QOperator phi = op_field_phi(sp, field_G(sp, 4.5));
  QState in = random_state(sp, 1);
  QState out(sp.S, sp.X);
  for (auto _ : state) {
    phi.apply(in, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_field_apply);

static void BM_multiplier_apply(benchmark::State& state) {
  const Space& sp = medium_space();
  QOperator h0 = op_h0(sp);
  QState in = random_state(sp, 2);
  QState out(sp.S, sp.X);
  for (auto _ : state) {
    h0.apply(in, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_multiplier_apply);

static void BM_gross_apply_dense(benchmark::State& state) {
  const Space& sp = medium_space();
  QOperator U = gross_transform(sp, 1.4, 4.5);
  QState in = random_state(sp, 3);
  QState out(sp.S, sp.X);
  for (auto _ : state) {
    U.apply(in, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_gross_apply_dense);

static void BM_gross_apply_krylov(benchmark::State& state) {
  const Space& sp = medium_space();
  QOperator U = gross_transform(sp, 1.4, 4.5, 1);
  QState in = random_state(sp, 4);
  QState out(sp.S, sp.X);
  for (auto _ : state) {
    U.apply(in, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_gross_apply_krylov);

static void BM_dressed_apply(benchmark::State& state) {
  const Space& sp = medium_space();
  QOperator H = h_dressed(sp, 1.4, 4.5);
  QState in = random_state(sp, 5);
  QState out(sp.S, sp.X);
  for (auto _ : state) {
    H.apply(in, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_dressed_apply);

static void BM_op_norm_small(benchmark::State& state) {
  ModelConfig cfg;
  cfg.dimension = 1;
  cfg.torus_length = 2.0 * M_PI;
  cfg.sites_per_dim = 4;
  cfg.nmax = 2;
  cfg.form_factor.kind = FormFactorKind::polaron;
  cfg.coupling = 0.8;
  cfg.K = 1.0;
  cfg.lambda_list = {2.0};
  cfg.seed = 1;
  Space sp = build_space(cfg);
  QOperator phi = op_field_phi(sp, field_G(sp, 2.0));
  for (auto _ : state) {
    OpNormResult r = op_norm(sp, phi, 7);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_op_norm_small);

BENCHMARK_MAIN();

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "grosslab/model.hpp"

using namespace grosslab;

namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.dimension = 1;
  cfg.torus_length = 2.0 * M_PI;
  cfg.sites_per_dim = 4;
  cfg.nmax = 2;
  cfg.form_factor.kind = FormFactorKind::polaron;
  cfg.coupling = 1.0;
  cfg.K = 0.5;
  cfg.lambda_list = {1.5};
  return cfg;
}

const char* kSampleText =
    "dimension = 1\n"
    "torus_length = 6.283185307179586\n"
    "sites_per_dim = 16\n"
    "nmax = 3\n"
    "form_factor = smooth_power\n"
    "beta = 0.125\n"
    "coupling = 1.0\n"
    "K = 2.0\n"
    "lambda_list = 2.5, 3.5, 4.5\n"
    "seed = 7\n";

}  // namespace

TEST_SUITE("model") {

TEST_CASE("dual grid keeps one Nyquist representative") {
  ModelConfig cfg = small_config();
  ModeGrid grid = build_grid(cfg);
  CHECK(grid.M == 3);
  CHECK(grid.lambda_grid == doctest::Approx(2.0));
  std::vector<int> ms;
  for (const auto& m : grid.mvecs) ms.push_back(m[0]);
  std::sort(ms.begin(), ms.end());
  CHECK(ms == std::vector<int>{-1, 1, 2});
  CHECK(grid.w == doctest::Approx(1.0));
}

TEST_CASE("grid counts follow L^d - 1 and mode_cutoff") {
  ModelConfig cfg = small_config();
  cfg.sites_per_dim = 8;
  CHECK(build_grid(cfg).M == 7);
  cfg.dimension = 2;
  cfg.lambda_list = {1.5};
  CHECK(build_grid(cfg).M == 63);
  cfg.mode_cutoff = 2.0;
  int M = build_grid(cfg).M;
  CHECK(M < 63);
  for (const auto& m : build_grid(cfg).mvecs)
    CHECK(m[0] * m[0] + m[1] * m[1] <= 4);
}

TEST_CASE("negative index pairs modes") {
  ModelConfig cfg = small_config();
  cfg.sites_per_dim = 8;
  ModeGrid grid = build_grid(cfg);
  for (int i = 0; i < grid.M; ++i) {
    int j = grid.neg_index[i];
    if (j == i) continue;  // Nyquist self-pair has no negative on the grid
    CHECK(grid.kvecs(j, 0) == doctest::Approx(-grid.kvecs(i, 0)));
  }
}

TEST_CASE("config text round trip") {
  ModelConfig cfg = parse_config_text(kSampleText);
  CHECK(cfg.dimension == 1);
  CHECK(cfg.sites_per_dim == 16);
  CHECK(cfg.nmax == 3);
  CHECK(cfg.form_factor.kind == FormFactorKind::smooth_power);
  CHECK(cfg.form_factor.beta == doctest::Approx(0.125));
  CHECK(cfg.K == doctest::Approx(2.0));
  CHECK(cfg.lambda_list.size() == 3);
  CHECK(cfg.seed == 7);
}

TEST_CASE("parser rejects malformed input") {
  CHECK_THROWS_AS(parse_config_text("nonsense\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(std::string(kSampleText) + "extra = 1\n"),
                  ConfigError);
  std::string dup = kSampleText;
  dup += "seed = 9\n";
  CHECK_THROWS_AS(parse_config_text(dup), ConfigError);
  // gamma/beta tied to their kinds
  std::string wrong =
      "dimension = 1\ntorus_length = 6.283185307179586\nsites_per_dim = 16\n"
      "nmax = 3\nform_factor = polaron\ngamma = 1\ncoupling = 1\nK = 2\n"
      "lambda_list = 2.5,3.5\nseed = 1\n";
  CHECK_THROWS_AS(parse_config_text(wrong), ConfigError);
}

TEST_CASE("validation rejects unrepresentable cutoffs") {
  ModelConfig cfg = small_config();
  cfg.lambda_list = {1.0, 2.5};  // lambda_grid = 2
  bool threw = false;
  try {
    validate_config(cfg);
  } catch (const ConfigError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("cutoff not representable") !=
          std::string::npos);
  }
  CHECK(threw);
  cfg.lambda_list = {1.0, 2.0};
  CHECK_NOTHROW(validate_config(cfg));
  cfg.K = 1.0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);  // K not below sweep
  cfg.K = 0.5;
  cfg.lambda_list = {2.0, 1.0};
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);  // not ascending
  cfg.lambda_list = {1.0};
  cfg.sites_per_dim = 5;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);  // odd L
}

TEST_CASE("scalar_D matches a direct mode sum and tail accounting") {
  ModelConfig cfg = small_config();
  cfg.sites_per_dim = 16;
  cfg.form_factor.kind = FormFactorKind::smooth_power;
  cfg.form_factor.beta = 0.125;
  cfg.coupling = 0.8;
  ModeGrid grid = build_grid(cfg);

  auto direct = [&](double K) {
    double s = 0.0;
    for (int i = 0; i < grid.M; ++i) {
      if (grid.kabs[i] < K - 1e-9) continue;
      double g = cfg.coupling * grid.vsamples[i];
      s += grid.w * g * g / grid.k2[i];
    }
    return s;
  };
  for (double K : {0.5, 1.5, 2.5, 4.5}) {
    CHECK(scalar_D(grid, cfg, K) == doctest::Approx(direct(K)).epsilon(1e-12));
  }
  // D(K1) - D(K2) covers the shells K1 <= |k| < K2
  double diff = scalar_D(grid, cfg, 1.5) - scalar_D(grid, cfg, 3.5);
  double shells = 0.0;
  for (int i = 0; i < grid.M; ++i) {
    if (grid.kabs[i] < 1.5 - 1e-9 || grid.kabs[i] > 3.5 - 1e-9) continue;
    double g = cfg.coupling * grid.vsamples[i];
    shells += grid.w * g * g / grid.k2[i];
  }
  CHECK(diff == doctest::Approx(shells).epsilon(1e-12));
}

TEST_CASE("scalar_C annulus constant") {
  ModelConfig cfg = small_config();
  cfg.sites_per_dim = 16;
  ModeGrid grid = build_grid(cfg);
  CHECK(scalar_C(grid, cfg, 2.0, 2.0) == doctest::Approx(0.0));
  double c = scalar_C(grid, cfg, 1.0, 4.0);
  CHECK(c < 0.0);
  double manual = 0.0;
  for (int i = 0; i < grid.M; ++i) {
    if (grid.kabs[i] <= 1.0 + 1e-9 || grid.kabs[i] > 4.0 + 1e-9) continue;
    double g = cfg.coupling * grid.vsamples[i];
    double u = 1.0 + grid.k2[i];
    manual += grid.w * g * g * (1.0 / (u * u) - 2.0 / u);
  }
  CHECK(c == doctest::Approx(manual).epsilon(1e-12));
  CHECK_THROWS_AS(scalar_C(grid, cfg, 4.0, 1.0), ConfigError);
}

TEST_CASE("v3_supremum non-increasing in K") {
  ModelConfig cfg = small_config();
  cfg.sites_per_dim = 16;
  double prev = v3_supremum(cfg, 0.5);
  for (double K : {1.5, 2.5, 3.5}) {
    double cur = v3_supremum(cfg, K);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("regularity criterion thresholds") {
  // d=2 polaron: tail exponent 2s - 4 + (d-1) - (d-1) = 2s - 4 + 1 - 1;
  // divergence at s >= 3/2.
  ModelConfig cfg;
  cfg.dimension = 2;
  cfg.torus_length = M_PI;
  cfg.sites_per_dim = 8;
  cfg.nmax = 2;
  cfg.form_factor.kind = FormFactorKind::polaron;
  cfg.K = 2.5;
  cfg.lambda_list = {3.0};
  CHECK_FALSE(regularity_criterion(cfg, 1.0).divergent);
  CHECK_FALSE(regularity_criterion(cfg, 1.25).divergent);
  CHECK_FALSE(regularity_criterion(cfg, 1.49).divergent);
  CHECK(regularity_criterion(cfg, 1.5).divergent);
  CHECK(regularity_criterion(cfg, 1.75).divergent);

  // d=1 smooth_power beta=1/8: threshold at s = 7/4.
  ModelConfig c1;
  c1.dimension = 1;
  c1.sites_per_dim = 64;
  c1.form_factor.kind = FormFactorKind::smooth_power;
  c1.form_factor.beta = 0.125;
  c1.K = 1.5;
  c1.lambda_list = {3.0};
  CHECK_FALSE(regularity_criterion(c1, 1.5).divergent);
  CHECK_FALSE(regularity_criterion(c1, 1.74).divergent);
  CHECK(regularity_criterion(c1, 1.75).divergent);
  CHECK(regularity_criterion(c1, 2.0).divergent);

  CHECK_THROWS_AS(regularity_criterion(c1, 0.9), ConfigError);
  CHECK_THROWS_AS(regularity_criterion(c1, 2.1), ConfigError);
}

TEST_CASE("continuum quadrature approaches closed forms") {
  // polaron d=3: D(K) = 4 pi / K
  double exact = 4.0 * M_PI / 10.0;
  double q = continuum_quadrature_d3('D', 10.0, 0.0, 1.25, 1000.0);
  CHECK(std::abs(q - exact) / exact < 0.02);
  // refinement shrinks the error
  double qc = continuum_quadrature_d3('C', 1.0, 8.0, 0.2);
  double qf = continuum_quadrature_d3('C', 1.0, 8.0, 0.05);
  auto antider_c = [](double r) {
    return r / (2.0 * (1.0 + r * r)) - 1.5 * std::atan(r);
  };
  double cexact = 4.0 * M_PI * (antider_c(8.0) - antider_c(1.0));
  CHECK(std::abs(qf - cexact) < std::abs(qc - cexact));
  CHECK(std::abs(qf - cexact) / std::abs(cexact) < 0.02);
}

TEST_CASE("form factor values") {
  FormFactorSpec s;
  s.kind = FormFactorKind::polaron;
  CHECK(s.value(2.0, 3) == doctest::Approx(0.5));
  CHECK(s.value(2.0, 1) == doctest::Approx(1.0));
  s.kind = FormFactorKind::power_law;
  s.gamma = 1.0;
  CHECK(s.value(4.0, 3) == doctest::Approx(0.25));
  s.kind = FormFactorKind::smooth_power;
  s.beta = 0.5;
  CHECK(s.value(1.0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

}  // TEST_SUITE

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "grosslab/experiments.hpp"

using namespace grosslab;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.dimension = 1;
  cfg.torus_length = 2.0 * M_PI;
  cfg.sites_per_dim = 6;
  cfg.nmax = 2;
  cfg.form_factor.kind = FormFactorKind::polaron;
  cfg.coupling = 0.5;
  cfg.K = 1.0;
  cfg.lambda_list = {1.5, 2.0};
  cfg.seed = 404;
  return cfg;
}

bool has_key_prefix(const ExperimentReport& rep, const std::string& prefix) {
  for (const Record& r : rep.records)
    if (r.sweep_key.rfind(prefix, 0) == 0) return true;
  return false;
}

void check_shape(const ExperimentReport& rep) {
  CHECK(!rep.records.empty());
  CHECK(std::is_sorted(rep.records.begin(), rep.records.end(),
                       [](const Record& a, const Record& b) {
                         return a.sweep_key < b.sweep_key;
                       }));
  bool all = true;
  for (const Record& r : rep.records) all = all && r.pass;
  CHECK(rep.verdict == all);
  std::string csv = report_to_csv(rep);
  CHECK(csv.rfind("sweep_key,measured,bound,ratio,pass", 0) == 0);
  std::string json = report_to_json(rep);
  CHECK(json.find("\"verdict\"") != std::string::npos);
  CHECK(json.find(rep.name) != std::string::npos);
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("form bound verifies on a small lattice") {
  ExperimentReport rep = exp_form_bound(tiny_config(), 6);
  check_shape(rep);
  CHECK(rep.verdict);
  CHECK(has_key_prefix(rep, "pair="));
  CHECK(has_key_prefix(rep, "cor="));
}

TEST_CASE("form bound reports are byte deterministic") {
  ExperimentReport r1 = exp_form_bound(tiny_config(), 4);
  ExperimentReport r2 = exp_form_bound(tiny_config(), 4);
  CHECK(report_to_json(r1) == report_to_json(r2));
  CHECK(report_to_csv(r1) == report_to_csv(r2));
}

TEST_CASE("commutator identity verifies on a small lattice") {
  ExperimentReport rep = exp_commutator(tiny_config(), 3);
  check_shape(rep);
  CHECK(rep.verdict);
  CHECK(has_key_prefix(rep, "pair="));
}

TEST_CASE("resolvent rate verifies on a small lattice") {
  ExperimentReport rep =
      exp_resolvent_rate(tiny_config(), std::complex<double>(0.0, 1.0));
  check_shape(rep);
  CHECK(rep.verdict);
  CHECK(has_key_prefix(rep, "family=dressed"));
  CHECK(has_key_prefix(rep, "family=gross"));
  CHECK(has_key_prefix(rep, "family=plain"));
  CHECK_THROWS_AS(exp_resolvent_rate(tiny_config(), std::complex<double>(1.0)),
                  ConfigError);
}

TEST_CASE("dynamics rate verifies on a small lattice") {
  ExperimentReport rep = exp_dynamics(tiny_config(), {0.5, 1.0}, 2);
  check_shape(rep);
  CHECK(rep.verdict);
  CHECK(has_key_prefix(rep, "grouplaw"));
  CHECK(has_key_prefix(rep, "unitarity"));
}

TEST_CASE("dressing residual and surrogates verify") {
  // Wide lattice with a small phonon-mode ball so the conjugation identity
  // is free of dual-window wrap on the trial states.
  ModelConfig cfg = tiny_config();
  cfg.sites_per_dim = 24;
  cfg.mode_cutoff = 3.0;
  cfg.nmax = 6;
  cfg.lambda_list = {2.0, 3.0};
  ExperimentReport rep = exp_dressing(cfg);
  check_shape(rep);
  CHECK(rep.verdict);
  CHECK(has_key_prefix(rep, "halving"));
  CHECK(has_key_prefix(rep, "kato"));
  CHECK(has_key_prefix(rep, "sandwich"));
  ModelConfig bad = tiny_config();
  bad.nmax = 1;
  CHECK_THROWS_AS(exp_dressing(bad), ConfigError);
}

TEST_CASE("regularity curve is flat for an integrable symbol") {
  ModelConfig cfg;
  cfg.dimension = 1;
  cfg.torus_length = 2.0 * M_PI;
  cfg.sites_per_dim = 16;
  cfg.nmax = 2;
  cfg.form_factor.kind = FormFactorKind::smooth_power;
  cfg.form_factor.beta = 0.125;
  cfg.coupling = 0.4;
  cfg.K = 1.5;
  cfg.lambda_list = {2.0, 3.0, 4.0, 6.0, 8.0};
  cfg.seed = 7;

  RegularityVerdict rv = regularity_criterion(cfg, 1.0);
  CHECK(!rv.divergent);
  RegularityCurve curve = regularity_curve(cfg, 1.0);
  CHECK(curve.g_values.size() == cfg.lambda_list.size());
  CHECK(!curve.divergent);

  ExperimentReport rep = exp_regularity(cfg, {1.0});
  check_shape(rep);
  CHECK(rep.verdict);
  CHECK(has_key_prefix(rep, "s=1;match"));
}

TEST_CASE("coherent core residual passes and halves") {
  ModelConfig cfg;
  cfg.dimension = 1;
  cfg.torus_length = 2.0 * M_PI;
  cfg.sites_per_dim = 32;
  cfg.nmax = 8;
  cfg.form_factor.kind = FormFactorKind::polaron;
  cfg.coupling = 0.3;
  cfg.K = 1.0;
  cfg.lambda_list = {2.0};
  cfg.mode_cutoff = 2.0;
  cfg.seed = 12;
  ExperimentReport rep = exp_coherent_core(cfg);
  check_shape(rep);
  CHECK(rep.verdict);
  CHECK(has_key_prefix(rep, "identity;operator"));
  CHECK(has_key_prefix(rep, "identity;profile"));
  CHECK(has_key_prefix(rep, "halving"));
}

}  // TEST_SUITE

#include <array>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "grosslab/qspace.hpp"
#include "grosslab/rng.hpp"
#include "grosslab/spectral.hpp"

using namespace grosslab;

namespace {

ModelConfig lattice_config() {
  ModelConfig cfg;
  cfg.dimension = 1;
  cfg.torus_length = 2.0 * M_PI;
  cfg.sites_per_dim = 8;
  cfg.nmax = 3;
  cfg.form_factor.kind = FormFactorKind::smooth_power;
  cfg.form_factor.beta = 0.125;
  cfg.coupling = 1.0;
  cfg.K = 1.0;
  cfg.lambda_list = {2.5, 3.5};
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_SUITE("qspace") {

TEST_CASE("flat and unflat round trip") {
  Space sp = build_space(lattice_config());
  QState v = random_state(sp, 5);
  Eigen::VectorXcd fv = flat(v);
  CHECK(fv.size() == sp.dim);
  QState back = unflat(sp, fv);
  CHECK((back - v).norm() <= 1e-15);
  CHECK(flat(v).norm() == doctest::Approx(v.norm()));
}

TEST_CASE("h0 equals laplacian plus number") {
  Space sp = build_space(lattice_config());
  QState v = random_state(sp, 6);
  QOperator h0 = op_h0(sp);
  QOperator sum = op_sum(op_laplacian(sp), op_number_total(sp));
  CHECK(flat(QState(h0(v) - sum(v))).norm() <= 1e-12);
}

TEST_CASE("momentum multiplier acts by the wrapped representative") {
  Space sp = build_space(lattice_config());
  // single electron bin, vacuum phonons
  for (int b = 0; b < sp.X; ++b) {
    QState hat = QState::Zero(sp.S, sp.X);
    hat(0, b) = 1.0;
    QState v = hat * sp.Fx.conjugate();
    QOperator p = op_momentum(sp, 0);
    QState pv = p(v);
    double q = sp.qvecs(b, 0);
    CHECK(flat(QState(pv - q * v)).norm() <= 1e-12);
  }
}

TEST_CASE("abs momentum power matches the symbol") {
  Space sp = build_space(lattice_config());
  QState hat = QState::Zero(sp.S, sp.X);
  hat(0, 3) = 1.0;
  QState v = hat * sp.Fx.conjugate();
  double q = std::abs(sp.qvecs(3, 0));
  for (double s : {1.0, 1.5, 2.0}) {
    QOperator ps = op_abs_p_pow(sp, s);
    CHECK(flat(QState(ps(v) - std::pow(q, s) * v)).norm() <= 1e-12);
  }
}

TEST_CASE("generalized ladder commutation with site phases") {
  Space sp = build_space(lattice_config());
  FormFactorField F = field_G(sp, 2.5);
  FormFactorField G = field_G(sp, 3.5);
  QOperator aF = gen_annihilate(sp, F);
  QOperator cG = gen_create(sp, G);
  // [a(F_x), a*(G_x)] = <F, G> per site; scalar because phases cancel
  cd expect = F.base.dot(G.base);
  QState psi = bandlimited_state(sp, 1.0, sp.cfg.nmax - 1, 21);
  QState comm = aF(cG(psi)) - cG(aF(psi));
  CHECK(flat(QState(comm - expect * psi)).norm() <= 1e-12);
}

TEST_CASE("field operators are hermitian and adjoint consistent") {
  Space sp = build_space(lattice_config());
  FormFactorField F = field_G(sp, 2.5);
  QOperator phi = op_field_phi(sp, F);
  QOperator pi = op_field_pi(sp, F);
  CHECK(phi.hermitian);
  CHECK(pi.hermitian);
  QState a = random_state(sp, 31);
  QState b = random_state(sp, 32);
  // <a, phi b> = <phi a, b>
  cd lhs = flat(a).dot(flat(QState(phi(b))));
  cd rhs = flat(QState(phi(a))).dot(flat(b));
  CHECK(std::abs(lhs - rhs) <= 1e-12);
  // a* is the adjoint of a
  QOperator aF = gen_annihilate(sp, F);
  QOperator cF = gen_create(sp, F);
  cd l2 = flat(a).dot(flat(QState(cF(b))));
  cd r2 = flat(QState(aF(a))).dot(flat(b));
  CHECK(std::abs(l2 - r2) <= 1e-12);
}

TEST_CASE("dot_p assemblies agree on band-limited states") {
  Space sp = build_space(lattice_config());
  Eigen::VectorXcd diff = field_G(sp, 3.5).base - field_G(sp, 2.5).base;
  std::array<Eigen::VectorXcd, 3> Fj;
  for (int j = 0; j < 3; ++j) Fj[j] = Eigen::VectorXcd::Zero(sp.grid.M);
  Fj[0] = ((sp.grid.kvecs.col(0).array() / sp.grid.k2.array()).cast<cd>() *
           diff.array())
              .matrix();
  QOperator d1 = dot_p_annihilate(sp, Fj);
  QOperator d2 = dot_p_annihilate_alt(sp, Fj);
  for (int t = 0; t < 3; ++t) {
    QState psi = bandlimited_state(sp, 0.5, sp.cfg.nmax, 40 + t);
    CHECK(flat(QState(d1(psi) - d2(psi))).norm() <= 1e-10);
  }
}

TEST_CASE("one phonon bound with the lattice constant") {
  Space sp = build_space(lattice_config());
  FormFactorField F = field_G(sp, 3.5);
  double C = frank_schlein_constant(sp, F);
  CHECK(C > 0.0);
  QOperator aF = gen_annihilate(sp, F);
  QOperator weight = op_multiplier(
      sp, [](double q2, const Eigen::RowVectorXd&, int) {
        return std::sqrt(1.0 + q2);
      });
  for (int t = 0; t < 10; ++t) {
    QState psi = bandlimited_state(sp, 1.0, sp.cfg.nmax - 1, 50 + t);
    QState wpsi = weight(psi);
    // sqrt(N) factor applied grade-wise
    QState sq = wpsi;
    for (long long i = 0; i < sp.S; ++i)
      sq.row(i) *= std::sqrt(static_cast<double>(sp.basis.ntot[i]));
    CHECK(flat(QState(aF(psi))).norm() <= C * flat(sq).norm() + 1e-10);
  }
}

TEST_CASE("trial state generators respect caps and bands") {
  Space sp = build_space(lattice_config());
  QState v = bandlimited_state(sp, 1.0, 1, 60);
  CHECK(flat(v).norm() == doctest::Approx(1.0));
  QState hat = v * sp.Fx.transpose();
  for (long long i = 0; i < sp.S; ++i)
    for (int b = 0; b < sp.X; ++b) {
      bool occ_ok = sp.basis.ntot[i] <= 1;
      bool band_ok = std::abs(sp.qvecs(b, 0)) <= 1.0 + 1e-9;
      if (!occ_ok || !band_ok) CHECK(std::abs(hat(i, b)) <= 1e-14);
    }
  CHECK_THROWS_AS(bandlimited_state(sp, -1.0, 0, 1), ConfigError);
}

TEST_CASE("gaussian bump is smooth and deterministic") {
  Space sp = build_space(lattice_config());
  QState g1 = gaussian_bump(sp, 2.0, 1.0);
  QState g2 = gaussian_bump(sp, 2.0, 1.0);
  CHECK((g1 - g2).norm() == 0.0);
  CHECK(flat(g1).norm() == doctest::Approx(1.0));
  for (long long i = 1; i < sp.S; ++i) CHECK(g1.row(i).norm() <= 1e-14);
}

TEST_CASE("coherent product state is normalized with small leakage") {
  Space sp = build_space(lattice_config());
  QState gamma = gaussian_bump(sp, 1.0, 1.0);
  SplitMix64 rng = stream_rng(7, "test_coherent");
  Eigen::VectorXcd f(sp.grid.M);
  for (int m = 0; m < sp.grid.M; ++m) f[m] = rng.cgaussian();
  f *= 0.3 / f.norm();
  double leak = 1.0;
  QState psi = coherent_product_state(sp, gamma, f, &leak);
  CHECK(flat(psi).norm() == doctest::Approx(1.0));
  CHECK(leak <= 1e-3);
}

TEST_CASE("norm0 quadratic form matches the operator") {
  Space sp = build_space(lattice_config());
  QState v = random_state(sp, 71);
  QOperator h0 = op_h0(sp);
  double direct =
      (flat(v).dot(flat(QState(h0(v)))) + flat(v).squaredNorm()).real();
  CHECK(norm0_sq(sp, v) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("materialize agrees with apply") {
  ModelConfig cfg = lattice_config();
  cfg.sites_per_dim = 4;
  cfg.nmax = 2;
  cfg.lambda_list = {1.5, 2.0};
  Space sp = build_space(cfg);
  QOperator phi = op_field_phi(sp, field_G(sp, 2.0));
  Eigen::MatrixXcd M = materialize(sp, phi);
  CHECK((M - M.adjoint()).norm() <= 1e-12);
  QState v = random_state(sp, 80);
  CHECK((M * Eigen::VectorXcd(flat(v)) - Eigen::VectorXcd(flat(QState(phi(v)))))
            .norm() <= 1e-12);
}

}  // TEST_SUITE

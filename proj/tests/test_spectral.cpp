#include <cmath>
#include <complex>

#include "doctest.h"
#include "grosslab/hamiltonians.hpp"
#include "grosslab/spectral.hpp"

using namespace grosslab;

namespace {

Space tiny_space() {
  ModelConfig cfg;
  cfg.dimension = 1;
  cfg.torus_length = 2.0 * M_PI;
  cfg.sites_per_dim = 4;
  cfg.nmax = 2;
  cfg.form_factor.kind = FormFactorKind::polaron;
  cfg.coupling = 0.8;
  cfg.K = 1.0;
  cfg.lambda_list = {1.5, 2.0};
  cfg.seed = 2;
  return build_space(cfg);
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("operator norm matches the dense singular value") {
  Space sp = tiny_space();
  QOperator A =
      op_product(op_field_phi(sp, field_G(sp, 2.0)), op_momentum(sp, 0));
  double dense = dense_op_norm(materialize(sp, A));
  OpNormResult r = op_norm(sp, A, 11);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(dense).epsilon(1e-7));

  QOperator H = h_lambda(sp, 2.0);
  double denseH = dense_op_norm(materialize(sp, H));
  CHECK(op_norm(sp, H, 12).value == doctest::Approx(denseH).epsilon(1e-7));
}

TEST_CASE("ground state agrees with the dense bottom eigenvalue") {
  Space sp = tiny_space();
  QOperator H = h_lambda(sp, 2.0);
  double dense = dense_min_eig(materialize(sp, H));
  GroundState g = ground_state(sp, H, 21);
  CHECK(g.converged);
  CHECK(g.energy == doctest::Approx(dense).epsilon(1e-7));
  QState v = unflat(sp, g.vec);
  CHECK(flat(QState(H(v) - g.energy * v)).norm() <= 1e-5);
}

TEST_CASE("resolvent satisfies the defining and first identities") {
  Space sp = tiny_space();
  QOperator H = h_lambda(sp, 2.0);
  QState psi = random_state(sp, 31);
  cd z1(0.3, 1.0), z2(-0.2, 0.7);
  QState r1 = resolvent_apply(sp, H, z1, psi);
  QState r2 = resolvent_apply(sp, H, z2, psi);
  CHECK(flat(QState(H(r1) - z1 * r1 - psi)).norm() <= 1e-9);
  QState lhs = r1 - r2;
  QState rhs = (z1 - z2) * resolvent_apply(sp, H, z1, r2);
  CHECK(flat(QState(lhs - rhs)).norm() <= 1e-8);
}

TEST_CASE("iterative resolvent agrees with the dense path") {
  Space sp = tiny_space();
  QOperator H = h_lambda(sp, 2.0);
  QState psi = random_state(sp, 41);
  cd z(0.0, 1.0);
  QState dense = resolvent_apply(sp, H, z, psi);
  QState krylov = resolvent_apply(sp, H, z, psi, 1e-10, 1);
  CHECK(flat(QState(dense - krylov)).norm() <= 1e-7 * flat(dense).norm());
}

TEST_CASE("propagation is unitary and obeys the group law") {
  Space sp = tiny_space();
  QOperator H = h_lambda(sp, 2.0);
  QState psi = random_state(sp, 51);
  double n0 = flat(psi).norm();
  QState u1 = propagate(sp, H, 0.7, psi);
  CHECK(std::abs(flat(u1).norm() - n0) <= 1e-9);
  QState u2 = propagate(sp, H, 0.4, u1);
  QState u12 = propagate(sp, H, 1.1, psi);
  CHECK(flat(QState(u2 - u12)).norm() <= 1e-9);
  QState back = propagate(sp, H, -0.7, u1);
  CHECK(flat(QState(back - psi)).norm() <= 1e-9);
}

TEST_CASE("krylov propagation matches the dense path") {
  Space sp = tiny_space();
  QOperator H = h_lambda(sp, 2.0);
  QState psi = random_state(sp, 61);
  QState dense = propagate(sp, H, 0.9, psi);
  QState krylov = propagate(sp, H, 0.9, psi, 1);
  CHECK(flat(QState(dense - krylov)).norm() <= 1e-7);

  DensePropagator prop(materialize(sp, H));
  Eigen::VectorXcd via = prop.apply(0.9, flat(psi));
  CHECK((via - Eigen::VectorXcd(flat(dense))).norm() <= 1e-10);
}

TEST_CASE("form difference constant is symmetric and small for equal args") {
  Space sp = tiny_space();
  QOperator W1 = op_field_phi(sp, field_G(sp, 1.5));
  QOperator W2 = op_field_phi(sp, field_G(sp, 2.0));
  double same = form_difference_constant(sp, W1, W1, 71);
  CHECK(same <= 1e-9);
  double ab = form_difference_constant(sp, W1, W2, 72);
  double ba = form_difference_constant(sp, W2, W1, 73);
  CHECK(ab > 0.0);
  CHECK(ab == doctest::Approx(ba).epsilon(1e-6));
}

}  // TEST_SUITE

#include "grosslab/hamiltonians.hpp"

#include <cmath>

#include "grosslab/spectral.hpp"

namespace grosslab {

BFields build_B_field(const Space& sp, double K, double lam) {
  if (K > lam + 1e-9)
    throw ConfigError("build_B_field requires K <= lambda");
  const ModeGrid& g = sp.grid;
  Eigen::VectorXd mask = g.mask_ann(K, lam);
  const double sw = std::sqrt(g.w);

  BFields out;
  out.B.resize(g.M);
  out.k2B.resize(g.M);
  for (int j = 0; j < 3; ++j)
    out.kB[j] = Eigen::VectorXcd::Zero(g.M);
  for (int i = 0; i < g.M; ++i) {
    double amp = sw * sp.cfg.coupling * g.vsamples[i] * mask[i];
    cd b = cd(-amp / (1.0 + g.k2[i]), 0.0);
    out.B[i] = b;
    out.k2B[i] = g.k2[i] * b;
    for (int j = 0; j < g.dimension; ++j) out.kB[j][i] = g.kvecs(i, j) * b;
  }
  double kb2 = 0.0;
  for (int j = 0; j < sp.cfg.dimension; ++j) kb2 += out.kB[j].squaredNorm();
  out.norm_kB = std::sqrt(kb2);
  out.sup_norm_B = out.B.norm();
  return out;
}

QOperator h_lambda(const Space& sp, double lam) {
  QOperator h = op_sum(op_h0(sp), op_field_phi(sp, field_G(sp, lam)));
  h.hermitian = true;
  return h;
}

namespace {

QOperator identity_op(const Space& sp) {
  QOperator r;
  r.structure = OpStructure::x_block_diagonal;
  r.dim = sp.dim;
  r.hermitian = false;   // unitary; adjoint provided explicitly
  r.apply = [](const QState& in, QState& out) { out = in; };
  r.apply_adj = r.apply;
  return r;
}

}  // namespace

QOperator gross_transform(const Space& sp, double K, double lam,
                          long long dense_threshold) {
  BFields B = build_B_field(sp, K, lam);
  if (B.B.isZero(0)) return identity_op(sp);

  const Space* s = &sp;
  QOperator r;
  r.structure = OpStructure::x_block_diagonal;
  r.dim = sp.dim;
  r.hermitian = false;

  if (sp.S <= dense_threshold) {
    auto W = std::make_shared<Eigen::MatrixXcd>(op_weyl(sp.basis, B.B));
    auto WH = std::make_shared<Eigen::MatrixXcd>(W->adjoint());
    r.apply = [s, W](const QState& in, QState& out) {
      QState tmp = s->E.conjugate().cwiseProduct(in);
      out.noalias() = (*W) * tmp;
      out = s->E.cwiseProduct(out);
    };
    r.apply_adj = [s, WH](const QState& in, QState& out) {
      QState tmp = s->E.conjugate().cwiseProduct(in);
      out.noalias() = (*WH) * tmp;
      out = s->E.cwiseProduct(out);
    };
    return r;
  }

  // Large Fock spaces: per-site Krylov exponential of the shared generator,
  // e^{i pi(B_x)} = Gamma_x e^{i pi(B)} Gamma_x^dag.
  auto P = std::make_shared<SpMat>(op_pi(sp.basis, B.B));
  auto apply_sign = [s, P](const QState& in, QState& out, double sign) {
    auto matvec = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
      y.noalias() = (*P) * x;
    };
    out.resize(s->S, s->X);
    for (int x = 0; x < s->X; ++x) {
      Eigen::VectorXcd u =
          s->E.col(x).conjugate().cwiseProduct(in.col(x));
      Eigen::VectorXcd y = lanczos_expm(matvec, u, sign, 1e-12);
      out.col(x) = s->E.col(x).cwiseProduct(y);
    }
  };
  r.apply = [apply_sign](const QState& in, QState& out) {
    apply_sign(in, out, 1.0);
  };
  r.apply_adj = [apply_sign](const QState& in, QState& out) {
    apply_sign(in, out, -1.0);
  };
  return r;
}

QOperator dressed_interaction(const Space& sp, double K, double lam) {
  BFields B = build_B_field(sp, K, lam);
  double C = scalar_C(sp.grid, sp.cfg, K, lam);

  // phi(kB)^2 acts within a site block; assemble it there once
  SpMat phisq(sp.S, sp.S);
  bool have_phisq = false;
  for (int j = 0; j < sp.cfg.dimension; ++j) {
    if (B.kB[j].isZero(0)) continue;
    SpMat pj = op_phi(sp.basis, B.kB[j]);
    SpMat sq = SpMat(pj * pj);
    phisq = have_phisq ? SpMat(phisq + sq) : sq;
    have_phisq = true;
  }

  QOperator T = dot_p_annihilate(sp, B.kB);  // p . a(kB)
  QOperator sym = op_sum(T, op_adjoint(T));
  sym.hermitian = true;
  QOperator core = op_scale(cd(-2.0, 0.0), sym);
  core.hermitian = true;
  if (have_phisq) {
    core = op_sum(core, op_block(sp, phisq, true));
    core.hermitian = true;
  }
  QOperator V = op_shift(core, C);
  V.hermitian = true;
  V.structure = OpStructure::general;
  return V;
}

QOperator h_dressed(const Space& sp, double K, double lam) {
  QOperator h = op_sum(op_sum(op_h0(sp), op_field_phi(sp, field_G(sp, K))),
                       dressed_interaction(sp, K, lam));
  h.hermitian = true;
  return h;
}

DressingResidual dressing_identity_residual(const Space& sp, double K,
                                            double lam, const QState& trial) {
  QOperator U = gross_transform(sp, K, lam);
  BFields B = build_B_field(sp, K, lam);
  double C = scalar_C(sp.grid, sp.cfg, K, lam);
  FormFactorField Gl = field_G(sp, lam);

  FormFactorField Bf = field_profile(sp, B.B);
  FormFactorField k2Bf = field_profile(sp, B.k2B);
  double normB2 = B.B.squaredNorm();
  double BdotG = 2.0 * B.B.dot(Gl.base).real();
  double c_p = C - normB2 - BdotG;

  auto conj_residual = [&](const QOperator& A, const QOperator& rhs,
                           double shift) {
    QState t = U.adjoint_apply(trial);
    t = A(t);
    QState lhs(sp.S, sp.X);
    U.apply(t, lhs);
    QState r = rhs(trial);
    r += shift * trial;
    return flat(lhs - r).norm();
  };

  DressingResidual out;

  QOperator N = op_number_total(sp);
  QOperator rhsN = op_sum(N, op_field_phi(sp, Bf));
  out.number_part = conj_residual(N, rhsN, normB2);

  QOperator phiG = op_field_phi(sp, Gl);
  out.field_part = conj_residual(phiG, phiG, BdotG);

  QOperator lap = op_laplacian(sp);
  QOperator T = dot_p_annihilate(sp, B.kB);
  QOperator grad = op_scale(cd(-2.0, 0.0), op_sum(T, op_adjoint(T)));
  SpMat phisq(sp.S, sp.S);
  bool have = false;
  for (int j = 0; j < sp.cfg.dimension; ++j) {
    if (B.kB[j].isZero(0)) continue;
    SpMat pj = op_phi(sp.basis, B.kB[j]);
    SpMat sq = SpMat(pj * pj);
    phisq = have ? SpMat(phisq + sq) : sq;
    have = true;
  }
  QOperator rhsKin = op_sum(lap, grad);
  if (have) rhsKin = op_sum(rhsKin, op_block(sp, phisq, true));
  rhsKin = op_sum(rhsKin, op_field_phi(sp, k2Bf));
  out.kinetic_part = conj_residual(lap, rhsKin, c_p);

  QOperator Hl = h_lambda(sp, lam);
  QOperator Hd = h_dressed(sp, K, lam);
  out.total = conj_residual(Hl, Hd, 0.0);
  return out;
}

QOperator undressed_h(const Space& sp, double K, double lam_ref) {
  QOperator U = gross_transform(sp, K, lam_ref);
  QOperator Hd = h_dressed(sp, K, lam_ref);
  QOperator r = op_product(op_adjoint(U), op_product(Hd, U));
  r.hermitian = true;
  r.structure = OpStructure::general;
  return r;
}

HamiltonianSet build_hamiltonians(const Space& sp, double K,
                                  const std::vector<double>& lambda_list) {
  HamiltonianSet hs;
  hs.K = K;
  hs.H0 = op_h0(sp);
  for (double lam : lambda_list) {
    hs.H[lam] = h_lambda(sp, lam);
    hs.U[lam] = gross_transform(sp, K, lam);
    hs.Vdressed[lam] = dressed_interaction(sp, K, lam);
    hs.Hdressed[lam] = h_dressed(sp, K, lam);
    hs.D[lam] = scalar_D(sp.grid, sp.cfg, lam);
    hs.C[lam] = scalar_C(sp.grid, sp.cfg, K, lam);
    BFields B = build_B_field(sp, K, lam);
    hs.norm_kB[lam] = B.norm_kB;
    hs.sup_norm_B[lam] = B.sup_norm_B;
  }
  return hs;
}

}  // namespace grosslab

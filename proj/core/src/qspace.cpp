#include "grosslab/qspace.hpp"

#include <cmath>
#include <memory>

#include "grosslab/rng.hpp"

namespace grosslab {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kShellEps = 1e-9;
}  // namespace

Space build_space(const ModelConfig& cfg) {
  Space sp;
  sp.cfg = cfg;
  sp.grid = build_grid(cfg);
  sp.basis = build_fock_basis(sp.grid.M, cfg.nmax);

  const int d = cfg.dimension;
  const int L = cfg.sites_per_dim;
  long long X = 1;
  for (int j = 0; j < d; ++j) X *= L;
  if (X > 2048)
    throw ConfigError("lattice too large for dense site transforms");
  sp.X = static_cast<int>(X);
  sp.S = sp.basis.size;
  sp.dim = sp.S * sp.X;

  const double a = cfg.torus_length / L;    // lattice spacing
  const double unit = 2.0 * kPi / cfg.torus_length;

  sp.sites.resize(sp.X, d);
  sp.qvecs.resize(sp.X, d);
  sp.q2.resize(sp.X);
  for (int x = 0; x < sp.X; ++x) {
    int rem = x;
    double q2 = 0.0;
    for (int j = 0; j < d; ++j) {
      int ij = rem % L;
      rem /= L;
      sp.sites(x, j) = a * ij;
      int m = ij <= L / 2 ? ij : ij - L;   // FFT bin -> window representative
      sp.qvecs(x, j) = unit * m;
      q2 += sp.qvecs(x, j) * sp.qvecs(x, j);
    }
    sp.q2[x] = q2;
  }

  // unitary DFT over the site index, kron over axes, bin row = FFT order
  sp.Fx.resize(sp.X, sp.X);
  const double scale = 1.0 / std::sqrt(double(sp.X));
  for (int b = 0; b < sp.X; ++b) {
    for (int x = 0; x < sp.X; ++x) {
      int rb = b, rx = x;
      double phase = 0.0;
      for (int j = 0; j < d; ++j) {
        int bj = rb % L;
        rb /= L;
        int xj = rx % L;
        rx /= L;
        phase += 2.0 * kPi * double((long long)bj * xj % L) / L;
      }
      sp.Fx(b, x) = scale * std::exp(cd(0.0, -phase));
    }
  }
  sp.FxH = sp.Fx.adjoint();

  // e^{-i P_n . x} with P_n the total phonon momentum of basis state n
  Eigen::MatrixXd P(sp.S, d);
  P.setZero();
  for (long long i = 0; i < sp.S; ++i) {
    const std::uint8_t* n = sp.basis.state(i);
    for (int j = 0; j < sp.grid.M; ++j) {
      if (n[j] == 0) continue;
      for (int ax = 0; ax < d; ++ax)
        P(i, ax) += double(n[j]) * sp.grid.kvecs(j, ax);
    }
  }
  sp.E.resize(sp.S, sp.X);
  for (long long i = 0; i < sp.S; ++i)
    for (int x = 0; x < sp.X; ++x) {
      double dot = 0.0;
      for (int ax = 0; ax < d; ++ax) dot += P(i, ax) * sp.sites(x, ax);
      sp.E(i, x) = std::exp(cd(0.0, -dot));
    }
  return sp;
}

Eigen::Map<const Eigen::VectorXcd> flat(const QState& v) {
  return Eigen::Map<const Eigen::VectorXcd>(v.data(), v.size());
}

QState unflat(const Space& sp, const Eigen::VectorXcd& v) {
  if (v.size() != sp.dim) throw ConfigError("flat vector has wrong length");
  return Eigen::Map<const QState>(v.data(), sp.S, sp.X);
}

QState QOperator::operator()(const QState& in) const {
  QState out(in.rows(), in.cols());
  apply(in, out);
  return out;
}

QState QOperator::adjoint_apply(const QState& in) const {
  QState out(in.rows(), in.cols());
  if (hermitian || !apply_adj) {
    apply(in, out);
  } else {
    apply_adj(in, out);
  }
  return out;
}

FormFactorField field_profile(const Space& sp, const Eigen::VectorXcd& base) {
  if (base.size() != sp.grid.M)
    throw ConfigError("profile length does not match the grid");
  FormFactorField F;
  F.base = base;
  F.sup_norm = base.norm();
  return F;
}

FormFactorField field_G(const Space& sp, double lam) {
  Eigen::VectorXd mask = sp.grid.mask_leq(lam);
  Eigen::VectorXcd base(sp.grid.M);
  const double sw = std::sqrt(sp.grid.w);
  for (int i = 0; i < sp.grid.M; ++i)
    base[i] = cd(sw * sp.cfg.coupling * sp.grid.vsamples[i] * mask[i], 0.0);
  return field_profile(sp, base);
}

Eigen::MatrixXcd materialize(const Space& sp, const QOperator& op,
                             long long max_dim) {
  if (op.dim > max_dim)
    throw ConfigError("refusing to materialize an operator of dimension " +
                      std::to_string(op.dim));
  Eigen::MatrixXcd A(op.dim, op.dim);
  QState in = sp.zero_state();
  QState out(sp.S, sp.X);
  for (long long j = 0; j < op.dim; ++j) {
    in.data()[j] = cd(1.0, 0.0);
    op.apply(in, out);
    A.col(j) = flat(out);
    in.data()[j] = cd(0.0, 0.0);
  }
  return A;
}

QOperator op_sum(const QOperator& a, const QOperator& b) {
  if (a.dim != b.dim) throw ConfigError("operator dimension mismatch");
  QOperator r;
  r.structure = a.structure == b.structure ? a.structure : OpStructure::general;
  r.dim = a.dim;
  r.hermitian = a.hermitian && b.hermitian;
  r.apply = [a, b](const QState& in, QState& out) {
    QState tmp(in.rows(), in.cols());
    a.apply(in, out);
    b.apply(in, tmp);
    out += tmp;
  };
  if (!r.hermitian) {
    r.apply_adj = [a, b](const QState& in, QState& out) {
      QState tmp(in.rows(), in.cols());
      QState t2 = a.adjoint_apply(in);
      tmp = b.adjoint_apply(in);
      out = t2 + tmp;
    };
  }
  return r;
}

QOperator op_scale(cd alpha, const QOperator& a) {
  QOperator r;
  r.structure = a.structure;
  r.dim = a.dim;
  r.hermitian = a.hermitian && alpha.imag() == 0.0;
  r.apply = [alpha, a](const QState& in, QState& out) {
    a.apply(in, out);
    out *= alpha;
  };
  r.apply_adj = [alpha, a](const QState& in, QState& out) {
    out = a.adjoint_apply(in);
    out *= std::conj(alpha);
  };
  return r;
}

QOperator op_product(const QOperator& a, const QOperator& b) {
  if (a.dim != b.dim) throw ConfigError("operator dimension mismatch");
  QOperator r;
  r.structure = OpStructure::general;
  r.dim = a.dim;
  r.hermitian = false;
  r.apply = [a, b](const QState& in, QState& out) {
    QState mid(in.rows(), in.cols());
    b.apply(in, mid);
    a.apply(mid, out);
  };
  r.apply_adj = [a, b](const QState& in, QState& out) {
    QState mid = a.adjoint_apply(in);
    out = b.adjoint_apply(mid);
  };
  return r;
}

QOperator op_adjoint(const QOperator& a) {
  if (a.hermitian) return a;
  if (!a.apply_adj)
    throw ConfigError("operator has no adjoint implementation");
  QOperator r;
  r.structure = a.structure;
  r.dim = a.dim;
  r.hermitian = false;
  r.apply = a.apply_adj;
  r.apply_adj = a.apply;
  return r;
}

QOperator op_shift(const QOperator& a, double c) {
  QOperator r;
  r.structure = a.structure;
  r.dim = a.dim;
  r.hermitian = a.hermitian;
  r.apply = [a, c](const QState& in, QState& out) {
    a.apply(in, out);
    out += c * in;
  };
  r.apply_adj = [a, c](const QState& in, QState& out) {
    out = a.adjoint_apply(in);
    out += c * in;
  };
  return r;
}

namespace {

// Multiplier operators precompute the symbol table over (Fock state, bin).
QOperator make_multiplier(const Space& sp,
                          std::shared_ptr<Eigen::MatrixXd> vals) {
  QOperator r;
  r.structure = OpStructure::momentum_multiplier;
  r.dim = sp.dim;
  r.hermitian = true;
  const Space* s = &sp;
  r.apply = [s, vals](const QState& in, QState& out) {
    Eigen::MatrixXcd hat = in * s->Fx.transpose();
    hat.array() *= vals->array();
    out.noalias() = hat * s->Fx.conjugate();
  };
  return r;
}

}  // namespace

QOperator op_multiplier(
    const Space& sp,
    const std::function<double(double, const Eigen::RowVectorXd&, int)>& symbol) {
  auto vals = std::make_shared<Eigen::MatrixXd>(sp.S, sp.X);
  for (int b = 0; b < sp.X; ++b) {
    Eigen::RowVectorXd q = sp.qvecs.row(b);
    for (long long n = 0; n < sp.S; ++n)
      (*vals)(n, b) = symbol(sp.q2[b], q, sp.basis.ntot[n]);
  }
  return make_multiplier(sp, vals);
}

QOperator op_h0(const Space& sp) {
  return op_multiplier(sp, [](double q2, const Eigen::RowVectorXd&, int n) {
    return q2 + n;
  });
}

QOperator op_h0_fun(const Space& sp, const std::function<double(double)>& g) {
  return op_multiplier(sp, [g](double q2, const Eigen::RowVectorXd&, int n) {
    return g(q2 + n);
  });
}

QOperator op_number_total(const Space& sp) {
  return op_multiplier(sp, [](double, const Eigen::RowVectorXd&, int n) {
    return double(n);
  });
}

QOperator op_momentum(const Space& sp, int axis) {
  if (axis < 0 || axis >= sp.cfg.dimension)
    throw ConfigError("momentum axis out of range");
  return op_multiplier(sp,
                       [axis](double, const Eigen::RowVectorXd& q, int) {
                         return q[axis];
                       });
}

QOperator op_laplacian(const Space& sp) {
  return op_multiplier(sp, [](double q2, const Eigen::RowVectorXd&, int) {
    return q2;
  });
}

QOperator op_abs_p_pow(const Space& sp, double s) {
  return op_multiplier(sp, [s](double q2, const Eigen::RowVectorXd&, int) {
    return std::pow(q2, 0.5 * s);
  });
}

QOperator op_block(const Space& sp, const SpMat& op0, bool hermitian) {
  if (op0.rows() != sp.S || op0.cols() != sp.S)
    throw ConfigError("block operator dimension mismatch");
  auto shared = std::make_shared<SpMat>(op0);
  std::shared_ptr<SpMat> sharedH;
  if (!hermitian)
    sharedH = std::make_shared<SpMat>(SpMat(op0.adjoint()));
  QOperator r;
  r.structure = OpStructure::x_block_diagonal;
  r.dim = sp.dim;
  r.hermitian = hermitian;
  const Space* s = &sp;
  r.apply = [s, shared](const QState& in, QState& out) {
    QState tmp = s->E.conjugate().cwiseProduct(in);
    out.noalias() = (*shared) * tmp;
    out = s->E.cwiseProduct(out);
  };
  if (!hermitian) {
    r.apply_adj = [s, sharedH](const QState& in, QState& out) {
      QState tmp = s->E.conjugate().cwiseProduct(in);
      out.noalias() = (*sharedH) * tmp;
      out = s->E.cwiseProduct(out);
    };
  }
  return r;
}

QOperator gen_annihilate(const Space& sp, const FormFactorField& F) {
  return op_block(sp, op_annihilate(sp.basis, F.base), false);
}

QOperator gen_create(const Space& sp, const FormFactorField& F) {
  return op_block(sp, op_create(sp.basis, F.base), false);
}

QOperator op_field_phi(const Space& sp, const FormFactorField& F) {
  return op_block(sp, op_phi(sp.basis, F.base), true);
}

QOperator op_field_pi(const Space& sp, const FormFactorField& F) {
  return op_block(sp, op_pi(sp.basis, F.base), true);
}

QOperator dot_p_annihilate(const Space& sp,
                           const std::array<Eigen::VectorXcd, 3>& Fj) {
  const int d = sp.cfg.dimension;
  QOperator acc;
  bool first = true;
  for (int j = 0; j < d; ++j) {
    if (Fj[j].size() == 0 || Fj[j].isZero(0)) continue;
    QOperator term = op_product(
        op_momentum(sp, j), gen_annihilate(sp, field_profile(sp, Fj[j])));
    acc = first ? term : op_sum(acc, term);
    first = false;
  }
  if (first) {
    QOperator zero;
    zero.dim = sp.dim;
    zero.hermitian = false;
    zero.apply = [](const QState& in, QState& out) {
      out.setZero(in.rows(), in.cols());
    };
    zero.apply_adj = zero.apply;
    return zero;
  }
  return acc;
}

QOperator dot_p_annihilate_alt(const Space& sp,
                               const std::array<Eigen::VectorXcd, 3>& Fj) {
  const int d = sp.cfg.dimension;
  Eigen::VectorXcd kdotF = Eigen::VectorXcd::Zero(sp.grid.M);
  QOperator acc;
  bool first = true;
  for (int j = 0; j < d; ++j) {
    if (Fj[j].size() == 0) continue;
    for (int i = 0; i < sp.grid.M; ++i)
      kdotF[i] += sp.grid.kvecs(i, j) * Fj[j][i];
    if (Fj[j].isZero(0)) continue;
    QOperator term = op_product(
        gen_annihilate(sp, field_profile(sp, Fj[j])), op_momentum(sp, j));
    acc = first ? term : op_sum(acc, term);
    first = false;
  }
  QOperator extra = gen_annihilate(sp, field_profile(sp, kdotF));
  return first ? extra : op_sum(acc, extra);
}

double frank_schlein_constant(const Space& sp, const FormFactorField& F) {
  const int d = sp.cfg.dimension;
  const int L = sp.cfg.sites_per_dim;
  const double unit = 2.0 * kPi / sp.cfg.torus_length;
  double best = 0.0;
  for (int b = 0; b < sp.X; ++b) {
    double sum = 0.0;
    for (int i = 0; i < sp.grid.M; ++i) {
      if (F.base[i] == cd(0.0, 0.0)) continue;
      double wrap2 = 0.0;
      for (int j = 0; j < d; ++j) {
        int mq = static_cast<int>(std::lround(sp.qvecs(b, j) / unit));
        int mk = sp.grid.mvecs[i][j];
        int diff = mq - mk;
        int shifted = diff + L / 2 - 1;
        shifted %= L;
        if (shifted < 0) shifted += L;
        int wrapped = shifted - L / 2 + 1;
        double kk = unit * wrapped;
        wrap2 += kk * kk;
      }
      sum += std::norm(F.base[i]) / (1.0 + wrap2);
    }
    best = std::max(best, sum);
  }
  return std::sqrt(best);
}

QState random_state(const Space& sp, std::uint64_t seed) {
  SplitMix64 rng(seed);
  QState v(sp.S, sp.X);
  for (int x = 0; x < sp.X; ++x)
    for (long long n = 0; n < sp.S; ++n) v(n, x) = rng.cgaussian();
  v /= flat(v).norm();
  return v;
}

QState bandlimited_state(const Space& sp, double qmax, int occ_cap,
                         std::uint64_t seed) {
  SplitMix64 rng(seed);
  Eigen::MatrixXcd hat = Eigen::MatrixXcd::Zero(sp.S, sp.X);
  bool any = false;
  for (long long n = 0; n < sp.S; ++n) {
    if (sp.basis.ntot[n] > occ_cap) continue;
    for (int b = 0; b < sp.X; ++b) {
      bool inside = true;
      for (int j = 0; j < sp.cfg.dimension; ++j)
        if (std::abs(sp.qvecs(b, j)) > qmax + kShellEps) inside = false;
      if (!inside) continue;
      hat(n, b) = rng.cgaussian();
      any = true;
    }
  }
  if (!any) throw ConfigError("band limit leaves no admissible amplitudes");
  QState v = hat * sp.Fx.conjugate();
  v /= flat(v).norm();
  return v;
}

QState gaussian_bump(const Space& sp, double qmax, double sigma) {
  Eigen::MatrixXcd hat = Eigen::MatrixXcd::Zero(sp.S, sp.X);
  for (int b = 0; b < sp.X; ++b) {
    bool inside = true;
    for (int j = 0; j < sp.cfg.dimension; ++j)
      if (std::abs(sp.qvecs(b, j)) > qmax + kShellEps) inside = false;
    if (!inside) continue;
    hat(0, b) = std::exp(-sp.q2[b] / (2.0 * sigma * sigma));
  }
  QState v = hat * sp.Fx.conjugate();
  double nrm = flat(v).norm();
  if (nrm == 0.0) throw ConfigError("gaussian bump has no support");
  v /= nrm;
  return v;
}

QState coherent_product_state(const Space& sp, const QState& electron,
                              const ModeFunction& f, double* leakage_out) {
  Eigen::VectorXcd coh = coherent_vector(sp.basis, f, leakage_out);
  Eigen::RowVectorXcd erow = electron.row(0);
  QState v = coh * erow;
  v /= flat(v).norm();
  return v;
}

double norm0_sq(const Space& sp, const QState& v) {
  Eigen::MatrixXcd hat = v * sp.Fx.transpose();
  double sum = 0.0;
  for (int b = 0; b < sp.X; ++b)
    for (long long n = 0; n < sp.S; ++n)
      sum += (sp.q2[b] + sp.basis.ntot[n] + 1.0) * std::norm(hat(n, b));
  return sum;
}

}  // namespace grosslab

#include "grosslab/spectral.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>

#include "grosslab/rng.hpp"

namespace grosslab {

namespace {

using Vec = Eigen::VectorXcd;
using MatVec = std::function<void(const Vec&, Vec&)>;

// Hermitian Lanczos with full reorthogonalization. Returns the tridiagonal
// coefficients and the stored basis.
struct LanczosResult {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;   // beta[m] links v_m and v_{m+1}
  Eigen::MatrixXcd V;
  int m = 0;
  bool breakdown = false;
};

LanczosResult lanczos(const MatVec& Av, const Vec& start, int max_m) {
  const long long n = start.size();
  LanczosResult lr;
  lr.alpha.resize(max_m);
  lr.beta.resize(max_m);
  lr.V.resize(n, max_m);

  double nrm = start.norm();
  if (nrm == 0.0) {
    lr.breakdown = true;
    return lr;
  }
  lr.V.col(0) = start / nrm;
  Vec w(n), v(n);
  for (int m = 0; m < max_m; ++m) {
    v = lr.V.col(m);
    Av(v, w);
    cd a = lr.V.col(m).dot(w);
    lr.alpha[m] = a.real();
    w -= a * lr.V.col(m);
    if (m > 0) w -= cd(lr.beta[m - 1], 0.0) * lr.V.col(m - 1);
    // full reorthogonalization, one pass
    Eigen::VectorXcd proj = lr.V.leftCols(m + 1).adjoint() * w;
    w -= lr.V.leftCols(m + 1) * proj;
    double b = w.norm();
    lr.beta[m] = b;
    lr.m = m + 1;
    if (b < 1e-14 * std::max(1.0, std::abs(lr.alpha[m]))) {
      lr.breakdown = true;
      return lr;
    }
    if (m + 1 < max_m) lr.V.col(m + 1) = w / b;
  }
  return lr;
}

Eigen::MatrixXd tridiag(const LanczosResult& lr, int m) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    T(i, i) = lr.alpha[i];
    if (i + 1 < m) {
      T(i, i + 1) = lr.beta[i];
      T(i + 1, i) = lr.beta[i];
    }
  }
  return T;
}

Vec start_vector(const Space& sp, std::uint64_t seed, const char* tag) {
  SplitMix64 rng = stream_rng(seed, tag);
  Vec v(sp.dim);
  for (long long i = 0; i < sp.dim; ++i) v[i] = rng.cgaussian();
  return v;
}

MatVec qop_matvec(const Space& sp, const QOperator& A) {
  const Space* s = &sp;
  return [s, &A](const Vec& x, Vec& y) {
    QState in = unflat(*s, x);
    QState out(s->S, s->X);
    A.apply(in, out);
    y = flat(out);
  };
}

MatVec qop_normal_matvec(const Space& sp, const QOperator& A) {
  const Space* s = &sp;
  return [s, &A](const Vec& x, Vec& y) {
    QState in = unflat(*s, x);
    QState mid(s->S, s->X);
    A.apply(in, mid);
    QState out = A.adjoint_apply(mid);
    y = flat(out);
  };
}

}  // namespace

Eigen::VectorXcd lanczos_expm(const MatVec& Av, const Vec& v, double scale,
                              double tol, int max_m) {
  double beta0 = v.norm();
  if (beta0 == 0.0) return v;

  const long long n = v.size();
  Eigen::MatrixXcd V(n, max_m);
  Eigen::VectorXd alpha(max_m), beta(max_m);
  V.col(0) = v / beta0;

  Vec w(n), prev(n), ym;
  for (int m = 0; m < max_m; ++m) {
    Av(V.col(m), w);
    cd a = V.col(m).dot(w);
    alpha[m] = a.real();
    w -= a * V.col(m);
    if (m > 0) w -= cd(beta[m - 1], 0.0) * V.col(m - 1);
    Eigen::VectorXcd proj = V.leftCols(m + 1).adjoint() * w;
    w -= V.leftCols(m + 1) * proj;
    beta[m] = w.norm();

    bool happy = beta[m] < 1e-14 * beta0;
    bool check = happy || m == max_m - 1 || m % 2 == 1;
    if (check) {
      int mm = m + 1;
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(mm, mm);
      for (int i = 0; i < mm; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < mm) {
          T(i, i + 1) = beta[i];
          T(i + 1, i) = beta[i];
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      Eigen::VectorXcd phases(mm);
      for (int i = 0; i < mm; ++i)
        phases[i] = std::exp(cd(0.0, scale * es.eigenvalues()[i]));
      Eigen::VectorXcd small =
          es.eigenvectors().cast<cd>() *
          (phases.array() *
           es.eigenvectors().row(0).transpose().cast<cd>().array())
              .matrix();
      Vec y = beta0 * (V.leftCols(mm) * small);
      if (happy) return y;
      if (ym.size() > 0 && (y - ym).norm() <= tol * beta0) return y;
      ym = y;
    }
    if (m + 1 < max_m) V.col(m + 1) = w / beta[m];
  }
  return ym;
}

OpNormResult op_norm(const Space& sp, const QOperator& A, std::uint64_t seed,
                     double tol, int max_iter) {
  OpNormResult res;
  MatVec nm = qop_normal_matvec(sp, A);
  Vec start = start_vector(sp, seed, "op_norm");

  // Krylov iteration on A^dag A; the singular value tolerance doubles on
  // the eigenvalue of the normal operator.
  const int block = 12;
  double prev = -1.0;
  int total = 0;
  LanczosResult lr;
  for (int m = block; m <= max_iter; m += block) {
    lr = lanczos(nm, start, m);
    int mm = lr.m;
    if (mm == 0) {
      res.value = 0.0;
      res.converged = true;
      return res;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tridiag(lr, mm));
    double lmax = es.eigenvalues().maxCoeff();
    if (lmax < 0.0) lmax = 0.0;
    double sigma = std::sqrt(lmax);
    total = mm;
    res.value = sigma;
    res.iterations = total;
    if (lr.breakdown) {
      res.converged = true;
      return res;
    }
    if (prev >= 0.0 && std::abs(sigma - prev) <= tol * std::max(sigma, 1e-300)) {
      res.converged = true;
      return res;
    }
    prev = sigma;
  }
  res.converged = false;
  return res;
}

double form_difference_constant(const Space& sp, const QOperator& W1,
                                const QOperator& W2, std::uint64_t seed) {
  QOperator R = op_h0_fun(sp, [](double h) {
    return 1.0 / std::sqrt(h + 1.0);
  });
  QOperator diff = op_sum(W1, op_scale(cd(-1.0, 0.0), W2));
  QOperator sandwiched = op_product(R, op_product(diff, R));
  return op_norm(sp, sandwiched, seed).value;
}

QState resolvent_apply(const Space& sp, const QOperator& H, cd z,
                       const QState& psi, double rel_tol,
                       long long dense_threshold) {
  const double bnorm = flat(psi).norm();
  if (bnorm == 0.0) return sp.zero_state();

  if (sp.dim <= dense_threshold) {
    Eigen::MatrixXcd Hd = materialize(sp, H, dense_threshold);
    Hd.diagonal().array() -= z;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Hd);
    Vec x = lu.solve(flat(psi));
    QState out = unflat(sp, x);
    QState check(sp.S, sp.X);
    H.apply(out, check);
    check -= z * out;
    double rel = (flat(check) - flat(psi)).norm() / bnorm;
    if (rel > rel_tol)
      std::fprintf(stderr, "resolvent_apply: dense residual %.3g\n", rel);
    return out;
  }

  // CG on the normal equations (H-z)^dag (H-z) x = (H-z)^dag psi
  MatVec hv = qop_matvec(sp, H);
  auto shifted = [&](const Vec& x, Vec& y) {
    hv(x, y);
    y -= z * x;
  };
  auto shiftedH = [&](const Vec& x, Vec& y) {
    QState in = unflat(sp, x);
    QState out = H.adjoint_apply(in);
    y = flat(out);
    y -= std::conj(z) * x;
  };
  auto normal = [&](const Vec& x, Vec& y) {
    Vec mid(x.size());
    shifted(x, mid);
    shiftedH(mid, y);
  };

  Vec b(sp.dim);
  shiftedH(flat(psi), b);
  Vec x = Vec::Zero(sp.dim);
  Vec r = b, p = b, Ap(sp.dim), res(sp.dim);
  double rs = r.squaredNorm();
  const int max_it = 20000;
  for (int it = 0; it < max_it; ++it) {
    normal(p, Ap);
    double denom = p.dot(Ap).real();
    if (denom <= 0.0) break;
    double al = rs / denom;
    x += al * p;
    r -= al * Ap;
    double rs2 = r.squaredNorm();
    if (it % 10 == 9 || rs2 < 1e-28 * rs) {
      shifted(x, res);
      double rel = (res - flat(psi)).norm() / bnorm;
      if (rel <= rel_tol) return unflat(sp, x);
    }
    p = r + (rs2 / rs) * p;
    rs = rs2;
  }
  shifted(x, res);
  std::fprintf(stderr, "resolvent_apply: CG stalled at residual %.3g\n",
               (res - flat(psi)).norm() / bnorm);
  return unflat(sp, x);
}

GroundState ground_state(const Space& sp, const QOperator& H,
                         std::uint64_t seed, double tol, int max_iter) {
  GroundState gs;
  if (!H.hermitian)
    throw ConfigError("ground_state requires a Hermitian operator");
  MatVec hv = qop_matvec(sp, H);
  Vec start = start_vector(sp, seed, "ground_state");

  const int block = 16;
  double prev = 0.0;
  bool have_prev = false;
  for (int m = block; m <= max_iter; m += block) {
    LanczosResult lr = lanczos(hv, start, m);
    int mm = lr.m;
    if (mm == 0) break;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tridiag(lr, mm));
    int imin = 0;
    es.eigenvalues().minCoeff(&imin);
    gs.energy = es.eigenvalues()[imin];
    gs.iterations = mm;
    Eigen::VectorXcd coef = es.eigenvectors().col(imin).cast<cd>();
    gs.vec = lr.V.leftCols(mm) * coef;
    gs.vec /= gs.vec.norm();
    double scale = std::max(std::abs(gs.energy), 1.0);
    if (lr.breakdown ||
        (have_prev && std::abs(gs.energy - prev) <= tol * scale)) {
      gs.converged = true;
      return gs;
    }
    prev = gs.energy;
    have_prev = true;
  }
  gs.converged = false;
  return gs;
}

DensePropagator::DensePropagator(const Eigen::MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  evals = es.eigenvalues();
  evecs = es.eigenvectors();
}

Eigen::VectorXcd DensePropagator::apply(double t,
                                        const Eigen::VectorXcd& psi) const {
  Eigen::VectorXcd coef = evecs.adjoint() * psi;
  for (Eigen::Index i = 0; i < coef.size(); ++i)
    coef[i] *= std::exp(cd(0.0, -evals[i] * t));
  return evecs * coef;
}

QState propagate(const Space& sp, const QOperator& H, double t,
                 const QState& psi, long long dense_threshold) {
  if (sp.dim <= dense_threshold) {
    Eigen::MatrixXcd Hd = materialize(sp, H, dense_threshold);
    DensePropagator prop(Hd);
    return unflat(sp, prop.apply(t, flat(psi)));
  }
  MatVec hv = qop_matvec(sp, H);
  Vec y = lanczos_expm(hv, flat(psi), -t, 1e-9);
  return unflat(sp, y);
}

double dense_op_norm(const Eigen::MatrixXcd& A) {
  Eigen::MatrixXcd AtA = A.adjoint() * A;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(AtA,
                                                     Eigen::EigenvaluesOnly);
  double lmax = es.eigenvalues().maxCoeff();
  return lmax > 0.0 ? std::sqrt(lmax) : 0.0;
}

double dense_min_eig(const Eigen::MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H,
                                                     Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace grosslab

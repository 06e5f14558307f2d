#pragma once

#include "grosslab/qspace.hpp"

namespace grosslab {

struct OpNormResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Largest singular value via Krylov iteration on A^dag A, seeded start,
// relative tolerance on the singular value. Deterministic given the seed.
OpNormResult op_norm(const Space& sp, const QOperator& A, std::uint64_t seed,
                     double tol = 1e-8, int max_iter = 400);

// ||(H0+1)^{-1/2} (W1 - W2) (H0+1)^{-1/2}||
double form_difference_constant(const Space& sp, const QOperator& W1,
                                const QOperator& W2, std::uint64_t seed);

// (H - z)^{-1} psi. Dense LU below dense_threshold, otherwise conjugate
// gradients on the Hermitian normal equations, verified against the original
// system to rel_tol.
QState resolvent_apply(const Space& sp, const QOperator& H, cd z,
                       const QState& psi, double rel_tol = 1e-10,
                       long long dense_threshold = 4096);

struct GroundState {
  double energy = 0.0;
  Eigen::VectorXcd vec;
  int iterations = 0;
  bool converged = false;
};

// Smallest eigenvalue of a Hermitian operator, Lanczos with full
// reorthogonalization, seeded start.
GroundState ground_state(const Space& sp, const QOperator& H,
                         std::uint64_t seed, double tol = 1e-8,
                         int max_iter = 500);

// e^{-iHt} psi. Dense eigendecomposition below dense_threshold, Lanczos
// exponential above (tolerance 1e-9).
QState propagate(const Space& sp, const QOperator& H, double t,
                 const QState& psi, long long dense_threshold = 4096);

// Dense helpers reused by the experiments when one Hamiltonian serves many
// solves or time points.
struct DensePropagator {
  Eigen::VectorXd evals;
  Eigen::MatrixXcd evecs;
  explicit DensePropagator(const Eigen::MatrixXcd& H);
  Eigen::VectorXcd apply(double t, const Eigen::VectorXcd& psi) const;
};

double dense_op_norm(const Eigen::MatrixXcd& A);
double dense_min_eig(const Eigen::MatrixXcd& H);

// Hermitian Lanczos exponential y = e^{i scale A} v, full reorthogonalization.
Eigen::VectorXcd lanczos_expm(
    const std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>& Av,
    const Eigen::VectorXcd& v, double scale, double tol = 1e-12,
    int max_m = 96);

}  // namespace grosslab

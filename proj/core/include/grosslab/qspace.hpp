#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <memory>

#include "grosslab/fock.hpp"
#include "grosslab/model.hpp"

namespace grosslab {

// A state of the coupled system is an S x X complex matrix: row = Fock basis
// ordinal, column = electron lattice site. Amplitudes absorb the square root
// of the cell volume (ell/L)^d, so the plain Euclidean norm IS the physical
// L^2 x Fock norm and every operator below is weight-free.
using QState = Eigen::MatrixXcd;

// Electron lattice x truncated Fock space, with the transforms and phase
// tables every operator needs. Momentum bins are stored in FFT order; qvecs
// holds the wrapped representative (2pi/ell) rep(m) per bin.
struct Space {
  ModelConfig cfg;
  ModeGrid grid;
  FockBasis basis;

  int X = 0;                 // number of sites, L^d
  long long S = 0;           // Fock dimension
  long long dim = 0;         // S * X

  Eigen::MatrixXd sites;     // X x d, coordinates (ell/L) j
  Eigen::MatrixXd qvecs;     // X x d, electron momentum per bin
  Eigen::VectorXd q2;        // |q|^2 per bin
  Eigen::MatrixXcd E;        // S x X, e^{-i P_n . x}, P_n = total phonon momentum
  Eigen::MatrixXcd Fx;       // X x X unitary DFT, row = bin, col = site
  Eigen::MatrixXcd FxH;      // adjoint of Fx

  QState zero_state() const { return QState::Zero(S, X); }
};

Space build_space(const ModelConfig& cfg);

// Flat indexing convention for materialized operators and spectral routines:
// column-major over the S x X matrix, flat = n + S * x.
Eigen::Map<const Eigen::VectorXcd> flat(const QState& v);
QState unflat(const Space& sp, const Eigen::VectorXcd& v);

// One-phonon profile with the plane-wave site dependence F_x(k) = e^{-ikx} F(k).
// base holds the x = 0 amplitudes (sqrt(w), coupling and masks folded in);
// the site phases are unimodular, so sup_x ||F_x|| = ||base||.
struct FormFactorField {
  Eigen::VectorXcd base;
  double sup_norm = 0.0;
};

FormFactorField field_profile(const Space& sp, const Eigen::VectorXcd& base);
// G_{Lambda,x}: amplitudes sqrt(w) coupling v(k) on |k| <= lam.
FormFactorField field_G(const Space& sp, double lam);

enum class OpStructure { x_block_diagonal, momentum_multiplier, general };

// Matrix-free operator on QStates. apply_adj may be empty when hermitian.
struct QOperator {
  OpStructure structure = OpStructure::general;
  long long dim = 0;
  bool hermitian = false;
  std::function<void(const QState&, QState&)> apply;
  std::function<void(const QState&, QState&)> apply_adj;

  QState operator()(const QState& in) const;
  QState adjoint_apply(const QState& in) const;
};

// Dense materialization by applying to basis vectors; guarded by max_dim.
Eigen::MatrixXcd materialize(const Space& sp, const QOperator& op,
                             long long max_dim = 4096);

// Composition helpers (dimension-checked).
QOperator op_sum(const QOperator& a, const QOperator& b);
QOperator op_scale(cd alpha, const QOperator& a);
QOperator op_product(const QOperator& a, const QOperator& b);  // a after b
QOperator op_adjoint(const QOperator& a);
QOperator op_shift(const QOperator& a, double c);              // a + c * id

// Diagonal in the momentum representation: symbol(q2, qvec, ntot).
QOperator op_multiplier(
    const Space& sp,
    const std::function<double(double, const Eigen::RowVectorXd&, int)>& symbol);

QOperator op_h0(const Space& sp);                 // q^2 + N
QOperator op_h0_fun(const Space& sp, const std::function<double(double)>& g);
QOperator op_number_total(const Space& sp);       // N
QOperator op_momentum(const Space& sp, int axis);  // p_j
QOperator op_laplacian(const Space& sp);          // -Delta = q^2
// |p|^s as a multiplier; s in [1,2] is the regime of interest.
QOperator op_abs_p_pow(const Space& sp, double s);

// Conjugates a single-site Fock operator by the phonon-momentum phases:
// op_x = Gamma_x op0 Gamma_x^dag applied site by site.
QOperator op_block(const Space& sp, const SpMat& op0, bool hermitian);

QOperator gen_annihilate(const Space& sp, const FormFactorField& F);
QOperator gen_create(const Space& sp, const FormFactorField& F);
QOperator op_field_phi(const Space& sp, const FormFactorField& F);
QOperator op_field_pi(const Space& sp, const FormFactorField& F);

// sum_j p_j a((F_j)_x) given the per-axis profiles F_j; and the alternative
// assembly sum_j a(F_j) p_j + a(sum_j k_j F_j), equal on wrap-free states.
QOperator dot_p_annihilate(const Space& sp,
                           const std::array<Eigen::VectorXcd, 3>& Fj);
QOperator dot_p_annihilate_alt(const Space& sp,
                               const std::array<Eigen::VectorXcd, 3>& Fj);

// Lattice-exact one-phonon bound constant: ||a(F) Psi|| <= C ||sqrt(N)
// (1+p^2)^{1/2} Psi|| with C^2 = max_q sum_k |F(k)|^2 / (1 + |rep(q-k)|^2).
double frank_schlein_constant(const Space& sp, const FormFactorField& F);

// Random trial states. Band-limited states populate momentum bins with
// per-axis |q_j| <= qmax and total occupation <= occ_cap, leaving wrap
// headroom for one profile application; gaussian_bump is the deterministic
// smooth electron state exp(-q^2 / (2 sigma^2)) on the same window.
QState random_state(const Space& sp, std::uint64_t seed);
QState bandlimited_state(const Space& sp, double qmax, int occ_cap,
                         std::uint64_t seed);
QState gaussian_bump(const Space& sp, double qmax, double sigma);
// gamma (x) coherent(f): electron part from gaussian_bump, phonon part the
// truncated coherent vector of f, constant across sites.
QState coherent_product_state(const Space& sp, const QState& electron,
                              const ModeFunction& f, double* leakage_out = nullptr);

double norm0_sq(const Space& sp, const QState& v);  // <v, (H0+1) v>

}  // namespace grosslab

#pragma once

#include <array>
#include <map>

#include "grosslab/qspace.hpp"

namespace grosslab {

// Dressing kernel on the annulus K < |k| <= lam:
//   B(k) = -(1+k^2)^{-1} sqrt(w) g(k),  g = coupling * v,
// together with its gradient couplings kB and k^2 B. Mode identity:
// (1+k^2) B = G_K - G_lam holds exactly on the grid.
struct BFields {
  Eigen::VectorXcd B;
  Eigen::VectorXcd k2B;
  std::array<Eigen::VectorXcd, 3> kB;
  double norm_kB = 0.0;     // sqrt(sum_j ||kB_j||^2)
  double sup_norm_B = 0.0;  // sup_x ||B_x|| = ||B||
};

BFields build_B_field(const Space& sp, double K, double lam);

QOperator h_lambda(const Space& sp, double lam);  // H0 + phi(G_lam)

// Gross transform U_{K,lam} = prod_x e^{i pi(B_x)}, block diagonal over
// sites. K == lam yields the identity. Applied by dense Weyl matrices below
// dense_threshold Fock dimensions, per-site Lanczos exponentials above.
QOperator gross_transform(const Space& sp, double K, double lam,
                          long long dense_threshold = 600);

// V_{K,lam} = -2 a*(kB).p - 2 p.a(kB) + phi(kB)^2 + C_{K,lam}
QOperator dressed_interaction(const Space& sp, double K, double lam);

// H'_{K,lam} = H0 + phi(G_K) + V_{K,lam}
QOperator h_dressed(const Space& sp, double K, double lam);

// Residuals of U H_lam U^dag = H' on a trial state, split into the three
// conjugation identities (number, field, kinetic) plus the assembled total.
// All four vanish in the untruncated limit; on the truncated space they
// shrink as nmax grows.
struct DressingResidual {
  double total = 0.0;
  double number_part = 0.0;
  double field_part = 0.0;
  double kinetic_part = 0.0;
};

DressingResidual dressing_identity_residual(const Space& sp, double K,
                                            double lam, const QState& trial);

// U_ref^dag H'_{K,lam_ref} U_ref: the renormalized Hamiltonian candidate
// reconstructed from the dressed formula. Agrees with H_lam_ref up to
// truncation error; its ground energy decreases as lam_ref grows.
QOperator undressed_h(const Space& sp, double K, double lam_ref);

struct HamiltonianSet {
  QOperator H0;
  std::map<double, QOperator> H;         // lam -> H_lam
  std::map<double, QOperator> U;         // lam -> U_{K,lam}
  std::map<double, QOperator> Vdressed;  // lam -> V_{K,lam}
  std::map<double, QOperator> Hdressed;  // lam -> H'_{K,lam}
  std::map<double, double> D;            // lam -> D_lam
  std::map<double, double> C;            // lam -> C_{K,lam}
  std::map<double, double> norm_kB;      // lam -> ||kB||
  std::map<double, double> sup_norm_B;   // lam -> sup_x ||B_{lam,x}||
  double K = 0.0;
};

HamiltonianSet build_hamiltonians(const Space& sp, double K,
                                  const std::vector<double>& lambda_list);

}  // namespace grosslab

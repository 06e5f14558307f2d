#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "grosslab/model.hpp"

namespace grosslab {

using cd = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cd>;

// Bosonic occupation basis over M modes, truncated at total occupation nmax.
// States are ordered by grade (total occupation ascending), lexicographically
// within a grade. Size = binomial(M + nmax, nmax).
struct FockBasis {
  int M = 0;
  int nmax = 0;
  long long size = 0;
  std::vector<std::uint8_t> occ;     // size * M, row i = occupation of state i
  std::vector<int> ntot;             // total occupation per state
  std::vector<long long> raise_idx;  // size * M, index of n + e_j, -1 if cut
  std::vector<long long> lower_idx;  // size * M, index of n - e_j, -1 if empty

  const std::uint8_t* state(long long i) const { return occ.data() + i * M; }
  long long index_of(const std::uint8_t* n) const;

 private:
  friend FockBasis build_fock_basis(int M, int nmax);
  std::unordered_map<std::string, long long> lookup_;
};

FockBasis build_fock_basis(int M, int nmax);

long long fock_dimension(int M, int nmax);

// A mode function is the coefficient vector of a one-phonon profile,
// amplitudes sqrt(w) * f(k) per mode, so Euclidean inner products coincide
// with the continuum pairing the scalars use.
using ModeFunction = Eigen::VectorXcd;

ModeFunction mode_function(const ModeGrid& grid, const Eigen::VectorXcd& fvals);

// a(f) = sum_j conj(f_j) a_j (antilinear in f); op_create is its adjoint.
SpMat op_annihilate(const FockBasis& basis, const ModeFunction& f);
SpMat op_create(const FockBasis& basis, const ModeFunction& f);
SpMat op_phi(const FockBasis& basis, const ModeFunction& f);   // a(f)+a*(f)
SpMat op_pi(const FockBasis& basis, const ModeFunction& f);    // i(a*(f)-a(f))
SpMat op_number(const FockBasis& basis);

// Truncated Weyl operator e^{i pi(f)}, computed from the dense Hermitian
// eigendecomposition of pi(f). Exactly unitary up to solver roundoff, but
// only an approximation of the untruncated Weyl action near the grade cap.
Eigen::MatrixXcd op_weyl(const FockBasis& basis, const ModeFunction& f);

// Closed-form truncated coherent vector: the amplitudes of e^{-||f||^2/2}
// e^{a*(f)} vacuum, equal to op_weyl(-f) * vacuum. leakage_out receives the
// occupation mass lost to truncation; a warning is printed above 1e-6.
// Keep ||f||^2 well below nmax (budget roughly nmax/4).
Eigen::VectorXcd coherent_vector(const FockBasis& basis, const ModeFunction& f,
                                 double* leakage_out = nullptr);

}  // namespace grosslab

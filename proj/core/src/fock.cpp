#include "grosslab/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace grosslab {

long long fock_dimension(int M, int nmax) {
  // binomial(M + nmax, nmax); -1 on overflow
  unsigned __int128 r = 1;
  for (int i = 1; i <= nmax; ++i) {
    r = r * static_cast<unsigned>(M + i);
    r /= static_cast<unsigned>(i);
    if (r > static_cast<unsigned __int128>(0x7fffffffffffffffLL)) return -1;
  }
  return static_cast<long long>(r);
}

long long FockBasis::index_of(const std::uint8_t* n) const {
  std::string key(reinterpret_cast<const char*>(n), static_cast<size_t>(M));
  auto it = lookup_.find(key);
  return it == lookup_.end() ? -1 : it->second;
}

FockBasis build_fock_basis(int M, int nmax) {
  FockBasis b;
  b.M = M;
  b.nmax = nmax;
  long long S = fock_dimension(M, nmax);
  if (S < 0 || S > 50'000'000)
    throw ConfigError("Fock basis too large: M=" + std::to_string(M) +
                      " nmax=" + std::to_string(nmax));
  b.size = S;
  b.occ.reserve(static_cast<size_t>(S) * M);
  b.ntot.reserve(static_cast<size_t>(S));

  // grade ascending, lexicographic within a grade
  std::vector<std::uint8_t> cur(static_cast<size_t>(std::max(M, 1)), 0);
  std::function<void(int, int)> emit = [&](int axis, int left) {
    if (axis == M - 1) {
      cur[axis] = static_cast<std::uint8_t>(left);
      b.occ.insert(b.occ.end(), cur.begin(), cur.begin() + M);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      cur[axis] = static_cast<std::uint8_t>(v);
      emit(axis + 1, left - v);
    }
  };
  if (M == 0) {
    b.size = 1;
    b.occ.assign(1, 0);
    b.ntot.push_back(0);
  } else {
    for (int t = 0; t <= nmax; ++t) emit(0, t);
    for (long long i = 0; i < b.size; ++i) {
      int tot = 0;
      for (int j = 0; j < M; ++j) tot += b.occ[i * M + j];
      b.ntot.push_back(tot);
    }
  }

  b.lookup_.reserve(static_cast<size_t>(b.size) * 2);
  for (long long i = 0; i < b.size; ++i)
    b.lookup_[std::string(reinterpret_cast<const char*>(b.state(i)),
                          static_cast<size_t>(M))] = i;

  b.raise_idx.assign(static_cast<size_t>(b.size) * std::max(M, 1), -1);
  b.lower_idx.assign(static_cast<size_t>(b.size) * std::max(M, 1), -1);
  std::vector<std::uint8_t> tmp(static_cast<size_t>(std::max(M, 1)));
  for (long long i = 0; i < b.size; ++i) {
    const std::uint8_t* n = b.state(i);
    for (int j = 0; j < M; ++j) {
      if (b.ntot[i] < nmax) {
        std::copy(n, n + M, tmp.begin());
        tmp[j] = static_cast<std::uint8_t>(tmp[j] + 1);
        b.raise_idx[i * M + j] = b.index_of(tmp.data());
      }
      if (n[j] > 0) {
        std::copy(n, n + M, tmp.begin());
        tmp[j] = static_cast<std::uint8_t>(tmp[j] - 1);
        b.lower_idx[i * M + j] = b.index_of(tmp.data());
      }
    }
  }
  return b;
}

ModeFunction mode_function(const ModeGrid& grid, const Eigen::VectorXcd& fvals) {
  if (fvals.size() != grid.M)
    throw ConfigError("mode function length does not match the grid");
  return std::sqrt(grid.w) * fvals;
}

SpMat op_annihilate(const FockBasis& basis, const ModeFunction& f) {
  if (f.size() != basis.M)
    throw ConfigError("mode function length does not match the basis");
  std::vector<Eigen::Triplet<cd>> trips;
  for (long long i = 0; i < basis.size; ++i) {
    const std::uint8_t* n = basis.state(i);
    for (int j = 0; j < basis.M; ++j) {
      if (n[j] == 0 || f[j] == cd(0.0, 0.0)) continue;
      long long tgt = basis.lower_idx[i * basis.M + j];
      trips.emplace_back(static_cast<int>(tgt), static_cast<int>(i),
                         std::conj(f[j]) * std::sqrt(double(n[j])));
    }
  }
  SpMat A(basis.size, basis.size);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SpMat op_create(const FockBasis& basis, const ModeFunction& f) {
  return SpMat(op_annihilate(basis, f).adjoint());
}

SpMat op_phi(const FockBasis& basis, const ModeFunction& f) {
  SpMat a = op_annihilate(basis, f);
  return SpMat(a + SpMat(a.adjoint()));
}

SpMat op_pi(const FockBasis& basis, const ModeFunction& f) {
  SpMat a = op_annihilate(basis, f);
  return SpMat(cd(0, 1) * (SpMat(a.adjoint()) - a));
}

SpMat op_number(const FockBasis& basis) {
  std::vector<Eigen::Triplet<cd>> trips;
  for (long long i = 0; i < basis.size; ++i)
    trips.emplace_back(static_cast<int>(i), static_cast<int>(i),
                       cd(basis.ntot[i], 0.0));
  SpMat N(basis.size, basis.size);
  N.setFromTriplets(trips.begin(), trips.end());
  return N;
}

Eigen::MatrixXcd op_weyl(const FockBasis& basis, const ModeFunction& f) {
  Eigen::MatrixXcd P = Eigen::MatrixXcd(op_pi(basis, f));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(P);
  const auto& V = es.eigenvectors();
  Eigen::VectorXcd phases(basis.size);
  for (long long i = 0; i < basis.size; ++i)
    phases[i] = std::exp(cd(0.0, es.eigenvalues()[i]));
  return V * phases.asDiagonal() * V.adjoint();
}

Eigen::VectorXcd coherent_vector(const FockBasis& basis, const ModeFunction& f,
                                 double* leakage_out) {
  if (f.size() != basis.M)
    throw ConfigError("mode function length does not match the basis");
  Eigen::VectorXcd v(basis.size);
  const double pref = std::exp(-0.5 * f.squaredNorm());
  for (long long i = 0; i < basis.size; ++i) {
    const std::uint8_t* n = basis.state(i);
    cd amp(pref, 0.0);
    for (int j = 0; j < basis.M; ++j) {
      for (int r = 1; r <= n[j]; ++r) amp *= f[j] / std::sqrt(double(r));
    }
    v[i] = amp;
  }
  double leak = 1.0 - v.squaredNorm();
  if (leak < 0.0) leak = 0.0;
  if (leakage_out) *leakage_out = leak;
  if (leak > 1e-6)
    std::fprintf(stderr,
                 "coherent_vector: truncation leakage %.3g exceeds 1e-6 "
                 "(||f||^2 = %.3g, nmax = %d)\n",
                 leak, f.squaredNorm(), basis.nmax);
  return v;
}

}  // namespace grosslab

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace grosslab {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class FormFactorKind { power_law, polaron, smooth_power, table };

// Radial phonon form factor v(|k|). The coupling constant is NOT folded in
// here; fields built from the grid multiply by config.coupling separately.
struct FormFactorSpec {
  FormFactorKind kind = FormFactorKind::polaron;
  double gamma = 0.0;                 // power_law:    v = |k|^{-gamma}
  double beta = 0.0;                  // smooth_power: v = (1+k^2)^{-beta}
  std::vector<double> table_values;   // table: per-mode samples, grid order

  // Analytic kinds only; the table kind is sampled per mode in build_grid.
  double value(double kabs, int dimension) const;

  std::string describe() const;
};

struct ModelConfig {
  int dimension = 1;            // 1, 2 or 3
  double torus_length = 6.283185307179586476925286766559;  // ell
  int sites_per_dim = 16;       // L, even
  int nmax = 4;                 // total phonon occupation cap
  FormFactorSpec form_factor;
  double coupling = 1.0;        // >= 0, multiplies v in every field
  double K = 2.0;               // dressing infrared cutoff, 0 <= K < min(lambda)
  std::vector<double> lambda_list;  // ascending ultraviolet cutoffs
  std::uint64_t seed = 1;

  // Optional phonon-mode restriction |k| <= mode_cutoff (0 disables).
  // Not a config-file key; set programmatically when every profile in play
  // is supported inside the restricted set, to shrink the Fock space.
  double mode_cutoff = 0.0;
};

// Parses "key = value" lines ('#' comments). Exactly the documented keys
// are accepted; unknown keys and malformed values raise ConfigError.
ModelConfig parse_config_text(const std::string& text);
ModelConfig parse_config_file(const std::string& path);

// Structural checks (L even, lambda_list ascending and representable,
// K below the sweep, parameter ranges). Raises ConfigError.
void validate_config(const ModelConfig& cfg);

// Discrete momentum content of the torus: all dual-lattice modes k = (2pi/ell) m
// with m_j in {-L/2+1, ..., L/2} and k != 0. The asymmetric window keeps exactly
// one representative of each Nyquist pair, so the count is L^d - 1 before any
// mode_cutoff restriction.
struct ModeGrid {
  int dimension = 0;
  double ell = 0.0;
  int L = 0;
  int M = 0;                    // number of modes
  double w = 0.0;               // dual cell weight (2pi/ell)^d
  double lambda_grid = 0.0;     // pi L / ell, the per-axis window radius
  Eigen::MatrixXd kvecs;        // M x d
  std::vector<std::array<int, 3>> mvecs;
  Eigen::VectorXd kabs;         // |k|
  Eigen::VectorXd k2;           // |k|^2
  Eigen::VectorXd vsamples;     // v(k) per mode, no coupling factor
  std::vector<int> neg_index;   // ordinal of the representative of -k

  Eigen::VectorXd mask_leq(double lam) const;               // |k| <= lam
  Eigen::VectorXd mask_ann(double K, double lam) const;     // K < |k| <= lam
};

ModeGrid build_grid(const ModelConfig& cfg);

// D_K = sum_{|k| >= K} w g(k)^2 / k^2 with g = coupling * v. Closed tail,
// so D is right-continuous in K and constant between mode shells.
double scalar_D(const ModeGrid& grid, const ModelConfig& cfg, double K);

// C_{K,Lambda} = sum over the half-open annulus K < |k| <= Lambda of
// w g^2 ((1+k^2)^{-2} - 2 (1+k^2)^{-1}). Always <= 0; K > Lambda is an error.
double scalar_C(const ModeGrid& grid, const ModelConfig& cfg, double K,
                double lam);

// sup over a refine-times-denser electron momentum grid of the one-phonon
// integrand sum_{|k| > K} w g^2 / (1 + |k - q|^2). Non-increasing in K.
double v3_supremum(const ModelConfig& cfg, double K, int refine = 4);

// Integrability test for |k|^{2s} g^2 (1+k^2)^{-2}: quadrature over the grid
// plus a continuum tail estimate from the leading power of the integrand.
// tail_exponent >= -1 makes the tail divergent (boundary = log divergence).
struct RegularityVerdict {
  double grid_sum = 0.0;
  double tail_exponent = 0.0;
  double tail_estimate = 0.0;   // +inf when divergent
  bool divergent = false;
};

RegularityVerdict regularity_criterion(const ModelConfig& cfg, double s);

// Streaming midpoint quadrature of the d=3 continuum scalars for the polaron
// form factor at coupling 1, over one octant of a cell-centered Cartesian
// grid of spacing h. kind: 'D' (tail integral, outer radius R), 'C' (annulus
// constant), 'B' (squared gradient-coupling norm over the annulus).
double continuum_quadrature_d3(char kind, double K, double lam, double h,
                               double R = 0.0);

}  // namespace grosslab

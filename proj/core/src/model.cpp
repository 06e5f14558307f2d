#include "grosslab/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "grosslab/parallel.hpp"

namespace grosslab {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
// Shell comparisons tolerate float noise; sweeps are expected to sit
// off-shell, where the choice of side is immaterial.
constexpr double kShellEps = 1e-9;

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("invalid numeric value for '" + key + "': " + v);
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("invalid integer value for '" + key + "': " + v);
  }
}

}  // namespace

double FormFactorSpec::value(double kabs, int dimension) const {
  switch (kind) {
    case FormFactorKind::power_law:
      return std::pow(kabs, -gamma);
    case FormFactorKind::polaron:
      return std::pow(kabs, -0.5 * (dimension - 1));
    case FormFactorKind::smooth_power:
      return std::pow(1.0 + kabs * kabs, -beta);
    case FormFactorKind::table:
      throw ConfigError("table form factor has no radial formula");
  }
  return 0.0;
}

std::string FormFactorSpec::describe() const {
  char buf[64];
  switch (kind) {
    case FormFactorKind::power_law:
      std::snprintf(buf, sizeof(buf), "power_law(gamma=%g)", gamma);
      return buf;
    case FormFactorKind::polaron:
      return "polaron";
    case FormFactorKind::smooth_power:
      std::snprintf(buf, sizeof(buf), "smooth_power(beta=%g)", beta);
      return buf;
    case FormFactorKind::table:
      return "table";
  }
  return "?";
}

ModelConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("line " + std::to_string(lineno) +
                        ": empty key or value");
    if (kv.count(key))
      throw ConfigError("duplicate key '" + key + "'");
    kv[key] = val;
  }

  static const char* allowed[] = {"dimension", "torus_length", "sites_per_dim",
                                  "nmax",      "form_factor",  "gamma",
                                  "beta",      "coupling",     "K",
                                  "lambda_list", "seed"};
  for (const auto& [key, val] : kv) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw ConfigError("unknown config key '" + key + "'");
  }

  auto require = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw ConfigError(std::string("missing required key '") + key + "'");
    return it->second;
  };

  ModelConfig cfg;
  cfg.dimension = static_cast<int>(parse_int("dimension", require("dimension")));
  cfg.torus_length = parse_double("torus_length", require("torus_length"));
  cfg.sites_per_dim =
      static_cast<int>(parse_int("sites_per_dim", require("sites_per_dim")));
  cfg.nmax = static_cast<int>(parse_int("nmax", require("nmax")));
  cfg.coupling = parse_double("coupling", require("coupling"));
  cfg.K = parse_double("K", require("K"));
  {
    long long s = parse_int("seed", require("seed"));
    cfg.seed = static_cast<std::uint64_t>(s);
  }

  const std::string& ff = require("form_factor");
  if (ff == "power_law") {
    cfg.form_factor.kind = FormFactorKind::power_law;
    cfg.form_factor.gamma = parse_double("gamma", require("gamma"));
    if (kv.count("beta"))
      throw ConfigError("'beta' is only valid with form_factor = smooth_power");
  } else if (ff == "polaron") {
    cfg.form_factor.kind = FormFactorKind::polaron;
    if (kv.count("gamma") || kv.count("beta"))
      throw ConfigError("'gamma'/'beta' are not valid with form_factor = polaron");
  } else if (ff == "smooth_power") {
    cfg.form_factor.kind = FormFactorKind::smooth_power;
    cfg.form_factor.beta = parse_double("beta", require("beta"));
    if (kv.count("gamma"))
      throw ConfigError("'gamma' is only valid with form_factor = power_law");
  } else {
    throw ConfigError("unknown form_factor '" + ff +
                      "' (expected power_law, polaron or smooth_power)");
  }

  {
    const std::string& ll = require("lambda_list");
    std::string item;
    std::istringstream ls(ll);
    while (std::getline(ls, item, ',')) {
      item = trim(item);
      if (item.empty()) throw ConfigError("empty entry in lambda_list");
      cfg.lambda_list.push_back(parse_double("lambda_list", item));
    }
    if (cfg.lambda_list.empty()) throw ConfigError("lambda_list is empty");
  }

  validate_config(cfg);
  return cfg;
}

ModelConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate_config(const ModelConfig& cfg) {
  if (cfg.dimension < 1 || cfg.dimension > 3)
    throw ConfigError("dimension must be 1, 2 or 3");
  if (!(cfg.torus_length > 0.0))
    throw ConfigError("torus_length must be positive");
  if (cfg.sites_per_dim < 2 || cfg.sites_per_dim % 2 != 0)
    throw ConfigError("sites_per_dim must be even and at least 2");
  if (cfg.nmax < 1) throw ConfigError("nmax must be at least 1");
  if (!(cfg.coupling >= 0.0)) throw ConfigError("coupling must be >= 0");
  if (!(cfg.K >= 0.0)) throw ConfigError("K must be >= 0");
  if (cfg.lambda_list.empty()) throw ConfigError("lambda_list is empty");
  for (size_t i = 1; i < cfg.lambda_list.size(); ++i)
    if (!(cfg.lambda_list[i] > cfg.lambda_list[i - 1]))
      throw ConfigError("lambda_list must be strictly ascending");
  if (!(cfg.K < cfg.lambda_list.front()))
    throw ConfigError("K must be below the smallest lambda");
  double lambda_grid = kPi * cfg.sites_per_dim / cfg.torus_length;
  if (cfg.lambda_list.back() > lambda_grid + kShellEps)
    throw ConfigError(
        "cutoff not representable: lambda_list exceeds the window pi*L/ell");
  if (cfg.mode_cutoff > 0.0 &&
      cfg.lambda_list.back() > cfg.mode_cutoff + kShellEps)
    throw ConfigError("lambda_list exceeds mode_cutoff");
}

ModeGrid build_grid(const ModelConfig& cfg) {
  const int d = cfg.dimension;
  const int L = cfg.sites_per_dim;
  const double ell = cfg.torus_length;
  const double unit = 2.0 * kPi / ell;

  ModeGrid grid;
  grid.dimension = d;
  grid.ell = ell;
  grid.L = L;
  grid.w = std::pow(unit, d);
  grid.lambda_grid = kPi * L / ell;

  const int mlo = -L / 2 + 1, mhi = L / 2;
  std::vector<std::array<int, 3>> kept;
  std::array<int, 3> m = {0, 0, 0};
  // lexicographic enumeration over the window, first axis slowest
  std::function<void(int)> rec = [&](int axis) {
    if (axis == d) {
      bool zero = true;
      for (int j = 0; j < d; ++j)
        if (m[j] != 0) zero = false;
      if (zero) return;
      if (cfg.mode_cutoff > 0.0) {
        double k2 = 0.0;
        for (int j = 0; j < d; ++j) k2 += unit * m[j] * unit * m[j];
        if (std::sqrt(k2) > cfg.mode_cutoff + kShellEps) return;
      }
      kept.push_back(m);
      return;
    }
    for (int v = mlo; v <= mhi; ++v) {
      m[axis] = v;
      rec(axis + 1);
    }
  };
  rec(0);

  grid.M = static_cast<int>(kept.size());
  grid.mvecs = kept;
  grid.kvecs.resize(grid.M, d);
  grid.kabs.resize(grid.M);
  grid.k2.resize(grid.M);
  grid.vsamples.resize(grid.M);

  std::map<std::array<int, 3>, int> ordinal;
  for (int i = 0; i < grid.M; ++i) ordinal[kept[i]] = i;

  if (cfg.form_factor.kind == FormFactorKind::table &&
      static_cast<int>(cfg.form_factor.table_values.size()) != grid.M)
    throw ConfigError("table form factor has " +
                      std::to_string(cfg.form_factor.table_values.size()) +
                      " values for " + std::to_string(grid.M) + " modes");

  grid.neg_index.resize(grid.M);
  for (int i = 0; i < grid.M; ++i) {
    double k2 = 0.0;
    for (int j = 0; j < d; ++j) {
      grid.kvecs(i, j) = unit * kept[i][j];
      k2 += grid.kvecs(i, j) * grid.kvecs(i, j);
    }
    grid.k2[i] = k2;
    grid.kabs[i] = std::sqrt(k2);
    grid.vsamples[i] = cfg.form_factor.kind == FormFactorKind::table
                           ? cfg.form_factor.table_values[i]
                           : cfg.form_factor.value(grid.kabs[i], d);
    std::array<int, 3> neg = {0, 0, 0};
    for (int j = 0; j < d; ++j) {
      int v = -kept[i][j];
      if (v < mlo) v += L;  // -L/2 wraps to the kept Nyquist representative
      neg[j] = v;
    }
    auto it = ordinal.find(neg);
    grid.neg_index[i] = it == ordinal.end() ? i : it->second;
  }
  return grid;
}

Eigen::VectorXd ModeGrid::mask_leq(double lam) const {
  Eigen::VectorXd mask(M);
  for (int i = 0; i < M; ++i)
    mask[i] = kabs[i] <= lam + kShellEps ? 1.0 : 0.0;
  return mask;
}

Eigen::VectorXd ModeGrid::mask_ann(double K, double lam) const {
  Eigen::VectorXd mask(M);
  for (int i = 0; i < M; ++i)
    mask[i] = (kabs[i] > K + kShellEps && kabs[i] <= lam + kShellEps) ? 1.0
                                                                      : 0.0;
  return mask;
}

double scalar_D(const ModeGrid& grid, const ModelConfig& cfg, double K) {
  // Tail strictly above K, the complement of mask_leq(K); the strict edge
  // matters when a mode sits exactly at a cutoff.
  const double c2 = cfg.coupling * cfg.coupling;
  double sum = 0.0;
  for (int i = 0; i < grid.M; ++i) {
    if (grid.kabs[i] <= K + kShellEps) continue;
    double g2 = c2 * grid.vsamples[i] * grid.vsamples[i];
    sum += grid.w * g2 / grid.k2[i];
  }
  return sum;
}

double scalar_C(const ModeGrid& grid, const ModelConfig& cfg, double K,
                double lam) {
  if (K > lam + kShellEps)
    throw ConfigError("scalar_C requires K <= lambda");
  const double c2 = cfg.coupling * cfg.coupling;
  double sum = 0.0;
  for (int i = 0; i < grid.M; ++i) {
    if (!(grid.kabs[i] > K + kShellEps && grid.kabs[i] <= lam + kShellEps))
      continue;
    double g2 = c2 * grid.vsamples[i] * grid.vsamples[i];
    double u = 1.0 / (1.0 + grid.k2[i]);
    sum += grid.w * g2 * (u * u - 2.0 * u);
  }
  return sum;
}

double v3_supremum(const ModelConfig& cfg, double K, int refine) {
  if (refine < 1) refine = 1;
  ModeGrid grid = build_grid(cfg);
  const int d = cfg.dimension;
  const double c2 = cfg.coupling * cfg.coupling;
  const double unit = 2.0 * kPi / cfg.torus_length;
  const double step = unit / refine;
  const int half = cfg.sites_per_dim / 2 * refine;

  // collect the annulus modes once
  std::vector<int> idx;
  for (int i = 0; i < grid.M; ++i)
    if (grid.kabs[i] > K + kShellEps) idx.push_back(i);
  if (idx.empty()) return 0.0;

  long long npts = 1;
  for (int j = 0; j < d; ++j) npts *= 2 * half + 1;

  int workers = worker_count();
  std::vector<double> partial(workers, 0.0);
  parallel_for(npts, [&](long long flat) {
    double q[3] = {0.0, 0.0, 0.0};
    long long rem = flat;
    for (int j = 0; j < d; ++j) {
      long long b = rem % (2 * half + 1);
      rem /= 2 * half + 1;
      q[j] = step * (static_cast<double>(b) - half);
    }
    double sum = 0.0;
    for (int i : idx) {
      double dk2 = 0.0;
      for (int j = 0; j < d; ++j) {
        double diff = grid.kvecs(i, j) - q[j];
        dk2 += diff * diff;
      }
      double g2 = c2 * grid.vsamples[i] * grid.vsamples[i];
      sum += grid.w * g2 / (1.0 + dk2);
    }
    // one slot per worker; the final max is order-independent
    size_t slot = static_cast<size_t>(flat % workers);
    if (sum > partial[slot]) partial[slot] = sum;
  });
  double sup = 0.0;
  for (double v : partial) sup = std::max(sup, v);
  return sup;
}

RegularityVerdict regularity_criterion(const ModelConfig& cfg, double s) {
  if (s < 1.0 || s > 2.0)
    throw ConfigError("regularity exponent s must lie in [1, 2]");
  ModeGrid grid = build_grid(cfg);
  const double c2 = cfg.coupling * cfg.coupling;

  RegularityVerdict out;
  for (int i = 0; i < grid.M; ++i) {
    double g2 = c2 * grid.vsamples[i] * grid.vsamples[i];
    double u = 1.0 + grid.k2[i];
    out.grid_sum += grid.w * g2 * std::pow(grid.k2[i], s) / (u * u);
  }

  double vpow = 0.0;  // v(r)^2 ~ r^{-vpow}
  switch (cfg.form_factor.kind) {
    case FormFactorKind::power_law:
      vpow = 2.0 * cfg.form_factor.gamma;
      break;
    case FormFactorKind::polaron:
      vpow = cfg.dimension - 1.0;
      break;
    case FormFactorKind::smooth_power:
      vpow = 4.0 * cfg.form_factor.beta;
      break;
    case FormFactorKind::table:
      // compact support: no continuum tail
      out.tail_exponent = -std::numeric_limits<double>::infinity();
      out.tail_estimate = 0.0;
      out.divergent = false;
      return out;
  }

  out.tail_exponent = (cfg.dimension - 1.0) + 2.0 * s - 4.0 - vpow;
  out.divergent = out.tail_exponent >= -1.0 - 1e-12;
  if (out.divergent) {
    out.tail_estimate = std::numeric_limits<double>::infinity();
  } else {
    double sphere = cfg.dimension == 1 ? 2.0
                    : cfg.dimension == 2 ? 2.0 * kPi
                                         : 4.0 * kPi;
    double lg = kPi * cfg.sites_per_dim / cfg.torus_length;
    out.tail_estimate = c2 * sphere *
                        std::pow(lg, out.tail_exponent + 1.0) /
                        (-(out.tail_exponent + 1.0));
  }
  return out;
}

double continuum_quadrature_d3(char kind, double K, double lam, double h,
                               double R) {
  if (h <= 0.0) throw ConfigError("quadrature step must be positive");
  double outer;
  switch (kind) {
    case 'D':
      if (R <= K) throw ConfigError("quadrature 'D' needs R > K");
      outer = R;
      break;
    case 'C':
    case 'B':
      if (lam <= K) throw ConfigError("annulus quadrature needs lambda > K");
      outer = lam;
      break;
    default:
      throw ConfigError("quadrature kind must be 'D', 'C' or 'B'");
  }

  const long long nz = static_cast<long long>(std::ceil(outer / h));
  const double K2 = K * K;
  const double out2 = outer * outer;
  std::vector<double> plane(nz, 0.0);

  parallel_for(nz, [&](long long iz) {
    const double z = (iz + 0.5) * h;
    const double z2 = z * z;
    if (z2 > out2) return;
    double acc = 0.0;
    for (long long iy = 0;; ++iy) {
      const double y = (iy + 0.5) * h;
      const double yz2 = z2 + y * y;
      if (yz2 > out2) break;
      for (long long ix = 0;; ++ix) {
        const double x = (ix + 0.5) * h;
        const double r2 = yz2 + x * x;
        if (r2 > out2) break;
        if (r2 < K2) continue;
        switch (kind) {
          case 'D':
            acc += 1.0 / (r2 * r2);
            break;
          case 'C': {
            double u = 1.0 / (1.0 + r2);
            acc += (u * u - 2.0 * u) / r2;
            break;
          }
          case 'B': {
            double u = 1.0 / (1.0 + r2);
            acc += u * u;
            break;
          }
        }
      }
    }
    plane[iz] = acc;
  });

  double total = 0.0;
  for (long long iz = 0; iz < nz; ++iz) total += plane[iz];
  return 8.0 * h * h * h * total;
}

}  // namespace grosslab

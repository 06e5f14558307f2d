#include "grosslab/experiments.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "grosslab/hamiltonians.hpp"
#include "grosslab/rng.hpp"
#include "grosslab/spectral.hpp"

namespace grosslab {
namespace {

constexpr double kShellEps = 1e-9;

std::string join_values(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += format_sweep_value(xs[i]);
  }
  return out;
}

std::string trial_key(int t) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", t);
  return buf;
}

void echo_config(const Space& sp, ExperimentReport& rep,
                 const std::string& prefix = "") {
  const ModelConfig& cfg = sp.cfg;
  auto add = [&](const std::string& k, const std::string& v) {
    rep.config_echo.emplace_back(prefix + k, v);
  };
  add("dimension", std::to_string(cfg.dimension));
  add("torus_length", format_double(cfg.torus_length));
  add("sites_per_dim", std::to_string(cfg.sites_per_dim));
  add("nmax", std::to_string(cfg.nmax));
  add("form_factor", cfg.form_factor.describe());
  add("coupling", format_double(cfg.coupling));
  add("K", format_double(cfg.K));
  add("lambda_list", join_values(cfg.lambda_list));
  add("seed", std::to_string(cfg.seed));
  if (cfg.mode_cutoff > 0.0) add("mode_cutoff", format_double(cfg.mode_cutoff));
  add("modes", std::to_string(sp.grid.M));
  add("fock_dim", std::to_string(sp.S));
  add("dim", std::to_string(sp.dim));
}

// Largest per-axis electron momentum a trial may carry so that one
// application of a profile supported in |k| <= shift stays inside the dual
// window (no wrap, the lattice-exactness precondition). The mode window
// {-L/2+1, ..., L/2} is one unit short on the negative side, and the shift
// is realized by grid modes only, so the per-axis kick is the largest mode
// component below the cutoff.
double headroom_qmax(const Space& sp, double want, double shift) {
  const ModeGrid& g = sp.grid;
  const double unit = 2.0 * g.lambda_grid / g.L;
  double eff = 0.0;
  for (int i = 0; i < g.M; ++i) {
    if (g.kabs[i] > shift + kShellEps) continue;
    for (int j = 0; j < g.dimension; ++j)
      eff = std::max(eff, std::abs(g.kvecs(i, j)));
  }
  double room = (g.lambda_grid - unit) - eff;
  if (room < -kShellEps)
    throw ConfigError(
        "no wrap-free electron band: profile shifts reach across the dual "
        "window, enlarge sites_per_dim");
  return std::max(0.0, std::min(want, room));
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  double xm = 0.0, ym = 0.0;
  const std::size_t n = xs.size();
  for (std::size_t i = 0; i < n; ++i) {
    xm += xs[i];
    ym += ys[i];
  }
  xm /= static_cast<double>(n);
  ym /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (xs[i] - xm) * (ys[i] - ym);
    den += (xs[i] - xm) * (xs[i] - xm);
  }
  return den > 0.0 ? num / den : 0.0;
}

QOperator lu_resolvent(const Space& sp, const Eigen::MatrixXcd& Hd, cd z) {
  Eigen::MatrixXcd A =
      Hd - z * Eigen::MatrixXcd::Identity(Hd.rows(), Hd.cols());
  auto lu = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXcd>>(A);
  QOperator op;
  op.structure = OpStructure::general;
  op.dim = sp.dim;
  op.hermitian = false;
  op.apply = [lu, &sp](const QState& in, QState& out) {
    Eigen::VectorXcd y = lu->solve(Eigen::VectorXcd(flat(in)));
    out = unflat(sp, y);
  };
  op.apply_adj = [lu, &sp](const QState& in, QState& out) {
    Eigen::VectorXcd y = lu->adjoint().solve(Eigen::VectorXcd(flat(in)));
    out = unflat(sp, y);
  };
  return op;
}

QOperator iterative_resolvent(const Space& sp, const QOperator& H, cd z) {
  QOperator op;
  op.structure = OpStructure::general;
  op.dim = sp.dim;
  op.hermitian = false;
  op.apply = [&sp, H, z](const QState& in, QState& out) {
    out = resolvent_apply(sp, H, z, in);
  };
  op.apply_adj = [&sp, H, zc = std::conj(z)](const QState& in, QState& out) {
    out = resolvent_apply(sp, H, zc, in);
  };
  return op;
}

// Fixed dense geometry for the operator-norm and eigenvalue families of
// exp_dressing: one electron dimension, ten sites (window radius 5), three
// phonons, weak coupling so the smallness threshold 1/4 is attainable.
ModelConfig dense_subconfig(const ModelConfig& cfg) {
  ModelConfig sub = cfg;
  sub.dimension = 1;
  sub.torus_length = 6.283185307179586476925286766559;
  sub.sites_per_dim = 10;
  sub.nmax = 3;
  sub.coupling = 0.2;
  sub.K = 1.0;
  sub.lambda_list = {2.7, 3.5, 4.5};
  sub.mode_cutoff = 0.0;
  return sub;
}

}  // namespace

ExperimentReport exp_form_bound(const ModelConfig& cfg, int trials) {
  Space sp = build_space(cfg);
  ExperimentReport rep;
  rep.name = "form_bound";
  echo_config(sp, rep);

  const std::vector<double>& lams = cfg.lambda_list;
  double lam_max = lams.back();
  double qmax = headroom_qmax(sp, 2.0, lam_max);
  int occ_cap = std::max(0, cfg.nmax - 1);
  rep.config_echo.emplace_back("trials", std::to_string(trials));
  rep.config_echo.emplace_back("trial_qmax", format_double(qmax));
  rep.config_echo.emplace_back("trial_occ_cap", std::to_string(occ_cap));

  std::map<double, QOperator> phi;
  std::map<double, double> D;
  for (double lam : lams) {
    phi.emplace(lam, op_field_phi(sp, field_G(sp, lam)));
    D.emplace(lam, scalar_D(sp.grid, cfg, lam));
  }

  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < lams.size(); ++i)
    for (std::size_t j = i + 1; j < lams.size(); ++j)
      pairs.emplace_back(lams[i], lams[j]);

  if (!pairs.empty()) {
    for (int t = 0; t < trials; ++t) {
      SplitMix64 pick = stream_rng(cfg.seed, "form_bound_pair", t);
      const auto& pr = pairs[pick.next() % pairs.size()];
      QState Phi = bandlimited_state(
          sp, qmax, occ_cap, stream_rng(cfg.seed, "form_bound_phi", t).state);
      QState Psi = bandlimited_state(
          sp, qmax, occ_cap, stream_rng(cfg.seed, "form_bound_psi", t).state);
      QState d = phi.at(pr.first)(Psi) - phi.at(pr.second)(Psi);
      double measured = std::abs(flat(Phi).dot(flat(d)));
      double bound = std::sqrt(std::abs(D.at(pr.first) - D.at(pr.second))) *
                     std::sqrt(norm0_sq(sp, Phi)) * std::sqrt(norm0_sq(sp, Psi));
      std::string key = "pair=" + format_sweep_value(pr.first) + ":" +
                        format_sweep_value(pr.second) + ";tuple=" + trial_key(t);
      rep.records.push_back(make_record(key, measured, bound, 1e-10));
    }
  }

  {
    QState Psi = bandlimited_state(
        sp, qmax, occ_cap, stream_rng(cfg.seed, "form_bound_eq", 0).state);
    QState d = phi.at(lams[0])(Psi) - phi.at(lams[0])(Psi);
    std::string key = "pair=" + format_sweep_value(lams[0]) + ":" +
                      format_sweep_value(lams[0]) + ";tuple=eq";
    rep.records.push_back(make_record(key, flat(d).norm(), 0.0, 1e-12));
  }

  // Uniform lower-bound family: max(0, -lambda_min(eps H0 +- phi(G_lam)))
  // stays below one sweep-wide constant. The constant is assembled provably:
  // fit c0 at the smallest cutoff with the level reduced by the cutoff
  // difference cushion delta = sqrt(D_{lam_0}), publish C = c0 + delta.
  const double eps = 0.5;
  double delta = std::sqrt(D.at(lams[0]));
  if (delta >= eps) {
    rep.notes.push_back(
        "uniform lower-bound family skipped: cushion sqrt(D(" +
        format_sweep_value(lams[0]) + ")) = " + format_double(delta) +
        " >= eps = " + format_double(eps) +
        "; reduce the coupling to make the fitted constant provable");
  } else {
    QOperator H0op = op_h0(sp);
    auto min_eig = [&](double level, double lam, double sign,
                       std::uint64_t idx) {
      QOperator A = op_sum(op_scale(cd(level, 0.0), H0op),
                           op_scale(cd(sign, 0.0), phi.at(lam)));
      GroundState gs =
          ground_state(sp, A, stream_rng(cfg.seed, "form_bound_cor", idx).state,
                       1e-9, 600);
      return std::max(0.0, -gs.energy);
    };
    double c0 = std::max(min_eig(eps - delta, lams[0], +1.0, 0),
                         min_eig(eps - delta, lams[0], -1.0, 1));
    double C = c0 + delta;
    std::uint64_t idx = 2;
    for (double lam : lams) {
      for (double sign : {+1.0, -1.0}) {
        double cm = min_eig(eps, lam, sign, idx++);
        std::string key = "cor=half;lam=" + format_sweep_value(lam) +
                          ";sign=" + (sign > 0 ? "p" : "m");
        rep.records.push_back(make_record(key, cm, C, 1e-7));
      }
    }
    rep.notes.push_back("uniform family at eps = 1/2: fitted C = c0 + delta = " +
                        format_double(c0) + " + " + format_double(delta) +
                        " = " + format_double(C) +
                        " (c0 fitted at the smallest cutoff, reduced level)");
  }

  rep.notes.push_back(
      "pair family: |<Phi, (phi(G_1)-phi(G_2)) Psi>| <= "
      "|D_1-D_2|^{1/2} ||Phi||_0 ||Psi||_0 on wrap-free band-limited trials");
  finalize_report(rep);
  return rep;
}

ExperimentReport exp_commutator(const ModelConfig& cfg, int trials) {
  Space sp = build_space(cfg);
  if (cfg.lambda_list.size() < 2)
    throw ConfigError("commutator experiment needs at least two cutoffs");
  ExperimentReport rep;
  rep.name = "commutator";
  echo_config(sp, rep);

  const std::vector<double>& lams = cfg.lambda_list;
  double qmax = headroom_qmax(sp, 2.0, lams.back());
  rep.config_echo.emplace_back("trials", std::to_string(trials));
  rep.config_echo.emplace_back("trial_qmax", format_double(qmax));

  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i + 1 < lams.size(); ++i)
    pairs.emplace_back(lams[i], lams[i + 1]);
  if (lams.size() > 2) pairs.emplace_back(lams.front(), lams.back());

  const int M = sp.grid.M;
  int pidx = 0;
  for (const auto& pr : pairs) {
    Eigen::VectorXcd diff =
        field_G(sp, pr.first).base - field_G(sp, pr.second).base;
    std::string pkey = "pair=" + format_sweep_value(pr.first) + ":" +
                       format_sweep_value(pr.second);

    QOperator rhs = gen_annihilate(sp, field_profile(sp, diff));
    std::array<Eigen::VectorXcd, 3> Aj;
    for (int j = 0; j < 3; ++j) Aj[j] = Eigen::VectorXcd::Zero(M);
    for (int j = 0; j < cfg.dimension; ++j)
      Aj[j] = ((sp.grid.kvecs.col(j).array() / sp.grid.k2.array()).cast<cd>() *
               diff.array())
                  .matrix();

    std::vector<QOperator> terms;
    for (int j = 0; j < cfg.dimension; ++j) {
      QOperator aA = gen_annihilate(sp, field_profile(sp, Aj[j]));
      QOperator pj = op_momentum(sp, j);
      terms.push_back(op_sum(op_product(pj, aA),
                             op_scale(cd(-1.0, 0.0), op_product(aA, pj))));
    }
    QOperator lhs = terms[0];
    for (std::size_t j = 1; j < terms.size(); ++j) lhs = op_sum(lhs, terms[j]);

    for (int t = 0; t < trials; ++t) {
      QState psi = bandlimited_state(
          sp, qmax, cfg.nmax,
          stream_rng(cfg.seed, "commutator_trial",
                     static_cast<std::uint64_t>(pidx) * 1000 + t)
              .state);
      double r = flat(QState(lhs(psi) - rhs(psi))).norm();
      rep.records.push_back(
          make_record(pkey + ";trial=" + trial_key(t), r, 0.0, 1e-10));
    }

    QOperator dp = dot_p_annihilate(sp, Aj);
    QOperator dp_alt = dot_p_annihilate_alt(sp, Aj);
    double worst = 0.0;
    for (int t = 0; t < 3; ++t) {
      QState psi = bandlimited_state(
          sp, qmax, cfg.nmax,
          stream_rng(cfg.seed, "commutator_assembly",
                     static_cast<std::uint64_t>(pidx) * 1000 + t)
              .state);
      worst = std::max(worst, flat(QState(dp(psi) - dp_alt(psi))).norm());
    }
    rep.records.push_back(make_record(pkey + ";assembly", worst, 0.0, 1e-10));
    ++pidx;
  }

  rep.notes.push_back(
      "gradient profile A_j = (k_j/k^2)(G_1 - G_2); identity "
      "sum_j [p_j, a(A_j)] = a(G_1 - G_2) is lattice-exact on band-limited "
      "trials");
  finalize_report(rep);
  return rep;
}

ExperimentReport exp_resolvent_rate(const ModelConfig& cfg, cd z) {
  if (std::abs(z.imag()) < 1e-12)
    throw ConfigError("resolvent experiment needs Im z != 0");
  Space sp = build_space(cfg);
  if (cfg.lambda_list.size() < 2)
    throw ConfigError("resolvent experiment needs at least two cutoffs");
  ExperimentReport rep;
  rep.name = "resolvent_rate";
  echo_config(sp, rep);
  rep.config_echo.emplace_back(
      "z", format_double(z.real()) + "," + format_double(z.imag()));

  HamiltonianSet hs = build_hamiltonians(sp, cfg.K, cfg.lambda_list);
  std::vector<double> sweep(cfg.lambda_list.begin(),
                            cfg.lambda_list.end() - 1);
  double ref = cfg.lambda_list.back();
  bool dense = sp.dim <= 4096;
  rep.config_echo.emplace_back("resolvent_path", dense ? "dense" : "iterative");

  auto make_res = [&](const QOperator& H) {
    if (dense) return lu_resolvent(sp, materialize(sp, H), z);
    return iterative_resolvent(sp, H, z);
  };

  auto run_family = [&](const std::string& family,
                        const std::map<double, QOperator>& Hmap) {
    std::map<double, QOperator> R;
    for (const auto& kv : Hmap) R.emplace(kv.first, make_res(kv.second));
    std::vector<double> meas;
    std::uint64_t idx = 0;
    for (double lam : sweep) {
      QOperator A = op_sum(R.at(lam), op_scale(cd(-1.0, 0.0), R.at(ref)));
      OpNormResult nr = op_norm(
          sp, A, stream_rng(cfg.seed, "resolvent_" + family, idx++).state);
      meas.push_back(nr.value);
    }
    double D0 = hs.D.at(sweep[0]);
    double Cfit = D0 > 0.0 ? meas[0] / std::sqrt(D0) : 0.0;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      double bound = 2.0 * Cfit * std::sqrt(hs.D.at(sweep[i]));
      rep.records.push_back(make_record(
          "family=" + family + ";lam=" + format_sweep_value(sweep[i]), meas[i],
          bound, 1e-12));
    }
    for (std::size_t i = 0; i + 1 < sweep.size(); ++i) {
      rep.records.push_back(make_record(
          "family=" + family + ";mono=" + format_sweep_value(sweep[i]) + ":" +
              format_sweep_value(sweep[i + 1]),
          meas[i + 1], meas[i], 1e-12));
    }
    {
      QState psi = random_state(
          sp, stream_rng(cfg.seed, "resolvent_zero_" + family, 0).state);
      double r0 = flat(QState(R.at(ref)(psi) - R.at(ref)(psi))).norm();
      rep.records.push_back(
          make_record("family=" + family + ";lam=ref", r0, 0.0, 1e-15));
    }
    rep.notes.push_back("family " + family + ": rate constant fitted at lam = " +
                        format_sweep_value(sweep[0]) + ", C = " +
                        format_double(Cfit) +
                        " (fitted C, bound column carries 2x headroom)");
  };

  run_family("plain", hs.H);
  run_family("dressed", hs.Hdressed);

  QOperator Hhalf =
      op_h0_fun(sp, [](double h) { return 1.0 / std::sqrt(h + 1.0); });
  Eigen::VectorXcd Bref = build_B_field(sp, cfg.K, ref).B;
  std::uint64_t gidx = 0;
  for (double lam : sweep) {
    QOperator Ud =
        op_sum(hs.U.at(lam), op_scale(cd(-1.0, 0.0), hs.U.at(ref)));
    QOperator A = op_product(Ud, Hhalf);
    OpNormResult nr =
        op_norm(sp, A, stream_rng(cfg.seed, "resolvent_gross", gidx++).state);
    Eigen::VectorXcd Blam = build_B_field(sp, cfg.K, lam).B;
    double bound = 2.0 * (Bref - Blam).norm() +
                   std::abs(std::imag(Blam.dot(Bref)));
    rep.records.push_back(make_record(
        "family=gross;lam=" + format_sweep_value(lam), nr.value, bound, 1e-9));
  }
  rep.notes.push_back(
      "gross family: ||(U_lam - U_ref)(H0+1)^{-1/2}|| against the "
      "displacement-difference constant 2||B_lam - B_ref|| + |Im<B_lam, "
      "B_ref>| (not fitted)");

  finalize_report(rep);
  return rep;
}

ExperimentReport exp_dynamics(const ModelConfig& cfg,
                              const std::vector<double>& t_list, int trials) {
  Space sp = build_space(cfg);
  if (cfg.lambda_list.size() < 2)
    throw ConfigError("dynamics experiment needs at least two cutoffs");
  if (t_list.empty()) throw ConfigError("dynamics experiment needs time points");
  ExperimentReport rep;
  rep.name = "dynamics";
  echo_config(sp, rep);
  rep.config_echo.emplace_back("t_list", join_values(t_list));
  rep.config_echo.emplace_back("trials", std::to_string(trials));

  const std::vector<double>& lams = cfg.lambda_list;
  std::map<double, double> D;
  for (double lam : lams) D.emplace(lam, scalar_D(sp.grid, cfg, lam));

  bool dense = sp.dim <= 4096;
  rep.config_echo.emplace_back("propagator_path", dense ? "dense" : "krylov");
  std::map<double, std::unique_ptr<DensePropagator>> prop;
  std::map<double, QOperator> Hmap;
  for (double lam : lams) {
    QOperator H = h_lambda(sp, lam);
    if (dense)
      prop.emplace(lam, std::make_unique<DensePropagator>(materialize(sp, H)));
    Hmap.emplace(lam, std::move(H));
  }
  auto evolve = [&](double lam, double t, const QState& psi) {
    if (dense) return unflat(sp, prop.at(lam)->apply(t, flat(psi)));
    return propagate(sp, Hmap.at(lam), t, psi);
  };

  double qmax = headroom_qmax(sp, 2.0, lams.back());
  int occ_cap = std::max(0, cfg.nmax - 1);
  std::vector<QState> psis;
  std::vector<double> n0;
  for (int t = 0; t < trials; ++t) {
    psis.push_back(bandlimited_state(
        sp, qmax, occ_cap, stream_rng(cfg.seed, "dynamics_trial", t).state));
    n0.push_back(norm0_sq(sp, psis.back()));
  }

  struct Row {
    double l1, l2, t, dD, measured, denom;
    int trial;
  };
  std::vector<Row> rows;
  double coarse_dD = 0.0;
  std::pair<double, double> coarse{lams.front(), lams.back()};
  for (std::size_t i = 0; i < lams.size(); ++i)
    for (std::size_t j = i + 1; j < lams.size(); ++j) {
      double dD = std::abs(D.at(lams[i]) - D.at(lams[j]));
      if (dD > coarse_dD) {
        coarse_dD = dD;
        coarse = {lams[i], lams[j]};
      }
      for (double t : t_list)
        for (int tr = 0; tr < trials; ++tr) {
          QState u1 = evolve(lams[i], t, psis[tr]);
          QState u2 = evolve(lams[j], t, psis[tr]);
          double m = flat(QState(u1 - u2)).squaredNorm();
          rows.push_back({lams[i], lams[j], t, dD, m,
                          std::abs(t) * std::sqrt(dD) * n0[tr], tr});
        }
    }

  double Cfit = 0.0;
  for (const Row& r : rows)
    if (r.l1 == coarse.first && r.l2 == coarse.second && r.denom > 0.0)
      Cfit = std::max(Cfit, r.measured / r.denom);
  for (const Row& r : rows) {
    std::string key = "l1=" + format_sweep_value(r.l1) +
                      ";l2=" + format_sweep_value(r.l2) +
                      ";t=" + format_sweep_value(r.t) +
                      ";trial=" + trial_key(r.trial);
    rep.records.push_back(
        make_record(key, r.measured, 2.0 * Cfit * r.denom, 1e-12));
  }
  {
    QState u = evolve(lams.front(), 0.0, psis[0]);
    QState v = evolve(lams.back(), 0.0, psis[0]);
    double m = flat(QState((u - psis[0]) + (v - psis[0]))).norm();
    rep.records.push_back(make_record("t=0", m, 0.0, 1e-12));
  }
  double t1 = t_list.front(), t2 = t_list.back();
  for (double lam : lams) {
    QState a = evolve(lam, t1 + t2, psis[0]);
    QState b = evolve(lam, t1, evolve(lam, t2, psis[0]));
    rep.records.push_back(make_record(
        "grouplaw;lam=" + format_sweep_value(lam),
        flat(QState(a - b)).norm(), 0.0, 1e-8));
    rep.records.push_back(make_record(
        "unitarity;lam=" + format_sweep_value(lam),
        std::abs(flat(a).norm() - 1.0), 0.0, 1e-9));
  }
  rep.notes.push_back(
      "squared propagator difference against C |t| |D_1-D_2|^{1/2} "
      "||Psi||_0^2; C = " +
      format_double(Cfit) + " fitted at the coarsest pair (" +
      format_sweep_value(coarse.first) + "," + format_sweep_value(coarse.second) +
      ") (fitted C, bound column carries 2x headroom)");
  finalize_report(rep);
  return rep;
}

ExperimentReport exp_dressing(const ModelConfig& cfg) {
  ExperimentReport rep;
  rep.name = "dressing";

  // Family 1: dressing identity residual vs occupation truncation, on the
  // given geometry, coherent product trials.
  if (cfg.nmax < 2)
    throw ConfigError("dressing experiment needs nmax >= 2");
  int nmax_hi = cfg.nmax;
  int nmax_lo = std::max(1, nmax_hi / 2);
  const int ntrial = 2;
  std::map<int, std::map<double, DressingResidual>> res;
  bool echoed = false;
  for (int level : {nmax_lo, nmax_hi}) {
    ModelConfig c = cfg;
    c.nmax = level;
    Space sp = build_space(c);
    if (!echoed) {
      echo_config(sp, rep);
      rep.config_echo.emplace_back("nmax_levels", std::to_string(nmax_lo) +
                                                      "," +
                                                      std::to_string(nmax_hi));
      echoed = true;
    }
    QState gamma = gaussian_bump(sp, 1.0, 1.0);
    for (double lam : cfg.lambda_list) {
      DressingResidual worst;
      for (int t = 0; t < ntrial; ++t) {
        SplitMix64 rng = stream_rng(cfg.seed, "dressing_f", t);
        Eigen::VectorXcd f(sp.grid.M);
        for (int m = 0; m < sp.grid.M; ++m) f[m] = rng.cgaussian();
        f *= 0.35 / f.norm();
        QState psi = coherent_product_state(sp, gamma, f);
        DressingResidual r = dressing_identity_residual(sp, cfg.K, lam, psi);
        worst.total = std::max(worst.total, r.total);
        worst.number_part = std::max(worst.number_part, r.number_part);
        worst.field_part = std::max(worst.field_part, r.field_part);
        worst.kinetic_part = std::max(worst.kinetic_part, r.kinetic_part);
      }
      res[level][lam] = worst;
      if (level == nmax_hi) {
        rep.notes.push_back(
            "residual parts lam=" + format_sweep_value(lam) +
            " nmax=" + std::to_string(level) +
            ": total=" + format_double(worst.total) +
            " number=" + format_double(worst.number_part) +
            " field=" + format_double(worst.field_part) +
            " kinetic=" + format_double(worst.kinetic_part));
      }
    }
    if (level == nmax_hi) {
      QState gamma_hi = gamma;
      SplitMix64 rng = stream_rng(cfg.seed, "dressing_f", 0);
      Eigen::VectorXcd f(sp.grid.M);
      for (int m = 0; m < sp.grid.M; ++m) f[m] = rng.cgaussian();
      f *= 0.35 / f.norm();
      QState psi = coherent_product_state(sp, gamma_hi, f);
      DressingResidual r0 =
          dressing_identity_residual(sp, cfg.K, cfg.K, psi);
      rep.records.push_back(
          make_record("identity;K=lam", r0.total, 0.0, 1e-8));
    }
  }
  for (double lam : cfg.lambda_list) {
    rep.records.push_back(make_record(
        "halving;lam=" + format_sweep_value(lam), res[nmax_hi][lam].total,
        0.5 * res[nmax_lo][lam].total, 1e-15));
    rep.records.push_back(make_record(
        "residual;lam=" + format_sweep_value(lam) +
            ";nmax=" + std::to_string(nmax_hi),
        res[nmax_hi][lam].total, 0.0, 1e-3));
  }

  // Families 2 and 3 live on a fixed dense sub-geometry.
  ModelConfig sub = dense_subconfig(cfg);
  Space sd = build_space(sub);
  echo_config(sd, rep, "sub_");
  double ref = sub.lambda_list.back();

  QOperator H0op = op_h0(sd);
  QOperator Hinv = op_h0_fun(sd, [](double h) { return 1.0 / (h + 1.0); });

  std::vector<double> Ksweep = {1.5, 2.5, 3.5};
  std::vector<double> eps_meas;
  std::uint64_t kidx = 0;
  for (double K : Ksweep) {
    QOperator V = dressed_interaction(sd, K, ref);
    QOperator A = op_product(V, Hinv);
    OpNormResult nr =
        op_norm(sd, A, stream_rng(cfg.seed, "dressing_kato", kidx++).state);
    eps_meas.push_back(nr.value);
    BFields B = build_B_field(sd, K, ref);
    double kb = B.norm_kB;
    double v3 = v3_supremum(sub, K);
    double Cc = scalar_C(sd.grid, sub, K, ref);
    double bound = 4.0 * std::sqrt(2.0) * kb * kb + 2.0 * kb +
                   2.0 * std::sqrt(v3) + std::abs(Cc);
    rep.records.push_back(make_record("kato;K=" + format_sweep_value(K),
                                      nr.value, bound, 1e-9));
  }
  for (std::size_t i = 0; i + 1 < Ksweep.size(); ++i)
    rep.records.push_back(make_record(
        "kato;mono=" + format_sweep_value(Ksweep[i]) + ":" +
            format_sweep_value(Ksweep[i + 1]),
        eps_meas[i + 1], eps_meas[i], 1e-12));
  rep.records.push_back(make_record(
      "kato;threshold", *std::min_element(eps_meas.begin(), eps_meas.end()),
      0.25, 0.0));
  rep.notes.push_back(
      "kato family: ||V_{K,ref}(H0+1)^{-1}|| against the ingredient bound "
      "4 sqrt2 ||kB||^2 + 2||kB|| + 2 sqrt(v3_sup) + |C|; the threshold "
      "record asks for a point below 1/4");

  // Sandwich: (1/2) H0 - C <= H'_{K,lam} <= (3/2) H0 + C with one constant
  // across the sweep. b(lam) bounds the dressed difference to the reference
  // in the form sense, so fitting at the reference with the level shifted by
  // b* = max b and publishing C = c0 + b* is provable.
  double Ksand = 2.5;
  std::vector<double> dsweep(sub.lambda_list.begin(),
                             sub.lambda_list.end() - 1);
  auto bcushion = [&](double lam) {
    BFields Bl = build_B_field(sd, Ksand, lam);
    BFields Br = build_B_field(sd, Ksand, ref);
    double kba = 0.0;
    for (int j = 0; j < sub.dimension; ++j)
      kba += (Br.kB[j] - Bl.kB[j]).squaredNorm();
    kba = std::sqrt(kba);
    double Cann = scalar_C(sd.grid, sub, Ksand, ref) -
                  scalar_C(sd.grid, sub, Ksand, lam);
    return 4.0 * std::sqrt(2.0) * (Bl.norm_kB + Br.norm_kB) * kba + kba +
           2.0 * (std::sqrt(v3_supremum(sub, lam)) + 0.5 * kba) +
           std::abs(Cann);
  };
  std::vector<double> bvals;
  for (double lam : dsweep) bvals.push_back(bcushion(lam));
  double bstar = *std::max_element(bvals.begin(), bvals.end());

  auto sandwich_c = [&](double lam, double shift, std::uint64_t idx) {
    QOperator Hd = h_dressed(sd, Ksand, lam);
    QOperator lowerq = op_sum(
        Hd, op_scale(cd(-(0.5 + shift), 0.0), H0op));
    QOperator upperq = op_sum(op_scale(cd(1.5 - shift, 0.0), H0op),
                              op_scale(cd(-1.0, 0.0), Hd));
    GroundState glo = ground_state(
        sd, lowerq, stream_rng(cfg.seed, "dressing_sandwich", 2 * idx).state,
        1e-9, 600);
    GroundState ghi = ground_state(
        sd, upperq,
        stream_rng(cfg.seed, "dressing_sandwich", 2 * idx + 1).state, 1e-9,
        600);
    return std::max({0.0, -glo.energy, -ghi.energy});
  };
  double c0 = sandwich_c(ref, bstar, 0);
  double C36 = c0 + bstar;
  std::uint64_t sidx = 1;
  std::vector<double> all_lams = dsweep;
  all_lams.push_back(ref);
  for (double lam : all_lams) {
    double cm = sandwich_c(lam, 0.0, sidx++);
    rep.records.push_back(make_record(
        "sandwich;lam=" + format_sweep_value(lam), cm, C36, 1e-7));
  }
  for (std::size_t i = 0; i + 1 < bvals.size(); ++i)
    rep.records.push_back(make_record(
        "sandwich;bmono=" + format_sweep_value(dsweep[i]) + ":" +
            format_sweep_value(dsweep[i + 1]),
        bvals[i + 1], bvals[i], 1e-12));
  rep.notes.push_back("sandwich family at K = " + format_sweep_value(Ksand) +
                      ": C = c0 + b* = " + format_double(c0) + " + " +
                      format_double(bstar) + " = " + format_double(C36) +
                      " (c0 fitted at the reference with the level shifted "
                      "by b*)");

  finalize_report(rep);
  return rep;
}

namespace {

RegularityCurve curve_from_states(const Space& sp, const ModelConfig& cfg,
                                  const std::vector<double>& lambdas,
                                  const std::vector<QState>& dressed,
                                  double s) {
  RegularityCurve curve;
  curve.s = s;
  curve.lambdas = lambdas;
  QOperator ps = op_abs_p_pow(sp, s);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    curve.g_values.push_back(flat(QState(ps(dressed[i]))).norm());
    BFields B = build_B_field(sp, cfg.K, lambdas[i]);
    double sur = (B.B.array().abs2() *
                  sp.grid.kabs.array().pow(2.0 * s))
                     .sum();
    curve.surrogates.push_back(std::sqrt(sur));
  }
  std::size_t n = lambdas.size();
  std::size_t start = n >= 4 ? n / 2 : 0;
  std::vector<double> xs, ys;
  for (std::size_t i = start; i < n; ++i) {
    xs.push_back(std::log(lambdas[i]));
    ys.push_back(std::log(std::max(curve.g_values[i], 1e-300)));
  }
  curve.slope = fit_slope(xs, ys);
  curve.divergent = curve.slope > kSlopeDeadBand;
  return curve;
}

}  // namespace

RegularityCurve regularity_curve(const ModelConfig& cfg, double s) {
  Space sp = build_space(cfg);
  double sigma = cfg.dimension == 2 ? 2.0 : 1.0;
  QState gamma = gaussian_bump(sp, 2.0, sigma);
  std::vector<QState> dressed;
  for (double lam : cfg.lambda_list) {
    QOperator U = gross_transform(sp, cfg.K, lam);
    dressed.push_back(U.adjoint_apply(gamma));
  }
  return curve_from_states(sp, cfg, cfg.lambda_list, dressed, s);
}

ExperimentReport exp_regularity(const ModelConfig& cfg,
                                const std::vector<double>& s_list) {
  Space sp = build_space(cfg);
  ExperimentReport rep;
  rep.name = "regularity";
  echo_config(sp, rep);
  rep.config_echo.emplace_back("s_list", join_values(s_list));
  double sigma = cfg.dimension == 2 ? 2.0 : 1.0;
  rep.config_echo.emplace_back("bump_sigma", format_double(sigma));
  rep.config_echo.emplace_back("bump_qmax", format_double(2.0));

  QState gamma = gaussian_bump(sp, 2.0, sigma);
  std::vector<QState> dressed;
  for (double lam : cfg.lambda_list) {
    QOperator U = gross_transform(sp, cfg.K, lam);
    dressed.push_back(U.adjoint_apply(gamma));
  }

  for (double s : s_list) {
    RegularityVerdict crit = regularity_criterion(cfg, s);
    RegularityCurve curve =
        curve_from_states(sp, cfg, cfg.lambda_list, dressed, s);
    std::string sk = "s=" + format_sweep_value(s);
    for (std::size_t i = 0; i < curve.lambdas.size(); ++i) {
      rep.records.push_back(make_record(
          sk + ";lam=" + format_sweep_value(curve.lambdas[i]),
          curve.g_values[i], curve.surrogates[i], 1e300));
    }
    rep.records.push_back(
        make_record(sk + ";slope", curve.slope, kSlopeDeadBand, 1e300));
    bool match = curve.divergent == crit.divergent;
    rep.records.push_back(
        make_record(sk + ";match", match ? 0.0 : 1.0, 0.0, 0.5));
    rep.notes.push_back(
        sk + ": slope=" + format_double(curve.slope) + " classified " +
        (curve.divergent ? "divergent" : "bounded") + "; criterion " +
        (crit.divergent ? "divergent" : "bounded") +
        " (tail exponent=" + format_double(crit.tail_exponent) +
        ", grid sum=" + format_double(crit.grid_sum) + ")");
  }

  for (double s : s_list) {
    if (std::abs(s - 1.5) > 1e-9) continue;
    double ref = cfg.lambda_list.back();
    const QState& Psi = dressed.back();
    BFields B = build_B_field(sp, cfg.K, ref);
    double sm1 = s - 1.0;
    QOperator pm = op_multiplier(
        sp, [sm1](double q2, const Eigen::RowVectorXd&, int) {
          return std::pow(q2, 0.5 * sm1);
        });
    double mag2 = 0.0;
    for (int j = 0; j < cfg.dimension; ++j) {
      QOperator phij = op_field_phi(sp, field_profile(sp, B.kB[j]));
      mag2 += flat(QState(pm(phij(Psi)))).squaredNorm();
    }
    double eps = 1e-6;
    double sur2 = 0.0;
    for (int m = 0; m < sp.grid.M; ++m) {
      double reg = std::pow(sp.grid.kabs[m], sm1);
      reg /= 1.0 + eps * reg;
      sur2 += sp.grid.k2[m] * std::norm(B.B[m]) * reg * reg;
    }
    double gap = std::sqrt(mag2) - std::sqrt(sur2) * flat(Psi).norm();
    rep.notes.push_back(
        "open question, s=1.5: measured gap ||p|^{s-1} phi(kB) Psi|| - "
        "||kB |k|_eps^{s-1}|| ||Psi|| = " +
        format_double(gap) + " at eps=1e-06, lam=" + format_sweep_value(ref) +
        " (reported, not asserted)");
  }

  rep.notes.push_back(
      "classification: log-log slope over the top half of the sweep, dead "
      "band " +
      format_double(kSlopeDeadBand) +
      "; per-cutoff records are curve data (tolerance inert), the match "
      "records carry the dichotomy check");
  finalize_report(rep);
  return rep;
}

ExperimentReport exp_coherent_core(const ModelConfig& cfg) {
  ExperimentReport rep;
  rep.name = "coherent_core";

  double lamref = cfg.lambda_list.back();
  double K = cfg.K;
  std::map<int, double> resid, closed_err;
  bool echoed = false;

  for (int level : {cfg.nmax, 2 * cfg.nmax}) {
    ModelConfig c = cfg;
    c.nmax = level;
    Space sp = build_space(c);
    if (!echoed) {
      echo_config(sp, rep);
      rep.config_echo.emplace_back(
          "nmax_levels", std::to_string(cfg.nmax) + "," +
                             std::to_string(2 * cfg.nmax));
      echoed = true;
    }
    const int M = sp.grid.M;
    const int X = sp.X;
    const long long S = sp.S;

    SplitMix64 rng = stream_rng(cfg.seed, "coherent_core_f", 0);
    Eigen::VectorXcd f(M);
    for (int m = 0; m < M; ++m) f[m] = rng.cgaussian();
    f *= 0.5 / f.norm();

    QState gamma = gaussian_bump(sp, 1.0, 1.0);
    Eigen::RowVectorXcd gsite = gamma.row(0);
    double leak = 0.0;
    Eigen::VectorXcd coh = coherent_vector(sp.basis, f, &leak);
    QState psi0 = coh * gsite;

    QOperator U = gross_transform(sp, K, lamref);
    QState Psi = U.adjoint_apply(psi0);
    QOperator Hfull = undressed_h(sp, K, lamref);
    QState lhs = Hfull(Psi);

    BFields B = build_B_field(sp, K, lamref);
    Eigen::VectorXcd gK = field_G(sp, K).base;
    Eigen::VectorXcd gL = field_G(sp, lamref).base;

    Eigen::MatrixXcd phases(M, X);
    for (int m = 0; m < M; ++m)
      for (int x = 0; x < X; ++x) {
        double arg = 0.0;
        for (int j = 0; j < cfg.dimension; ++j)
          arg += sp.grid.kvecs(m, j) * sp.sites(x, j);
        phases(m, x) = std::exp(cd(0.0, -arg));
      }

    Eigen::MatrixXcd Bx =
        (phases.array().colwise() * B.B.array()).matrix();
    Eigen::MatrixXcd gx = Bx.colwise() + f;
    Eigen::RowVectorXd lam2 = gx.colwise().squaredNorm();
    Eigen::RowVectorXcd bf =
        (B.B.array() * f.array()).matrix().transpose() * phases.conjugate();
    Eigen::RowVectorXcd phi_x(X);
    for (int x = 0; x < X; ++x)
      phi_x[x] = gsite[x] * std::exp(cd(0.0, -bf[x].imag())) *
                 std::exp(-0.5 * lam2[x]);

    std::vector<double> isf(S);
    for (long long i = 0; i < S; ++i) {
      double acc = 0.0;
      const std::uint8_t* occ = sp.basis.state(i);
      for (int j = 0; j < M; ++j) acc += std::lgamma(occ[j] + 1.0);
      isf[i] = std::exp(-0.5 * acc);
    }
    Eigen::MatrixXcd eta(S, X);
    std::vector<cd> pows(static_cast<std::size_t>(M) * (level + 1));
    for (int x = 0; x < X; ++x) {
      for (int j = 0; j < M; ++j) {
        pows[j * (level + 1)] = 1.0;
        for (int n = 1; n <= level; ++n)
          pows[j * (level + 1) + n] = pows[j * (level + 1) + n - 1] * gx(j, x);
      }
      for (long long i = 0; i < S; ++i) {
        const std::uint8_t* occ = sp.basis.state(i);
        cd val = isf[i];
        for (int j = 0; j < M; ++j) val *= pows[j * (level + 1) + occ[j]];
        eta(i, x) = val;
      }
    }
    QState Psi_closed = (eta.array().rowwise() * phi_x.array()).matrix();
    closed_err[level] =
        flat(QState(Psi_closed - Psi)).norm() / flat(Psi).norm();

    auto p_row = [&](int axis, const Eigen::RowVectorXcd& r) {
      Eigen::RowVectorXcd hat = r * sp.Fx.transpose();
      hat = hat.cwiseProduct(sp.qvecs.col(axis).transpose().cast<cd>());
      return Eigen::RowVectorXcd(hat * sp.Fx.conjugate());
    };

    QState rhs = QState::Zero(S, X);
    Eigen::RowVectorXcd mlap = Eigen::RowVectorXcd::Zero(X);
    for (int j = 0; j < cfg.dimension; ++j) mlap += p_row(j, p_row(j, phi_x));
    rhs += (eta.array().rowwise() * mlap.array()).matrix();
    for (int j = 0; j < cfg.dimension; ++j) {
      Eigen::RowVectorXcd igrad = -p_row(j, phi_x);
      QOperator adagkB = gen_create(sp, field_profile(sp, B.kB[j]));
      QState tmp = adagkB(eta);
      rhs += 2.0 * (tmp.array().rowwise() * igrad.array()).matrix();
      rhs += adagkB(QState(adagkB(Psi_closed)));
    }
    rhs += op_create(sp.basis, f) * Psi_closed;
    rhs += gen_create(sp, field_profile(sp, gK))(Psi_closed);
    Eigen::RowVectorXcd sc(X);
    for (int x = 0; x < X; ++x) {
      cd acc = 0.0;
      for (int m = 0; m < M; ++m)
        acc += gL[m] * std::conj(phases(m, x)) * gx(m, x);
      sc[x] = acc;
    }
    rhs += (Psi_closed.array().rowwise() * sc.array()).matrix();

    resid[level] = flat(QState(lhs - rhs)).norm() / flat(lhs).norm();
    rep.records.push_back(make_record(
        "nmax=" + std::to_string(level) + ";closedform", closed_err[level],
        0.0, 1e-4));
    rep.notes.push_back("nmax=" + std::to_string(level) +
                        ": coherent truncation leakage " +
                        format_double(leak));

    if (level == cfg.nmax) {
      Eigen::VectorXcd lhs_prof =
          (Eigen::VectorXd::Ones(M) + sp.grid.k2).cast<cd>().cwiseProduct(B.B) +
          gL - gK;
      rep.records.push_back(make_record(
          "identity;profile", lhs_prof.lpNorm<Eigen::Infinity>(), 0.0, 1e-14));
      QOperator a1 =
          gen_create(sp, field_profile(sp, Eigen::VectorXcd(B.k2B + gL)));
      QOperator a2 =
          gen_create(sp, field_profile(sp, Eigen::VectorXcd(gK - B.B)));
      QState trial = bandlimited_state(
          sp, headroom_qmax(sp, 1.0, lamref), std::max(0, level - 1),
          stream_rng(cfg.seed, "coherent_core_trial", 0).state);
      rep.records.push_back(make_record(
          "identity;operator", flat(QState(a1(trial) - a2(trial))).norm(), 0.0,
          1e-12));
    }
  }

  rep.records.push_back(make_record("nmax=" + std::to_string(cfg.nmax) +
                                        ";residual",
                                    resid[cfg.nmax], 0.0, 1e-3));
  rep.records.push_back(make_record("nmax=" + std::to_string(2 * cfg.nmax) +
                                        ";residual",
                                    resid[2 * cfg.nmax], 0.0, 1e-3));
  rep.records.push_back(make_record("halving", resid[2 * cfg.nmax],
                                    0.5 * resid[cfg.nmax], 1e-15));
  rep.notes.push_back(
      "explicit action check: H applied to the dressed coherent vector vs "
      "the six-term closed form; the scalar term uses <G_ref,x, B_x + f> "
      "with the site phases");
  finalize_report(rep);
  return rep;
}

}  // namespace grosslab

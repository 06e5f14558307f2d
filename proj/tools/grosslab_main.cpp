#include <cctype>
#include <complex>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "grosslab/experiments.hpp"
#include "grosslab/fock.hpp"
#include "grosslab/model.hpp"
#include "grosslab/report.hpp"
#include "grosslab/version.hpp"

namespace {

using grosslab::ConfigError;

const std::vector<std::string> kKnownExperiments = {
    "form_bound", "commutator", "resolvent_rate", "dynamics",
    "dressing",   "regularity", "coherent_core"};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& tok, const std::string& flag) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    while (used < tok.size() &&
           std::isspace(static_cast<unsigned char>(tok[used])))
      ++used;
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(flag + ": malformed number '" + tok + "'");
  }
}

std::vector<double> parse_number_list(const std::string& text,
                                      const std::string& flag) {
  std::vector<double> out;
  for (const std::string& tok : split(text, ','))
    if (!tok.empty()) out.push_back(parse_number(tok, flag));
  if (out.empty())
    throw ConfigError(flag + ": expects a comma-separated list of numbers");
  return out;
}

std::complex<double> parse_z(const std::string& text) {
  std::vector<double> parts = parse_number_list(text, "--z");
  if (parts.size() != 2) throw ConfigError("--z: expects RE,IM");
  return {parts[0], parts[1]};
}

std::vector<std::string> resolve_selection(const std::string& text) {
  if (text == "all") return kKnownExperiments;
  std::vector<std::string> wanted;
  for (const std::string& tok : split(text, ','))
    if (!tok.empty()) wanted.push_back(tok);
  if (wanted.empty()) throw ConfigError("--exp: empty experiment selection");
  for (const std::string& name : wanted) {
    bool known = false;
    for (const std::string& k : kKnownExperiments) known = known || k == name;
    if (!known) throw ConfigError("--exp: unknown experiment '" + name + "'");
  }
  std::vector<std::string> out;
  for (const std::string& k : kKnownExperiments)
    for (const std::string& name : wanted)
      if (k == name) {
        out.push_back(k);
        break;
      }
  return out;
}

std::string join_values(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += grosslab::format_sweep_value(xs[i]);
  }
  return out;
}

void echo_model(const grosslab::ModelConfig& cfg, std::ostream& os) {
  grosslab::ModeGrid grid = grosslab::build_grid(cfg);
  long long X = 1;
  for (int j = 0; j < cfg.dimension; ++j) X *= cfg.sites_per_dim;
  long long S = grosslab::fock_dimension(grid.M, cfg.nmax);
  os << "dimension = " << cfg.dimension << "\n";
  os << "torus_length = " << grosslab::format_double(cfg.torus_length) << "\n";
  os << "sites_per_dim = " << cfg.sites_per_dim << "\n";
  os << "nmax = " << cfg.nmax << "\n";
  os << "form_factor = " << cfg.form_factor.describe() << "\n";
  os << "coupling = " << grosslab::format_double(cfg.coupling) << "\n";
  os << "K = " << grosslab::format_double(cfg.K) << "\n";
  os << "lambda_list = " << join_values(cfg.lambda_list) << "\n";
  os << "seed = " << cfg.seed << "\n";
  if (cfg.mode_cutoff > 0.0)
    os << "mode_cutoff = " << grosslab::format_double(cfg.mode_cutoff) << "\n";
  os << "lambda_grid = " << grosslab::format_sweep_value(grid.lambda_grid)
     << "\n";
  os << "modes = " << grid.M << "\n";
  os << "fock_dim = " << S << "\n";
  os << "dim = " << X * S << "\n";
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string iso_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm_utc;
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void write_manifest(const std::string& out_dir, const std::string& config_path,
                    const std::vector<std::string>& selection,
                    const std::vector<std::pair<std::string, bool>>& verdicts,
                    std::uint64_t seed) {
  std::string j = "{\n";
  j += "  \"tool\": \"grosslab\",\n";
  j += "  \"version\": \"" + std::string(grosslab::kVersion) + "\",\n";
  j += "  \"timestamp\": \"" + iso_timestamp() + "\",\n";
  j += "  \"config\": \"" + json_escape(config_path) + "\",\n";
  j += "  \"output_dir\": \"" + json_escape(out_dir) + "\",\n";
  j += "  \"seed\": " + std::to_string(seed) + ",\n";
  j += "  \"experiments\": [";
  for (std::size_t i = 0; i < selection.size(); ++i) {
    if (i) j += ", ";
    j += "\"" + selection[i] + "\"";
  }
  j += "],\n";
  j += "  \"verdicts\": {";
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    if (i) j += ", ";
    j += "\"" + verdicts[i].first + "\": ";
    j += verdicts[i].second ? "true" : "false";
  }
  j += "}\n";
  j += "}\n";
  grosslab::write_file(out_dir + "/run_manifest.json", j);
}

int run_experiments(const grosslab::ModelConfig& cfg,
                    const std::vector<std::string>& selection,
                    const std::string& out_dir,
                    const std::string& config_path, std::complex<double> z,
                    const std::vector<double>& t_list,
                    const std::vector<double>& s_list) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw ConfigError("cannot create output directory '" + out_dir +
                      "': " + ec.message());

  bool all_pass = true;
  std::vector<std::pair<std::string, bool>> verdicts;
  for (const std::string& name : selection) {
    grosslab::ExperimentReport rep;
    if (name == "form_bound") {
      rep = grosslab::exp_form_bound(cfg);
    } else if (name == "commutator") {
      rep = grosslab::exp_commutator(cfg);
    } else if (name == "resolvent_rate") {
      rep = grosslab::exp_resolvent_rate(cfg, z);
    } else if (name == "dynamics") {
      rep = grosslab::exp_dynamics(cfg, t_list);
    } else if (name == "dressing") {
      rep = grosslab::exp_dressing(cfg);
    } else if (name == "regularity") {
      rep = grosslab::exp_regularity(cfg, s_list);
    } else {
      rep = grosslab::exp_coherent_core(cfg);
    }
    grosslab::write_file(out_dir + "/" + name + ".json",
                         grosslab::report_to_json(rep));
    grosslab::write_file(out_dir + "/" + name + ".csv",
                         grosslab::report_to_csv(rep));
    std::cout << name << ": " << (rep.verdict ? "PASS" : "FAIL") << " ("
              << rep.records.size() << " records)" << std::endl;
    verdicts.emplace_back(name, rep.verdict);
    all_pass = all_pass && rep.verdict;
  }
  write_manifest(out_dir, config_path, selection, verdicts, cfg.seed);
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "grosslab: cutoff Hamiltonians, dressing transforms and convergence "
      "rates on a lattice-truncated Fock space"};
  app.set_version_flag("--version", grosslab::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string exp_list = "all";
  std::string out_dir = "out";
  std::string s_list_s = "1.0,1.25,1.5,1.75";
  std::string t_list_s = "0.5,1.0";
  std::string z_s = "0,1";
  std::uint64_t seed = 0;
  bool dry_run = false;

  CLI::App* vcmd =
      app.add_subcommand("validate", "Parse and validate a model config");
  vcmd->add_option("--config", config_path, "model config file")->required();

  CLI::App* rcmd =
      app.add_subcommand("run", "Run experiments and write reports");
  rcmd->add_option("--config", config_path, "model config file")->required();
  rcmd->add_option("--exp", exp_list, "comma-separated experiments or 'all'")
      ->capture_default_str();
  rcmd->add_option("--out", out_dir, "output directory for reports")
      ->capture_default_str();
  rcmd->add_option("--s-list", s_list_s, "regularity exponents")
      ->capture_default_str();
  rcmd->add_option("--t-list", t_list_s, "dynamics time points")
      ->capture_default_str();
  rcmd->add_option("--z", z_s, "resolvent point RE,IM")
      ->capture_default_str();
  rcmd->add_option("--seed", seed, "override the config seed");
  rcmd->add_flag("--dry-run", dry_run,
                 "build the model, print the predicted dimension, solve "
                 "nothing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    grosslab::ModelConfig cfg = grosslab::parse_config_file(config_path);
    grosslab::validate_config(cfg);
    if (vcmd->parsed()) {
      echo_model(cfg, std::cout);
      return 0;
    }
    if (rcmd->count("--seed")) cfg.seed = seed;
    std::vector<std::string> selection = resolve_selection(exp_list);
    std::complex<double> z = parse_z(z_s);
    std::vector<double> t_list = parse_number_list(t_list_s, "--t-list");
    std::vector<double> s_list = parse_number_list(s_list_s, "--s-list");
    if (dry_run) {
      echo_model(cfg, std::cout);
      std::cout << "dry-run: no solves executed" << std::endl;
      return 0;
    }
    return run_experiments(cfg, selection, out_dir, config_path, z, t_list,
                           s_list);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const char* kGoodConfig =
    "dimension = 1\n"
    "torus_length = 6.283185307179586\n"
    "sites_per_dim = 6\n"
    "nmax = 2\n"
    "form_factor = polaron\n"
    "coupling = 0.5\n"
    "K = 1.0\n"
    "lambda_list = 1.5, 2.0\n"
    "seed = 7\n";

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() /
          ("grosslab_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  fs::path write(const std::string& name, const std::string& text) const {
    fs::path p = dir / name;
    std::ofstream out(p);
    out << text;
    return p;
  }
};

int run_cli(const std::string& args, const fs::path& log) {
  std::string cmd = std::string(GROSSLAB_CLI_PATH) + " " + args + " > " +
                    log.string() + " 2>&1";
  int st = std::system(cmd.c_str());
  REQUIRE(st != -1);
  REQUIRE(WIFEXITED(st));
  return WEXITSTATUS(st);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("validate accepts a good config and echoes the model") {
  Scratch sc;
  fs::path cfg = sc.write("good.cfg", kGoodConfig);
  fs::path log = sc.dir / "log.txt";
  CHECK(run_cli("validate --config " + cfg.string(), log) == 0);
  std::string out = slurp(log);
  CHECK(out.find("fock_dim") != std::string::npos);
  CHECK(out.find("lambda_grid") != std::string::npos);
}

TEST_CASE("config errors exit with code two") {
  Scratch sc;
  fs::path log = sc.dir / "log.txt";
  fs::path bad = sc.write("bad.cfg", std::string(kGoodConfig) + "bogus = 1\n");
  CHECK(run_cli("validate --config " + bad.string(), log) == 2);
  CHECK(slurp(log).find("unknown config key") != std::string::npos);

  fs::path good = sc.write("good.cfg", kGoodConfig);
  CHECK(run_cli("run --config " + good.string() + " --exp nosuch --out " +
                 (sc.dir / "o").string(),
                 log) == 2);
  CHECK(slurp(log).find("unknown experiment") != std::string::npos);
}

TEST_CASE("unrepresentable cutoffs are rejected with the window message") {
  Scratch sc;
  std::string text = kGoodConfig;
  size_t pos = text.find("lambda_list = 1.5, 2.0");
  text.replace(pos, std::string("lambda_list = 1.5, 2.0").size(),
               "lambda_list = 1.5, 9.0");
  fs::path cfg = sc.write("big.cfg", text);
  fs::path log = sc.dir / "log.txt";
  CHECK(run_cli("validate --config " + cfg.string(), log) == 2);
  CHECK(slurp(log).find("cutoff not representable") != std::string::npos);
}

TEST_CASE("dry run echoes dimensions without solving") {
  Scratch sc;
  fs::path cfg = sc.write("good.cfg", kGoodConfig);
  fs::path log = sc.dir / "log.txt";
  CHECK(run_cli("run --config " + cfg.string() + " --dry-run --out " +
                 (sc.dir / "o").string(),
                 log) == 0);
  std::string out = slurp(log);
  CHECK(out.find("dry-run") != std::string::npos);
  CHECK(out.find("dim") != std::string::npos);
  CHECK(!fs::exists(sc.dir / "o" / "run_manifest.json"));
}

TEST_CASE("run writes reports and a manifest and is rerun stable") {
  Scratch sc;
  fs::path cfg = sc.write("good.cfg", kGoodConfig);
  fs::path log = sc.dir / "log.txt";
  fs::path out1 = sc.dir / "out1";
  fs::path out2 = sc.dir / "out2";
  std::string base = "run --config " + cfg.string() + " --exp commutator ";
  CHECK(run_cli(base + "--out " + out1.string(), log) == 0);
  CHECK(slurp(log).find("commutator: PASS") != std::string::npos);
  CHECK(fs::exists(out1 / "commutator.json"));
  CHECK(fs::exists(out1 / "commutator.csv"));
  CHECK(fs::exists(out1 / "run_manifest.json"));
  CHECK(run_cli(base + "--out " + out2.string(), log) == 0);
  CHECK(slurp(out1 / "commutator.json") == slurp(out2 / "commutator.json"));
  CHECK(slurp(out1 / "commutator.csv") == slurp(out2 / "commutator.csv"));
  std::string manifest = slurp(out1 / "run_manifest.json");
  CHECK(manifest.find("\"experiments\"") != std::string::npos);
  CHECK(manifest.find("commutator") != std::string::npos);
}

}  // TEST_SUITE

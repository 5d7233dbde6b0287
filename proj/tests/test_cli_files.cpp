// End-to-end checks of the command-line front end: spawn the real binary,
// then inspect exit codes, emitted CSV files, and the trailing manifest.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const std::string kCli = UAELAB_CLI_PATH;
const std::string kCorpus = std::string(UAELAB_CORPUS_DIR) + "/golden.txt";

int run_cli(const std::string& args, const std::string& log = "/dev/null") {
  const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + log + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("uaelab_cli_" + tag);
  fs::remove_all(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++rows;
  }
  return rows > 0 ? rows - 1 : 0;  // drop the column header
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("uae subcommand writes scores, rankings, and a manifest") {
  const fs::path dir = fresh_dir("uae");
  const int rc = run_cli("uae --corpus \"" + kCorpus + "\" --out \"" + dir.string() + "\"");
  CHECK(rc == 0);
  REQUIRE(fs::exists(dir / "uae.csv"));
  REQUIRE(fs::exists(dir / "ranking.csv"));
  REQUIRE(fs::exists(dir / "manifest.txt"));

  const std::string scores = read_file(dir / "uae.csv");
  CHECK(contains(scores, "# subcommand=uae"));
  CHECK(contains(scores, "form,module,phi"));
  CHECK(data_rows(scores) == 42);  // 6 forms x 7 modules

  const std::string ranking = read_file(dir / "ranking.csv");
  CHECK(contains(ranking, "# ranking_invariant=true"));

  const std::string manifest = read_file(dir / "manifest.txt");
  CHECK(contains(manifest, "subcommand=uae"));
  CHECK(contains(manifest, "files=uae.csv,ranking.csv"));

  // Reruns with identical arguments yield byte-identical tables.
  const fs::path dir2 = fresh_dir("uae_rerun");
  CHECK(run_cli("uae --corpus \"" + kCorpus + "\" --out \"" + dir2.string() + "\"") == 0);
  CHECK(read_file(dir2 / "uae.csv") == scores);
  CHECK(read_file(dir2 / "ranking.csv") == ranking);
}

TEST_CASE("bad form selections exit with a usage error and no manifest") {
  const fs::path dir = fresh_dir("uae_bad");
  CHECK(run_cli("uae --corpus \"" + kCorpus + "\" --forms \"\" --out \"" + dir.string() +
                "\"") == 1);
  CHECK_FALSE(fs::exists(dir / "manifest.txt"));
  CHECK(run_cli("uae --corpus \"" + kCorpus + "\" --forms phi9 --out \"" + dir.string() +
                "\"") == 1);
  CHECK_FALSE(fs::exists(dir / "manifest.txt"));
}

TEST_CASE("ablate honors the factor subset filter") {
  const fs::path dir = fresh_dir("ablate");
  CHECK(run_cli("ablate --corpus \"" + kCorpus + "\" --only alpha --out \"" + dir.string() +
                "\"") == 0);
  const std::string table = read_file(dir / "ablation.csv");
  CHECK(data_rows(table) == 7);  // default form phi3, one subset, seven modules
  std::istringstream in(table);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || contains(line, "form,module")) continue;
    CHECK(contains(line, ",alpha,"));
  }
  CHECK(run_cli("ablate --corpus \"" + kCorpus + "\" --only bogus --out \"" + dir.string() +
                "\"") == 1);

  const fs::path full = fresh_dir("ablate_full");
  CHECK(run_cli("ablate --corpus \"" + kCorpus + "\" --out \"" + full.string() + "\"") == 0);
  CHECK(data_rows(read_file(full / "ablation.csv")) == 49);  // seven subsets
}

TEST_CASE("verify subcommand runs its numeric suites") {
  const fs::path dir = fresh_dir("verify");
  const fs::path log = dir.string() + "_log.txt";
  CHECK(run_cli("verify --kind spectral --trials 5 --out \"" + dir.string() + "\"",
                log.string()) == 0);
  const std::string table = read_file(dir / "verify_spectral.csv");
  CHECK(data_rows(table) == 5);
  CHECK(contains(read_file(log), "spectral gain: 5/5 pass"));

  const fs::path bounds = fresh_dir("verify_bounds");
  CHECK(run_cli("verify --kind bounds --trials 3 --out \"" + bounds.string() + "\"") == 0);
  CHECK(fs::exists(bounds / "verify_bounds.csv"));

  const fs::path jac = fresh_dir("verify_jac");
  CHECK(run_cli("verify --kind jacobian --trials 2 --out \"" + jac.string() + "\"") == 0);
  CHECK(data_rows(read_file(jac / "verify_jacobian.csv")) == 15);  // 3 l values x 5 budgets

  const fs::path bad = fresh_dir("verify_bad");
  CHECK(run_cli("verify --kind spectral --trials 0 --out \"" + bad.string() + "\"") == 1);
  CHECK_FALSE(fs::exists(bad / "manifest.txt"));
  CHECK(run_cli("verify --kind bogus --out \"" + bad.string() + "\"") == 1);
}

TEST_CASE("train subcommand validates its inputs and writes loss curves") {
  const fs::path bad = fresh_dir("train_bad");
  CHECK(run_cli("train --blocks BOGUS --out \"" + bad.string() + "\"") == 1);
  CHECK(run_cli("train --blocks RB --epochs 0 --out \"" + bad.string() + "\"") == 1);
  CHECK(run_cli("train --blocks RB --lr -0.5 --epochs 2 --out \"" + bad.string() + "\"") == 1);
  CHECK_FALSE(fs::exists(bad / "manifest.txt"));

  const fs::path dir = fresh_dir("train_ok");
  CHECK(run_cli("train --blocks DCRB --epochs 2 --out \"" + dir.string() + "\"") == 0);
  const std::string loss = read_file(dir / "loss_DCRB.csv");
  CHECK(data_rows(loss) == 2);
  const std::string metrics = read_file(dir / "metrics.csv");
  CHECK(data_rows(metrics) == 1);
  CHECK(contains(metrics, "DCRB,"));
  CHECK(contains(read_file(dir / "manifest.txt"), "loss_DCRB.csv,metrics.csv"));
}

TEST_CASE("epsilon subcommand writes a summary and per-run heatmaps") {
  const fs::path bad = fresh_dir("eps_bad");
  CHECK(run_cli("epsilon --epochs 0 --out \"" + bad.string() + "\"") == 1);
  CHECK_FALSE(fs::exists(bad / "manifest.txt"));

  const fs::path dir = fresh_dir("eps_ok");
  CHECK(run_cli("epsilon --l 8 --epsilon 2 --trials 1 --epochs 2 --out \"" + dir.string() +
                "\"") == 0);
  const std::string summary = read_file(dir / "summary.csv");
  CHECK(data_rows(summary) == 1);
  CHECK(contains(summary, "8,2,1,"));  // l, epsilon, admissible
  const std::string heat = read_file(dir / "heatmap_l8_eps2_seed42.csv");
  CHECK(data_rows(heat) == 10);  // 2 epochs x 5 blocks
  CHECK(contains(read_file(dir / "manifest.txt"), "summary.csv,heatmap_l8_eps2_seed42.csv"));
}

TEST_CASE("sensitivity subcommand reports factor attributions") {
  const fs::path dir = fresh_dir("sens");
  const fs::path log = dir.string() + "_log.txt";
  CHECK(run_cli("sensitivity --corpus \"" + kCorpus + "\" --out \"" + dir.string() + "\"",
                log.string()) == 0);
  const std::string table = read_file(dir / "sensitivity_phi3.csv");
  CHECK(data_rows(table) == 7);
  CHECK(contains(table, "module,S_alpha,S_beta,S_theta,C_alpha,C_beta,C_theta"));
  const std::string printed = read_file(log);
  CHECK(contains(printed, "sum_C="));
  CHECK(contains(printed, " ok"));
  CHECK_FALSE(contains(printed, "MISMATCH"));
}

TEST_CASE("correlate subcommand emits the correlation matrix") {
  const fs::path dir = fresh_dir("corr");
  CHECK(run_cli("correlate --epochs 2 --out \"" + dir.string() + "\"") == 0);
  const std::string corr = read_file(dir / "correlation.csv");
  CHECK(data_rows(corr) == 20);  // 4 phi3 score variants x 5 metrics
  CHECK(contains(corr, "phi3,params,"));
  CHECK(contains(corr, "phi3_n_only,"));
  CHECK(data_rows(read_file(dir / "metrics.csv")) == 3);
  CHECK(run_cli("correlate --blocks CRBstar --epochs 2 --out \"" + dir.string() + "\"") == 1);
}

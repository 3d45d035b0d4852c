#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "fixtures.hpp"
#include "mpolicy/dynamics.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + MPOLICY_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string run_output(const std::string& args) {
  const auto out = fs::temp_directory_path() / "mpolicy_cli_stdout.txt";
  const std::string cmd = std::string("\"") + MPOLICY_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2>&1";
  if (std::system(cmd.c_str()) == -1) return "";
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("fit-dynamics writes a loadable model") {
  const auto dir = fixtures::temp_dir("cli_fit");
  const auto model = dir / "model.txt";
  REQUIRE(run("fit-dynamics --out " + q(model) + " --states-csv " + q(dir / "states.csv")) == 0);
  const auto m = mpolicy::load_model(model);
  CHECK_FALSE(m.with_intercept);
  CHECK(m.c.isZero(0.0));
  CHECK(fs::exists(dir / "model.txt.diagnostics.csv"));
  CHECK(fs::exists(dir / "states.csv"));

  REQUIRE(run("fit-dynamics --intercept on --out " + q(dir / "with_c.txt")) == 0);
  CHECK(mpolicy::load_model(dir / "with_c.txt").with_intercept);
  CHECK(run("fit-dynamics --intercept maybe --out " + q(dir / "x.txt")) == 1);
}

TEST_CASE("data errors exit with code 2") {
  const auto dir = fixtures::temp_dir("cli_missing");
  for (const char* f : {"CPIAUCSL.csv", "FEDFUNDS.csv", "GDPC1.csv", "GDPPOT.csv"}) {
    fs::copy_file(fs::path(MPOLICY_SAMPLE_DATA_DIR) / f, dir / f);
  }
  CHECK(run("fit-dynamics --data-dir " + q(dir) + " --out " + q(dir / "m.txt")) == 2);
  CHECK(run_output("fit-dynamics --data-dir " + q(dir) + " --out " + q(dir / "m.txt")).find("UNRATE") !=
        std::string::npos);
}

TEST_CASE("train and evaluate") {
  const auto dir = fixtures::temp_dir("cli_train");
  const auto model = dir / "model.txt";
  REQUIRE(run("fit-dynamics --out " + q(model)) == 0);

  CHECK(run("train --method q_learning_v2 --episodes 3 --model " + q(model) + " --out " + q(dir / "x.agent")) == 1);
  CHECK(run_output("train --method q_learning_v2 --episodes 3 --model " + q(model) + " --out " + q(dir / "x.agent"))
            .find("q_legacy") != std::string::npos);

  const std::string train = "train --method q_coarse --episodes 20 --seed 5 --model " + q(model);
  REQUIRE(run(train + " --out " + q(dir / "a.agent")) == 0);
  REQUIRE(run(train + " --out " + q(dir / "b.agent")) == 0);
  CHECK(slurp(dir / "a.agent") == slurp(dir / "b.agent"));
  CHECK(slurp(dir / "a.agent.log.csv") == slurp(dir / "b.agent.log.csv"));
  REQUIRE(run("train --method q_coarse --episodes 20 --seed 6 --model " + q(model) + " --out " + q(dir / "c.agent")) ==
          0);
  CHECK(slurp(dir / "a.agent") != slurp(dir / "c.agent"));

  const auto report = dir / "report";
  REQUIRE(run("evaluate --agent " + q(dir / "a.agent") + " --model " + q(model) + " --episodes 10 --out-dir " +
              q(report)) == 0);
  const auto summary = slurp(report / "summary.csv");
  for (const char* m : {"q_coarse", "taylor", "taylor_tuned", "hold"}) {
    CHECK(summary.find(std::string("\n") + m + ",") != std::string::npos);
  }
  CHECK(fs::exists(report / "pairwise.csv"));
  CHECK(slurp(report / "manifest.json").find("\"seed\"") != std::string::npos);

  const auto baselines = dir / "baselines";
  CHECK(run("evaluate --baselines hold,taylor --model " + q(model) + " --episodes 5 --out-dir " + q(baselines)) == 0);
  CHECK(fs::exists(baselines / "summary.csv"));

  CHECK(run("evaluate --agent " + q(dir / "missing.agent") + " --model " + q(model) + " --out-dir " + q(baselines)) ==
        2);
}

TEST_CASE("print-config and usage errors") {
  const auto text = run_output("compare --print-config --seed 42");
  CHECK(text.find("\"seed\": 42") != std::string::npos);
  CHECK(text.find("\"method_registry\"") != std::string::npos);

  const auto dir = fixtures::temp_dir("cli_config");
  std::ofstream(dir / "bad.json") << R"({"sede": 1})";
  CHECK(run("compare --config " + q(dir / "bad.json")) == 1);
  CHECK(run("no-such-command") == 1);
  CHECK(run("train --model x") == 1);
}

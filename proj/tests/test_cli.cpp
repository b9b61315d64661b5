#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "fedgala/io.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = 0;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fedgala_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

CliRun cli(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(FEDGALA_CLI_PATH) + " " + args + " > " +
                          (dir / "stdout.txt").string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = fedgala::read_text_file(err);
  return r;
}

const char* kSmallRun =
    "protocol.rounds = 2\nprotocol.local_epochs = 1\nprotocol.batch_size = 16\n"
    "domains.samples = 64\ndomains.features = 4\neval.epochs = 10\n";

}  // namespace

TEST(Cli, MissingConfigFails) {
  const fs::path d = scratch("missing");
  const CliRun r = cli("run --config " + (d / "missing.cfg").string() + " --out " + d.string(), d);
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("file not found"), std::string::npos);
}

TEST(Cli, MalformedConfigReportsLine) {
  const fs::path d = scratch("malformed");
  fedgala::write_text_file(d / "bad.cfg", "seed = 1\nprotocol.rounds = ten\n");
  const CliRun r = cli("run --config " + (d / "bad.cfg").string() + " --out " + d.string(), d);
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("line 2"), std::string::npos);
  EXPECT_NE(r.err.find("protocol.rounds"), std::string::npos);
}

TEST(Cli, UnknownKeyListsValidKeys) {
  const fs::path d = scratch("unknown");
  fedgala::write_text_file(d / "bad.cfg", "protocol.speed = 3\n");
  const CliRun r = cli("lodo --config " + (d / "bad.cfg").string() + " --out " + d.string(), d);
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("protocol.speed"), std::string::npos);
  EXPECT_NE(r.err.find("protocol.tau"), std::string::npos);
}

TEST(Cli, RunWritesOutputsByteIdentically) {
  const fs::path d = scratch("repeat");
  fedgala::write_text_file(d / "small.cfg", kSmallRun);
  for (const char* out : {"a", "b"})
    ASSERT_EQ(cli("run --config " + (d / "small.cfg").string() + " --seed 7 --jobs 2 --out " +
                      (d / out).string(),
                  d)
                  .code,
              0);
  for (const char* f : {"rounds.csv", "probe.csv", "resolved.cfg", "model.bin"}) {
    const std::string a = fedgala::read_text_file(d / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, fedgala::read_text_file(d / "b" / f)) << f;
    if (fs::path(f).extension() != ".bin") {
      EXPECT_EQ(a.find('\r'), std::string::npos) << f;
    }
  }
  const std::string rounds = fedgala::read_text_file(d / "a" / "rounds.csv");
  EXPECT_EQ(rounds.rfind("#schema=1\n", 0), 0u);
  EXPECT_NE(fedgala::read_text_file(d / "a" / "resolved.cfg").find("seed = 7\n"), std::string::npos);
}

TEST(Cli, TheoryWritesCsvsAndVerdicts) {
  const fs::path d = scratch("theory");
  fedgala::write_text_file(d / "t.cfg",
                           "theory.samples = 200\ntheory.seeds = 1, 2\ntheory.cov_grid = 0.2, 0.5, 0.8\n"
                           "theory.proposition_trials = 20\ntheory.claim_trials = 3\n"
                           "theory.lemma1_samples = 20000\ntheory.lemma2_draws = 20000\n");
  ASSERT_EQ(cli("theory --config " + (d / "t.cfg").string() + " --out " + (d / "o").string(), d).code, 0);
  for (const char* f : {"lemma1.csv", "lemma2.csv", "theorem1.csv", "theorem1_seeds.csv",
                        "proposition1.csv", "claim1.csv"})
    EXPECT_TRUE(fs::exists(d / "o" / "theory" / f)) << f;
  const auto v = nlohmann::json::parse(fedgala::read_text_file(d / "o" / "verdicts.json"));
  EXPECT_EQ(v.size(), 8u);
  for (const auto& [name, entry] : v.items()) {
    EXPECT_TRUE(entry["result"] == "pass" || entry["result"] == "fail") << name;
    EXPECT_TRUE(entry.contains("statistic"));
    EXPECT_TRUE(entry.contains("threshold"));
  }
  EXPECT_EQ(v["proposition1_constructed"]["result"], "pass");
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "polarfloor/metrics.hpp"
#include "polarfloor/polar_code.hpp"
#include "polarfloor/testset.hpp"

namespace fs = std::filesystem;
using namespace polarfloor;

namespace {

struct CliFixture {
  fs::path dir;
  CliFixture() {
    dir = fs::temp_directory_path() / "polarfloor_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~CliFixture() { fs::remove_all(dir); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(POLARSIM_BIN) + " " + args +
                            " > /dev/null 2> /dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  }

  std::string slurp(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  }

  std::string path(const std::string& name) const {
    return (dir / name).string();
  }
};

}  // namespace

TEST_CASE("construct writes a loadable spec") {
  CliFixture fx;
  REQUIRE(fx.run("construct --n 5 --rate 0.5 --out " + fx.path("c.json")) ==
          0);
  const PolarCodeSpec spec = load_code_spec(fx.path("c.json"));
  CHECK(spec.block_length == 32);
  CHECK(spec.k == 16);

  // full-rate spec selects everything
  REQUIRE(fx.run("construct --n 3 --k 8 --out " + fx.path("full.json")) == 0);
  const PolarCodeSpec full = load_code_spec(fx.path("full.json"));
  CHECK(full.k == 8);
  CHECK(full.info_set.size() == 8);
}

TEST_CASE("usage errors exit with code 1") {
  CliFixture fx;
  CHECK(fx.run("construct --n 5 --out " + fx.path("x.json")) == 1);
  CHECK(fx.run("simulate --code missing.json") == 1);
  CHECK(fx.run("nonsense") == 1);
  CHECK(fx.run("simulate --code missing.json --snr 1:1:2 --out " +
               fx.path("x.csv")) == 2);  // unreadable code file
  CHECK(fx.run("construct --n 5 --k 999 --out " + fx.path("x.json")) == 1);
}

TEST_CASE("simulate is deterministic across worker counts") {
  CliFixture fx;
  REQUIRE(fx.run("construct --n 6 --rate 0.5 --out " + fx.path("c.json")) ==
          0);
  const std::string base =
      "simulate --code " + fx.path("c.json") +
      " --snr 1:1:3 --llr-max 6 --min-errors 25 --max-frames 6000 --seed 99";
  REQUIRE(fx.run(base + " --workers 1 --out " + fx.path("w1.csv")) == 0);
  REQUIRE(fx.run(base + " --workers 4 --out " + fx.path("w4.csv")) == 0);
  CHECK(fx.slurp(fx.path("w1.csv")) == fx.slurp(fx.path("w4.csv")));
}

TEST_CASE("seed can come from the environment") {
  CliFixture fx;
  REQUIRE(fx.run("construct --n 5 --rate 0.5 --out " + fx.path("c.json")) ==
          0);
  const std::string tail = " --snr 2:1:2 --llr-max 8 --min-errors 10"
                           " --max-frames 3000 --code " +
                           fx.path("c.json");
  REQUIRE(fx.run("simulate --seed 1234" + tail + " --out " +
                 fx.path("flag.csv")) == 0);
  const std::string env_cmd = "POLARFLOOR_SEED=1234 " +
                              std::string(POLARSIM_BIN) + " simulate" + tail +
                              " --out " + fx.path("env.csv") +
                              " > /dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(env_cmd.c_str())) == 0);
  CHECK(fx.slurp(fx.path("flag.csv")) == fx.slurp(fx.path("env.csv")));
}

TEST_CASE("ne of a curve against itself is one") {
  CliFixture fx;
  REQUIRE(fx.run("construct --n 5 --rate 0.5 --out " + fx.path("c.json")) ==
          0);
  REQUIRE(fx.run("simulate --code " + fx.path("c.json") +
                 " --snr 1:1:2 --llr-max 6 --min-errors 20 --max-frames 4000"
                 " --seed 3 --out " +
                 fx.path("a.csv")) == 0);
  REQUIRE(fx.run("ne --curve " + fx.path("a.csv") + " --ref " +
                 fx.path("a.csv") + " --out " + fx.path("ne.csv")) == 0);
  const std::string ne = fx.slurp(fx.path("ne.csv"));
  CHECK(ne.find("NE,6,6,1\n") != std::string::npos);
}

TEST_CASE("collect, mitigate and their guards") {
  CliFixture fx;
  REQUIRE(fx.run("construct --n 6 --rate 0.5 --out " + fx.path("c.json")) ==
          0);
  // harsh fail clipping keeps the capture cheap at this small size
  const std::string collect_base =
      "collect --code " + fx.path("c.json") +
      " --snr 3 --llr-max-pass 100 --llr-max-fail 3 --count 8"
      " --max-frames 300000 --seed 5";
  REQUIRE(fx.run(collect_base + " --workers 2 --validate --out " +
                 fx.path("set.bin")) == 0);
  const TestSet set = load_test_set(fx.path("set.bin"));
  CHECK(set.records.size() == 8);

  SUBCASE("collection is deterministic across worker counts") {
    REQUIRE(fx.run(collect_base + " --workers 1 --out " + fx.path("s1.bin")) ==
            0);
    REQUIRE(fx.run(collect_base + " --workers 3 --out " + fx.path("s3.bin")) ==
            0);
    CHECK(fx.slurp(fx.path("s1.bin")) == fx.slurp(fx.path("s3.bin")));
  }

  SUBCASE("mitigate runs and is deterministic across worker counts") {
    const std::string mit_base = "mitigate --code " + fx.path("c.json") +
                                 " --set " + fx.path("set.bin") +
                                 " --strategy vnoise --sigma-v2 0.36 --seed 11";
    REQUIRE(fx.run(mit_base + " --workers 1 --out " + fx.path("m1.csv")) == 0);
    REQUIRE(fx.run(mit_base + " --workers 4 --out " + fx.path("m4.csv")) == 0);
    CHECK(fx.slurp(fx.path("m1.csv")) == fx.slurp(fx.path("m4.csv")));
  }

  SUBCASE("digest mismatch is exit 2") {
    REQUIRE(fx.run("construct --n 6 --k 30 --out " + fx.path("other.json")) ==
            0);
    CHECK(fx.run("mitigate --code " + fx.path("other.json") + " --set " +
                 fx.path("set.bin") + " --strategy none --out " +
                 fx.path("m.csv")) == 2);
  }

  SUBCASE("budget exhaustion is exit 3") {
    CHECK(fx.run("collect --code " + fx.path("c.json") +
                 " --snr 12 --llr-max-pass 100 --llr-max-fail 20 --count 5"
                 " --max-frames 2048 --seed 5 --out " +
                 fx.path("partial.bin")) == 3);
  }
}

TEST_CASE("frozen sweep emits per-m and combined files") {
  CliFixture fx;
  REQUIRE(fx.run("construct --n 6 --rate 0.5 --out " + fx.path("c.json")) ==
          0);
  REQUIRE(fx.run("frozen-sweep --code " + fx.path("c.json") +
                 " --m 0,4 --snr 1:1:2 --llr-max 100 --min-errors 15"
                 " --max-frames 4000 --seed 2 --workers 2 --out-prefix " +
                 fx.path("sweep")) == 0);
  CHECK(fs::exists(fx.path("sweep_m0.csv")));
  CHECK(fs::exists(fx.path("sweep_m4.csv")));
  const std::string combined = fx.slurp(fx.path("sweep_combined.csv"));
  CHECK(combined.find("ebn0_db,ber_m0,ber_m4") != std::string::npos);
  const SimReport m4 = read_sim_report_csv(fx.path("sweep_m4.csv"));
  CHECK(m4.meta.k == 28);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "polarfloor/polar_code.hpp"
#include "polarfloor/rng.hpp"
#include "test_util.hpp"

using namespace polarfloor;

TEST_CASE("z recursion matches hand evaluation at n=1, 0 dB") {
  const ReliabilityProfile p = bhattacharyya_profile(1, 0.0);
  REQUIRE(p.z.size() == 2);
  CHECK(p.z[0] == doctest::Approx(0.600423599106272).epsilon(1e-12));
  CHECK(p.z[1] == doctest::Approx(0.1353352832366127).epsilon(1e-12));

  const PolarCodeSpec spec = construct_bhattacharyya(1, 1, 0.0);
  REQUIRE(spec.info_set.size() == 1);
  CHECK(spec.info_set[0] == 1);
}

TEST_CASE("z recursion conserves pair sums and brackets the parent") {
  // independent level-by-level evaluation
  std::vector<double> z{std::exp(-1.0)};
  const int n = 8;
  for (int level = 0; level < n; ++level) {
    std::vector<double> next(z.size() * 2);
    for (size_t i = 0; i < z.size(); ++i) {
      const double zm = 2.0 * z[i] - z[i] * z[i];
      const double zp = z[i] * z[i];
      CHECK(zp <= z[i]);
      CHECK(z[i] <= zm);
      CHECK(zp + zm <= 2.0 * z[i] + 1e-15);
      CHECK(zp + zm == doctest::Approx(2.0 * z[i]).epsilon(1e-12));
      CHECK(zp >= 0.0);
      CHECK(zm <= 1.0);
      next[2 * i] = zm;
      next[2 * i + 1] = zp;
    }
    z.swap(next);
  }
  const ReliabilityProfile p = bhattacharyya_profile(n, 0.0);
  REQUIRE(size_t(p.z.size()) == z.size());
  for (size_t i = 0; i < z.size(); ++i) CHECK(p.z[Eigen::Index(i)] == z[i]);
}

TEST_CASE("k = N selects every channel") {
  const PolarCodeSpec spec = construct_bhattacharyya(3, 8, 0.0);
  REQUIRE(spec.k == 8);
  for (int i = 0; i < 8; ++i) CHECK(spec.info_set[size_t(i)] == i);
  CHECK(spec.rate() == 1.0);
}

TEST_CASE("reference configuration constructs at n=12") {
  const PolarCodeSpec spec = construct_bhattacharyya(12, 2048, 0.0);
  CHECK(spec.block_length == 4096);
  CHECK(spec.k == 2048);
  CHECK(spec.info_set.size() == 2048);
  // index N-1 is the best channel, index 0 the worst
  CHECK(std::binary_search(spec.info_set.begin(), spec.info_set.end(), 4095));
  CHECK(!std::binary_search(spec.info_set.begin(), spec.info_set.end(), 0));
}

TEST_CASE("equal reliabilities break toward the higher index") {
  ReliabilityProfile p;
  p.z = Eigen::ArrayXd(4);
  p.z << 0.5, 0.5, 0.1, 0.1;
  const std::vector<int> order = reliability_order(p);
  CHECK(order == std::vector<int>{3, 2, 1, 0});
}

TEST_CASE("growing k nests the information sets") {
  const ReliabilityProfile p = bhattacharyya_profile(6, 0.0);
  std::set<int> previous;
  for (int k = 1; k <= 64; ++k) {
    const PolarCodeSpec spec = construct_bhattacharyya(6, k, 0.0);
    REQUIRE(int(spec.info_set.size()) == k);
    std::set<int> current(spec.info_set.begin(), spec.info_set.end());
    for (int idx : previous) CHECK(current.count(idx) == 1);
    previous = std::move(current);
  }
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(construct_bhattacharyya(0, 1, 0.0), ParamError);
  CHECK_THROWS_AS(construct_bhattacharyya(21, 1, 0.0), ParamError);
  CHECK_THROWS_AS(construct_bhattacharyya(3, 0, 0.0), ParamError);
  CHECK_THROWS_AS(construct_bhattacharyya(3, 9, 0.0), ParamError);
}

TEST_CASE("kernel encode at N=2") {
  const PolarCodeSpec full = make_explicit(1, {0, 1});
  BitVec info(2);
  info << 0, 0;
  CHECK((encode(full, info) == BitVec::Zero(2)).all());
  info << 0, 1;
  BitVec x = encode(full, info);
  CHECK(x[0] == 1);
  CHECK(x[1] == 1);
  info << 1, 0;
  x = encode(full, info);
  CHECK(x[0] == 1);
  CHECK(x[1] == 0);
}

TEST_CASE("full transform is an involution") {
  RngStream rng(2024);
  for (int n = 1; n <= 10; ++n) {
    const int N = 1 << n;
    for (int rep = 0; rep < 50; ++rep) {
      BitVec v = testutil::random_bits(N, rng);
      BitVec twice = v;
      polar_transform(twice);
      polar_transform(twice);
      CHECK((twice == v).all());
    }
  }
}

TEST_CASE("encode places zeros on the frozen set") {
  const PolarCodeSpec spec = construct_bhattacharyya(4, 7, 0.0);
  RngStream rng(7);
  const BitVec info = testutil::random_bits(spec.k, rng);
  BitVec x = encode(spec, info);
  polar_transform(x);  // involution recovers u
  for (int i = 0; i < spec.block_length; ++i) {
    if (spec.is_frozen(i)) CHECK(x[i] == 0);
  }
  CHECK((extract_info(spec, x) == info).all());
  BitVec wrong(spec.k + 1);
  wrong.setZero();
  CHECK_THROWS_AS(encode(spec, wrong), ParamError);
}

TEST_CASE("extend_frozen removes m information positions") {
  const PolarCodeSpec parent = construct_bhattacharyya(5, 16, 0.0);
  SUBCASE("m = 0 returns the parent") {
    const PolarCodeSpec same = extend_frozen(parent, 0, 99);
    CHECK(same.digest == parent.digest);
    CHECK(same.info_set == parent.info_set);
  }
  SUBCASE("m > k is rejected") {
    CHECK_THROWS_AS(extend_frozen(parent, 17, 1), ParamError);
  }
  SUBCASE("deterministic and seed-sensitive") {
    const PolarCodeSpec a = extend_frozen(parent, 4, 42);
    const PolarCodeSpec b = extend_frozen(parent, 4, 42);
    const PolarCodeSpec c = extend_frozen(parent, 4, 43);
    CHECK(a.info_set == b.info_set);
    CHECK(a.digest == b.digest);
    CHECK(a.info_set != c.info_set);
    CHECK(a.k == 12);
    CHECK(a.extended.m == 4);
    CHECK(a.extended.parent_digest == parent.digest);
    // removed indices all came from the parent info set
    for (int idx : a.info_set)
      CHECK(std::binary_search(parent.info_set.begin(), parent.info_set.end(),
                               idx));
  }
  SUBCASE("rate drops by m/N") {
    const PolarCodeSpec a = extend_frozen(parent, 4, 1);
    CHECK(a.rate() == doctest::Approx(parent.rate() - 4.0 / 32.0));
  }
}

TEST_CASE("extended codebook is contained in the parent codebook") {
  const PolarCodeSpec parent = construct_bhattacharyya(4, 8, 0.0);
  const PolarCodeSpec child = extend_frozen(parent, 3, 5);
  const auto parent_book = testutil::enumerate_codebook(parent);
  const auto child_book = testutil::enumerate_codebook(child);
  REQUIRE(child_book.size() == 32);
  REQUIRE(parent_book.size() == 256);
  for (const BitVec& cw : child_book) {
    bool found = false;
    for (const BitVec& pw : parent_book) {
      if ((cw == pw).all()) {
        found = true;
        break;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("digest depends on the information set") {
  const PolarCodeSpec a = construct_bhattacharyya(5, 16, 0.0);
  const PolarCodeSpec b = extend_frozen(a, 1, 3);
  CHECK(a.digest != b.digest);
  CHECK(code_digest(a.block_length, a.k, a.info_set) == a.digest);
}

TEST_CASE("code spec files round-trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "polarfloor_spec_test";
  fs::create_directories(dir);
  const fs::path file = dir / "code.json";

  const PolarCodeSpec spec = construct_bhattacharyya(6, 32, 0.0);
  save_code_spec(file, spec);
  const PolarCodeSpec loaded = load_code_spec(file);
  CHECK(loaded.n == spec.n);
  CHECK(loaded.block_length == spec.block_length);
  CHECK(loaded.k == spec.k);
  CHECK(loaded.info_set == spec.info_set);
  CHECK(loaded.digest == spec.digest);
  CHECK(loaded.design_esn0_db == spec.design_esn0_db);

  const PolarCodeSpec ext = extend_frozen(spec, 3, 17);
  save_code_spec(file, ext);
  const PolarCodeSpec ext_loaded = load_code_spec(file);
  CHECK(ext_loaded.construction == Construction::extended);
  CHECK(ext_loaded.extended.parent_digest == spec.digest);
  CHECK(ext_loaded.extended.m == 3);
  CHECK(ext_loaded.extended.seed == 17);

  SUBCASE("tampered digest is rejected") {
    std::ifstream in(file);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    in.close();
    const auto pos = text.find("\"digest\": \"0x");
    REQUIRE(pos != std::string::npos);
    text[pos + 13] = text[pos + 13] == '0' ? '1' : '0';
    std::ofstream out(file);
    out << text;
    out.close();
    CHECK_THROWS_AS(load_code_spec(file), DataError);
  }
  fs::remove_all(dir);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "polarfloor/mitigation.hpp"
#include "test_util.hpp"

using namespace polarfloor;

namespace {

LlrFrame saturated_zero_frame(int N, double llr_max) {
  LlrFrame frame;
  frame.values = Eigen::ArrayXd::Constant(N, llr_max);
  frame.y = frame.values / 8.0;
  frame.sigma2 = 0.25;
  return frame;
}

// A failing frame: harsh clipping at low SNR almost always stalls BP.
LlrFrame failing_frame(const PolarCodeSpec& spec, const DecoderConfig& cfg,
                       std::uint64_t start_seed, BitVec* info_out = nullptr) {
  for (std::uint64_t s = start_seed; s < start_seed + 5000; ++s) {
    RngStream rng(s);
    BitVec info;
    LlrFrame frame = testutil::random_frame(spec, 0.5, rng, &info);
    const DecodeResult res = bp_decode(spec, frame, cfg);
    if (!res.converged) {
      if (info_out) *info_out = info;
      return frame;
    }
  }
  FAIL("no failing frame found");
  return {};
}

}  // namespace

TEST_CASE("oscillation ranking follows count, then magnitude, then index") {
  const PolarCodeSpec spec = make_explicit(2, {0, 1, 2});
  DecodeResult res;
  res.sign_flip_counts = Eigen::ArrayXi::Zero(4);
  res.decision_llr = Eigen::ArrayXd::Zero(4);
  res.sign_flip_counts << 5, 0, 9, 0;
  res.decision_llr << 1.0, 2.0, -0.5, 3.0;

  CHECK(detect_oscillating_bits(res, spec, 2) == std::vector<int>{2, 0});
  CHECK(detect_oscillating_bits(res, spec, 3) == std::vector<int>{2, 0, 1});

  SUBCASE("zero counts fall back to smallest magnitude") {
    res.sign_flip_counts.setZero();
    res.decision_llr << 4.0, -0.25, 1.0, 9.0;
    CHECK(detect_oscillating_bits(res, spec, 2) == std::vector<int>{1, 2});
  }
  SUBCASE("equal counts break by magnitude then index") {
    res.sign_flip_counts << 3, 3, 3, 0;
    res.decision_llr << 2.0, 2.0, 0.5, 0.0;
    CHECK(detect_oscillating_bits(res, spec, 3) == std::vector<int>{2, 0, 1});
  }
}

TEST_CASE("layer permutation sequence") {
  const auto perms = layer_permutations(3, 6);
  REQUIRE(perms.size() == 6);
  CHECK(perms[0] == std::vector<int>{0, 1, 2});  // identity first
  CHECK(perms[1] == std::vector<int>{1, 2, 0});  // rotations next
  CHECK(perms[2] == std::vector<int>{2, 0, 1});
  // remaining lexicographic permutations
  CHECK(perms[3] == std::vector<int>{0, 2, 1});
  CHECK(perms[4] == std::vector<int>{1, 0, 2});
  CHECK(perms[5] == std::vector<int>{2, 1, 0});
  // budget caps the sequence
  CHECK(layer_permutations(3, 2).size() == 2);
  CHECK(layer_permutations(4, 1) ==
        std::vector<std::vector<int>>{{0, 1, 2, 3}});
}

TEST_CASE("every graph realization decodes a noiseless frame identically") {
  const PolarCodeSpec spec = construct_bhattacharyya(3, 4, 0.0);
  DecoderConfig cfg;
  cfg.llr_max = 20.0;
  const LlrFrame frame = saturated_zero_frame(8, cfg.llr_max);
  const auto perms = layer_permutations(3, 6);
  REQUIRE(perms.size() == 6);  // all 3! orders
  for (const auto& perm : perms) {
    const DecodeResult res = bp_decode(spec, frame, cfg, {}, &perm);
    CHECK(res.converged);
    CHECK((res.u_hat == 0).all());
    CHECK((res.x_hat == 0).all());
  }
}

TEST_CASE("pinned beliefs dominate the decision") {
  const PolarCodeSpec spec = construct_bhattacharyya(4, 8, 0.0);
  DecoderConfig cfg;
  cfg.llr_max = 20.0;
  const int target = spec.info_set[3];

  SUBCASE("positive pin keeps a noiseless zero frame at zero") {
    const PinnedBit pins[] = {PinnedBit{target, +1}};
    const DecodeResult res =
        bp_decode(spec, saturated_zero_frame(16, cfg.llr_max), cfg, pins);
    CHECK(res.converged);
    CHECK(res.u_hat[target] == 0);
  }
  SUBCASE("negative pin wins when the channel is silent") {
    LlrFrame silent;
    silent.values = Eigen::ArrayXd::Zero(16);
    silent.y = Eigen::ArrayXd::Zero(16);
    silent.sigma2 = 1.0;
    DecoderConfig fixed = cfg;
    fixed.stopping = Stopping::fixed_iters;
    fixed.max_iters = 8;
    const PinnedBit pins[] = {PinnedBit{target, -1}};
    const DecodeResult res = bp_decode(spec, silent, fixed, pins);
    CHECK(res.u_hat[target] == 1);
  }
}

TEST_CASE("strategies are no-ops on frames the base decoder handles") {
  const PolarCodeSpec spec = construct_bhattacharyya(6, 32, 0.0);
  DecoderConfig cfg;
  cfg.llr_max = 20.0;
  RngStream frame_rng(42);
  const LlrFrame frame = testutil::random_frame(spec, 6.0, frame_rng);
  const DecodeResult base = bp_decode(spec, frame, cfg);
  REQUIRE(base.converged);

  MitigationStats stats;
  RngStream rng(1);
  const DecodeResult g =
      guess_decode(spec, frame, cfg, 3, GuessMode::exhaustive, nullptr, &stats);
  CHECK(stats.restarts == 0);
  CHECK((g.u_hat == base.u_hat).all());

  stats = {};
  const DecodeResult v =
      virtual_noise_decode(spec, frame, cfg, 0.36, 5, rng, &stats);
  CHECK(stats.restarts == 0);
  CHECK((v.u_hat == base.u_hat).all());

  stats = {};
  const DecodeResult s =
      scaled_boxplus_decode(spec, frame, cfg, 0.9375, &stats);
  CHECK(stats.restarts == 0);
  CHECK((s.u_hat == base.u_hat).all());

  stats = {};
  const DecodeResult m = multi_trellis_decode(spec, frame, cfg, 5, &stats);
  CHECK(stats.restarts == 0);
  CHECK((m.u_hat == base.u_hat).all());
}

TEST_CASE("multi-trellis with a budget of one is the base decoder") {
  const PolarCodeSpec spec = construct_bhattacharyya(6, 32, 0.0);
  DecoderConfig cfg;
  cfg.llr_max = 4.0;
  const LlrFrame frame = failing_frame(spec, cfg, 100);
  const DecodeResult base = bp_decode(spec, frame, cfg);
  const DecodeResult mt = multi_trellis_decode(spec, frame, cfg, 1);
  CHECK(base.converged == mt.converged);
  CHECK((base.u_hat == mt.u_hat).all());
  CHECK((base.x_hat == mt.x_hat).all());
  CHECK(base.iterations_used == mt.iterations_used);
}

TEST_CASE("zero virtual noise repeats the base failure exactly") {
  const PolarCodeSpec spec = construct_bhattacharyya(6, 32, 0.0);
  DecoderConfig cfg;
  cfg.llr_max = 4.0;
  const LlrFrame frame = failing_frame(spec, cfg, 500);
  const DecodeResult base = bp_decode(spec, frame, cfg);
  REQUIRE(!base.converged);
  RngStream rng(3);
  MitigationStats stats;
  const DecodeResult res =
      virtual_noise_decode(spec, frame, cfg, 0.0, 3, rng, &stats);
  CHECK(!res.converged);
  CHECK(stats.restarts == 3);
  CHECK((res.u_hat == base.u_hat).all());
}

TEST_CASE("identity scale cannot change the base decode") {
  const PolarCodeSpec spec = construct_bhattacharyya(6, 32, 0.0);
  DecoderConfig cfg;
  cfg.llr_max = 4.0;
  const LlrFrame frame = failing_frame(spec, cfg, 900);
  const DecodeResult base = bp_decode(spec, frame, cfg);
  REQUIRE(!base.converged);
  const DecodeResult res = scaled_boxplus_decode(spec, frame, cfg, 1.0);
  CHECK(!res.converged);
  CHECK((res.u_hat == base.u_hat).all());
}

TEST_CASE("any converged mitigation output is a valid codeword") {
  const PolarCodeSpec spec = construct_bhattacharyya(6, 32, 0.0);
  DecoderConfig cfg;
  cfg.llr_max = 5.0;
  RngStream seeds(7);
  int converged_seen = 0;
  for (std::uint64_t s = 0; s < 40; ++s) {
    RngStream rng(s);
    const LlrFrame frame = testutil::random_frame(spec, 1.5, rng);
    MitigationConfig mc;
    mc.base = cfg;
    mc.strategy = s % 2 ? Strategy::virtual_noise : Strategy::multi_trellis;
    RngStream mrng = RngStream::derive(77, s);
    const MitigatedResult res = mitigated_decode(spec, frame, mc, mrng);
    if (res.result.converged) {
      ++converged_seen;
      CHECK(check_codeword(res.result.u_hat, res.result.x_hat, spec));
    }
  }
  CHECK(converged_seen > 0);
}

TEST_CASE("success-rate bookkeeping on a real collected set") {
  const PolarCodeSpec spec = construct_bhattacharyya(6, 32, 0.0);
  CollectConfig cc;
  cc.ebn0_db = 3.0;
  cc.llr_max_pass = 100.0;
  cc.llr_max_fail = 3.0;
  cc.target_count = 20;
  cc.seed = 2024;
  cc.max_frames = 1000000;
  cc.workers = 2;
  const CollectResult out = collect_test_set(spec, cc);
  REQUIRE(out.complete);
  const TestSet& set = out.set;

  MitigationConfig base_only;
  base_only.strategy = Strategy::none;
  base_only.base = test_set_decoder_config(set.header, 3.0);

  SUBCASE("the fail configuration recovers nothing by construction") {
    const SuccessReport r = measure_success_rate(set, spec, base_only, 1, 2);
    CHECK(r.total == 20);
    CHECK(r.recovered == 0);
    CHECK(r.tau == 0.0);
  }
  SUBCASE("the pass configuration recovers everything by construction") {
    MitigationConfig pass = base_only;
    pass.base.llr_max = 100.0;
    const SuccessReport r = measure_success_rate(set, spec, pass, 1, 2);
    CHECK(r.recovered == 20);
    CHECK(r.tau == 1.0);
  }
  SUBCASE("strategies recover a nonzero fraction and stay deterministic") {
    MitigationConfig mt = base_only;
    mt.strategy = Strategy::multi_trellis;
    mt.max_permutations = 5;
    const SuccessReport a = measure_success_rate(set, spec, mt, 9, 1);
    const SuccessReport b = measure_success_rate(set, spec, mt, 9, 3);
    CHECK(a.recovered == b.recovered);
    CHECK(a.mean_extra_iters == b.mean_extra_iters);
    CHECK(a.mean_restarts == b.mean_restarts);

    MitigationConfig gz = base_only;
    gz.strategy = Strategy::guess;
    gz.guess_max_bits = 3;
    const SuccessReport g = measure_success_rate(set, spec, gz, 9, 2);
    MitigationConfig genie = gz;
    genie.guess_mode = GuessMode::genie;
    const SuccessReport gg = measure_success_rate(set, spec, genie, 9, 2);
    CHECK(gg.recovered >= g.recovered);  // genie never explores a wrong sign

    MitigationConfig g1 = gz;
    g1.guess_max_bits = 1;
    const SuccessReport r1 = measure_success_rate(set, spec, g1, 9, 2);
    CHECK(g.recovered >= r1.recovered);  // larger budgets extend the search
  }
  SUBCASE("digest mismatch is a hard error") {
    const PolarCodeSpec other = construct_bhattacharyya(6, 31, 0.0);
    CHECK_THROWS_AS(measure_success_rate(set, other, base_only, 1, 1),
                    DataError);
  }
}

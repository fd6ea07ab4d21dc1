#include "polarfloor/mitigation.hpp"

#include <algorithm>
#include <cmath>

#include "polarfloor/parallel.hpp"

namespace polarfloor {

namespace {

DecodeResult base_decode(const PolarCodeSpec& spec, const LlrFrame& frame,
                         const DecoderConfig& cfg) {
  return bp_decode(spec, frame, cfg);
}

void note_restart(MitigationStats* stats, const DecodeResult& res) {
  if (!stats) return;
  stats->restarts += 1;
  stats->extra_iterations += std::uint64_t(res.iterations_used);
}

}  // namespace

std::vector<int> detect_oscillating_bits(const DecodeResult& result,
                                         const PolarCodeSpec& spec,
                                         int top_m) {
  require(top_m >= 1, "top_m must be at least 1");
  require(int(result.sign_flip_counts.size()) == spec.block_length,
          "result does not match the code");

  std::vector<int> ranked = spec.info_set;
  std::sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    if (result.sign_flip_counts[a] != result.sign_flip_counts[b])
      return result.sign_flip_counts[a] > result.sign_flip_counts[b];
    const double ma = std::abs(result.decision_llr[a]);
    const double mb = std::abs(result.decision_llr[b]);
    if (ma != mb) return ma < mb;
    return a < b;
  });
  if (int(ranked.size()) > top_m) ranked.resize(size_t(top_m));
  return ranked;
}

std::vector<std::vector<int>> layer_permutations(int n, int count) {
  require(n >= 1, "n must be at least 1");
  require(count >= 1, "count must be at least 1");

  std::vector<std::vector<int>> perms;
  std::vector<int> identity(static_cast<size_t>(n));
  std::iota(identity.begin(), identity.end(), 0);
  perms.push_back(identity);

  for (int r = 1; r < n && int(perms.size()) < count; ++r) {
    std::vector<int> rot(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) rot[size_t(j)] = (j + r) % n;
    perms.push_back(std::move(rot));
  }

  auto is_rotation = [&](const std::vector<int>& p) {
    const int r = p[0];
    for (int j = 0; j < n; ++j) {
      if (p[size_t(j)] != (j + r) % n) return false;
    }
    return true;
  };

  std::vector<int> lex = identity;
  while (int(perms.size()) < count && std::next_permutation(lex.begin(), lex.end())) {
    if (is_rotation(lex)) continue;
    perms.push_back(lex);
  }
  return perms;
}

namespace {

DecodeResult guess_from_failure(const PolarCodeSpec& spec,
                                const LlrFrame& frame,
                                const DecoderConfig& cfg,
                                const DecodeResult& failed, int max_bits,
                                GuessMode mode, const BitVec* true_u,
                                MitigationStats* stats) {
  const std::vector<int> candidates =
      detect_oscillating_bits(failed, spec, max_bits);

  if (mode == GuessMode::genie) {
    require(true_u != nullptr, "genie mode needs the transmitted u");
    for (int bits = 1; bits <= int(candidates.size()); ++bits) {
      std::vector<PinnedBit> pins;
      pins.reserve(size_t(bits));
      for (int t = 0; t < bits; ++t) {
        const int idx = candidates[size_t(t)];
        pins.push_back({idx, (*true_u)[idx] ? -1 : +1});
      }
      DecodeResult res = bp_decode(spec, frame, cfg, pins);
      note_restart(stats, res);
      if (res.converged) return res;
    }
    return failed;
  }

  // exhaustive: grow the pinned set, signs depth-first with + tried first
  for (int bits = 1; bits <= int(candidates.size()); ++bits) {
    for (std::uint32_t mask = 0; mask < (1u << bits); ++mask) {
      std::vector<PinnedBit> pins;
      pins.reserve(size_t(bits));
      for (int t = 0; t < bits; ++t) {
        const int sign = (mask >> (bits - 1 - t)) & 1u ? -1 : +1;
        pins.push_back({candidates[size_t(t)], sign});
      }
      DecodeResult res = bp_decode(spec, frame, cfg, pins);
      note_restart(stats, res);
      if (res.converged) return res;
    }
  }
  return failed;
}

DecodeResult vnoise_from_failure(const PolarCodeSpec& spec,
                                 const LlrFrame& frame,
                                 const DecoderConfig& cfg, double sigma_v2,
                                 int attempts, RngStream& rng,
                                 const DecodeResult& failed,
                                 MitigationStats* stats) {
  require(sigma_v2 >= 0.0, "sigma_v2 must be nonnegative");
  require(attempts >= 1, "attempts must be at least 1");
  require(frame.sigma2 > 0.0, "frame must carry the channel sigma2");
  const double sigma_v = std::sqrt(sigma_v2);

  for (int a = 0; a < attempts; ++a) {
    Eigen::ArrayXd perturbed = frame.y;
    for (Eigen::Index i = 0; i < perturbed.size(); ++i)
      perturbed[i] += sigma_v * rng.gaussian();
    const LlrFrame retry = frame_from_y(std::move(perturbed), frame.sigma2);
    DecodeResult res = bp_decode(spec, retry, cfg);
    note_restart(stats, res);
    if (res.converged) return res;
  }
  return failed;
}

DecodeResult scaled_from_failure(const PolarCodeSpec& spec,
                                 const LlrFrame& frame,
                                 const DecoderConfig& cfg, double alpha,
                                 const DecodeResult& failed,
                                 MitigationStats* stats) {
  require(alpha > 0.0 && alpha <= 1.0, "alpha must be in (0, 1]");
  DecoderConfig scaled = cfg;
  scaled.alpha = alpha;
  DecodeResult res = bp_decode(spec, frame, scaled);
  note_restart(stats, res);
  if (res.converged) return res;
  return failed;
}

DecodeResult trellis_from_failure(const PolarCodeSpec& spec,
                                  const LlrFrame& frame,
                                  const DecoderConfig& cfg,
                                  int max_permutations, bool skip_identity,
                                  const DecodeResult& failed,
                                  MitigationStats* stats) {
  const int budget =
      max_permutations > 0 ? max_permutations : std::max(1, spec.n - 1);
  const auto perms =
      layer_permutations(spec.n, budget + (skip_identity ? 1 : 0));
  for (size_t p = skip_identity ? 1 : 0; p < perms.size(); ++p) {
    DecodeResult res = bp_decode(spec, frame, cfg, {}, &perms[p]);
    note_restart(stats, res);
    if (res.converged) return res;
  }
  return failed;
}

}  // namespace

DecodeResult guess_decode(const PolarCodeSpec& spec, const LlrFrame& frame,
                          const DecoderConfig& cfg, int max_bits,
                          GuessMode mode, const BitVec* true_u,
                          MitigationStats* stats) {
  require(max_bits >= 1 && max_bits <= 3, "guess bit budget must be 1..3");
  DecodeResult base = base_decode(spec, frame, cfg);
  if (stats) stats->base_converged = base.converged;
  if (base.converged) return base;
  return guess_from_failure(spec, frame, cfg, base, max_bits, mode, true_u,
                            stats);
}

DecodeResult virtual_noise_decode(const PolarCodeSpec& spec,
                                  const LlrFrame& frame,
                                  const DecoderConfig& cfg, double sigma_v2,
                                  int attempts, RngStream& rng,
                                  MitigationStats* stats) {
  DecodeResult base = base_decode(spec, frame, cfg);
  if (stats) stats->base_converged = base.converged;
  if (base.converged) return base;
  return vnoise_from_failure(spec, frame, cfg, sigma_v2, attempts, rng, base,
                             stats);
}

DecodeResult scaled_boxplus_decode(const PolarCodeSpec& spec,
                                   const LlrFrame& frame,
                                   const DecoderConfig& cfg, double alpha,
                                   MitigationStats* stats) {
  DecodeResult base = base_decode(spec, frame, cfg);
  if (stats) stats->base_converged = base.converged;
  if (base.converged) return base;
  return scaled_from_failure(spec, frame, cfg, alpha, base, stats);
}

DecodeResult multi_trellis_decode(const PolarCodeSpec& spec,
                                  const LlrFrame& frame,
                                  const DecoderConfig& cfg,
                                  int max_permutations,
                                  MitigationStats* stats) {
  require(max_permutations >= 1, "permutation budget must be at least 1");
  // permutation #1 is the identity graph, i.e. the base decoder
  DecodeResult base = base_decode(spec, frame, cfg);
  if (stats) stats->base_converged = base.converged;
  if (base.converged || max_permutations == 1) return base;
  return trellis_from_failure(spec, frame, cfg, max_permutations - 1,
                              /*skip_identity=*/true, base, stats);
}

MitigatedResult mitigated_decode(const PolarCodeSpec& spec,
                                 const LlrFrame& frame,
                                 const MitigationConfig& cfg, RngStream& rng,
                                 const BitVec* true_u) {
  cfg.validate();
  MitigatedResult out;
  DecodeResult base = base_decode(spec, frame, cfg.base);
  out.stats.base_converged = base.converged;
  if (base.converged || cfg.strategy == Strategy::none) {
    out.result = std::move(base);
    return out;
  }

  switch (cfg.strategy) {
    case Strategy::guess:
      out.result = guess_from_failure(spec, frame, cfg.base, base,
                                      cfg.guess_max_bits, cfg.guess_mode,
                                      true_u, &out.stats);
      break;
    case Strategy::virtual_noise:
      out.result =
          vnoise_from_failure(spec, frame, cfg.base, cfg.sigma_v2,
                              cfg.vnoise_attempts, rng, base, &out.stats);
      break;
    case Strategy::scaled_boxplus:
      out.result = scaled_from_failure(spec, frame, cfg.base,
                                       cfg.scaled_alpha, base, &out.stats);
      break;
    case Strategy::multi_trellis:
      out.result = trellis_from_failure(spec, frame, cfg.base,
                                        cfg.max_permutations > 0
                                            ? cfg.max_permutations
                                            : std::max(1, spec.n - 1),
                                        /*skip_identity=*/true, base,
                                        &out.stats);
      break;
    case Strategy::none:
      break;
  }
  return out;
}

std::string strategy_label(const MitigationConfig& cfg) {
  switch (cfg.strategy) {
    case Strategy::none:
      return "none";
    case Strategy::guess:
      return "guess" + std::to_string(cfg.guess_max_bits) +
             (cfg.guess_mode == GuessMode::genie ? "-genie" : "");
    case Strategy::virtual_noise:
      return "vnoise";
    case Strategy::scaled_boxplus:
      return "scaled";
    case Strategy::multi_trellis:
      return "multitrellis";
  }
  return "unknown";
}

SuccessReport measure_success_rate(const TestSet& set,
                                   const PolarCodeSpec& spec,
                                   const MitigationConfig& cfg,
                                   std::uint64_t seed, int workers) {
  cfg.validate();
  if (set.header.code_digest != spec.digest)
    throw DataError("test set was collected for a different code");

  struct Local {
    std::uint64_t recovered = 0;
    std::uint64_t recovered_at_base = 0;
    std::uint64_t restarts = 0;
    std::uint64_t extra_iters = 0;
  };
  std::vector<Local> locals(static_cast<size_t>(std::max(1, workers)));

  parallel_chunks(
      0, set.records.size(), workers,
      [&](int w, std::uint64_t b, std::uint64_t e) {
        Local& loc = locals[size_t(w)];
        for (std::uint64_t i = b; i < e; ++i) {
          const TestSetRecord& rec = set.records[size_t(i)];
          LlrFrame frame;
          frame.y = rec.y.cast<double>();
          frame.values = rec.llr.cast<double>();
          frame.sigma2 = double(set.header.sigma2);
          RngStream rng = RngStream::derive(seed, i, 0x6D697469ULL);
          const MitigatedResult res =
              mitigated_decode(spec, frame, cfg, rng, &rec.true_u);
          if ((res.result.u_hat == rec.true_u).all()) {
            ++loc.recovered;
            if (res.stats.base_converged) ++loc.recovered_at_base;
          }
          loc.restarts += std::uint64_t(res.stats.restarts);
          loc.extra_iters += res.stats.extra_iterations;
        }
      });

  SuccessReport report;
  report.strategy = strategy_label(cfg);
  report.total = set.records.size();
  for (const Local& l : locals) {
    report.recovered += l.recovered;
    report.recovered_at_base += l.recovered_at_base;
  }
  std::uint64_t restarts = 0, extra = 0;
  for (const Local& l : locals) {
    restarts += l.restarts;
    extra += l.extra_iters;
  }
  report.tau =
      report.total > 0 ? double(report.recovered) / double(report.total) : 0.0;
  if (report.total > 0) {
    std::tie(report.ci_low, report.ci_high) =
        confidence_interval(report.recovered, report.total);
    report.mean_extra_iters = double(extra) / double(report.total);
    report.mean_restarts = double(restarts) / double(report.total);
  }
  return report;
}

}  // namespace polarfloor

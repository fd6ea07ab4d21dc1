#include "polarfloor/metrics.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "polarfloor/config_tags.hpp"
#include "polarfloor/parallel.hpp"
#include "polarfloor/rng.hpp"

namespace polarfloor {

namespace {

// Frames per scheduling round. Fixed so that adaptive stopping sees the
// same frame counts for every worker count.
constexpr std::uint64_t kRoundFrames = 1024;

struct PointAccum {
  std::uint64_t frames = 0;
  std::uint64_t bit_errors = 0;
  std::uint64_t block_errors = 0;
  std::uint64_t iter_sum = 0;
  std::uint64_t converged = 0;

  void merge(const PointAccum& o) {
    frames += o.frames;
    bit_errors += o.bit_errors;
    block_errors += o.block_errors;
    iter_sum += o.iter_sum;
    converged += o.converged;
  }
};

// Per-worker scratch: decoder instance plus frame buffers, reused across
// frames.
template <typename Scalar>
struct FrameLab {
  const PolarCodeSpec* spec;
  ChannelConfig chan;
  bool all_zero;
  BpDecoder<Scalar> dec;
  BitVec info;
  LlrFrame frame;

  FrameLab(const PolarCodeSpec& s, const DecoderConfig& cfg,
           const ChannelConfig& ch, bool zero)
      : spec(&s), chan(ch), all_zero(zero), dec(s, cfg), info(s.k) {}

  void generate(std::uint64_t seed, std::uint64_t point_idx,
                std::uint64_t frame_idx) {
    RngStream rng = RngStream::derive(seed, point_idx, frame_idx);
    if (all_zero) {
      info.setZero();
      Eigen::ArrayXd symbols =
          Eigen::ArrayXd::Constant(spec->block_length, 1.0);
      frame = transmit(symbols, chan, rng);
    } else {
      for (int i = 0; i < spec->k; ++i) info[i] = std::uint8_t(rng.bit());
      const BitVec x = encode(*spec, info);
      frame = transmit(modulate(x), chan, rng);
    }
  }

  void run(std::uint64_t seed, std::uint64_t point_idx,
           std::uint64_t frame_idx, PointAccum& acc) {
    generate(seed, point_idx, frame_idx);
    const DecodeResult res = dec.decode(frame);
    std::uint64_t diffs = 0;
    for (int i = 0; i < spec->k; ++i) {
      diffs += res.u_hat[spec->info_set[size_t(i)]] != info[i];
    }
    acc.frames += 1;
    acc.bit_errors += diffs;
    acc.block_errors += diffs > 0;
    acc.iter_sum += std::uint64_t(res.iterations_used);
    acc.converged += res.converged;
  }
};

template <typename Scalar>
SimPoint run_point(const PolarCodeSpec& spec, const DecoderConfig& cfg,
                   double ebn0_db, const StopRule& stop, std::uint64_t seed,
                   std::uint64_t point_idx, const SimOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const ChannelConfig chan = ChannelConfig::from_ebn0(ebn0_db, spec.rate());
  const int workers = std::max(1, opts.workers);

  std::vector<FrameLab<Scalar>> labs;
  labs.reserve(size_t(workers));
  for (int w = 0; w < workers; ++w)
    labs.emplace_back(spec, cfg, chan, opts.all_zero);

  PointAccum total;
  std::uint64_t cursor = 0;
  while (true) {
    if (cursor >= stop.max_frames) break;
    const std::uint64_t batch =
        std::min<std::uint64_t>(kRoundFrames, stop.max_frames - cursor);
    std::vector<PointAccum> local(static_cast<size_t>(workers));
    parallel_chunks(cursor, cursor + batch, workers,
                    [&](int w, std::uint64_t b, std::uint64_t e) {
                      for (std::uint64_t i = b; i < e; ++i)
                        labs[size_t(w)].run(seed, point_idx, i, local[size_t(w)]);
                    });
    for (const PointAccum& l : local) total.merge(l);
    cursor += batch;
    if (total.block_errors >= stop.min_block_errors &&
        total.frames >= stop.min_frames)
      break;
  }

  SimPoint pt;
  pt.ebn0_db = ebn0_db;
  pt.frames = total.frames;
  pt.bit_errors = total.bit_errors;
  pt.block_errors = total.block_errors;
  const double bits = double(total.frames) * double(spec.k);
  pt.ber = bits > 0 ? double(total.bit_errors) / bits : 0.0;
  pt.bler = total.frames > 0
                ? double(total.block_errors) / double(total.frames)
                : 0.0;
  pt.mean_iters =
      total.frames > 0 ? double(total.iter_sum) / double(total.frames) : 0.0;
  std::tie(pt.ci_low, pt.ci_high) = confidence_interval(
      total.bit_errors, std::uint64_t(double(total.frames) * double(spec.k)));
  pt.converged_frames = total.converged;
  pt.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return pt;
}

}  // namespace

SimReport estimate_error_rates(const PolarCodeSpec& spec,
                               const DecoderConfig& cfg,
                               const std::vector<double>& ebn0_grid,
                               const StopRule& stop, std::uint64_t seed,
                               const SimOptions& opts) {
  cfg.validate();
  require(!ebn0_grid.empty(), "SNR grid must not be empty");
  for (size_t i = 0; i + 1 < ebn0_grid.size(); ++i) {
    require(ebn0_grid[i] < ebn0_grid[i + 1],
            "SNR grid must be strictly increasing");
  }
  require(stop.max_frames >= 1, "max_frames must be at least 1");

  SimReport report;
  report.meta.code_digest = spec.digest;
  report.meta.n = spec.n;
  report.meta.block_length = spec.block_length;
  report.meta.k = spec.k;
  report.meta.cfg = cfg;
  report.meta.seed = seed;
  report.meta.stop = stop;
  report.meta.all_zero = opts.all_zero;

  for (size_t p = 0; p < ebn0_grid.size(); ++p) {
    if (cfg.precision == Precision::f32) {
      report.points.push_back(run_point<float>(spec, cfg, ebn0_grid[p], stop,
                                               seed, std::uint64_t(p), opts));
    } else {
      report.points.push_back(run_point<double>(spec, cfg, ebn0_grid[p], stop,
                                                seed, std::uint64_t(p), opts));
    }
  }
  return report;
}

NeReport compute_ne(const SimReport& curve, const SimReport& ref) {
  if (curve.meta.code_digest != ref.meta.code_digest)
    throw DataError("NE: code digest mismatch between curve and reference");
  if (curve.points.size() != ref.points.size())
    throw DataError("NE: SNR grids differ in size");
  const DecoderConfig& a = curve.meta.cfg;
  const DecoderConfig& b = ref.meta.cfg;
  if (a.max_iters != b.max_iters || a.boxplus != b.boxplus ||
      a.alpha != b.alpha || a.stopping != b.stopping ||
      a.precision != b.precision || curve.meta.all_zero != ref.meta.all_zero)
    throw DataError("NE: decoder settings differ beyond llr_max");

  NeReport out;
  out.llr_max = a.llr_max;
  out.llr_max_ref = b.llr_max;
  double sum = 0.0;
  for (size_t i = 0; i < curve.points.size(); ++i) {
    const SimPoint& c = curve.points[i];
    const SimPoint& r = ref.points[i];
    if (std::abs(c.ebn0_db - r.ebn0_db) > 1e-9)
      throw DataError("NE: SNR grids differ");
    if (r.ber <= 0.0)
      throw DataError("NE: reference BER is zero (insufficient statistics)");
    NePoint pt;
    pt.ebn0_db = c.ebn0_db;
    pt.ber = c.ber;
    pt.ber_ref = r.ber;
    pt.ratio = c.ber / r.ber;
    sum += pt.ratio;
    out.points.push_back(pt);
  }
  out.ne = sum / double(out.points.size());
  return out;
}

namespace {

double log_binom_pmf(std::uint64_t n, std::uint64_t k, double p) {
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double lc = std::lgamma(double(n) + 1.0) -
                    std::lgamma(double(k) + 1.0) -
                    std::lgamma(double(n - k) + 1.0);
  return lc + double(k) * lp + double(n - k) * lq;
}

// P(X <= k) for X ~ Binomial(n, p); only used for small k.
double binom_cdf(std::uint64_t n, std::uint64_t k, double p) {
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return k >= n ? 1.0 : 0.0;
  double sum = 0.0;
  for (std::uint64_t j = 0; j <= k; ++j)
    sum += std::exp(log_binom_pmf(n, j, p));
  return std::min(sum, 1.0);
}

// Solves binom_cdf(n, k, p) = target for p; the CDF is decreasing in p.
double invert_cdf(std::uint64_t n, std::uint64_t k, double target) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (binom_cdf(n, k, mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::pair<double, double> confidence_interval(std::uint64_t errors,
                                              std::uint64_t trials) {
  require(trials >= 1, "trials must be at least 1");
  require(errors <= trials, "errors cannot exceed trials");
  const double n = double(trials);
  if (errors == 0) {
    return {0.0, 1.0 - std::pow(0.05, 1.0 / n)};
  }
  if (errors == trials) {
    return {std::pow(0.05, 1.0 / n), 1.0};
  }
  if (errors < 10) {
    // exact Clopper-Pearson tails at 95%
    const double low = invert_cdf(trials, errors - 1, 0.975);
    const double high = invert_cdf(trials, errors, 0.025);
    return {low, high};
  }
  const double p = double(errors) / n;
  const double half = 1.959963984540054 * std::sqrt(p * (1.0 - p) / n);
  return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

namespace {

struct CandidateRecord {
  std::uint64_t frame_id = 0;
  BitVec true_u;
  Eigen::ArrayXf y;
  Eigen::ArrayXf llr;
};

// Generates the frame for collection with y, sigma2 and the LLRs quantized
// to f32 so the stored record decodes identically on replay.
template <typename Scalar>
struct CollectLab {
  const PolarCodeSpec* spec;
  ChannelConfig chan;
  float sigma2_f;
  BpDecoder<Scalar> fail_dec;
  BpDecoder<Scalar> pass_dec;
  BitVec info;

  CollectLab(const PolarCodeSpec& s, const CollectConfig& cfg,
             const ChannelConfig& ch, const DecoderConfig& fail_cfg,
             const DecoderConfig& pass_cfg)
      : spec(&s),
        chan(ch),
        sigma2_f(float(ch.sigma2)),
        fail_dec(s, fail_cfg),
        pass_dec(s, pass_cfg),
        info(s.k) {}

  std::optional<CandidateRecord> run(std::uint64_t seed,
                                     std::uint64_t frame_idx) {
    RngStream rng = RngStream::derive(seed, 0, frame_idx);
    for (int i = 0; i < spec->k; ++i) info[i] = std::uint8_t(rng.bit());
    const BitVec x = encode(*spec, info);
    const BitVec u = expand_info(*spec, info);
    LlrFrame raw = transmit(modulate(x), chan, rng);

    const Eigen::Index N = raw.y.size();
    Eigen::ArrayXf y_f = raw.y.cast<float>();
    Eigen::ArrayXf llr_f(N);
    for (Eigen::Index i = 0; i < N; ++i)
      llr_f[i] = float(2.0 * double(y_f[i]) / double(sigma2_f));

    LlrFrame frame;
    frame.y = y_f.cast<double>();
    frame.values = llr_f.cast<double>();
    frame.sigma2 = double(sigma2_f);

    const DecodeResult fail = fail_dec.decode(frame);
    if (fail.converged || (fail.u_hat == u).all()) return std::nullopt;
    const DecodeResult pass = pass_dec.decode(frame);
    if (!pass.converged || !((pass.u_hat == u).all())) return std::nullopt;

    CandidateRecord rec;
    rec.frame_id = frame_idx;
    rec.true_u = u;
    rec.y = std::move(y_f);
    rec.llr = std::move(llr_f);
    return rec;
  }
};

template <typename Scalar>
CollectResult collect_impl(const PolarCodeSpec& spec,
                           const CollectConfig& cfg) {
  const ChannelConfig chan =
      ChannelConfig::from_ebn0(cfg.ebn0_db, spec.rate());
  DecoderConfig fail_cfg = cfg.base;
  fail_cfg.llr_max = cfg.llr_max_fail;
  DecoderConfig pass_cfg = cfg.base;
  pass_cfg.llr_max = cfg.llr_max_pass;
  const int workers = std::max(1, cfg.workers);

  std::vector<CollectLab<Scalar>> labs;
  labs.reserve(size_t(workers));
  for (int w = 0; w < workers; ++w)
    labs.emplace_back(spec, cfg, chan, fail_cfg, pass_cfg);

  CollectResult out;
  TestSet& set = out.set;
  set.header.block_length = std::uint64_t(spec.block_length);
  set.header.k = std::uint64_t(spec.k);
  set.header.code_digest = spec.digest;
  set.header.sigma2 = float(chan.sigma2);
  set.header.ebn0_db = float(cfg.ebn0_db);
  set.header.llr_max_pass = float(cfg.llr_max_pass);
  set.header.llr_max_fail = float(cfg.llr_max_fail);
  set.header.master_seed = cfg.seed;
  set.header.max_iters = std::uint64_t(cfg.base.max_iters);
  set.header.boxplus = tag_code(cfg.base.boxplus);
  set.header.stopping = tag_code(cfg.base.stopping);
  set.header.precision = tag_code(cfg.base.precision);
  set.header.alpha = float(cfg.base.alpha);

  std::uint64_t cursor = 0;
  std::uint64_t last_accept_end = 0;
  while (set.records.size() < cfg.target_count && cursor < cfg.max_frames) {
    const std::uint64_t batch =
        std::min<std::uint64_t>(kRoundFrames, cfg.max_frames - cursor);
    std::vector<std::optional<CandidateRecord>> slots(static_cast<size_t>(batch));
    parallel_chunks(cursor, cursor + batch, workers,
                    [&](int w, std::uint64_t b, std::uint64_t e) {
                      for (std::uint64_t i = b; i < e; ++i)
                        slots[size_t(i - cursor)] =
                            labs[size_t(w)].run(cfg.seed, i);
                    });
    for (std::uint64_t i = 0; i < batch; ++i) {
      if (set.records.size() >= cfg.target_count) break;
      if (!slots[size_t(i)]) continue;
      CandidateRecord& c = *slots[size_t(i)];
      TestSetRecord rec;
      rec.frame_id = c.frame_id;
      rec.true_u = std::move(c.true_u);
      rec.y = std::move(c.y);
      rec.llr = std::move(c.llr);
      set.records.push_back(std::move(rec));
      last_accept_end = c.frame_id + 1;
    }
    cursor += batch;
  }

  set.header.record_count = set.records.size();
  out.complete = set.records.size() >= cfg.target_count;
  out.frames_scanned = out.complete ? last_accept_end : cursor;
  out.acceptance_rate =
      out.frames_scanned > 0
          ? double(set.records.size()) / double(out.frames_scanned)
          : 0.0;
  return out;
}

}  // namespace

CollectResult collect_test_set(const PolarCodeSpec& spec,
                               const CollectConfig& cfg) {
  require(cfg.llr_max_pass > cfg.llr_max_fail,
          "llr_max_pass must exceed llr_max_fail");
  require(cfg.target_count >= 1, "target_count must be at least 1");
  cfg.base.validate();
  if (cfg.base.precision == Precision::f32)
    return collect_impl<float>(spec, cfg);
  return collect_impl<double>(spec, cfg);
}

namespace {

template <typename Scalar>
ValidationResult validate_impl(const TestSet& set, const PolarCodeSpec& spec,
                               int workers) {
  const DecoderConfig fail_cfg =
      test_set_decoder_config(set.header, double(set.header.llr_max_fail));
  const DecoderConfig pass_cfg =
      test_set_decoder_config(set.header, double(set.header.llr_max_pass));

  std::vector<std::uint64_t> bad(static_cast<size_t>(std::max(1, workers)), 0);
  parallel_chunks(
      0, set.records.size(), workers,
      [&](int w, std::uint64_t b, std::uint64_t e) {
        BpDecoder<Scalar> fail_dec(spec, fail_cfg);
        BpDecoder<Scalar> pass_dec(spec, pass_cfg);
        for (std::uint64_t i = b; i < e; ++i) {
          const TestSetRecord& rec = set.records[size_t(i)];
          LlrFrame frame;
          frame.y = rec.y.cast<double>();
          frame.values = rec.llr.cast<double>();
          frame.sigma2 = double(set.header.sigma2);
          const DecodeResult fail = fail_dec.decode(frame);
          const DecodeResult pass = pass_dec.decode(frame);
          const bool fail_ok =
              !fail.converged && !(fail.u_hat == rec.true_u).all();
          const bool pass_ok =
              pass.converged && (pass.u_hat == rec.true_u).all();
          if (!fail_ok || !pass_ok) ++bad[size_t(w)];
        }
      });

  ValidationResult res;
  res.checked = set.records.size();
  for (std::uint64_t b : bad) res.failures += b;
  return res;
}

}  // namespace

ValidationResult validate_test_set(const TestSet& set,
                                   const PolarCodeSpec& spec, int workers) {
  if (set.header.code_digest != spec.digest)
    throw DataError("test set was collected for a different code");
  if (precision_from_code(set.header.precision) == Precision::f32)
    return validate_impl<float>(set, spec, workers);
  return validate_impl<double>(set, spec, workers);
}

// --- report files ----------------------------------------------------------

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write: " + tmp.string());
    out << content;
    if (!out) throw DataError("write failure: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string digest_hex(std::uint64_t d) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "0x%016llx", (unsigned long long)d);
  return buf;
}

}  // namespace

void write_sim_report_csv(const std::filesystem::path& path,
                          const SimReport& report) {
  const SimMeta& m = report.meta;
  std::ostringstream out;
  out << "# polarfloor-sim-v1\n";
  out << "# digest=" << digest_hex(m.code_digest) << " n=" << m.n
      << " N=" << m.block_length << " k=" << m.k << "\n";
  out << "# llr_max=" << format_double(m.cfg.llr_max)
      << " max_iters=" << m.cfg.max_iters
      << " boxplus=" << to_string(m.cfg.boxplus)
      << " alpha=" << format_double(m.cfg.alpha)
      << " stopping=" << to_string(m.cfg.stopping)
      << " precision=" << to_string(m.cfg.precision) << "\n";
  out << "# seed=" << m.seed << " all_zero=" << (m.all_zero ? 1 : 0)
      << " min_frames=" << m.stop.min_frames
      << " min_block_errors=" << m.stop.min_block_errors
      << " max_frames=" << m.stop.max_frames << "\n";
  out << "ebn0_db,frames,bit_errors,block_errors,ber,bler,mean_iters,"
         "ci_low,ci_high\n";
  for (const SimPoint& p : report.points) {
    out << format_double(p.ebn0_db) << ',' << p.frames << ',' << p.bit_errors
        << ',' << p.block_errors << ',' << format_double(p.ber) << ','
        << format_double(p.bler) << ',' << format_double(p.mean_iters) << ','
        << format_double(p.ci_low) << ',' << format_double(p.ci_high) << "\n";
  }
  write_text_atomic(path, out.str());
}

namespace {

std::map<std::string, std::string> parse_meta_line(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::istringstream in(line.substr(1));
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq != std::string::npos)
      kv[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return kv;
}

}  // namespace

SimReport read_sim_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read report: " + path.string());

  SimReport report;
  std::map<std::string, std::string> kv;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      for (auto& [key, val] : parse_meta_line(line)) kv[key] = val;
      continue;
    }
    if (!saw_header) {
      saw_header = true;  // column header row
      continue;
    }
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 9)
      throw DataError("malformed report row in " + path.string());
    SimPoint p;
    p.ebn0_db = std::stod(fields[0]);
    p.frames = std::stoull(fields[1]);
    p.bit_errors = std::stoull(fields[2]);
    p.block_errors = std::stoull(fields[3]);
    p.ber = std::stod(fields[4]);
    p.bler = std::stod(fields[5]);
    p.mean_iters = std::stod(fields[6]);
    p.ci_low = std::stod(fields[7]);
    p.ci_high = std::stod(fields[8]);
    report.points.push_back(p);
  }

  try {
    SimMeta& m = report.meta;
    m.code_digest = std::stoull(kv.at("digest"), nullptr, 16);
    m.n = std::stoi(kv.at("n"));
    m.block_length = std::stoi(kv.at("N"));
    m.k = std::stoi(kv.at("k"));
    m.cfg.llr_max = std::stod(kv.at("llr_max"));
    m.cfg.max_iters = std::stoi(kv.at("max_iters"));
    m.cfg.boxplus = boxplus_from_string(kv.at("boxplus"));
    m.cfg.alpha = std::stod(kv.at("alpha"));
    m.cfg.stopping = stopping_from_string(kv.at("stopping"));
    m.cfg.precision = precision_from_string(kv.at("precision"));
    m.seed = std::stoull(kv.at("seed"));
    m.all_zero = kv.at("all_zero") == "1";
    m.stop.min_frames = std::stoull(kv.at("min_frames"));
    m.stop.min_block_errors = std::stoull(kv.at("min_block_errors"));
    m.stop.max_frames = std::stoull(kv.at("max_frames"));
  } catch (const std::out_of_range&) {
    throw DataError("missing metadata in report " + path.string());
  } catch (const std::invalid_argument&) {
    throw DataError("malformed metadata in report " + path.string());
  }
  return report;
}

void write_ne_report_csv(const std::filesystem::path& path,
                         const NeReport& report, std::uint64_t code_digest) {
  std::ostringstream out;
  out << "# polarfloor-ne-v1\n";
  out << "# digest=" << digest_hex(code_digest)
      << " llr_max=" << format_double(report.llr_max)
      << " llr_max_ref=" << format_double(report.llr_max_ref) << "\n";
  out << "ebn0_db,ber,ber_ref,ratio\n";
  for (const NePoint& p : report.points) {
    out << format_double(p.ebn0_db) << ',' << format_double(p.ber) << ','
        << format_double(p.ber_ref) << ',' << format_double(p.ratio) << "\n";
  }
  out << "NE," << format_double(report.llr_max) << ','
      << format_double(report.llr_max_ref) << ',' << format_double(report.ne)
      << "\n";
  write_text_atomic(path, out.str());
}

}  // namespace polarfloor

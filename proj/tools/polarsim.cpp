// Command-line front end: code construction, Monte Carlo error-rate
// simulation, relative-floor (NE) evaluation, test-set capture and the
// mitigation / frozen-extension studies. All runs are seeded and give
// byte-identical output files for any worker count.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "polarfloor/channel.hpp"
#include "polarfloor/config_tags.hpp"
#include "polarfloor/metrics.hpp"
#include "polarfloor/mitigation.hpp"
#include "polarfloor/polar_code.hpp"
#include "polarfloor/testset.hpp"

namespace fs = std::filesystem;
using namespace polarfloor;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBudget = 3;

std::vector<double> parse_grid(const std::string& text) {
  // "start:step:stop" inclusive, or a single value
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ':')) parts.push_back(std::stod(tok));
  if (parts.size() == 1) return {parts[0]};
  if (parts.size() != 3) throw ParamError("grid must be start:step:stop");
  const double start = parts[0], step = parts[1], stop = parts[2];
  require(std::isfinite(start) && std::isfinite(step) && std::isfinite(stop),
          "grid values must be finite");
  require(step > 0.0, "grid step must be positive");
  require(stop >= start - 1e-12, "grid stop must not precede start");
  std::vector<double> grid;
  for (double v = start; v <= stop + 1e-9; v += step) grid.push_back(v);
  return grid;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  require(!out.empty(), "empty list");
  return out;
}

struct DecoderFlags {
  double llr_max = 20.0;
  int iters = 200;
  std::string boxplus = "min";
  double alpha = 1.0;
  std::string precision = "f32";
  std::string stopping = "gmatrix";

  void attach(CLI::App* cmd, double default_llr_max) {
    llr_max = default_llr_max;
    cmd->add_option("--llr-max", llr_max, "LLR clipping magnitude")
        ->capture_default_str();
    cmd->add_option("--iters", iters, "maximum BP iterations")
        ->capture_default_str();
    cmd->add_option("--boxplus", boxplus, "boxplus kernel: exact|min")
        ->check(CLI::IsMember({"exact", "min"}))
        ->capture_default_str();
    cmd->add_option("--alpha", alpha, "boxplus output scale in (0,1]")
        ->capture_default_str();
    cmd->add_option("--precision", precision, "message precision: f32|f64")
        ->check(CLI::IsMember({"f32", "f64"}))
        ->capture_default_str();
    cmd->add_option("--stopping", stopping, "stopping rule: gmatrix|fixed")
        ->check(CLI::IsMember({"gmatrix", "fixed"}))
        ->capture_default_str();
  }

  DecoderConfig to_config() const {
    DecoderConfig cfg;
    cfg.llr_max = llr_max;
    cfg.max_iters = iters;
    cfg.boxplus = boxplus_from_string(boxplus);
    cfg.alpha = alpha;
    cfg.precision = precision_from_string(precision);
    cfg.stopping = stopping_from_string(stopping);
    cfg.validate();
    return cfg;
  }
};

struct StopFlags {
  std::uint64_t min_frames = 1;
  std::uint64_t min_errors = 100;
  std::uint64_t max_frames = 1000000;

  void attach(CLI::App* cmd) {
    cmd->add_option("--min-frames", min_frames, "minimum frames per point")
        ->capture_default_str();
    cmd->add_option("--min-errors", min_errors,
                    "minimum block errors per point")
        ->capture_default_str();
    cmd->add_option("--max-frames", max_frames, "frame budget per point")
        ->capture_default_str();
  }

  StopRule to_rule() const { return {min_frames, min_errors, max_frames}; }
};

std::string digest_hex(std::uint64_t d) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "0x%016llx", (unsigned long long)d);
  return buf;
}

void print_point(const SimPoint& p) {
  std::fprintf(stderr,
               "  %5.2f dB  frames=%-9llu ber=%-12.4e bler=%-12.4e "
               "iters=%.2f (%.1fs)\n",
               p.ebn0_db, (unsigned long long)p.frames, p.ber, p.bler,
               p.mean_iters, p.wall_time_s);
}

// --- subcommands -----------------------------------------------------------

struct ConstructArgs {
  int n = 10;
  int k = 0;
  double rate = 0.0;
  double design_esn0 = 0.0;
  std::string out;
};

int run_construct(const ConstructArgs& a) {
  require(a.k > 0 || a.rate > 0.0, "one of --k / --rate is required");
  const int N = 1 << a.n;
  const int k = a.k > 0 ? a.k : int(std::lround(a.rate * N));
  const PolarCodeSpec spec = construct_bhattacharyya(a.n, k, a.design_esn0);
  save_code_spec(a.out, spec);

  const ReliabilityProfile profile =
      bhattacharyya_profile(a.n, a.design_esn0);
  double worst_info = 0.0, best_frozen = 1.0;
  for (int i = 0; i < N; ++i) {
    if (spec.is_frozen(i))
      best_frozen = std::min(best_frozen, profile.z[i]);
    else
      worst_info = std::max(worst_info, profile.z[i]);
  }
  std::fprintf(stderr,
               "N=%d k=%d rate=%.4f design Es/N0=%.2f dB digest=%s\n"
               "reliability: worst info-channel z=%.4e, best frozen z=%.4e\n",
               N, k, spec.rate(), a.design_esn0,
               digest_hex(spec.digest).c_str(), worst_info, best_frozen);
  std::fprintf(stderr, "wrote %s\n", a.out.c_str());
  return kExitOk;
}

struct SimulateArgs {
  std::string code, snr, out;
  DecoderFlags dec;
  StopFlags stop;
  std::uint64_t seed = 1;
  int workers = 1;
  bool all_zero = false;
};

int run_simulate(const SimulateArgs& a) {
  const PolarCodeSpec spec = load_code_spec(a.code);
  const std::vector<double> grid = parse_grid(a.snr);
  require(a.workers >= 1, "workers must be at least 1");
  SimOptions opts;
  opts.workers = a.workers;
  opts.all_zero = a.all_zero;
  const SimReport report = estimate_error_rates(
      spec, a.dec.to_config(), grid, a.stop.to_rule(), a.seed, opts);
  for (const SimPoint& p : report.points) print_point(p);
  write_sim_report_csv(a.out, report);
  std::fprintf(stderr, "wrote %s\n", a.out.c_str());
  return kExitOk;
}

struct NeArgs {
  std::string curve, ref, out;
};

int run_ne(const NeArgs& a) {
  const SimReport curve = read_sim_report_csv(a.curve);
  const SimReport ref = read_sim_report_csv(a.ref);
  const NeReport ne = compute_ne(curve, ref);
  write_ne_report_csv(a.out, ne, curve.meta.code_digest);
  std::fprintf(stderr, "NE(llr_max=%g vs ref %g) = %.6g over %zu points\n",
               ne.llr_max, ne.llr_max_ref, ne.ne, ne.points.size());
  std::fprintf(stderr, "wrote %s\n", a.out.c_str());
  return kExitOk;
}

struct CollectArgs {
  std::string code, out;
  double snr = 5.0;
  double pass = 100.0, fail = 20.0;
  std::uint64_t count = 200;
  std::uint64_t seed = 1;
  std::uint64_t max_frames = 10000000;
  int workers = 1;
  bool validate = false;
  DecoderFlags dec;
};

int run_collect(const CollectArgs& a) {
  const PolarCodeSpec spec = load_code_spec(a.code);
  CollectConfig cc;
  cc.ebn0_db = a.snr;
  cc.llr_max_pass = a.pass;
  cc.llr_max_fail = a.fail;
  cc.target_count = a.count;
  cc.seed = a.seed;
  cc.max_frames = a.max_frames;
  cc.workers = a.workers;
  cc.base = a.dec.to_config();

  const CollectResult out = collect_test_set(spec, cc);
  save_test_set(a.out, out.set);
  std::fprintf(stderr,
               "collected %llu/%llu records (scanned %llu frames, "
               "acceptance %.3e)\n",
               (unsigned long long)out.set.records.size(),
               (unsigned long long)a.count,
               (unsigned long long)out.frames_scanned, out.acceptance_rate);
  std::fprintf(stderr, "wrote %s\n", a.out.c_str());

  if (a.validate) {
    const ValidationResult val = validate_test_set(out.set, spec, a.workers);
    std::fprintf(stderr, "replay validation: %llu checked, %llu failures\n",
                 (unsigned long long)val.checked,
                 (unsigned long long)val.failures);
    if (!val.ok()) return kExitData;
  }
  if (!out.complete) {
    std::fprintf(stderr, "warning: frame budget exhausted, partial set\n");
    return kExitBudget;
  }
  return kExitOk;
}

struct MitigateArgs {
  std::string code, set, out;
  std::string strategy;
  double sigma_v2 = 0.36;
  double alpha = 0.9375;
  int attempts = 5;
  int perms = 0;
  bool genie = false;
  double llr_max = 0.0;  // 0 -> the set's fail value
  std::uint64_t seed = 1;
  int workers = 1;
};

int run_mitigate(const MitigateArgs& a) {
  const PolarCodeSpec spec = load_code_spec(a.code);
  const TestSet set = load_test_set(a.set);

  MitigationConfig mc;
  mc.base = test_set_decoder_config(
      set.header,
      a.llr_max > 0.0 ? a.llr_max : double(set.header.llr_max_fail));
  if (a.strategy == "guess1" || a.strategy == "guess2" ||
      a.strategy == "guess3") {
    mc.strategy = Strategy::guess;
    mc.guess_max_bits = a.strategy.back() - '0';
    mc.guess_mode = a.genie ? GuessMode::genie : GuessMode::exhaustive;
  } else if (a.strategy == "vnoise") {
    mc.strategy = Strategy::virtual_noise;
    mc.sigma_v2 = a.sigma_v2;
    mc.vnoise_attempts = a.attempts;
  } else if (a.strategy == "scaled") {
    mc.strategy = Strategy::scaled_boxplus;
    mc.scaled_alpha = a.alpha;
  } else if (a.strategy == "multitrellis") {
    mc.strategy = Strategy::multi_trellis;
    mc.max_permutations = a.perms;
  } else if (a.strategy == "none") {
    mc.strategy = Strategy::none;
  } else {
    throw ParamError("unknown strategy: " + a.strategy);
  }

  const SuccessReport rep =
      measure_success_rate(set, spec, mc, a.seed, a.workers);

  std::ostringstream csv;
  csv << "# polarfloor-success-v1\n";
  csv << "# digest=" << digest_hex(spec.digest) << " set_records=" << rep.total
      << " llr_max=" << format_double(mc.base.llr_max) << " seed=" << a.seed
      << "\n";
  if (mc.strategy == Strategy::virtual_noise)
    csv << "# sigma_v2=" << format_double(mc.sigma_v2)
        << " attempts=" << mc.vnoise_attempts << "\n";
  if (mc.strategy == Strategy::scaled_boxplus)
    csv << "# alpha=" << format_double(mc.scaled_alpha) << "\n";
  if (mc.strategy == Strategy::multi_trellis)
    csv << "# perms="
        << (mc.max_permutations > 0 ? mc.max_permutations
                                    : std::max(1, spec.n - 1))
        << "\n";
  csv << "strategy,total,recovered,tau,ci_low,ci_high,recovered_at_base,"
         "mean_extra_iters,mean_restarts\n";
  csv << rep.strategy << ',' << rep.total << ',' << rep.recovered << ','
      << format_double(rep.tau) << ',' << format_double(rep.ci_low) << ','
      << format_double(rep.ci_high) << ',' << rep.recovered_at_base << ','
      << format_double(rep.mean_extra_iters) << ','
      << format_double(rep.mean_restarts) << "\n";
  write_text_atomic(a.out, csv.str());

  std::fprintf(stderr, "%s: tau = %llu/%llu = %.4f  [%.4f, %.4f]\n",
               rep.strategy.c_str(), (unsigned long long)rep.recovered,
               (unsigned long long)rep.total, rep.tau, rep.ci_low,
               rep.ci_high);
  std::fprintf(stderr, "wrote %s\n", a.out.c_str());
  return kExitOk;
}

struct FrozenSweepArgs {
  std::string code, snr, out_prefix;
  std::string m_list = "0,16";
  double llr_max = 100.0;
  std::uint64_t seed = 1;
  std::uint64_t extend_seed = 7;
  int workers = 1;
  DecoderFlags dec;
  StopFlags stop;
};

int run_frozen_sweep(const FrozenSweepArgs& a) {
  const PolarCodeSpec parent = load_code_spec(a.code);
  const std::vector<double> grid = parse_grid(a.snr);
  const std::vector<int> ms = parse_int_list(a.m_list);

  DecoderFlags dec = a.dec;
  dec.llr_max = a.llr_max;
  SimOptions opts;
  opts.workers = a.workers;

  std::vector<SimReport> reports;
  std::vector<int> m_done;
  for (int m : ms) {
    const PolarCodeSpec spec = extend_frozen(parent, m, a.extend_seed);
    std::fprintf(stderr, "m=%d: k=%d rate=%.4f digest=%s\n", m, spec.k,
                 spec.rate(), digest_hex(spec.digest).c_str());
    const SimReport rep = estimate_error_rates(
        spec, dec.to_config(), grid, a.stop.to_rule(), a.seed, opts);
    for (const SimPoint& p : rep.points) print_point(p);
    const std::string path = a.out_prefix + "_m" + std::to_string(m) + ".csv";
    write_sim_report_csv(path, rep);
    std::fprintf(stderr, "wrote %s\n", path.c_str());
    reports.push_back(rep);
    m_done.push_back(m);
  }

  std::ostringstream combined;
  combined << "# polarfloor-frozen-sweep-v1\n";
  combined << "# parent_digest=" << digest_hex(parent.digest)
           << " llr_max=" << format_double(a.llr_max)
           << " extend_seed=" << a.extend_seed << " seed=" << a.seed << "\n";
  combined << "# extending the frozen set only removes codewords, so ML"
              " performance cannot degrade; any floor here is a decoder"
              " effect\n";
  combined << "ebn0_db";
  for (int m : m_done) combined << ",ber_m" << m;
  combined << "\n";
  for (size_t p = 0; p < grid.size(); ++p) {
    combined << format_double(grid[p]);
    for (const SimReport& rep : reports)
      combined << ',' << format_double(rep.points[p].ber);
    combined << "\n";
  }
  const std::string combined_path = a.out_prefix + "_combined.csv";
  write_text_atomic(combined_path, combined.str());
  std::fprintf(stderr, "wrote %s\n", combined_path.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polar BP clipping / error-floor toolkit"};
  app.require_subcommand(1);
  app.set_config("--config");

  ConstructArgs ca;
  CLI::App* construct =
      app.add_subcommand("construct", "build a code spec file");
  construct->add_option("--n", ca.n, "log2 of block length")->required();
  construct->add_option("--k", ca.k, "information bits");
  construct->add_option("--rate", ca.rate, "code rate (alternative to --k)");
  construct->add_option("--design-esn0", ca.design_esn0,
                        "construction Es/N0 in dB")
      ->capture_default_str();
  construct->add_option("--out", ca.out, "output code file")->required();

  SimulateArgs sa;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo BER/BLER over an SNR grid");
  simulate->add_option("--code", sa.code, "code spec file")->required();
  simulate->add_option("--snr", sa.snr, "Eb/N0 grid start:step:stop in dB")
      ->required();
  simulate->add_option("--out", sa.out, "output CSV")->required();
  sa.dec.attach(simulate, 20.0);
  sa.stop.attach(simulate);
  simulate->add_option("--seed", sa.seed, "master seed")
      ->envname("POLARFLOOR_SEED")
      ->capture_default_str();
  simulate->add_option("--workers", sa.workers, "worker threads")
      ->capture_default_str();
  simulate->add_flag("--all-zero", sa.all_zero,
                     "transmit the all-zero codeword");

  NeArgs na;
  CLI::App* ne = app.add_subcommand(
      "ne", "normalized error of a curve against a reference");
  ne->add_option("--curve", na.curve, "clipped-decoder CSV")->required();
  ne->add_option("--ref", na.ref, "reference CSV")->required();
  ne->add_option("--out", na.out, "output CSV")->required();

  CollectArgs la;
  CLI::App* collect = app.add_subcommand(
      "collect", "capture frames that fail at low clipping but pass high");
  collect->add_option("--code", la.code, "code spec file")->required();
  collect->add_option("--snr", la.snr, "collection Eb/N0 in dB")
      ->capture_default_str();
  collect->add_option("--llr-max-pass", la.pass, "high clipping value")
      ->capture_default_str();
  collect->add_option("--llr-max-fail", la.fail, "low clipping value")
      ->capture_default_str();
  collect->add_option("--count", la.count, "records to collect")->required();
  collect->add_option("--seed", la.seed, "master seed")
      ->envname("POLARFLOOR_SEED")
      ->capture_default_str();
  collect->add_option("--max-frames", la.max_frames, "frame budget")
      ->capture_default_str();
  collect->add_option("--workers", la.workers, "worker threads")
      ->capture_default_str();
  collect->add_flag("--validate", la.validate,
                    "replay the file after writing");
  collect->add_option("--iters", la.dec.iters, "maximum BP iterations")
      ->capture_default_str();
  collect->add_option("--boxplus", la.dec.boxplus, "boxplus kernel")
      ->check(CLI::IsMember({"exact", "min"}))
      ->capture_default_str();
  collect->add_option("--alpha", la.dec.alpha, "boxplus output scale")
      ->capture_default_str();
  collect->add_option("--precision", la.dec.precision, "f32|f64")
      ->check(CLI::IsMember({"f32", "f64"}))
      ->capture_default_str();
  collect->add_option("--out", la.out, "output test-set file")->required();

  MitigateArgs ma;
  CLI::App* mitigate = app.add_subcommand(
      "mitigate", "success rate of a recovery strategy on a test set");
  mitigate->add_option("--code", ma.code, "code spec file")->required();
  mitigate->add_option("--set", ma.set, "test-set file")->required();
  mitigate
      ->add_option("--strategy", ma.strategy,
                   "none|guess1|guess2|guess3|vnoise|scaled|multitrellis")
      ->required()
      ->check(CLI::IsMember({"none", "guess1", "guess2", "guess3", "vnoise",
                             "scaled", "multitrellis"}));
  mitigate->add_option("--sigma-v2", ma.sigma_v2, "virtual noise power")
      ->capture_default_str();
  mitigate->add_option("--alpha", ma.alpha, "boxplus scale for 'scaled'")
      ->capture_default_str();
  mitigate->add_option("--attempts", ma.attempts, "virtual-noise retries")
      ->capture_default_str();
  mitigate->add_option("--perms", ma.perms,
                       "permutation budget (0 = n-1 rotations)")
      ->capture_default_str();
  mitigate->add_flag("--genie", ma.genie, "pin true signs when guessing");
  mitigate->add_option("--llr-max", ma.llr_max,
                       "override the set's fail clipping value");
  mitigate->add_option("--seed", ma.seed, "master seed")
      ->envname("POLARFLOOR_SEED")
      ->capture_default_str();
  mitigate->add_option("--workers", ma.workers, "worker threads")
      ->capture_default_str();
  mitigate->add_option("--out", ma.out, "output CSV")->required();

  FrozenSweepArgs fa;
  CLI::App* sweep = app.add_subcommand(
      "frozen-sweep", "error rates after freezing m extra random positions");
  sweep->add_option("--code", fa.code, "parent code spec file")->required();
  sweep->add_option("--m", fa.m_list, "comma-separated extra frozen counts")
      ->capture_default_str();
  sweep->add_option("--snr", fa.snr, "Eb/N0 grid start:step:stop")->required();
  sweep->add_option("--llr-max", fa.llr_max, "LLR clipping magnitude")
      ->capture_default_str();
  sweep->add_option("--seed", fa.seed, "master seed")
      ->envname("POLARFLOOR_SEED")
      ->capture_default_str();
  sweep->add_option("--extend-seed", fa.extend_seed,
                    "seed for the frozen-position draw")
      ->capture_default_str();
  sweep->add_option("--workers", fa.workers, "worker threads")
      ->capture_default_str();
  sweep->add_option("--iters", fa.dec.iters, "maximum BP iterations")
      ->capture_default_str();
  sweep->add_option("--boxplus", fa.dec.boxplus, "boxplus kernel")
      ->check(CLI::IsMember({"exact", "min"}))
      ->capture_default_str();
  fa.stop.attach(sweep);
  sweep->add_option("--out-prefix", fa.out_prefix, "output path prefix")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*construct) return run_construct(ca);
    if (*simulate) return run_simulate(sa);
    if (*ne) return run_ne(na);
    if (*collect) return run_collect(la);
    if (*mitigate) return run_mitigate(ma);
    if (*sweep) return run_frozen_sweep(fa);
  } catch (const ParamError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}

#include "polarfloor/polar_code.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "polarfloor/rng.hpp"
#include <nlohmann/json.hpp>

namespace polarfloor {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_u64(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xFF;
    h *= kFnvPrime;
  }
}

std::vector<std::uint8_t> frozen_mask_from(int N,
                                           const std::vector<int>& info_set) {
  std::vector<std::uint8_t> mask(size_t(N), 1);
  for (int i : info_set) mask[size_t(i)] = 0;
  return mask;
}

void validate_info_set(int N, int k, const std::vector<int>& info_set) {
  require(int(info_set.size()) == k, "info_set size must equal k");
  require(std::is_sorted(info_set.begin(), info_set.end()),
          "info_set must be sorted");
  require(std::adjacent_find(info_set.begin(), info_set.end()) ==
              info_set.end(),
          "info_set must not contain duplicates");
  if (!info_set.empty()) {
    require(info_set.front() >= 0 && info_set.back() < N,
            "info_set indices must lie in [0, N)");
  }
}

std::string digest_hex(std::uint64_t d) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "0x%016llx", (unsigned long long)d);
  return buf;
}

std::uint64_t parse_digest_hex(const std::string& s) {
  return std::stoull(s, nullptr, 16);
}

}  // namespace

std::uint64_t code_digest(int block_length, int k,
                          const std::vector<int>& info_set) {
  std::uint64_t h = kFnvOffset;
  fnv_u64(h, std::uint64_t(block_length));
  fnv_u64(h, std::uint64_t(k));
  for (int i : info_set) fnv_u64(h, std::uint64_t(i));
  return h;
}

ReliabilityProfile bhattacharyya_profile(int n, double design_esn0_db) {
  require(n >= 1 && n <= 20, "n must be in [1, 20]");
  const double esn0 = std::pow(10.0, design_esn0_db / 10.0);
  const double z0 = std::exp(-esn0);

  std::vector<double> z{z0};
  for (int level = 0; level < n; ++level) {
    std::vector<double> next(z.size() * 2);
    for (size_t i = 0; i < z.size(); ++i) {
      const double v = z[i];
      next[2 * i] = 2.0 * v - v * v;  // degraded branch
      next[2 * i + 1] = v * v;        // upgraded branch
    }
    z.swap(next);
  }

  ReliabilityProfile profile;
  profile.z = Eigen::Map<Eigen::ArrayXd>(z.data(), Eigen::Index(z.size()));
  return profile;
}

std::vector<int> reliability_order(const ReliabilityProfile& profile) {
  std::vector<int> order(size_t(profile.z.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (profile.z[a] != profile.z[b]) return profile.z[a] < profile.z[b];
    return a > b;
  });
  return order;
}

PolarCodeSpec construct_bhattacharyya(int n, int k, double design_esn0_db) {
  require(n >= 1 && n <= 20, "n must be in [1, 20]");
  const int N = 1 << n;
  require(k >= 1 && k <= N, "k must be in [1, N]");

  const ReliabilityProfile profile = bhattacharyya_profile(n, design_esn0_db);
  const std::vector<int> order = reliability_order(profile);

  PolarCodeSpec spec;
  spec.n = n;
  spec.block_length = N;
  spec.k = k;
  spec.design_esn0_db = design_esn0_db;
  spec.construction = Construction::bhattacharyya;
  spec.info_set.assign(order.begin(), order.begin() + k);
  std::sort(spec.info_set.begin(), spec.info_set.end());
  spec.frozen_mask = frozen_mask_from(N, spec.info_set);
  spec.digest = code_digest(N, k, spec.info_set);
  return spec;
}

PolarCodeSpec make_explicit(int n, std::vector<int> info_set,
                            double design_esn0_db) {
  require(n >= 1 && n <= 20, "n must be in [1, 20]");
  const int N = 1 << n;
  std::sort(info_set.begin(), info_set.end());
  validate_info_set(N, int(info_set.size()), info_set);
  require(!info_set.empty(), "info_set must not be empty");

  PolarCodeSpec spec;
  spec.n = n;
  spec.block_length = N;
  spec.k = int(info_set.size());
  spec.design_esn0_db = design_esn0_db;
  spec.construction = Construction::explicit_set;
  spec.info_set = std::move(info_set);
  spec.frozen_mask = frozen_mask_from(N, spec.info_set);
  spec.digest = code_digest(N, spec.k, spec.info_set);
  return spec;
}

PolarCodeSpec extend_frozen(const PolarCodeSpec& parent, int m,
                            std::uint64_t seed) {
  require(m >= 0 && m <= parent.k, "m must be in [0, k]");
  if (m == 0) return parent;

  // Partial Fisher-Yates over a copy of the information set; the first m
  // slots are the removals.
  std::vector<int> pool = parent.info_set;
  RngStream rng = RngStream::derive(seed, 0x66727A6EULL);
  for (int i = 0; i < m; ++i) {
    const size_t j = size_t(i) + size_t(rng.bounded(pool.size() - size_t(i)));
    std::swap(pool[size_t(i)], pool[j]);
  }
  std::vector<int> kept(pool.begin() + m, pool.end());
  std::sort(kept.begin(), kept.end());

  PolarCodeSpec spec;
  spec.n = parent.n;
  spec.block_length = parent.block_length;
  spec.k = parent.k - m;
  spec.design_esn0_db = parent.design_esn0_db;
  spec.construction = Construction::extended;
  spec.extended = ExtendedInfo{parent.digest, m, seed};
  spec.info_set = std::move(kept);
  spec.frozen_mask = frozen_mask_from(spec.block_length, spec.info_set);
  spec.digest = code_digest(spec.block_length, spec.k, spec.info_set);
  return spec;
}

void polar_transform(BitVec& v) {
  const Eigen::Index N = v.size();
  require(N >= 1 && (N & (N - 1)) == 0, "length must be a power of two");
  std::uint8_t* b = v.data();
  for (Eigen::Index inc = 1; inc < N; inc <<= 1) {
    for (Eigen::Index base = 0; base < N; base += 2 * inc) {
      for (Eigen::Index j = base; j < base + inc; ++j) {
        b[j] = std::uint8_t(b[j] ^ b[j + inc]);
      }
    }
  }
}

BitVec expand_info(const PolarCodeSpec& spec, const BitVec& info_bits) {
  require(int(info_bits.size()) == spec.k, "info bit count must equal k");
  BitVec u = BitVec::Zero(spec.block_length);
  for (int i = 0; i < spec.k; ++i) u[spec.info_set[size_t(i)]] = info_bits[i];
  return u;
}

BitVec extract_info(const PolarCodeSpec& spec, const BitVec& u) {
  require(int(u.size()) == spec.block_length, "u length must equal N");
  BitVec info(spec.k);
  for (int i = 0; i < spec.k; ++i) info[i] = u[spec.info_set[size_t(i)]];
  return info;
}

BitVec encode(const PolarCodeSpec& spec, const BitVec& info_bits) {
  BitVec x = expand_info(spec, info_bits);
  polar_transform(x);
  return x;
}

void save_code_spec(const std::filesystem::path& path,
                    const PolarCodeSpec& spec) {
  nlohmann::json j;
  j["format"] = "polar-code-spec-v1";
  j["n"] = spec.n;
  j["N"] = spec.block_length;
  j["k"] = spec.k;
  j["design_esn0_db"] = spec.design_esn0_db;
  switch (spec.construction) {
    case Construction::bhattacharyya:
      j["construction"] = {{"tag", "bhattacharyya"}};
      break;
    case Construction::explicit_set:
      j["construction"] = {{"tag", "explicit"}};
      break;
    case Construction::extended:
      j["construction"] = {{"tag", "extended"},
                           {"parent_digest", digest_hex(spec.extended.parent_digest)},
                           {"m", spec.extended.m},
                           {"seed", spec.extended.seed}};
      break;
  }
  j["info_set"] = spec.info_set;
  j["digest"] = digest_hex(spec.digest);

  std::ofstream out(path);
  if (!out) throw DataError("cannot write code spec: " + path.string());
  out << j.dump(2) << "\n";
}

PolarCodeSpec load_code_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read code spec: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed code spec " + path.string() + ": " + e.what());
  }

  try {
    if (j.value("format", "") != "polar-code-spec-v1")
      throw DataError("unknown code spec format in " + path.string());

    PolarCodeSpec spec;
    spec.n = j.at("n").get<int>();
    spec.block_length = j.at("N").get<int>();
    spec.k = j.at("k").get<int>();
    spec.design_esn0_db = j.at("design_esn0_db").get<double>();
    spec.info_set = j.at("info_set").get<std::vector<int>>();

    const auto& c = j.at("construction");
    const std::string tag = c.at("tag").get<std::string>();
    if (tag == "bhattacharyya") {
      spec.construction = Construction::bhattacharyya;
    } else if (tag == "explicit") {
      spec.construction = Construction::explicit_set;
    } else if (tag == "extended") {
      spec.construction = Construction::extended;
      spec.extended.parent_digest =
          parse_digest_hex(c.at("parent_digest").get<std::string>());
      spec.extended.m = c.at("m").get<int>();
      spec.extended.seed = c.at("seed").get<std::uint64_t>();
    } else {
      throw DataError("unknown construction tag: " + tag);
    }

    if (spec.block_length != (1 << spec.n))
      throw DataError("N != 2^n in " + path.string());
    validate_info_set(spec.block_length, spec.k, spec.info_set);
    spec.frozen_mask = frozen_mask_from(spec.block_length, spec.info_set);
    spec.digest = code_digest(spec.block_length, spec.k, spec.info_set);
    const std::uint64_t stored =
        parse_digest_hex(j.at("digest").get<std::string>());
    if (stored != spec.digest)
      throw DataError("digest mismatch in " + path.string());
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed code spec " + path.string() + ": " + e.what());
  }
}

}  // namespace polarfloor

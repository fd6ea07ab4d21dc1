#include "polarfloor/testset.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "polarfloor/config_tags.hpp"

namespace polarfloor {

static_assert(std::endian::native == std::endian::little,
              "test-set I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'P', 'L', 'R', 'T', 'S', 'E', 'T', '1'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw DataError("truncated test set");
  return v;
}

std::vector<std::uint8_t> pack_bits(const BitVec& bits) {
  std::vector<std::uint8_t> bytes((size_t(bits.size()) + 7) / 8, 0);
  for (Eigen::Index i = 0; i < bits.size(); ++i) {
    if (bits[i]) bytes[size_t(i) / 8] |= std::uint8_t(1u << (i % 8));
  }
  return bytes;
}

BitVec unpack_bits(const std::vector<std::uint8_t>& bytes, Eigen::Index n) {
  BitVec bits(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    bits[i] = (bytes[size_t(i) / 8] >> (i % 8)) & 1;
  }
  return bits;
}

}  // namespace

DecoderConfig test_set_decoder_config(const TestSetHeader& header,
                                      double llr_max) {
  DecoderConfig cfg;
  cfg.llr_max = llr_max;
  cfg.max_iters = int(header.max_iters);
  cfg.boxplus = boxplus_from_code(header.boxplus);
  cfg.alpha = double(header.alpha);
  cfg.stopping = stopping_from_code(header.stopping);
  cfg.precision = precision_from_code(header.precision);
  return cfg;
}

void save_test_set(const std::filesystem::path& path, const TestSet& set) {
  if (set.header.record_count != set.records.size())
    throw DataError("test-set header record count disagrees with records");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write test set: " + path.string());

  out.write(kMagic, sizeof(kMagic));
  const TestSetHeader& h = set.header;
  put(out, h.version);
  put(out, h.block_length);
  put(out, h.k);
  put(out, h.code_digest);
  put(out, h.sigma2);
  put(out, h.ebn0_db);
  put(out, h.llr_max_pass);
  put(out, h.llr_max_fail);
  put(out, h.master_seed);
  put(out, h.record_count);
  put(out, h.max_iters);
  put(out, h.boxplus);
  put(out, h.stopping);
  put(out, h.precision);
  put(out, h.alpha);

  const auto N = Eigen::Index(h.block_length);
  for (const TestSetRecord& rec : set.records) {
    if (rec.true_u.size() != N || rec.y.size() != N || rec.llr.size() != N)
      throw DataError("test-set record length disagrees with header N");
    put(out, rec.frame_id);
    const auto packed = pack_bits(rec.true_u);
    out.write(reinterpret_cast<const char*>(packed.data()),
              std::streamsize(packed.size()));
    out.write(reinterpret_cast<const char*>(rec.y.data()),
              std::streamsize(sizeof(float) * size_t(N)));
    out.write(reinterpret_cast<const char*>(rec.llr.data()),
              std::streamsize(sizeof(float) * size_t(N)));
  }
  if (!out) throw DataError("write failure on test set: " + path.string());
}

TestSet load_test_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read test set: " + path.string());

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError("bad test-set magic in " + path.string());

  TestSet set;
  TestSetHeader& h = set.header;
  h.version = get<std::uint64_t>(in);
  if (h.version != 1) throw DataError("unsupported test-set version");
  h.block_length = get<std::uint64_t>(in);
  h.k = get<std::uint64_t>(in);
  h.code_digest = get<std::uint64_t>(in);
  h.sigma2 = get<float>(in);
  h.ebn0_db = get<float>(in);
  h.llr_max_pass = get<float>(in);
  h.llr_max_fail = get<float>(in);
  h.master_seed = get<std::uint64_t>(in);
  h.record_count = get<std::uint64_t>(in);
  h.max_iters = get<std::uint64_t>(in);
  h.boxplus = get<std::uint64_t>(in);
  h.stopping = get<std::uint64_t>(in);
  h.precision = get<std::uint64_t>(in);
  h.alpha = get<float>(in);

  if (h.block_length == 0 || h.block_length > (1u << 20) ||
      (h.block_length & (h.block_length - 1)) != 0)
    throw DataError("bad block length in test set");

  const auto N = Eigen::Index(h.block_length);
  const size_t packed_len = (size_t(N) + 7) / 8;
  set.records.resize(h.record_count);
  std::vector<std::uint8_t> packed(packed_len);
  for (TestSetRecord& rec : set.records) {
    rec.frame_id = get<std::uint64_t>(in);
    in.read(reinterpret_cast<char*>(packed.data()),
            std::streamsize(packed_len));
    rec.true_u = unpack_bits(packed, N);
    rec.y.resize(N);
    rec.llr.resize(N);
    in.read(reinterpret_cast<char*>(rec.y.data()),
            std::streamsize(sizeof(float) * size_t(N)));
    in.read(reinterpret_cast<char*>(rec.llr.data()),
            std::streamsize(sizeof(float) * size_t(N)));
    if (!in) throw DataError("truncated test set: " + path.string());
  }
  return set;
}

}  // namespace polarfloor

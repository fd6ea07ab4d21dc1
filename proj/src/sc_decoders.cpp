#include "polarfloor/sc_decoders.hpp"

#include <algorithm>
#include <cmath>

#include "polarfloor/boxplus.hpp"

namespace polarfloor {

namespace {

// f/g combining shared by SC and SCL so that SCL(L=1) is bit-identical
// to SC.
inline double f_combine(double a, double b) { return boxplus_exact(a, b); }
inline double g_combine(double a, double b, std::uint8_t bit) {
  return b + (bit ? -a : a);
}

// ln(1 + e^{-t}), stable for any t.
inline double softplus_neg(double t) {
  if (t >= 0.0) return std::log1p(std::exp(-t));
  return -t + std::log1p(std::exp(t));
}

struct ScWork {
  const PolarCodeSpec* spec;
  BitVec u_hat;
  std::vector<std::vector<double>> llr;  // per-depth buffers, size N >> d
};

// Decodes the subtree whose leaves are u indices [pos, pos + (N >> depth));
// returns the subtree's partial sums (x-domain bits) in `bits`.
void sc_node(ScWork& w, int depth, int pos, std::vector<std::uint8_t>& bits) {
  const int len = w.spec->block_length >> depth;
  const std::vector<double>& a = w.llr[size_t(depth)];
  if (len == 1) {
    std::uint8_t bit = 0;
    if (!w.spec->is_frozen(pos)) bit = std::uint8_t(a[0] < 0.0);
    w.u_hat[pos] = bit;
    bits.assign(1, bit);
    return;
  }
  const int half = len / 2;
  std::vector<double>& child = w.llr[size_t(depth) + 1];

  for (int i = 0; i < half; ++i) child[size_t(i)] = f_combine(a[size_t(i)], a[size_t(i) + size_t(half)]);
  std::vector<std::uint8_t> left;
  sc_node(w, depth + 1, pos, left);

  for (int i = 0; i < half; ++i)
    child[size_t(i)] = g_combine(a[size_t(i)], a[size_t(i) + size_t(half)], left[size_t(i)]);
  std::vector<std::uint8_t> right;
  sc_node(w, depth + 1, pos + half, right);

  bits.resize(size_t(len));
  for (int i = 0; i < half; ++i) {
    bits[size_t(i)] = std::uint8_t(left[size_t(i)] ^ right[size_t(i)]);
    bits[size_t(i) + size_t(half)] = right[size_t(i)];
  }
}

}  // namespace

namespace detail {

double decision_penalty(double llr, std::uint8_t bit, PathMetric pm) {
  const double t = bit ? -llr : llr;
  if (pm == PathMetric::exact) return softplus_neg(t);
  return t < 0.0 ? -t : 0.0;
}

}  // namespace detail

BitVec sc_decode(const PolarCodeSpec& spec, const LlrFrame& frame) {
  require(int(frame.values.size()) == spec.block_length,
          "frame length must equal N");
  ScWork w;
  w.spec = &spec;
  w.u_hat = BitVec::Zero(spec.block_length);
  w.llr.resize(size_t(spec.n) + 1);
  for (int d = 0; d <= spec.n; ++d)
    w.llr[size_t(d)].resize(size_t(spec.block_length >> d));
  for (int i = 0; i < spec.block_length; ++i) w.llr[0][size_t(i)] = frame.values[i];

  std::vector<std::uint8_t> bits;
  sc_node(w, 0, 0, bits);
  return extract_info(spec, w.u_hat);
}

namespace {

// A full copy of the SC traversal state; cloning a path duplicates all
// per-depth buffers. Reference-grade: fine for the block lengths this
// decoder is used at.
struct Path {
  double pm = 0.0;
  BitVec u;
  std::vector<std::vector<double>> llr;
  std::vector<std::vector<std::uint8_t>> bits;  // result slot per depth
};

struct SclWork {
  const PolarCodeSpec* spec;
  SclConfig cfg;
  std::vector<Path> paths;
};

void scl_node(SclWork& w, int depth, int pos) {
  const int len = w.spec->block_length >> depth;
  if (len == 1) {
    const bool frozen = w.spec->is_frozen(pos);
    if (frozen) {
      for (Path& p : w.paths) {
        const double a = p.llr[size_t(depth)][0];
        p.pm += detail::decision_penalty(a, 0, w.cfg.path_metric);
        p.u[pos] = 0;
        p.bits[size_t(depth)].assign(1, 0);
      }
      return;
    }
    std::vector<Path> forked;
    forked.reserve(w.paths.size() * 2);
    for (Path& p : w.paths) {
      const double a = p.llr[size_t(depth)][0];
      for (std::uint8_t bit : {std::uint8_t(0), std::uint8_t(1)}) {
        Path child = p;
        child.pm += detail::decision_penalty(a, bit, w.cfg.path_metric);
        child.u[pos] = bit;
        child.bits[size_t(depth)].assign(1, bit);
        forked.push_back(std::move(child));
      }
    }
    if (int(forked.size()) > w.cfg.list_size) {
      std::stable_sort(forked.begin(), forked.end(),
                       [](const Path& a, const Path& b) { return a.pm < b.pm; });
      forked.resize(size_t(w.cfg.list_size));
    }
    w.paths = std::move(forked);
    return;
  }

  const int half = len / 2;
  for (Path& p : w.paths) {
    const auto& a = p.llr[size_t(depth)];
    auto& child = p.llr[size_t(depth) + 1];
    for (int i = 0; i < half; ++i)
      child[size_t(i)] = f_combine(a[size_t(i)], a[size_t(i) + size_t(half)]);
  }
  scl_node(w, depth + 1, pos);
  for (Path& p : w.paths) p.bits[size_t(depth) + 1].swap(p.bits[size_t(depth)]);
  // left partial sums now live in bits[depth]

  for (Path& p : w.paths) {
    const auto& a = p.llr[size_t(depth)];
    const auto& left = p.bits[size_t(depth)];
    auto& child = p.llr[size_t(depth) + 1];
    for (int i = 0; i < half; ++i)
      child[size_t(i)] =
          g_combine(a[size_t(i)], a[size_t(i) + size_t(half)], left[size_t(i)]);
  }
  scl_node(w, depth + 1, pos + half);

  for (Path& p : w.paths) {
    const auto& left = p.bits[size_t(depth)];
    const auto& right = p.bits[size_t(depth) + 1];
    std::vector<std::uint8_t> combined(static_cast<size_t>(len));
    for (int i = 0; i < half; ++i) {
      combined[size_t(i)] = std::uint8_t(left[size_t(i)] ^ right[size_t(i)]);
      combined[size_t(i) + size_t(half)] = right[size_t(i)];
    }
    p.bits[size_t(depth)] = std::move(combined);
  }
}

}  // namespace

BitVec scl_decode(const PolarCodeSpec& spec, const LlrFrame& frame,
                  const SclConfig& cfg) {
  require(cfg.list_size >= 1, "list size must be at least 1");
  require(int(frame.values.size()) == spec.block_length,
          "frame length must equal N");

  SclWork w;
  w.spec = &spec;
  w.cfg = cfg;
  Path root;
  root.u = BitVec::Zero(spec.block_length);
  root.llr.resize(size_t(spec.n) + 1);
  root.bits.resize(size_t(spec.n) + 1);
  for (int d = 0; d <= spec.n; ++d)
    root.llr[size_t(d)].resize(size_t(spec.block_length >> d));
  for (int i = 0; i < spec.block_length; ++i)
    root.llr[0][size_t(i)] = frame.values[i];
  w.paths.push_back(std::move(root));

  scl_node(w, 0, 0);

  const Path* best = &w.paths.front();
  for (const Path& p : w.paths) {
    if (p.pm < best->pm) best = &p;
  }
  return extract_info(spec, best->u);
}

}  // namespace polarfloor

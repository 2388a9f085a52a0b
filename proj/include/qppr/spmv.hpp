#pragma once

// Streaming COO SpMV, emulated stage by stage:
//
//   1. fetch     read one packet of B (x, y, val) entries
//   2. scatter   dp[k][j] = val[j] * P[y[j], k]
//   3. aggregate fold same-destination products into a 2B window anchored
//                at the block containing x[0]
//   4. writeback two B-wide result buffers (res1, res2) that are flushed to
//                the output only at B-aligned block boundaries
//
// The output is written one whole aligned block at a time and every block is
// written exactly once per call, so no read-modify-write ever touches it.
//
// Sorted COO streams may jump over whole blocks (destinations without
// in-edges) and a packet may cover more than B distinct destinations. A packet
// is therefore split into segments whose destinations fit in [x0, x0 + B);
// each segment goes through aggregate + writeback on its own. When every
// packet fits one window and consecutive windows advance by at most one block,
// this is exactly the two-buffer machine driven once per packet.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "qppr/graph.hpp"
#include "qppr/rank_batch.hpp"

namespace qppr {

/// Instrumentation for one streaming call.
struct SpmvStats {
  std::size_t packets = 0;
  std::size_t segments = 0;
  std::size_t num_blocks = 0;
  std::uint32_t kappa = 0;
  /// block_writes[k * num_blocks + b]: stores of aligned block b for lane k.
  std::vector<std::uint32_t> block_writes;

  bool each_block_written_once() const {
    return std::all_of(block_writes.begin(), block_writes.end(),
                       [](std::uint32_t w) { return w == 1; });
  }
};

namespace detail {

template <class Arith>
void require_compatible(const CooGraph<Arith>& g, const RankBatch<Arith>& in) {
  if (!(g.arith() == in.arith)) {
    throw Error(ErrorCode::kFormatMismatch, "graph and rank batch use different formats");
  }
  if (in.num_vertices != g.num_vertices()) {
    throw Error(ErrorCode::kInvalidArgument, "rank batch has " +
                                                 std::to_string(in.num_vertices) +
                                                 " rows, graph has " +
                                                 std::to_string(g.num_vertices()));
  }
}

inline bool destinations_sorted(std::span<const Vertex> x) {
  return std::is_sorted(x.begin(), x.end());
}

}  // namespace detail

template <class Arith>
class StreamingSpmv {
 public:
  using value_type = typename Arith::value_type;

  explicit StreamingSpmv(const CooGraph<Arith>& g, std::size_t block = 8)
      : stream_(g, block), block_(block) {}

  std::size_t block() const noexcept { return block_; }

  /// out = X * in. `out` is resized as needed; its personalization is copied.
  void run(const RankBatch<Arith>& in, RankBatch<Arith>& out, SaturationCounter& sat,
           SpmvStats* stats = nullptr) {
    const CooGraph<Arith>& g = stream_.graph();
    detail::require_compatible(g, in);
    if (!detail::destinations_sorted(g.x())) {
      throw Error(ErrorCode::kUnsortedInput, "COO destinations are not non-decreasing");
    }

    if (out.num_vertices != in.num_vertices || out.kappa != in.kappa ||
        !(out.arith == in.arith)) {
      out = RankBatch<Arith>(in.arith, in.num_vertices, in.kappa);
    }
    out.personalization = in.personalization;

    arith_ = &in.arith;
    sat_ = &sat;
    stats_ = stats;
    kappa_ = in.kappa;
    num_vertices_ = in.num_vertices;
    num_blocks_ = (num_vertices_ + block_ - 1) / block_;
    if (stats_ != nullptr) {
      *stats_ = SpmvStats{};
      stats_->num_blocks = num_blocks_;
      stats_->kappa = kappa_;
      stats_->block_writes.assign(num_blocks_ * kappa_, 0);
    }

    dp_.assign(static_cast<std::size_t>(kappa_) * block_, arith_->zero());
    agg_.assign(static_cast<std::size_t>(kappa_) * 2 * block_, arith_->zero());
    res1_.assign(static_cast<std::size_t>(kappa_) * block_, arith_->zero());
    res2_.assign(static_cast<std::size_t>(kappa_) * block_, arith_->zero());
    x_s_old_ = 0;

    for (std::size_t i = 0; i < stream_.size(); ++i) {
      stream_.fetch(i, packet_);
      if (stats_ != nullptr) ++stats_->packets;

      for (std::uint32_t k = 0; k < kappa_; ++k) scatter(k, in);

      std::size_t begin = 0;
      while (begin < block_) {
        const Vertex anchor = packet_.x[begin];
        std::size_t end = begin + 1;
        while (end < block_ && packet_.x[end] < anchor + block_) ++end;
        const std::size_t x_s = anchor / block_ * block_;

        for (std::uint32_t k = 0; k < kappa_; ++k) {
          aggregate(k, begin, end, x_s);
          writeback(k, x_s, out);
        }
        x_s_old_ = x_s;
        if (stats_ != nullptr) ++stats_->segments;
        begin = end;
      }
    }
    for (std::uint32_t k = 0; k < kappa_; ++k) drain(k, out);
  }

  RankBatch<Arith> operator()(const RankBatch<Arith>& in, SaturationCounter& sat,
                              SpmvStats* stats = nullptr) {
    RankBatch<Arith> out(in.arith, in.num_vertices, in.kappa);
    run(in, out, sat, stats);
    return out;
  }

 private:
  value_type* lane(std::vector<value_type>& buf, std::uint32_t k, std::size_t width) {
    return buf.data() + static_cast<std::size_t>(k) * width;
  }

  void scatter(std::uint32_t k, const RankBatch<Arith>& in) {
    value_type* dp = lane(dp_, k, block_);
    for (std::size_t j = 0; j < block_; ++j) {
      dp[j] = arith_->mul(packet_.val[j], in.at(packet_.y[j], k), *sat_);
    }
  }

  // agg[(x0 % B) + b1] += dp[b2] * (x0 + b1 == x[b2]) over all b1, b2 reduces
  // to one accumulation per entry: the indicator selects exactly one b1.
  void aggregate(std::uint32_t k, std::size_t begin, std::size_t end, std::size_t x_s) {
    value_type* agg = lane(agg_, k, 2 * block_);
    const value_type* dp = lane(dp_, k, block_);
    std::fill(agg, agg + 2 * block_, arith_->zero());
    for (std::size_t j = begin; j < end; ++j) {
      value_type& slot = agg[packet_.x[j] - x_s];
      slot = arith_->add(slot, dp[j], *sat_);
    }
  }

  void writeback(std::uint32_t k, std::size_t x_s, RankBatch<Arith>& out) {
    value_type* res1 = lane(res1_, k, block_);
    value_type* res2 = lane(res2_, k, block_);
    const value_type* agg = lane(agg_, k, 2 * block_);

    if (x_s == x_s_old_) {
      for (std::size_t j = 0; j < block_; ++j) {
        res1[j] = arith_->add(res1[j], agg[j], *sat_);
        res2[j] = arith_->add(res2[j], agg[j + block_], *sat_);
      }
    } else if (x_s == x_s_old_ + block_) {
      store(k, x_s_old_, res1, out);
      for (std::size_t j = 0; j < block_; ++j) {
        res1[j] = arith_->add(res2[j], agg[j], *sat_);
        res2[j] = agg[j + block_];
      }
    } else {
      // Jump of two or more blocks: both buffers are complete.
      store(k, x_s_old_, res1, out);
      store(k, x_s_old_ + block_, res2, out);
      for (std::size_t b = x_s_old_ + 2 * block_; b < x_s; b += block_) store_zero(k, b, out);
      for (std::size_t j = 0; j < block_; ++j) {
        res1[j] = agg[j];
        res2[j] = agg[j + block_];
      }
    }
  }

  void drain(std::uint32_t k, RankBatch<Arith>& out) {
    store(k, x_s_old_, lane(res1_, k, block_), out);
    store(k, x_s_old_ + block_, lane(res2_, k, block_), out);
    const std::size_t end = num_blocks_ * block_;
    for (std::size_t b = x_s_old_ + 2 * block_; b < end; b += block_) store_zero(k, b, out);
  }

  void store(std::uint32_t k, std::size_t block_start, const value_type* src,
             RankBatch<Arith>& out) {
    if (block_start >= num_vertices_) return;
    const std::size_t limit = std::min<std::size_t>(block_, num_vertices_ - block_start);
    for (std::size_t j = 0; j < limit; ++j) {
      out.at(static_cast<Vertex>(block_start + j), k) = src[j];
    }
    count_write(k, block_start);
  }

  void store_zero(std::uint32_t k, std::size_t block_start, RankBatch<Arith>& out) {
    if (block_start >= num_vertices_) return;
    const std::size_t limit = std::min<std::size_t>(block_, num_vertices_ - block_start);
    for (std::size_t j = 0; j < limit; ++j) {
      out.at(static_cast<Vertex>(block_start + j), k) = arith_->zero();
    }
    count_write(k, block_start);
  }

  void count_write(std::uint32_t k, std::size_t block_start) {
    if (stats_ != nullptr) ++stats_->block_writes[k * num_blocks_ + block_start / block_];
  }

  PacketStream<Arith> stream_;
  std::size_t block_;
  Packet<Arith> packet_;

  const Arith* arith_ = nullptr;
  SaturationCounter* sat_ = nullptr;
  SpmvStats* stats_ = nullptr;
  std::uint32_t kappa_ = 0;
  std::uint32_t num_vertices_ = 0;
  std::size_t num_blocks_ = 0;

  std::vector<value_type> dp_;    // kappa x B
  std::vector<value_type> agg_;   // kappa x 2B
  std::vector<value_type> res1_;  // kappa x B, destinations [x_s_old, x_s_old + B)
  std::vector<value_type> res2_;  // kappa x B, destinations [x_s_old + B, x_s_old + 2B)
  std::size_t x_s_old_ = 0;
};

template <class Arith>
RankBatch<Arith> spmv_stream(const CooGraph<Arith>& g, const RankBatch<Arith>& in,
                             SaturationCounter& sat, std::size_t block = 8,
                             SpmvStats* stats = nullptr) {
  StreamingSpmv<Arith> engine(g, block);
  return engine(in, sat, stats);
}

/// Plain per-entry accumulation in ascending (x, y) order, no packets.
template <class Arith>
void spmv_reference(const CooGraph<Arith>& g, const RankBatch<Arith>& in,
                    RankBatch<Arith>& out, SaturationCounter& sat) {
  detail::require_compatible(g, in);
  if (out.num_vertices != in.num_vertices || out.kappa != in.kappa ||
      !(out.arith == in.arith)) {
    out = RankBatch<Arith>(in.arith, in.num_vertices, in.kappa);
  }
  std::fill(out.values.begin(), out.values.end(), in.arith.zero());
  out.personalization = in.personalization;

  const auto x = g.x();
  const auto y = g.y();
  const auto val = g.val();
  std::vector<std::size_t> order;
  const bool sorted = [&] {
    for (std::size_t i = 1; i < x.size(); ++i) {
      if (x[i] < x[i - 1] || (x[i] == x[i - 1] && y[i] < y[i - 1])) return false;
    }
    return true;
  }();
  if (!sorted) {
    order.resize(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
    });
  }
  const std::uint32_t kappa = in.kappa;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const std::size_t i = sorted ? n : order[n];
    const auto src = in.row(y[i]);
    auto dst = out.row(x[i]);
    for (std::uint32_t k = 0; k < kappa; ++k) {
      dst[k] = in.arith.add(dst[k], in.arith.mul(val[i], src[k], sat), sat);
    }
  }
}

template <class Arith>
RankBatch<Arith> spmv_reference(const CooGraph<Arith>& g, const RankBatch<Arith>& in,
                                SaturationCounter& sat) {
  RankBatch<Arith> out(in.arith, in.num_vertices, in.kappa);
  spmv_reference(g, in, out, sat);
  return out;
}

inline RankBatch<FixedArith> spmv_oracle_quantized(const CooGraph<FixedArith>& g,
                                                   const RankBatch<FixedArith>& in,
                                                   SaturationCounter& sat) {
  return spmv_reference(g, in, sat);
}

inline RankBatch<Float64Arith> spmv_oracle_float(const CooGraph<Float64Arith>& g,
                                                 const RankBatch<Float64Arith>& in) {
  SaturationCounter unused;
  return spmv_reference(g, in, unused);
}

}  // namespace qppr

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <thread>
#include <vector>

// Deterministic reductions. Work is split into fixed-size blocks; each block
// is summed with Neumaier compensation and the block partials are combined in
// block order. The result is a pure function of the inputs, independent of
// how many worker threads ran the blocks.

namespace rvp {

inline constexpr std::size_t kReduceBlock = 8192;

struct Kahan {
  double s = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = s + v;
    if (std::abs(s) >= std::abs(v)) {
      c += (s - t) + v;
    } else {
      c += (v - t) + s;
    }
    s = t;
  }
  double get() const { return s + c; }
};

// fn(block_begin, block_end, block_index) over [0, n) in blocks of kReduceBlock.
// Blocks are claimed dynamically but any per-block output must be stored by
// block_index so the caller can combine in order.
template <class F>
void parallel_blocks(std::size_t n, int threads, F&& fn) {
  const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  if (threads <= 1 || nblocks <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b) {
      fn(b * kReduceBlock, std::min(n, (b + 1) * kReduceBlock), b);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= nblocks) return;
      fn(b * kReduceBlock, std::min(n, (b + 1) * kReduceBlock), b);
    }
  };
  std::vector<std::thread> pool;
  const int nw = std::min<int>(threads, static_cast<int>(nblocks));
  pool.reserve(nw);
  for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

template <class F>
double indexed_sum(std::size_t n, int threads, F&& term) {
  const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(nblocks, 0.0);
  parallel_blocks(n, threads, [&](std::size_t b0, std::size_t b1, std::size_t bi) {
    Kahan k;
    for (std::size_t i = b0; i < b1; ++i) k.add(term(i));
    partial[bi] = k.get();
  });
  Kahan total;
  for (double p : partial) total.add(p);
  return total.get();
}

// Order-insensitive max/min over a function of the index.
template <class F>
double indexed_max(std::size_t n, int threads, F&& term, double init) {
  const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(nblocks, init);
  parallel_blocks(n, threads, [&](std::size_t b0, std::size_t b1, std::size_t bi) {
    double m = init;
    for (std::size_t i = b0; i < b1; ++i) m = std::max(m, term(i));
    partial[bi] = m;
  });
  double m = init;
  for (double p : partial) m = std::max(m, p);
  return m;
}

template <class F>
double indexed_min(std::size_t n, int threads, F&& term, double init) {
  return -indexed_max(n, threads, [&](std::size_t i) { return -term(i); }, -init);
}

}  // namespace rvp

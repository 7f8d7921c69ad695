// Tiled parallel stabilization.
//
// The box is cut into slabs of `tile_size` layers along axis 0. Each round a
// worker relaxes its slabs with bulk topplings; chips sent across a slab face
// are parked in that face's buffer. At the barrier the buffers are folded
// into the neighbouring slabs and the newly unstable sites seed the next
// round. The final state is order independent, so scheduling does not affect
// the output.

#include <atomic>
#include <barrier>
#include <exception>
#include <mutex>
#include <thread>

#include "workspace.hpp"

namespace sandpile::detail {
namespace {

struct FaceBuffer {
  std::vector<std::int64_t> chips;
  std::vector<std::int64_t> touched;

  void add(std::int64_t position, std::int64_t t) {
    if (chips[position] == 0) touched.push_back(position);
    chips[position] += t;
  }
};

struct Slab {
  std::int64_t first_layer = 0;
  std::int64_t end_layer = 0;
  std::vector<std::int64_t> seeds;
  std::vector<std::int64_t> ring;
  FaceBuffer to_prev;
  FaceBuffer to_next;
};

class TiledRun {
 public:
  TiledRun(Workspace& ws, std::int64_t tile_size)
      : ws_(ws),
        box_(ws.box()),
        layer_(box_.stride(0)),
        two_d_(ws.two_d()),
        queued_(static_cast<std::size_t>(box_.size()), 0) {
    const std::int64_t side = box_.side();
    for (std::int64_t lo = 0; lo < side; lo += tile_size) {
      Slab slab;
      slab.first_layer = lo;
      slab.end_layer = std::min(side, lo + tile_size);
      slab.ring.resize(static_cast<std::size_t>((slab.end_layer - lo) * layer_));
      slab.to_prev.chips.assign(static_cast<std::size_t>(layer_), 0);
      slab.to_next.chips.assign(static_cast<std::size_t>(layer_), 0);
      slabs_.push_back(std::move(slab));
    }
  }

  PassStatus run(int worker_count) {
    const std::int64_t* c = ws_.counts();
    const std::uint8_t* edge = ws_.edge();
    bool any = false;
    for (std::int64_t i = 0; i < box_.size(); ++i) {
      if (c[i] < two_d_) continue;
      if (edge[i]) return PassStatus::NeedsGrowth;
      queued_[i] = 1;
      slabs_[slab_of(i)].seeds.push_back(i);
      any = true;
    }
    if (!any) return PassStatus::Stable;

    auto on_round_end = [this]() noexcept { merge(); };
    std::barrier sync(worker_count, on_round_end);
    auto work = [&](int worker) {
      for (;;) {
        for (std::size_t s = static_cast<std::size_t>(worker); s < slabs_.size(); s += worker_count) {
          if (stop_.load(std::memory_order_relaxed)) break;
          try {
            relax(slabs_[s]);
          } catch (...) {
            std::lock_guard lock(error_mutex_);
            if (!error_) error_ = std::current_exception();
            stop_ = true;
          }
        }
        sync.arrive_and_wait();
        if (done_) return;
      }
    };
    {
      std::vector<std::jthread> helpers;
      for (int w = 1; w < worker_count; ++w) helpers.emplace_back(work, w);
      work(0);
    }
    if (error_) std::rethrow_exception(error_);
    return need_growth_ ? PassStatus::NeedsGrowth : PassStatus::Stable;
  }

 private:
  std::size_t slab_of(std::int64_t i) const {
    const std::int64_t layer = i / layer_;
    for (std::size_t s = 0; s < slabs_.size(); ++s) {
      if (layer < slabs_[s].end_layer) return s;
    }
    return slabs_.size() - 1;
  }

  void relax(Slab& slab) {
    std::int64_t* const c = ws_.counts();
    std::int64_t* const odo = ws_.odometer();
    const std::uint8_t* const edge = ws_.edge();
    const std::int64_t lo = slab.first_layer * layer_;
    const std::int64_t hi = slab.end_layer * layer_;
    const std::int64_t capacity = static_cast<std::int64_t>(slab.ring.size());
    std::int64_t head = 0;
    std::int64_t pending = 0;
    auto push = [&](std::int64_t j) {
      std::int64_t slot = head + pending;
      if (slot >= capacity) slot -= capacity;
      slab.ring[slot] = j;
      queued_[j] = 1;
      ++pending;
    };
    for (const std::int64_t j : slab.seeds) {
      slab.ring[pending++] = j;
    }
    slab.seeds.clear();

    while (pending > 0) {
      const std::int64_t i = slab.ring[head];
      if (++head == capacity) head = 0;
      --pending;
      queued_[i] = 0;
      if (c[i] < two_d_) continue;
      const std::int64_t t = c[i] / two_d_;
      c[i] -= t * two_d_;
      add_topples(odo[i], t);
      bool grow = false;
      for (int a = 0; a < box_.dim(); ++a) {
        for (const std::int64_t j : {i + box_.stride(a), i - box_.stride(a)}) {
          if (j < lo) {
            slab.to_prev.add(j % layer_, t);
            continue;
          }
          if (j >= hi) {
            slab.to_next.add(j % layer_, t);
            continue;
          }
          c[j] += t;
          if (c[j] >= two_d_ && !queued_[j]) {
            if (edge[j]) {
              grow = true;
            } else {
              push(j);
            }
          }
        }
      }
      if (grow) {
        // Park the rest of the queue; the caller grows and rescans.
        need_growth_ = true;
        stop_ = true;
        drain(slab, head, pending);
        return;
      }
    }
  }

  void drain(Slab& slab, std::int64_t head, std::int64_t pending) {
    const std::int64_t capacity = static_cast<std::int64_t>(slab.ring.size());
    for (; pending > 0; --pending) {
      queued_[slab.ring[head]] = 0;
      if (++head == capacity) head = 0;
    }
  }

  void fold(FaceBuffer& buffer, std::int64_t layer, std::size_t target) {
    std::int64_t* const c = ws_.counts();
    const std::uint8_t* const edge = ws_.edge();
    for (const std::int64_t p : buffer.touched) {
      const std::int64_t j = layer * layer_ + p;
      c[j] += buffer.chips[p];
      buffer.chips[p] = 0;
      if (c[j] >= two_d_ && !queued_[j]) {
        if (edge[j]) {
          need_growth_ = true;
          continue;
        }
        queued_[j] = 1;
        slabs_[target].seeds.push_back(j);
      }
    }
    buffer.touched.clear();
  }

  // Runs once per round, after every worker has arrived.
  void merge() {
    for (std::size_t s = 0; s < slabs_.size(); ++s) {
      Slab& slab = slabs_[s];
      if (s > 0) fold(slab.to_prev, slab.first_layer - 1, s - 1);
      if (s + 1 < slabs_.size()) fold(slab.to_next, slab.end_layer, s + 1);
    }
    bool pending = false;
    for (const Slab& slab : slabs_) pending = pending || !slab.seeds.empty();
    if (need_growth_ || error_ || !pending) {
      done_ = true;
      if (need_growth_ || error_) {
        for (Slab& slab : slabs_) {
          for (const std::int64_t j : slab.seeds) queued_[j] = 0;
          slab.seeds.clear();
        }
      }
    }
  }

  Workspace& ws_;
  const LatticeBox box_;
  const std::int64_t layer_;
  const std::int64_t two_d_;
  std::vector<std::uint8_t> queued_;
  std::vector<Slab> slabs_;
  std::atomic<bool> stop_{false};
  std::atomic<bool> need_growth_{false};
  bool done_ = false;
  std::mutex error_mutex_;
  std::exception_ptr error_;
};

}  // namespace

PassStatus run_tiled(Workspace& ws, std::int64_t tile_size, int worker_count) {
  TiledRun run(ws, tile_size);
  return run.run(worker_count);
}

}  // namespace sandpile::detail

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include "flround/rng.hpp"

namespace flround {

inline constexpr std::size_t kTrialChunk = 2048;

// Runs trials [first, first + count). Trial t gets
// Rng(derive_seed(seed, t)) and `body(acc, t, rng)` records into a
// chunk-local copy of `empty`. Chunks are merged in chunk order, so the
// result does not depend on `threads`. Acc must provide merge(const Acc&).
template <class Acc, class Body>
Acc run_trial_range(std::size_t first, std::size_t count, std::uint64_t seed,
                    const Acc& empty, Body&& body, unsigned threads = 0) {
  const std::size_t chunks = (count + kTrialChunk - 1) / kTrialChunk;
  const std::size_t trials = first + count;
  std::vector<Acc> parts(chunks, empty);
  auto run_chunk = [&](std::size_t c) {
    const std::size_t lo = first + c * kTrialChunk;
    const std::size_t hi = std::min(trials, lo + kTrialChunk);
    for (std::size_t t = lo; t < hi; ++t) {
      Rng rng(derive_seed(seed, t));
      body(parts[c], t, rng);
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, std::max<std::size_t>(chunks, 1)));
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c; (c = next.fetch_add(1)) < chunks;) {
          try {
            run_chunk(c);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(chunks);
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }
  Acc total = empty;
  for (const Acc& part : parts) total.merge(part);
  return total;
}

template <class Acc, class Body>
Acc run_trials(std::size_t trials, std::uint64_t seed, const Acc& empty,
               Body&& body, unsigned threads = 0) {
  return run_trial_range(0, trials, seed, empty, std::forward<Body>(body),
                         threads);
}

}  // namespace flround

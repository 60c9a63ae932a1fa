#pragma once

// Chunked Monte Carlo driver. Workers claim whole chunks, accumulate them
// independently, and the results are folded in ascending chunk index, so the
// outcome is bit-identical for any worker count.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include "hocs/correlator.hpp"
#include "hocs/geometry.hpp"
#include "hocs/masks.hpp"
#include "hocs/rng.hpp"

namespace hocs {

struct EnsembleSpec {
  OpticalLayout layout;
  MaskMode mode;
  RngPolicy rng;
  std::int64_t samples = 0;       // K
  int alphabet_size = 0;          // 0 = continuous phases
};

// Evaluate all plan channels for sample k and accumulate.
inline void accumulate_sample(MomentAccumulator& acc, const EnsembleSpec& spec,
                              const std::vector<CompiledTarget>& compiled, std::int64_t k,
                              std::vector<std::vector<std::vector<double>>>& scratch) {
  PhaseMaskSample masks =
      generate_sample(spec.mode, spec.layout, spec.rng, k, spec.alphabet_size);
  const int n_arms = spec.layout.arm_count;
  const int m = spec.layout.pixel_count;
  std::vector<std::vector<cplx>> phasors(n_arms, std::vector<cplx>(m));
  for (int n = 0; n < n_arms; ++n)
    for (int p = 0; p < m; ++p) phasors[n][p] = std::polar(1.0, masks.phases[n][p]);
  scratch.resize(compiled.size());
  for (std::size_t ti = 0; ti < compiled.size(); ++ti) {
    scratch[ti].resize(compiled[ti].channels.size());
    for (std::size_t c = 0; c < compiled[ti].channels.size(); ++c)
      compiled[ti].channels[c].evaluate(phasors, scratch[ti][c]);
  }
  acc.accumulate(scratch);
}

// Run samples [first_sample, K) of the ensemble, resuming from a prior
// accumulator state (its chunk range must end exactly at first_sample).
inline MomentAccumulator run_ensemble(const EnsembleSpec& spec, const CorrelationPlan& plan,
                                      int workers, std::string fingerprint = {},
                                      MomentAccumulator* resume_from = nullptr) {
  spec.layout.validate();
  plan.validate();
  if (workers < 1) workers = 1;

  SourceGrid src = build_source_grid(spec.layout);
  auto compiled = compile_plan(plan, spec.layout, src);

  const std::int64_t cs = plan.chunk_size;
  std::int64_t first_chunk = 0;
  MomentAccumulator result = MomentAccumulator::make(plan, fingerprint);
  if (resume_from) {
    if (resume_from->fingerprint != fingerprint)
      throw std::invalid_argument("resume: configuration fingerprint mismatch");
    result = std::move(*resume_from);
    first_chunk = result.end_chunk;
  }
  const std::int64_t total_chunks = (spec.samples + cs - 1) / cs;
  if (first_chunk >= total_chunks) return result;

  std::mutex mu;
  std::condition_variable cv;
  std::map<std::int64_t, MomentAccumulator> done;
  std::atomic<std::int64_t> next{first_chunk};

  auto work = [&] {
    std::vector<std::vector<std::vector<double>>> scratch;
    for (;;) {
      std::int64_t c = next.fetch_add(1);
      if (c >= total_chunks) return;
      MomentAccumulator chunk_acc = MomentAccumulator::make(plan, fingerprint, c);
      std::int64_t lo = c * cs;
      std::int64_t hi = std::min(spec.samples, lo + cs);
      for (std::int64_t k = lo; k < hi; ++k)
        accumulate_sample(chunk_acc, spec, compiled, k, scratch);
      chunk_acc.close_chunk();
      {
        std::lock_guard<std::mutex> lk(mu);
        done.emplace(c, std::move(chunk_acc));
      }
      cv.notify_one();
    }
  };

  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);

  // Fold finished chunks in ascending order.
  std::int64_t want = first_chunk;
  {
    std::unique_lock<std::mutex> lk(mu);
    while (want < total_chunks) {
      cv.wait(lk, [&] { return done.count(want) > 0; });
      while (done.count(want) > 0) {
        auto it = done.find(want);
        MomentAccumulator chunk = std::move(it->second);
        done.erase(it);
        lk.unlock();
        result.merge(chunk);
        lk.lock();
        ++want;
      }
    }
  }
  for (auto& t : pool) t.join();
  return result;
}

}  // namespace hocs

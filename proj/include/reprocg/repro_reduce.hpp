#pragma once

// Reproducible dot products and sums over a simulated two-level topology:
// P processes, each owning a contiguous slice of the vectors, each slice
// tiled into chunks of bm elements that are handed to T workers
// (chunk c goes to worker c mod T).
//
//   exblas  worker Fpe(8) per worker, spills into a long accumulator; worker
//           state flushed in ascending worker order into one accumulator per
//           process; accumulators merged in ascending process order; one
//           rounding on the root.
//   opt     result and error Fpe(p) per worker, merged with fpe_sum; process
//           Fpes renormalized and merged with fpe_sum; NearSum on the root.
//   baseline  plain floating-point partial sums. Deterministic under an
//           in-order schedule, order dependent under a shuffled one.
//
// Rounding happens exactly once per reduction, so every simulated process
// observes the same scalar.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "reprocg/eft.hpp"
#include "reprocg/errors.hpp"
#include "reprocg/fpe.hpp"
#include "reprocg/long_accumulator.hpp"

namespace reprocg {

enum class Variant { baseline, exblas, opt };

[[nodiscard]] inline const char* to_string(Variant v) noexcept {
  switch (v) {
    case Variant::baseline: return "baseline";
    case Variant::exblas: return "exblas";
    case Variant::opt: return "opt";
  }
  return "?";
}

struct Topology {
  std::size_t processes = 1;
  std::size_t workers = 1;
  std::size_t chunk = 256;

  void validate() const {
    if (processes == 0 || workers == 0 || chunk == 0)
      throw usage_error("Topology: processes, workers and chunk must all be >= 1");
  }

  struct Range {
    std::size_t begin;
    std::size_t end;
  };

  // Balanced block distribution of [0, n) over the processes.
  [[nodiscard]] Range process_range(std::size_t n, std::size_t k) const noexcept {
    return {k * n / processes, (k + 1) * n / processes};
  }

  friend bool operator==(const Topology&, const Topology&) = default;
};

/// How the chunks of a process are executed. The reproducible variants
/// must produce identical bits under every mode.
class Schedule {
 public:
  enum class Mode { in_order, shuffled, threaded };

  static Schedule in_order() { return Schedule(Mode::in_order, 0); }
  // Each reduction visits the chunks in a fresh random permutation and, for
  // the baseline, combines partial sums in a random order.
  static Schedule shuffled(std::uint64_t seed) { return Schedule(Mode::shuffled, seed); }
  // One std::thread per worker; workers own disjoint state.
  static Schedule threaded() { return Schedule(Mode::threaded, 0); }

  [[nodiscard]] Mode mode() const noexcept { return mode_; }
  std::mt19937_64& rng() noexcept { return rng_; }

  [[nodiscard]] std::vector<std::size_t> order(std::size_t count) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (mode_ == Mode::shuffled) std::shuffle(idx.begin(), idx.end(), rng_);
    return idx;
  }

 private:
  Schedule(Mode mode, std::uint64_t seed) : mode_(mode), rng_(seed) {}

  Mode mode_;
  std::mt19937_64 rng_;
};

struct ReduceOutcome {
  double value = 0.0;
  bool residue_warning = false;
};

// One reduction: <x, y>, or sum(x) when y is empty.
struct DotTerm {
  std::span<const double> x;
  std::span<const double> y;
};

struct ReduceOptions {
  Topology topology{};
  std::size_t fpe_size = kDefaultFpeSize;  // opt variant only
};

namespace detail {

// Runs fn(worker_state, begin, end) for every chunk of [begin, end).
template <class State, class ChunkFn>
void for_each_chunk(const Topology& topo, Schedule& sched, std::size_t begin, std::size_t end,
                    std::vector<State>& workers, ChunkFn&& fn) {
  const std::size_t len = end - begin;
  const std::size_t chunks = (len + topo.chunk - 1) / topo.chunk;
  auto run = [&](std::size_t c) {
    const std::size_t b = begin + c * topo.chunk;
    fn(workers[c % topo.workers], b, std::min(b + topo.chunk, end));
  };
  if (sched.mode() == Schedule::Mode::threaded && topo.workers > 1 && chunks > 1) {
    std::vector<std::exception_ptr> errors(topo.workers);
    std::vector<std::thread> pool;
    pool.reserve(topo.workers);
    for (std::size_t w = 0; w < topo.workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t c = w; c < chunks; c += topo.workers) run(c);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    return;
  }
  if (sched.mode() == Schedule::Mode::shuffled) {
    for (std::size_t c : sched.order(chunks)) run(c);
  } else {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
  }
}

inline void check_term(const DotTerm& t) {
  if (!t.y.empty() && t.x.size() != t.y.size()) throw usage_error("dot: vector length mismatch");
}

// Addend validity for direct summation; products go through two_prod.
inline double checked_addend(double v) {
  if (!(std::abs(v) <= 0x1.fffffffffffffp+1023)) throw domain_error("sum: non-finite element");
  return v;
}

// Products and their error terms cascade through separate expansions, which
// keeps two independent dependency chains in flight.
struct ExblasWorker {
  Fpe result{kDefaultFpeSize};
  Fpe error{kDefaultFpeSize};
  LongAccumulator spill{};

  static void add(Fpe& fpe, LongAccumulator& acc, double v) noexcept {
    const double rest = fpe.absorb(v);
    if (rest != 0.0) acc.accumulate_unchecked(rest);
  }
  void add_result(double v) noexcept { add(result, spill, v); }
  void add_error(double v) noexcept { add(error, spill, v); }
};

inline LongAccumulator exblas_process_partial(const DotTerm& t, std::size_t begin, std::size_t end,
                                              const Topology& topo, Schedule& sched) {
  std::vector<ExblasWorker> workers(topo.workers);
  if (t.y.empty()) {
    for_each_chunk(topo, sched, begin, end, workers, [&](ExblasWorker& w, std::size_t b, std::size_t e) {
      for (std::size_t j = b; j < e; ++j) w.add_result(checked_addend(t.x[j]));
    });
  } else {
    for_each_chunk(topo, sched, begin, end, workers, [&](ExblasWorker& w, std::size_t b, std::size_t e) {
      for (std::size_t j = b; j < e; ++j) {
        const ResultError p = two_prod(t.x[j], t.y[j]);
        w.add_result(p.result);
        w.add_error(p.error);
      }
    });
  }
  // Flush, ascending worker index.
  LongAccumulator acc;
  for (const ExblasWorker& w : workers) {
    acc.merge(w.spill);
    for (double c : w.result.components()) acc.accumulate_unchecked(c);
    for (double c : w.error.components()) acc.accumulate_unchecked(c);
  }
  acc.normalize();
  if (acc.status() == LongAccumulator::Status::overflow) throw overflow_error("exdot: long accumulator overflow");
  return acc;
}

struct OptWorker {
  explicit OptWorker(std::size_t p) : result(p), error(p) {}
  Fpe result;
  Fpe error;
};

inline Fpe opt_process_partial(const DotTerm& t, std::size_t begin, std::size_t end, const Topology& topo,
                               Schedule& sched, std::size_t p) {
  std::vector<OptWorker> workers(topo.workers, OptWorker(p));
  if (t.y.empty()) {
    for_each_chunk(topo, sched, begin, end, workers, [&](OptWorker& w, std::size_t b, std::size_t e) {
      for (std::size_t j = b; j < e; ++j) w.result.accumulate(checked_addend(t.x[j]));
    });
  } else {
    for_each_chunk(topo, sched, begin, end, workers, [&](OptWorker& w, std::size_t b, std::size_t e) {
      for (std::size_t j = b; j < e; ++j) {
        const ResultError pr = two_prod(t.x[j], t.y[j]);
        w.result.accumulate(pr.result);
        w.error.accumulate(pr.error);
      }
    });
  }
  Fpe acc = fpe_sum(workers[0].result, workers[0].error);
  for (std::size_t w = 1; w < workers.size(); ++w)
    acc = fpe_sum(acc, fpe_sum(workers[w].result, workers[w].error));
  return renormalize(acc);
}

struct NaiveWorker {
  double sum = 0.0;
};

inline double baseline_process_partial(const DotTerm& t, std::size_t begin, std::size_t end,
                                       const Topology& topo, Schedule& sched) {
  std::vector<NaiveWorker> workers(topo.workers);
  for_each_chunk(topo, sched, begin, end, workers, [&](NaiveWorker& w, std::size_t b, std::size_t e) {
    double local = 0.0;
    if (t.y.empty()) {
      for (std::size_t j = b; j < e; ++j) local += t.x[j];
    } else {
      for (std::size_t j = b; j < e; ++j) local += t.x[j] * t.y[j];
    }
    w.sum += local;
  });
  double acc = 0.0;
  for (std::size_t w : sched.order(workers.size())) acc += workers[w].sum;
  return acc;
}

}  // namespace detail

/// Root-side merge of one exact partial per process, in ascending process
/// order, followed by a single rounding.
[[nodiscard]] inline double reduce_then_broadcast(std::span<const LongAccumulator> partials) {
  LongAccumulator root;
  for (const LongAccumulator& p : partials) root.merge(p);
  return root.round();
}

[[nodiscard]] inline ReduceOutcome reduce_then_broadcast(std::span<const Fpe> partials) {
  if (partials.empty()) return {};
  Fpe root = partials[0];
  for (std::size_t k = 1; k < partials.size(); ++k) root = fpe_sum(root, partials[k]);
  return {round_near_sum(root), root.residue()};
}

/// Performs several reductions in one combined phase: every process
/// computes its partials for all terms, ships them as a single message, and
/// the root merges and rounds each term. This is how the solver fuses the
/// <z, r> and <r, r> reductions.
[[nodiscard]] inline std::vector<ReduceOutcome> reduce_terms(Variant variant, std::span<const DotTerm> terms,
                                                             const ReduceOptions& opts, Schedule& sched) {
  const Topology& topo = opts.topology;
  topo.validate();
  if (terms.empty()) return {};
  const std::size_t n = terms[0].x.size();
  for (const DotTerm& t : terms) {
    detail::check_term(t);
    if (t.x.size() != n) throw usage_error("reduce_terms: terms of different length");
  }
  if (variant == Variant::opt && (opts.fpe_size < 2 || opts.fpe_size > kMaxFpeSize))
    throw usage_error("opt variant needs an Fpe size in [2, 16]");

  std::vector<ReduceOutcome> out(terms.size());
  if (variant == Variant::baseline) {
    std::vector<std::vector<double>> partials(terms.size(), std::vector<double>(topo.processes));
    for (std::size_t k = 0; k < topo.processes; ++k) {
      const auto r = topo.process_range(n, k);
      for (std::size_t i = 0; i < terms.size(); ++i)
        partials[i][k] = detail::baseline_process_partial(terms[i], r.begin, r.end, topo, sched);
    }
    for (std::size_t i = 0; i < terms.size(); ++i) {
      double acc = 0.0;
      for (std::size_t k : sched.order(topo.processes)) acc += partials[i][k];
      out[i].value = acc;
    }
    return out;
  }

  // One serialized message per process carrying every term's partial.
  std::vector<std::vector<std::byte>> messages(topo.processes);
  std::size_t stride = 0;
  for (std::size_t k = 0; k < topo.processes; ++k) {
    const auto r = topo.process_range(n, k);
    auto& msg = messages[k];
    for (const DotTerm& t : terms) {
      std::vector<std::byte> bytes =
          variant == Variant::exblas
              ? detail::exblas_process_partial(t, r.begin, r.end, topo, sched).to_bytes()
              : detail::opt_process_partial(t, r.begin, r.end, topo, sched, opts.fpe_size).to_bytes();
      stride = bytes.size();
      msg.insert(msg.end(), bytes.begin(), bytes.end());
    }
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (variant == Variant::exblas) {
      std::vector<LongAccumulator> partials;
      partials.reserve(topo.processes);
      for (const auto& msg : messages)
        partials.push_back(LongAccumulator::from_bytes(std::span(msg).subspan(i * stride, stride)));
      out[i].value = reduce_then_broadcast(partials);
    } else {
      std::vector<Fpe> partials;
      partials.reserve(topo.processes);
      for (const auto& msg : messages) partials.push_back(Fpe::from_bytes(std::span(msg).subspan(i * stride, stride)));
      out[i] = reduce_then_broadcast(partials);
    }
  }
  return out;
}

[[nodiscard]] inline ReduceOutcome reduce_term(Variant variant, DotTerm term, const ReduceOptions& opts,
                                               Schedule& sched) {
  return reduce_terms(variant, std::span<const DotTerm>(&term, 1), opts, sched).front();
}

[[nodiscard]] inline ReduceOutcome exdot_exblas(std::span<const double> x, std::span<const double> y,
                                                const Topology& topo, Schedule& sched) {
  if (x.size() != y.size()) throw usage_error("exdot: vector length mismatch");
  return reduce_term(Variant::exblas, {x, y}, {topo}, sched);
}

[[nodiscard]] inline ReduceOutcome exdot_exblas(std::span<const double> x, std::span<const double> y,
                                                const Topology& topo = {}) {
  Schedule sched = Schedule::in_order();
  return exdot_exblas(x, y, topo, sched);
}

[[nodiscard]] inline ReduceOutcome exdot_opt(std::span<const double> x, std::span<const double> y,
                                             const Topology& topo, std::size_t fpe_size, Schedule& sched) {
  if (x.size() != y.size()) throw usage_error("exdot: vector length mismatch");
  return reduce_term(Variant::opt, {x, y}, {topo, fpe_size}, sched);
}

[[nodiscard]] inline ReduceOutcome exdot_opt(std::span<const double> x, std::span<const double> y,
                                             const Topology& topo = {}, std::size_t fpe_size = kDefaultFpeSize) {
  Schedule sched = Schedule::in_order();
  return exdot_opt(x, y, topo, fpe_size, sched);
}

[[nodiscard]] inline ReduceOutcome exsum(std::span<const double> x, const Topology& topo, Variant variant,
                                         Schedule& sched, std::size_t fpe_size = kDefaultFpeSize) {
  return reduce_term(variant, {x, {}}, {topo, fpe_size}, sched);
}

[[nodiscard]] inline ReduceOutcome exsum(std::span<const double> x, const Topology& topo = {},
                                         Variant variant = Variant::exblas, std::size_t fpe_size = kDefaultFpeSize) {
  Schedule sched = Schedule::in_order();
  return exsum(x, topo, variant, sched, fpe_size);
}

[[nodiscard]] inline ReduceOutcome naive_dot(std::span<const double> x, std::span<const double> y,
                                             const Topology& topo, Schedule& sched) {
  if (x.size() != y.size()) throw usage_error("dot: vector length mismatch");
  return reduce_term(Variant::baseline, {x, y}, {topo}, sched);
}

}  // namespace reprocg

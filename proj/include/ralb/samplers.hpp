#pragma once

// Classical samplers over a Qubo: simulated annealing, tabu search and a
// clamp-and-solve decomposition that plays the role of a hybrid
// partitioning solver with a classical inner sampler.
//
// All samplers are deterministic in (model, parameters, seed). Read r draws
// from its own substream derive_seed(seed, {r}), so reads run in parallel and
// the aggregated SampleSet does not depend on the thread count.

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ralb/qubo.hpp"
#include "ralb/rng.hpp"

namespace ralb {

struct Sample {
  Bits bits;
  double energy = 0.0;  // x^T Q x, offset excluded
  std::size_t count = 0;
};

struct SamplerInfo {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> params;
};

struct SampleSet {
  /// Unique bitstrings, by count (descending), then energy, then bitstring.
  std::vector<Sample> entries;
  std::size_t num_reads = 0;
  SamplerInfo info;
  std::chrono::duration<double> wall_time{};

  /// Merges identical reads and recomputes every energy from `q`.
  static SampleSet aggregate(const Qubo& q, std::span<const Bits> reads, SamplerInfo info);
  /// Restores the canonical entry order.
  void sort_entries();
};

// --- incremental single-flip machinery --------------------------------------

/// Compressed adjacency of a Qubo: diagonal plus symmetric neighbour lists.
class Adjacency {
 public:
  struct Neighbor {
    std::uint32_t var;
    double weight;
  };

  explicit Adjacency(const Qubo& q);

  std::size_t size() const { return diag_.size(); }
  double diag(std::size_t u) const { return diag_[u]; }
  std::span<const Neighbor> neighbors(std::size_t u) const {
    return {nbrs_.data() + start_[u], nbrs_.data() + start_[u + 1]};
  }

 private:
  std::vector<double> diag_;
  std::vector<std::size_t> start_;
  std::vector<Neighbor> nbrs_;
};

/// Bitstring with a cached local field per variable, so a flip delta is O(1)
/// and applying a flip is O(degree).
class FlipState {
 public:
  FlipState(const Adjacency& adj, Bits start);

  /// Energy change of flipping u.
  double delta(std::size_t u) const {
    const double d = adj_->diag(u) + field_[u];
    return bits_[u] ? -d : d;
  }
  void flip(std::size_t u);

  const Bits& bits() const { return bits_; }
  /// Tracked incrementally; exact recomputation is Qubo::energy.
  double energy() const { return energy_; }
  /// sum_v Q_uv x_v over neighbours v.
  double field(std::size_t u) const { return field_[u]; }

 private:
  const Adjacency* adj_;
  Bits bits_;
  std::vector<double> field_;
  double energy_ = 0.0;
};

Bits random_bits(std::size_t n, Rng& rng);

// --- simulated annealing ----------------------------------------------------

/// Geometric inverse-temperature schedule.
struct AnnealSchedule {
  std::size_t num_sweeps = 1000;
  double beta_start = 0.1;
  double beta_end = 1.0;

  /// Hot end accepts the largest single-flip uphill move with probability
  /// 1/2, cold end accepts the smallest nonzero one with probability 1/100.
  static AnnealSchedule automatic(const Qubo& q, std::size_t num_sweeps = 1000);

  /// Throws std::invalid_argument unless 0 < beta_start < beta_end, finite,
  /// and num_sweeps >= 1.
  void validate() const;
  std::vector<double> betas() const;
};

struct RunOptions {
  bool random_order = false;  // per-sweep random visiting order
  unsigned threads = 0;       // 0: hardware concurrency
};

/// Metropolis single-flip sweeps from a uniform random start; the final
/// state of each read is the sample.
SampleSet simulated_anneal(const Qubo& q, std::size_t reads, const AnnealSchedule& schedule,
                           std::uint64_t seed, const RunOptions& options = {});

/// One annealing read; exposed for the decomposition solver and tests.
Bits anneal_read(const Adjacency& adj, std::span<const double> betas, Rng& rng, bool random_order);

// --- tabu search ------------------------------------------------------------

struct TabuParams {
  std::size_t tenure = 0;     // 0: min(20, max(1, N/4))
  std::size_t max_iters = 0;  // 0: 50 * N

  TabuParams resolved(std::size_t n) const;
};

/// Steepest-descent single-flip moves with a recency tabu list. A tabu move is
/// allowed when it improves on the best state of the read (aspiration).
/// Returns the best state seen per read.
SampleSet tabu_search(const Qubo& q, std::size_t reads, const TabuParams& params, std::uint64_t seed,
                      unsigned threads = 0);

/// Tabu walk from `start`; returns the best state seen (never worse than start).
Bits tabu_improve(const Adjacency& adj, Bits start, const TabuParams& params, Rng& rng);

// --- decomposition ----------------------------------------------------------

enum class SamplerKind { anneal, tabu, decompose };

std::string_view to_string(SamplerKind kind);
/// Accepts "sa", "tabu", "decomp". Throws std::invalid_argument otherwise.
SamplerKind parse_sampler_kind(std::string_view text);

struct DecomposeParams {
  std::size_t subsize = 16;
  SamplerKind inner = SamplerKind::anneal;  // anneal or tabu
  std::size_t inner_reads = 4;
  std::size_t inner_sweeps = 200;
  std::size_t max_passes = 8;   // full passes over the impact ordering
  std::size_t max_stall = 2;    // passes without improvement before stopping
  bool global_tabu = true;      // tabu pass on the full model after each pass
  TabuParams tabu{0, 0};        // global pass; max_iters 0 means 10 * N
};

/// Induced sub-QUBO over `vars` with every other variable clamped to its
/// value in `incumbent`. Clamped couplings fold into the sub-model's diagonal
/// and the clamped-only energy (plus the parent offset) into its offset, so
/// sub.energy_with_offset(s) == q.energy_with_offset(merge(...)).
struct ClampedSubproblem {
  Qubo sub;
  std::vector<std::size_t> vars;  // ascending parent indices
};

ClampedSubproblem clamp(const Qubo& q, std::span<const std::uint8_t> incumbent,
                        std::span<const std::size_t> vars);
Bits merge(std::span<const std::uint8_t> incumbent, const ClampedSubproblem& sub,
           std::span<const std::uint8_t> sub_bits);

/// |x_u (Q_uu + field_u)| + sum_v |Q_uv| for each variable.
std::vector<double> variable_impact(const Adjacency& adj, const FlipState& state);

/// Per read: random start, optional tabu polish, then passes over windows of
/// `subsize` variables taken in decreasing impact order. Each window is
/// clamped, solved by the inner sampler and accepted if not worse. Stops after
/// max_passes or max_stall passes without improvement.
SampleSet decompose_solve(const Qubo& q, std::size_t reads, const DecomposeParams& params,
                          std::uint64_t seed, unsigned threads = 0);

// --- dispatch ---------------------------------------------------------------

struct SamplerConfig {
  SamplerKind kind = SamplerKind::anneal;
  std::size_t sweeps = 1000;
  std::optional<double> beta_start;  // both unset: AnnealSchedule::automatic
  std::optional<double> beta_end;
  bool random_order = false;
  TabuParams tabu{0, 0};
  DecomposeParams decompose{};
  unsigned threads = 0;
};

SampleSet run_sampler(const Qubo& q, const SamplerConfig& config, std::size_t reads, std::uint64_t seed);

}  // namespace ralb

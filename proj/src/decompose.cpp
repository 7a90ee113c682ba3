#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ralb/parallel.hpp"
#include "ralb/samplers.hpp"

namespace ralb {

ClampedSubproblem clamp(const Qubo& q, std::span<const std::uint8_t> incumbent, std::span<const std::size_t> vars) {
  if (incumbent.size() != q.size()) throw std::invalid_argument("incumbent length mismatch");
  ClampedSubproblem out;
  out.vars.assign(vars.begin(), vars.end());
  std::sort(out.vars.begin(), out.vars.end());
  out.vars.erase(std::unique(out.vars.begin(), out.vars.end()), out.vars.end());

  constexpr auto kFree = static_cast<std::size_t>(-1);
  std::vector<std::size_t> local(q.size(), kFree);
  for (std::size_t s = 0; s < out.vars.size(); ++s) {
    if (out.vars[s] >= q.size()) throw std::out_of_range("subproblem variable out of range");
    local[out.vars[s]] = s;
  }

  out.sub = Qubo(out.vars.size());
  double clamped = q.offset();
  for (const auto& [key, value] : q.terms()) {
    const auto lu = local[key.first];
    const auto lv = local[key.second];
    if (lu != kFree && lv != kFree) {
      out.sub.add(lu, lv, value);
    } else if (lu != kFree) {
      if (incumbent[key.second]) out.sub.add(lu, lu, value);
    } else if (lv != kFree) {
      if (incumbent[key.first]) out.sub.add(lv, lv, value);
    } else if (incumbent[key.first] && incumbent[key.second]) {
      clamped += value;
    }
  }
  out.sub.add_offset(clamped);
  out.sub.drop_zeros();
  return out;
}

Bits merge(std::span<const std::uint8_t> incumbent, const ClampedSubproblem& sub, std::span<const std::uint8_t> sub_bits) {
  if (sub_bits.size() != sub.vars.size()) throw std::invalid_argument("sub-solution length mismatch");
  Bits out(incumbent.begin(), incumbent.end());
  for (std::size_t s = 0; s < sub.vars.size(); ++s) out[sub.vars[s]] = sub_bits[s];
  return out;
}

std::vector<double> variable_impact(const Adjacency& adj, const FlipState& state) {
  std::vector<double> impact(adj.size(), 0.0);
  for (std::size_t u = 0; u < adj.size(); ++u) {
    double weight = 0.0;
    for (const auto& nb : adj.neighbors(u)) weight += std::abs(nb.weight);
    const double contribution = state.bits()[u] ? adj.diag(u) + state.field(u) : 0.0;
    impact[u] = std::abs(contribution) + weight;
  }
  return impact;
}

namespace {

Bits solve_sub(const Qubo& sub, const DecomposeParams& params, Rng& rng) {
  const Adjacency adj(sub);
  Bits best;
  double best_energy = 0.0;
  std::vector<double> betas;
  if (params.inner == SamplerKind::anneal) betas = AnnealSchedule::automatic(sub, params.inner_sweeps).betas();
  for (std::size_t r = 0; r < std::max<std::size_t>(params.inner_reads, 1); ++r) {
    Bits candidate = params.inner == SamplerKind::anneal
                         ? anneal_read(adj, betas, rng, false)
                         : tabu_improve(adj, random_bits(sub.size(), rng), TabuParams{}, rng);
    const double e = sub.energy(candidate);
    if (best.empty() || e < best_energy) {
      best = std::move(candidate);
      best_energy = e;
    }
  }
  return best;
}

Bits decompose_read(const Qubo& q, const Adjacency& adj, const DecomposeParams& params, const TabuParams& global,
                    Rng& rng) {
  const auto n = q.size();
  Bits x = random_bits(n, rng);
  if (params.global_tabu) x = tabu_improve(adj, std::move(x), global, rng);
  double energy = q.energy(x);
  constexpr double kEps = 1e-9;

  const std::size_t window = std::min(params.subsize, n);
  std::size_t stall = 0;
  for (std::size_t pass = 0; pass < params.max_passes && stall < params.max_stall; ++pass) {
    const double pass_start = energy;

    const FlipState state(adj, x);
    const auto impact = variable_impact(adj, state);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return impact[a] > impact[b]; });

    for (std::size_t begin = 0; begin < n; begin += window) {
      // A short last window is widened backwards to the full size.
      const std::size_t first = std::min(begin, n - window);
      std::span<const std::size_t> vars(order.data() + first, window);
      const auto sub = clamp(q, x, vars);
      const auto sub_bits = solve_sub(sub.sub, params, rng);
      auto candidate = merge(x, sub, sub_bits);
      const double e = q.energy(candidate);
      if (e <= energy) {
        x = std::move(candidate);
        energy = e;
      }
    }
    if (params.global_tabu) {
      x = tabu_improve(adj, std::move(x), global, rng);
      energy = q.energy(x);
    }
    stall = energy < pass_start - kEps ? 0 : stall + 1;
  }
  return x;
}

}  // namespace

SampleSet decompose_solve(const Qubo& q, std::size_t reads, const DecomposeParams& params, std::uint64_t seed,
                          unsigned threads) {
  if (reads < 1) throw std::invalid_argument("reads must be >= 1");
  if (params.subsize < 1 || params.subsize > q.size()) {
    throw std::invalid_argument("subsize must be in [1, " + std::to_string(q.size()) + "]");
  }
  if (params.inner == SamplerKind::decompose) throw std::invalid_argument("inner sampler must be sa or tabu");
  const auto start = std::chrono::steady_clock::now();
  const Adjacency adj(q);
  TabuParams global = params.tabu;
  if (global.max_iters == 0) global.max_iters = 10 * std::max<std::size_t>(q.size(), 1);
  global = global.resolved(q.size());

  std::vector<Bits> results(reads);
  parallel_for(reads, threads, [&](std::size_t r) {
    Rng rng(derive_seed(seed, {r}));
    results[r] = decompose_read(q, adj, params, global, rng);
  });

  SamplerInfo info{"decomp",
                   seed,
                   {{"subsize", std::to_string(params.subsize)},
                    {"inner", std::string(to_string(params.inner))},
                    {"inner_reads", std::to_string(params.inner_reads)},
                    {"inner_sweeps", std::to_string(params.inner_sweeps)},
                    {"max_passes", std::to_string(params.max_passes)},
                    {"max_stall", std::to_string(params.max_stall)},
                    {"global_tabu", params.global_tabu ? "true" : "false"},
                    {"tabu_tenure", std::to_string(global.tenure)},
                    {"tabu_iters", std::to_string(global.max_iters)}}};
  auto set = SampleSet::aggregate(q, results, std::move(info));
  set.wall_time = std::chrono::steady_clock::now() - start;
  return set;
}

}  // namespace ralb

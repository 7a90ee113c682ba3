#include "ralb/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "ralb/ising.hpp"
#include "ralb/parallel.hpp"

namespace ralb {

// --- SampleSet --------------------------------------------------------------

void SampleSet::sort_entries() {
  std::sort(entries.begin(), entries.end(), [](const Sample& a, const Sample& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.bits < b.bits;
  });
}

SampleSet SampleSet::aggregate(const Qubo& q, std::span<const Bits> reads, SamplerInfo info) {
  SampleSet set;
  set.num_reads = reads.size();
  set.info = std::move(info);
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& bits : reads) {
    auto key = bits_to_string(bits);
    auto [it, inserted] = slot.try_emplace(std::move(key), set.entries.size());
    if (inserted) {
      set.entries.push_back({bits, q.energy(bits), 0});
    }
    ++set.entries[it->second].count;
  }
  set.sort_entries();
  return set;
}

// --- Adjacency / FlipState --------------------------------------------------

Adjacency::Adjacency(const Qubo& q) : diag_(q.size(), 0.0), start_(q.size() + 1, 0) {
  std::vector<std::size_t> degree(q.size(), 0);
  for (const auto& [key, value] : q.terms()) {
    if (key.first == key.second) {
      diag_[key.first] = value;
    } else {
      ++degree[key.first];
      ++degree[key.second];
    }
  }
  for (std::size_t u = 0; u < q.size(); ++u) start_[u + 1] = start_[u] + degree[u];
  nbrs_.resize(start_.back());
  std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
  for (const auto& [key, value] : q.terms()) {
    if (key.first == key.second) continue;
    nbrs_[fill[key.first]++] = {key.second, value};
    nbrs_[fill[key.second]++] = {key.first, value};
  }
}

FlipState::FlipState(const Adjacency& adj, Bits start) : adj_(&adj), bits_(std::move(start)), field_(adj.size(), 0.0) {
  if (bits_.size() != adj.size()) throw std::invalid_argument("start state length mismatch");
  for (std::size_t u = 0; u < bits_.size(); ++u) {
    if (!bits_[u]) continue;
    energy_ += adj.diag(u);
    for (const auto& nb : adj.neighbors(u)) {
      field_[nb.var] += nb.weight;
      if (nb.var > u && bits_[nb.var]) energy_ += nb.weight;
    }
  }
}

void FlipState::flip(std::size_t u) {
  energy_ += delta(u);
  const double sign = bits_[u] ? -1.0 : 1.0;
  bits_[u] ^= 1;
  for (const auto& nb : adj_->neighbors(u)) field_[nb.var] += sign * nb.weight;
}

Bits random_bits(std::size_t n, Rng& rng) {
  Bits b(n);
  for (auto& v : b) v = rng.coin() ? 1 : 0;
  return b;
}

// --- simulated annealing ----------------------------------------------------

AnnealSchedule AnnealSchedule::automatic(const Qubo& q, std::size_t num_sweeps) {
  // Bounds are taken on the spin form, where flipping spin u costs
  // 2 |h_u + sum_v J_uv s_v|. The hot end accepts the largest such move with
  // probability 1/2; the cold end accepts the smallest nonzero one with
  // probability 0.01 / (number of spins sharing that smallest gap).
  const auto spins = qubo_to_ising(q);
  std::vector<double> sum_abs(q.size(), 0.0);
  std::vector<double> min_abs(q.size(), std::numeric_limits<double>::infinity());
  for (std::size_t u = 0; u < q.size(); ++u) {
    const double a = std::abs(spins.h[u]);
    sum_abs[u] = a;
    if (a != 0.0) min_abs[u] = a;
  }
  for (const auto& [key, value] : spins.J) {
    const double a = std::abs(value);
    for (auto u : {key.first, key.second}) {
      sum_abs[u] += a;
      min_abs[u] = std::min(min_abs[u], a);
    }
  }
  AnnealSchedule s;
  s.num_sweeps = num_sweeps;
  const double max_field = sum_abs.empty() ? 0.0 : *std::max_element(sum_abs.begin(), sum_abs.end());
  const double min_field = min_abs.empty() ? 0.0 : *std::min_element(min_abs.begin(), min_abs.end());
  if (max_field > 0.0 && std::isfinite(min_field)) {
    const auto ties = std::count(min_abs.begin(), min_abs.end(), min_field);
    s.beta_start = std::log(2.0) / (2.0 * max_field);
    s.beta_end = std::log(static_cast<double>(ties) / 0.01) / (2.0 * min_field);
  }
  return s;
}

void AnnealSchedule::validate() const {
  if (num_sweeps < 1) throw std::invalid_argument("annealing needs at least one sweep");
  if (!(std::isfinite(beta_start) && std::isfinite(beta_end) && beta_start > 0.0 && beta_start < beta_end)) {
    throw std::invalid_argument("annealing needs 0 < beta_start < beta_end");
  }
}

std::vector<double> AnnealSchedule::betas() const {
  validate();
  std::vector<double> out(num_sweeps);
  if (num_sweeps == 1) {
    out[0] = beta_end;
    return out;
  }
  const double ratio = std::log(beta_end / beta_start);
  for (std::size_t s = 0; s < num_sweeps; ++s) {
    out[s] = beta_start * std::exp(ratio * static_cast<double>(s) / static_cast<double>(num_sweeps - 1));
  }
  return out;
}

Bits anneal_read(const Adjacency& adj, std::span<const double> betas, Rng& rng, bool random_order) {
  const auto n = adj.size();
  FlipState state(adj, random_bits(n, rng));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (double beta : betas) {
    if (random_order) {
      for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    }
    for (std::size_t u : order) {
      const double d = state.delta(u);
      // exp(-40) is below the resolution of uniform(), so skip the draw.
      const double x = beta * d;
      if (x <= 0.0 || (x < 40.0 && rng.uniform() < std::exp(-x))) state.flip(u);
    }
  }
  return state.bits();
}

namespace {

std::string param(double v) { return format_double(v); }
std::string param(std::size_t v) { return std::to_string(v); }

}  // namespace

SampleSet simulated_anneal(const Qubo& q, std::size_t reads, const AnnealSchedule& schedule, std::uint64_t seed,
                           const RunOptions& options) {
  if (reads < 1) throw std::invalid_argument("reads must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const auto betas = schedule.betas();
  const Adjacency adj(q);
  std::vector<Bits> results(reads);
  parallel_for(reads, options.threads, [&](std::size_t r) {
    Rng rng(derive_seed(seed, {r}));
    results[r] = anneal_read(adj, betas, rng, options.random_order);
  });
  SamplerInfo info{"sa",
                   seed,
                   {{"num_sweeps", param(schedule.num_sweeps)},
                    {"beta_start", param(schedule.beta_start)},
                    {"beta_end", param(schedule.beta_end)},
                    {"schedule", "geometric"},
                    {"order", options.random_order ? "random" : "sequential"}}};
  auto set = SampleSet::aggregate(q, results, std::move(info));
  set.wall_time = std::chrono::steady_clock::now() - start;
  return set;
}

// --- tabu -------------------------------------------------------------------

TabuParams TabuParams::resolved(std::size_t n) const {
  TabuParams p = *this;
  if (p.tenure == 0) p.tenure = std::min<std::size_t>(20, std::max<std::size_t>(1, n / 4));
  if (p.max_iters == 0) p.max_iters = 50 * std::max<std::size_t>(n, 1);
  return p;
}

Bits tabu_improve(const Adjacency& adj, Bits start, const TabuParams& params, Rng& rng) {
  const auto n = adj.size();
  if (n == 0) return start;
  const auto p = params.resolved(n);
  const auto tenure = std::min(p.tenure, n - 1);  // keep at least one move open
  FlipState state(adj, std::move(start));
  Bits best = state.bits();
  double best_energy = state.energy();
  std::vector<std::size_t> tabu_until(n, 0);
  constexpr double kEps = 1e-9;

  for (std::size_t it = 1; it <= p.max_iters; ++it) {
    std::size_t chosen = n;
    double chosen_delta = std::numeric_limits<double>::infinity();
    std::size_t ties = 0;
    for (std::size_t u = 0; u < n; ++u) {
      const double d = state.delta(u);
      const bool allowed = tabu_until[u] < it || state.energy() + d < best_energy - kEps;
      if (!allowed) continue;
      if (d < chosen_delta - kEps) {
        chosen = u;
        chosen_delta = d;
        ties = 1;
      } else if (d <= chosen_delta + kEps && rng.below(++ties) == 0) {
        chosen = u;
      }
    }
    if (chosen == n) continue;
    state.flip(chosen);
    tabu_until[chosen] = it + tenure;
    if (state.energy() < best_energy - kEps) {
      best_energy = state.energy();
      best = state.bits();
    }
  }
  return best;
}

SampleSet tabu_search(const Qubo& q, std::size_t reads, const TabuParams& params, std::uint64_t seed,
                      unsigned threads) {
  if (reads < 1) throw std::invalid_argument("reads must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const Adjacency adj(q);
  const auto p = params.resolved(q.size());
  std::vector<Bits> results(reads);
  parallel_for(reads, threads, [&](std::size_t r) {
    Rng rng(derive_seed(seed, {r}));
    auto init = random_bits(q.size(), rng);
    results[r] = tabu_improve(adj, std::move(init), p, rng);
  });
  SamplerInfo info{"tabu", seed, {{"tenure", param(p.tenure)}, {"max_iters", param(p.max_iters)}}};
  auto set = SampleSet::aggregate(q, results, std::move(info));
  set.wall_time = std::chrono::steady_clock::now() - start;
  return set;
}

// --- dispatch ---------------------------------------------------------------

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::anneal: return "sa";
    case SamplerKind::tabu: return "tabu";
    case SamplerKind::decompose: return "decomp";
  }
  return "?";
}

SamplerKind parse_sampler_kind(std::string_view text) {
  if (text == "sa") return SamplerKind::anneal;
  if (text == "tabu") return SamplerKind::tabu;
  if (text == "decomp") return SamplerKind::decompose;
  throw std::invalid_argument("unknown sampler '" + std::string(text) + "' (expected sa, tabu or decomp)");
}

SampleSet run_sampler(const Qubo& q, const SamplerConfig& config, std::size_t reads, std::uint64_t seed) {
  switch (config.kind) {
    case SamplerKind::anneal: {
      auto schedule = AnnealSchedule::automatic(q, config.sweeps);
      if (config.beta_start) schedule.beta_start = *config.beta_start;
      if (config.beta_end) schedule.beta_end = *config.beta_end;
      return simulated_anneal(q, reads, schedule, seed, {config.random_order, config.threads});
    }
    case SamplerKind::tabu: return tabu_search(q, reads, config.tabu, seed, config.threads);
    case SamplerKind::decompose: return decompose_solve(q, reads, config.decompose, seed, config.threads);
  }
  throw std::invalid_argument("unknown sampler kind");
}

}  // namespace ralb

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "ralb/samplers.hpp"

using namespace ralb;
using Catch::Approx;

namespace {

Qubo random_qubo(std::uint64_t seed, std::size_t n, double density = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-4.0, 4.0);
  std::bernoulli_distribution keep(density);
  Qubo q(n);
  for (std::size_t u = 0; u < n; ++u) {
    q.add(u, u, coef(rng));
    for (std::size_t v = u + 1; v < n; ++v) {
      if (keep(rng)) q.add(u, v, coef(rng));
    }
  }
  q.add_offset(coef(rng));
  return q;
}

double ground_energy(const Qubo& q) {
  double best = INFINITY;
  for (std::uint64_t w = 0; w < (std::uint64_t{1} << q.size()); ++w) {
    best = std::min(best, q.energy(oracle::bits_of(w, q.size())));
  }
  return best;
}

double best_energy(const SampleSet& set) {
  double best = INFINITY;
  for (const auto& s : set.entries) best = std::min(best, s.energy);
  return best;
}

void check_consistent(const Qubo& q, const SampleSet& set, std::size_t reads) {
  std::size_t total = 0;
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const auto& s = set.entries[i];
    total += s.count;
    CHECK(s.energy == q.energy(s.bits));
    if (i > 0) CHECK(set.entries[i - 1].count >= s.count);
  }
  CHECK(total == reads);
  CHECK(set.num_reads == reads);
}

bool same(const SampleSet& a, const SampleSet& b) {
  if (a.entries.size() != b.entries.size() || a.num_reads != b.num_reads) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const auto &x = a.entries[i], &y = b.entries[i];
    if (x.bits != y.bits || x.count != y.count || x.energy != y.energy) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("flip deltas and tracked energy are exact") {
  const auto q = random_qubo(1, 14);
  const Adjacency adj(q);
  Rng rng(5);
  FlipState state(adj, random_bits(14, rng));
  CHECK(state.energy() == Approx(q.energy(state.bits())));
  for (int step = 0; step < 300; ++step) {
    const auto u = static_cast<std::size_t>(rng.below(14));
    auto flipped = state.bits();
    flipped[u] ^= 1;
    CHECK(state.delta(u) == Approx(q.energy(flipped) - q.energy(state.bits())).margin(1e-9));
    state.flip(u);
    CHECK(state.bits() == flipped);
  }
  CHECK(state.energy() == Approx(q.energy(state.bits())).margin(1e-9));
}

TEST_CASE("aggregate merges reads and recomputes energies") {
  Qubo q(2);
  q.add(0, 0, -1.0);
  q.add(0, 1, 3.0);
  const std::vector<Bits> reads{{1, 0}, {0, 1}, {1, 0}, {1, 1}, {1, 0}};
  const auto set = SampleSet::aggregate(q, reads, {"manual", 0, {}});
  REQUIRE(set.entries.size() == 3);
  CHECK(set.entries[0].bits == Bits{1, 0});
  CHECK(set.entries[0].count == 3);
  CHECK(set.entries[0].energy == -1.0);
  CHECK(set.entries[1].bits == Bits{0, 1});  // count ties break on energy
  check_consistent(q, set, 5);
}

TEST_CASE("annealing schedule") {
  AnnealSchedule s{5, 0.5, 8.0};
  const auto betas = s.betas();
  REQUIRE(betas.size() == 5);
  CHECK(betas.front() == Approx(0.5));
  CHECK(betas.back() == Approx(8.0));
  CHECK(betas[2] == Approx(2.0));
  CHECK_THROWS_AS((AnnealSchedule{0, 0.5, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((AnnealSchedule{10, 1.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((AnnealSchedule{10, 0.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((AnnealSchedule{10, 0.1, INFINITY}.validate()), std::invalid_argument);

  const auto q = random_qubo(2, 10);
  const auto automatic = AnnealSchedule::automatic(q, 300);
  CHECK(automatic.num_sweeps == 300);
  CHECK_NOTHROW(automatic.validate());
}

TEST_CASE("cold annealing settles a single variable") {
  for (const double c : {1.0, -1.0}) {
    Qubo q(1);
    q.add(0, 0, c);
    const auto set = simulated_anneal(q, 200, {500, 1.0, 100.0}, 3, {.threads = 1});
    REQUIRE(set.entries.size() == 1);
    CHECK(set.entries[0].bits == Bits{static_cast<std::uint8_t>(c < 0)});
    CHECK(set.entries[0].count == 200);
  }
}

TEST_CASE("samplers reach the ground state of small models") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto q = random_qubo(100 + seed, 10);
    const double ground = ground_energy(q);
    const auto sa = simulated_anneal(q, 20, AnnealSchedule::automatic(q, 500), seed, {.threads = 1});
    const auto tabu = tabu_search(q, 20, {}, seed, 1);
    const auto dec = decompose_solve(q, 5, {.subsize = 4}, seed, 1);
    CHECK(best_energy(sa) == Approx(ground).margin(1e-9));
    CHECK(best_energy(tabu) == Approx(ground).margin(1e-9));
    CHECK(best_energy(dec) == Approx(ground).margin(1e-9));
    check_consistent(q, sa, 20);
    check_consistent(q, tabu, 20);
    check_consistent(q, dec, 5);
  }
}

TEST_CASE("tabu escapes a frustrated pair") {
  Qubo q(2);
  q.add(0, 0, -1.0);
  q.add(1, 1, -1.0);
  q.add(0, 1, 3.0);
  const auto set = tabu_search(q, 10, {}, 1, 1);
  for (const auto& s : set.entries) {
    CHECK(s.energy == -1.0);
    CHECK(s.bits[0] + s.bits[1] == 1);
  }
}

TEST_CASE("tabu keeps up with annealing on paired trials") {
  int wins = 0;
  const int trials = 10;
  for (int t = 0; t < trials; ++t) {
    const auto q = random_qubo(500 + static_cast<std::uint64_t>(t), 12);
    const auto sa = simulated_anneal(q, 10, AnnealSchedule::automatic(q, 200), t, {.threads = 1});
    const auto tabu = tabu_search(q, 10, {}, t, 1);
    if (best_energy(tabu) <= best_energy(sa) + 1e-9) ++wins;
  }
  CHECK(wins * 2 >= trials);
}

TEST_CASE("tabu parameters resolve from the model size") {
  const auto p = TabuParams{}.resolved(64);
  CHECK(p.tenure == 16);
  CHECK(p.max_iters == 3200);
  CHECK(TabuParams{}.resolved(200).tenure == 20);
  CHECK(TabuParams{3, 7}.resolved(64).tenure == 3);
}

TEST_CASE("results depend on the seed only") {
  const auto q = random_qubo(9, 24);
  const auto sched = AnnealSchedule::automatic(q, 200);
  for (const SamplerKind kind : {SamplerKind::anneal, SamplerKind::tabu, SamplerKind::decompose}) {
    SamplerConfig one{.kind = kind, .sweeps = 20, .threads = 1};
    one.decompose.subsize = 8;
    auto four = one;
    four.threads = 4;
    const auto a = run_sampler(q, one, 40, 77);
    const auto b = run_sampler(q, four, 40, 77);
    const auto c = run_sampler(q, one, 40, 78);
    CHECK(same(a, b));
    // Tabu and decomposition may both converge to the ground state.
    if (kind == SamplerKind::anneal) CHECK_FALSE(same(a, c));
    CHECK(c.info.seed == 78);
    check_consistent(q, a, 40);
  }
  CHECK(same(simulated_anneal(q, 30, sched, 4, {.random_order = true, .threads = 1}),
             simulated_anneal(q, 30, sched, 4, {.random_order = true, .threads = 3})));
}

TEST_CASE("clamped subproblems reproduce the full energy") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 11);
    const auto q = random_qubo(1000 + static_cast<std::uint64_t>(trial), n);
    const auto incumbent = oracle::bits_of(rng(), n);
    std::vector<std::size_t> vars;
    for (std::size_t u = 0; u < n; ++u) {
      if (rng() % 2) vars.push_back(u);
    }
    if (vars.empty()) vars.push_back(0);
    const auto sub = clamp(q, incumbent, vars);
    REQUIRE(sub.sub.size() == vars.size());
    for (std::uint64_t w = 0; w < (std::uint64_t{1} << vars.size()); ++w) {
      const auto s = oracle::bits_of(w, vars.size());
      const auto full = merge(incumbent, sub, s);
      for (std::size_t u = 0; u < n; ++u) {
        if (!std::binary_search(vars.begin(), vars.end(), u)) CHECK(full[u] == incumbent[u]);
      }
      CHECK(sub.sub.energy_with_offset(s) == Approx(q.energy_with_offset(full)).margin(1e-9));
    }
  }
}

TEST_CASE("whole-model window behaves like the inner sampler") {
  const auto q = random_qubo(12, 12);
  const double ground = ground_energy(q);
  for (const SamplerKind inner : {SamplerKind::anneal, SamplerKind::tabu}) {
    const auto set = decompose_solve(q, 10, {.subsize = 12, .inner = inner, .global_tabu = false}, 5, 1);
    check_consistent(q, set, 10);
    CHECK(best_energy(set) == Approx(ground).margin(1e-9));
  }
}

TEST_CASE("variable impact is non-negative") {
  const auto q = random_qubo(3, 16);
  const Adjacency adj(q);
  Rng rng(1);
  FlipState state(adj, random_bits(16, rng));
  for (double v : variable_impact(adj, state)) CHECK(v >= 0.0);
}

TEST_CASE("sampler names") {
  CHECK(parse_sampler_kind("sa") == SamplerKind::anneal);
  CHECK(parse_sampler_kind("decomp") == SamplerKind::decompose);
  CHECK(to_string(SamplerKind::tabu) == "tabu");
  CHECK_THROWS_AS(parse_sampler_kind("qpu"), std::invalid_argument);
}

TEST_CASE("random bits use both values") {
  Rng rng(8);
  const auto b = random_bits(1000, rng);
  const auto ones = std::accumulate(b.begin(), b.end(), 0);
  CHECK(ones > 400);
  CHECK(ones < 600);
}

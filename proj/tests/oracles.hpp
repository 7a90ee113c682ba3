#pragma once

// Test-only reference implementations. None of these call into the library's
// constraint, energy or search code; they work from the raw instance data.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ralb/instance.hpp"
#include "ralb/qubo.hpp"

namespace oracle {

/// Direct transcription of the IP constraints. A task's station is
/// 1-based; an unplaced task contributes nothing to any sum.
inline bool feasible(const ralb::Instance& inst, const ralb::Assignment& a) {
  const int n = inst.num_tasks, r = inst.num_equipment, m = inst.num_workstations;
  std::vector<std::int64_t> load(static_cast<std::size_t>(r * m), 0), station(static_cast<std::size_t>(m), 0);
  std::vector<int> at(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const auto& p = a.tasks[static_cast<std::size_t>(i)];
    if (p.state != ralb::PlacementState::assigned) return false;  // each task exactly once
    const int j = p.where.equipment, k = p.where.station;
    const auto t = inst.task_times[static_cast<std::size_t>(i * r + j)];
    if (t < 0) return false;
    load[static_cast<std::size_t>(j * m + k)] += t;
    station[static_cast<std::size_t>(k)] += t;
    at[static_cast<std::size_t>(i)] = k + 1;
  }
  for (int j = 0; j < r; ++j) {
    for (int k = 0; k < m; ++k) {
      const auto cap = a.active[static_cast<std::size_t>(j * m + k)] ? inst.cycle_time : 0;
      if (load[static_cast<std::size_t>(j * m + k)] > cap) return false;
    }
  }
  for (int k = 0; k < m; ++k) {
    if (station[static_cast<std::size_t>(k)] > inst.cycle_time) return false;
  }
  for (const auto& e : inst.precedence_edges) {
    if (at[static_cast<std::size_t>(e.before)] > at[static_cast<std::size_t>(e.after)]) return false;
  }
  return true;
}

inline std::int64_t cost(const ralb::Instance& inst, const ralb::Assignment& a) {
  std::int64_t c = 0;
  for (int j = 0; j < inst.num_equipment; ++j) {
    for (int k = 0; k < inst.num_workstations; ++k) {
      if (a.active[static_cast<std::size_t>(j * inst.num_workstations + k)]) c += inst.equipment_costs[j];
    }
  }
  return c;
}

struct BruteForce {
  std::optional<std::int64_t> optimum;
  /// Optimal assignments with equipment active exactly where used.
  std::vector<ralb::Assignment> optima;
  std::size_t feasible_count = 0;
};

/// Enumerates every placement of every task onto (equipment, station),
/// activates exactly the used pairs and keeps the cheapest feasible ones.
inline BruteForce brute_force(const ralb::Instance& inst) {
  BruteForce out;
  const int n = inst.num_tasks, r = inst.num_equipment, m = inst.num_workstations;
  ralb::Assignment a;
  a.num_equipment = r;
  a.num_workstations = m;
  a.tasks.assign(static_cast<std::size_t>(n), {});
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      a.active.assign(static_cast<std::size_t>(r * m), 0);
      for (const auto& p : a.tasks) a.active[static_cast<std::size_t>(p.where.equipment * m + p.where.station)] = 1;
      if (!feasible(inst, a)) return;
      ++out.feasible_count;
      const auto c = cost(inst, a);
      if (!out.optimum || c < *out.optimum) {
        out.optimum = c;
        out.optima.clear();
      }
      if (c == *out.optimum) out.optima.push_back(a);
      return;
    }
    for (int j = 0; j < r; ++j) {
      for (int k = 0; k < m; ++k) {
        a.tasks[static_cast<std::size_t>(i)] = ralb::TaskPlacement::at(j, k);
        rec(i + 1);
      }
    }
  };
  rec(0);
  return out;
}

/// Dense symmetric double loop over the stored coefficients.
inline double naive_energy(const ralb::Qubo& q, const ralb::Bits& x) {
  const auto n = q.size();
  std::vector<double> dense(n * n, 0.0);
  for (const auto& [key, value] : q.terms()) dense[key.first * n + key.second] += value;
  double e = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) e += dense[u * n + v] * x[u] * x[v];
  }
  return e;
}

inline ralb::Bits bits_of(std::uint64_t word, std::size_t n) {
  ralb::Bits b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>((word >> i) & 1);
  return b;
}

/// Valid random instance: every task has a capable equipment, 0 < t <= C,
/// edges only go from lower to higher task index.
inline ralb::Instance random_instance(std::mt19937_64& rng, int n, int r, int m, std::int64_t cycle = 0,
                                      double edge_prob = 0.4) {
  auto pick = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  ralb::Instance inst;
  inst.name = "random";
  inst.num_tasks = n;
  inst.num_equipment = r;
  inst.num_workstations = m;
  inst.cycle_time = cycle > 0 ? cycle : pick(6, 20);
  for (int i = 0; i < n; ++i) {
    const int must = static_cast<int>(pick(0, r - 1));
    for (int j = 0; j < r; ++j) {
      const bool capable = j == must || pick(0, 3) != 0;
      inst.task_times.push_back(capable ? pick(1, std::max<std::int64_t>(1, inst.cycle_time * 2 / 3)) : ralb::kIncapable);
    }
  }
  for (int j = 0; j < r; ++j) inst.equipment_costs.push_back(pick(1, 9) * 1000);
  std::bernoulli_distribution edge(edge_prob);
  for (int p = 0; p < n; ++p) {
    for (int i = p + 1; i < n; ++i) {
      if (edge(rng)) inst.precedence_edges.push_back({p, i});
    }
  }
  return inst;
}

inline ralb::Instance case_study() {
  return ralb::load_instance(std::string(RALB_SOURCE_DIR) + "/examples/case_study.json");
}

}  // namespace oracle

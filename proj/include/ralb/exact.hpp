#pragma once

// Integer-programming view of the line balancing model: objective,
// constraint checks and an exact branch-and-bound solver used as the
// ground truth for every sampling-based route.

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ralb/instance.hpp"

namespace ralb {

/// The four constraint families of the IP model.
enum class ConstraintFamily : std::uint8_t {
  task_assignment = 0,  // each task placed exactly once
  equipment_time = 1,   // per (equipment, station) load <= C * y
  station_time = 2,     // per station load <= C
  precedence = 3,       // station(p) <= station(i) for every edge (p, i)
};
inline constexpr std::size_t kNumFamilies = 4;

std::string_view family_name(ConstraintFamily f);

struct Violation {
  ConstraintFamily family;
  std::string detail;
};

struct FeasibilityReport {
  bool task_assignment = true;
  bool equipment_time = true;
  bool station_time = true;
  bool precedence = true;
  std::vector<Violation> violations;
  /// Total processing time per workstation (assigned tasks only).
  std::vector<std::int64_t> station_loads;

  bool feasible() const { return task_assignment && equipment_time && station_time && precedence; }
  bool holds(ConstraintFamily f) const;
};

/// Sum of c_j over active (equipment, station) pairs.
std::int64_t objective(const Instance& inst, const Assignment& a);

FeasibilityReport check_feasibility(const Instance& inst, const Assignment& a);
inline bool is_feasible(const Instance& inst, const Assignment& a) {
  return check_feasibility(inst, a).feasible();
}

class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(std::uint64_t budget);
  std::uint64_t budget() const { return budget_; }

 private:
  std::uint64_t budget_;
};

struct ExactOptions {
  std::size_t cap = 1000;                   // optima retained for reporting
  std::uint64_t node_budget = 50'000'000;   // search nodes before giving up
};

struct ExactResult {
  std::optional<std::int64_t> optimal_cost;  // nullopt: infeasible
  std::vector<Assignment> optimal_assignments;
  std::uint64_t nodes_explored = 0;
  std::chrono::duration<double> wall_time{};

  bool feasible() const { return optimal_cost.has_value(); }
};

/// Depth-first branch-and-bound over task placements in topological order.
///
/// Each task picks a station (increasing, starting at the latest predecessor
/// station) and then a capable equipment. Branches are cut when an equipment
/// or station load would exceed C, or when the cost of the active equipment
/// already exceeds the incumbent. Equal-cost branches are kept so that all
/// co-optimal placements are reported (up to `cap`). Equipment is active
/// exactly where it performs a task.
///
/// Only validate_structure() is required of `inst`; entries with t > C are
/// simply never placeable. Throws BudgetExceeded when more than
/// `node_budget` nodes would be expanded.
ExactResult solve_exact(const Instance& inst, const ExactOptions& options = {});

/// Every feasible assignment whose active equipment equals the equipment its
/// tasks use, in search order, stopping after `cap` results.
std::vector<Assignment> enumerate_feasible(const Instance& inst, std::size_t cap = 100000,
                                           std::uint64_t node_budget = 50'000'000);

}  // namespace ralb

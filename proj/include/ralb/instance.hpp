#pragma once

// Robotic assembly line balancing (RALB) problem data.
//
// Indices are 0-based everywhere in the C++ API. The JSON document format
// uses 1-based task indices in `precedence_edges`, matching how line
// balancing instances are usually written down.

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ralb {

/// Sentinel in the task-time matrix: the equipment cannot perform the task.
inline constexpr std::int64_t kIncapable = -1;

/// Raised for malformed or semantically invalid instances.
class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Task `before` must be placed at a workstation with index <= that of `after`.
struct PrecedenceEdge {
  int before = 0;
  int after = 0;
  auto operator<=>(const PrecedenceEdge&) const = default;
};

struct TaskEquipment {
  int task = 0;
  int equipment = 0;
  auto operator<=>(const TaskEquipment&) const = default;
};

struct Instance {
  std::string name;
  int num_tasks = 0;
  int num_equipment = 0;
  int num_workstations = 0;
  std::int64_t cycle_time = 0;
  /// Row-major num_tasks x num_equipment, kIncapable marks forbidden pairs.
  std::vector<std::int64_t> task_times;
  std::vector<std::int64_t> equipment_costs;
  /// Sorted and deduplicated.
  std::vector<PrecedenceEdge> precedence_edges;

  std::int64_t time(int task, int equipment) const {
    return task_times[static_cast<std::size_t>(task) * num_equipment + equipment];
  }
  bool capable(int task, int equipment) const { return time(task, equipment) != kIncapable; }

  bool operator==(const Instance&) const = default;
};

/// Checks dimensions, index bounds, sentinels and acyclicity, but not the
/// cycle-time bound on individual entries. This is the minimum the exact
/// solver needs.
void validate_structure(const Instance& inst);

/// Full validation: structure plus 0 < t <= C for every non-sentinel entry and
/// at least one capable equipment per task.
void validate(const Instance& inst);

/// Parses and validates an instance document. Throws InstanceError with the
/// byte offset for syntax errors and the violated invariant otherwise.
Instance parse_instance(std::string_view text);
Instance load_instance(const std::string& path);

/// Canonical JSON form; parse_instance(serialize_instance(x)) == x.
std::string serialize_instance(const Instance& inst);

/// Greatest common divisor of C and every non-sentinel task time.
std::int64_t time_gcd(const Instance& inst);

/// Divides C and all non-sentinel times by time_gcd(). Idempotent.
Instance rescale_times(const Instance& inst);

/// Every (task, equipment) with a non-sentinel time, lexicographic.
std::vector<TaskEquipment> allowed_pairs(const Instance& inst);

/// Tasks ordered so every edge goes forward; ties broken by lower index.
/// Throws InstanceError on a cycle.
std::vector<int> topological_order(const Instance& inst);

/// Predecessor lists, indexed by task.
std::vector<std::vector<int>> predecessors(const Instance& inst);

// ---------------------------------------------------------------------------

struct Placement {
  int equipment = 0;
  int station = 0;
  auto operator<=>(const Placement&) const = default;
};

enum class PlacementState : std::uint8_t { unassigned, assigned, conflicted };

struct TaskPlacement {
  PlacementState state = PlacementState::unassigned;
  Placement where{};

  static TaskPlacement at(int equipment, int station) {
    return {PlacementState::assigned, {equipment, station}};
  }
  bool assigned() const { return state == PlacementState::assigned; }
  bool operator==(const TaskPlacement& o) const {
    return state == o.state && (state != PlacementState::assigned || where == o.where);
  }
};

/// A candidate solution: x_ijk through `tasks`, y_jk through `active`.
struct Assignment {
  int num_equipment = 0;
  int num_workstations = 0;
  std::vector<TaskPlacement> tasks;
  /// Row-major num_equipment x num_workstations.
  std::vector<std::uint8_t> active;

  static Assignment empty(const Instance& inst);

  bool equipment_active(int equipment, int station) const {
    return active[static_cast<std::size_t>(equipment) * num_workstations + station] != 0;
  }
  void set_active(int equipment, int station, bool on = true) {
    active[static_cast<std::size_t>(equipment) * num_workstations + station] = on ? 1 : 0;
  }
  /// Places the task and activates its equipment at that station.
  void place(int task, int equipment, int station) {
    tasks[static_cast<std::size_t>(task)] = TaskPlacement::at(equipment, station);
    set_active(equipment, station);
  }

  bool operator==(const Assignment&) const = default;
};

std::string to_string(const Assignment& a);

}  // namespace ralb

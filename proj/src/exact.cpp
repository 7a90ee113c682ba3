#include "ralb/exact.hpp"

#include <algorithm>

namespace ralb {

std::string_view family_name(ConstraintFamily f) {
  switch (f) {
    case ConstraintFamily::task_assignment: return "task_assignment";
    case ConstraintFamily::equipment_time: return "equipment_time";
    case ConstraintFamily::station_time: return "station_time";
    case ConstraintFamily::precedence: return "precedence";
  }
  return "unknown";
}

bool FeasibilityReport::holds(ConstraintFamily f) const {
  switch (f) {
    case ConstraintFamily::task_assignment: return task_assignment;
    case ConstraintFamily::equipment_time: return equipment_time;
    case ConstraintFamily::station_time: return station_time;
    case ConstraintFamily::precedence: return precedence;
  }
  return false;
}

std::int64_t objective(const Instance& inst, const Assignment& a) {
  std::int64_t cost = 0;
  for (int j = 0; j < inst.num_equipment; ++j) {
    for (int k = 0; k < inst.num_workstations; ++k) {
      if (a.equipment_active(j, k)) cost += inst.equipment_costs[static_cast<std::size_t>(j)];
    }
  }
  return cost;
}

FeasibilityReport check_feasibility(const Instance& inst, const Assignment& a) {
  FeasibilityReport rep;
  const int r = inst.num_equipment;
  const int m = inst.num_workstations;
  std::vector<std::int64_t> pair_load(static_cast<std::size_t>(r) * m, 0);
  rep.station_loads.assign(static_cast<std::size_t>(m), 0);

  for (int i = 0; i < inst.num_tasks; ++i) {
    const auto& t = a.tasks[static_cast<std::size_t>(i)];
    if (!t.assigned()) {
      rep.task_assignment = false;
      rep.violations.push_back({ConstraintFamily::task_assignment,
                                "task " + std::to_string(i + 1) +
                                    (t.state == PlacementState::conflicted ? " placed more than once"
                                                                           : " not placed")});
      continue;
    }
    const auto [j, k] = t.where;
    if (!inst.capable(i, j)) {
      rep.task_assignment = false;
      rep.violations.push_back({ConstraintFamily::task_assignment,
                                "task " + std::to_string(i + 1) + " placed on incapable equipment " +
                                    std::to_string(j + 1)});
      continue;
    }
    pair_load[static_cast<std::size_t>(j) * m + k] += inst.time(i, j);
    rep.station_loads[static_cast<std::size_t>(k)] += inst.time(i, j);
  }

  for (int j = 0; j < r; ++j) {
    for (int k = 0; k < m; ++k) {
      auto load = pair_load[static_cast<std::size_t>(j) * m + k];
      auto cap = a.equipment_active(j, k) ? inst.cycle_time : 0;
      if (load > cap) {
        rep.equipment_time = false;
        rep.violations.push_back({ConstraintFamily::equipment_time,
                                  "equipment " + std::to_string(j + 1) + " at workstation " +
                                      std::to_string(k + 1) + ": load " + std::to_string(load) +
                                      " > " + std::to_string(cap)});
      }
    }
  }
  for (int k = 0; k < m; ++k) {
    auto load = rep.station_loads[static_cast<std::size_t>(k)];
    if (load > inst.cycle_time) {
      rep.station_time = false;
      rep.violations.push_back({ConstraintFamily::station_time,
                                "workstation " + std::to_string(k + 1) + ": load " +
                                    std::to_string(load) + " > " + std::to_string(inst.cycle_time)});
    }
  }

  // Sum_jk k x_pjk <= Sum_jl l x_ijl with 1-based stations; an unplaced task sums to 0.
  auto station_sum = [&](int task) {
    const auto& t = a.tasks[static_cast<std::size_t>(task)];
    return t.assigned() ? t.where.station + 1 : 0;
  };
  for (const auto& e : inst.precedence_edges) {
    if (station_sum(e.before) > station_sum(e.after)) {
      rep.precedence = false;
      rep.violations.push_back({ConstraintFamily::precedence,
                                "edge (" + std::to_string(e.before + 1) + "," +
                                    std::to_string(e.after + 1) + ")"});
    }
  }
  return rep;
}

BudgetExceeded::BudgetExceeded(std::uint64_t budget)
    : std::runtime_error("exact search exceeded node budget of " + std::to_string(budget)),
      budget_(budget) {}

namespace {

class Search {
 public:
  enum class Mode { optimize, enumerate };

  Search(const Instance& inst, Mode mode, std::size_t cap, std::uint64_t budget)
      : inst_(inst),
        mode_(mode),
        cap_(cap),
        budget_(budget),
        order_(topological_order(inst)),
        pred_(predecessors(inst)),
        current_(Assignment::empty(inst)),
        pair_load_(static_cast<std::size_t>(inst.num_equipment) * inst.num_workstations, 0),
        pair_count_(pair_load_.size(), 0),
        station_load_(static_cast<std::size_t>(inst.num_workstations), 0),
        station_of_(static_cast<std::size_t>(inst.num_tasks), -1) {}

  void run() { descend(0, 0); }

  std::optional<std::int64_t> best;
  std::vector<Assignment> found;
  std::uint64_t nodes = 0;

 private:
  bool done() const { return mode_ == Mode::enumerate && found.size() >= cap_; }

  void descend(std::size_t depth, std::int64_t cost) {
    if (++nodes > budget_) throw BudgetExceeded(budget_);
    if (depth == order_.size()) {
      record(cost);
      return;
    }
    const int task = order_[depth];
    int first_station = 0;
    for (int p : pred_[static_cast<std::size_t>(task)]) {
      first_station = std::max(first_station, station_of_[static_cast<std::size_t>(p)]);
    }
    const int m = inst_.num_workstations;
    for (int k = first_station; k < m; ++k) {
      for (int j = 0; j < inst_.num_equipment; ++j) {
        if (done()) return;
        if (!inst_.capable(task, j)) continue;
        const auto t = inst_.time(task, j);
        const auto slot = static_cast<std::size_t>(j) * m + k;
        const auto ks = static_cast<std::size_t>(k);
        if (pair_load_[slot] + t > inst_.cycle_time) continue;
        if (station_load_[ks] + t > inst_.cycle_time) continue;
        const bool opens = pair_count_[slot] == 0;
        const auto next_cost = cost + (opens ? inst_.equipment_costs[static_cast<std::size_t>(j)] : 0);
        if (mode_ == Mode::optimize && best && next_cost > *best) continue;

        pair_load_[slot] += t;
        station_load_[ks] += t;
        ++pair_count_[slot];
        station_of_[static_cast<std::size_t>(task)] = k;
        current_.tasks[static_cast<std::size_t>(task)] = TaskPlacement::at(j, k);
        current_.set_active(j, k);

        descend(depth + 1, next_cost);

        current_.tasks[static_cast<std::size_t>(task)] = TaskPlacement{};
        station_of_[static_cast<std::size_t>(task)] = -1;
        if (--pair_count_[slot] == 0) current_.set_active(j, k, false);
        station_load_[ks] -= t;
        pair_load_[slot] -= t;
      }
    }
  }

  void record(std::int64_t cost) {
    if (mode_ == Mode::enumerate) {
      found.push_back(current_);
      return;
    }
    if (!best || cost < *best) {
      best = cost;
      found.clear();
    }
    if (found.size() < cap_) found.push_back(current_);
  }

  const Instance& inst_;
  Mode mode_;
  std::size_t cap_;
  std::uint64_t budget_;
  std::vector<int> order_;
  std::vector<std::vector<int>> pred_;
  Assignment current_;
  std::vector<std::int64_t> pair_load_;
  std::vector<int> pair_count_;
  std::vector<std::int64_t> station_load_;
  std::vector<int> station_of_;
};

}  // namespace

ExactResult solve_exact(const Instance& inst, const ExactOptions& options) {
  validate_structure(inst);
  const auto start = std::chrono::steady_clock::now();
  Search search(inst, Search::Mode::optimize, options.cap, options.node_budget);
  search.run();

  ExactResult result;
  result.optimal_cost = search.best;
  result.optimal_assignments = std::move(search.found);
  result.nodes_explored = search.nodes;
  result.wall_time = std::chrono::steady_clock::now() - start;

  for (const auto& a : result.optimal_assignments) {
    if (!is_feasible(inst, a) || objective(inst, a) != *result.optimal_cost) {
      throw std::logic_error("exact solver produced an inconsistent optimum: " + to_string(a));
    }
  }
  return result;
}

std::vector<Assignment> enumerate_feasible(const Instance& inst, std::size_t cap,
                                           std::uint64_t node_budget) {
  validate_structure(inst);
  Search search(inst, Search::Mode::enumerate, cap, node_budget);
  search.run();
  return std::move(search.found);
}

}  // namespace ralb

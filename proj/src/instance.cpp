#include "ralb/instance.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ralb {

namespace {

using nlohmann::json;

const std::set<std::string, std::less<>> kKeys = {
    "name",       "num_tasks",   "num_equipment",   "num_workstations",
    "cycle_time", "task_times",  "equipment_costs", "precedence_edges"};

[[noreturn]] void fail(const std::string& what) { throw InstanceError(what); }

const json& require(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) fail(std::string("missing key '") + key + "'");
  return *it;
}

std::int64_t as_integer(const json& value, const std::string& where) {
  if (!value.is_number_integer()) fail(where + ": expected an integer");
  return value.get<std::int64_t>();
}

int as_count(const json& value, const std::string& where) {
  auto v = as_integer(value, where);
  if (v <= 0 || v > 1'000'000) fail(where + ": expected a positive count");
  return static_cast<int>(v);
}

}  // namespace

void validate_structure(const Instance& inst) {
  if (inst.num_tasks <= 0) fail("num_tasks must be positive");
  if (inst.num_equipment <= 0) fail("num_equipment must be positive");
  if (inst.num_workstations <= 0) fail("num_workstations must be positive");
  if (inst.cycle_time <= 0) fail("cycle_time must be positive");
  const auto n = static_cast<std::size_t>(inst.num_tasks);
  const auto r = static_cast<std::size_t>(inst.num_equipment);
  if (inst.task_times.size() != n * r) fail("task_times must be num_tasks x num_equipment");
  if (inst.equipment_costs.size() != r) fail("equipment_costs must have num_equipment entries");

  for (int i = 0; i < inst.num_tasks; ++i) {
    for (int j = 0; j < inst.num_equipment; ++j) {
      auto t = inst.time(i, j);
      if (t != kIncapable && t <= 0) {
        fail("task " + std::to_string(i + 1) + " equipment " + std::to_string(j + 1) +
             ": task time must be positive or -1");
      }
    }
  }
  for (std::size_t j = 0; j < r; ++j) {
    if (inst.equipment_costs[j] < 0) {
      fail("equipment " + std::to_string(j + 1) + ": cost must be non-negative");
    }
  }
  for (const auto& e : inst.precedence_edges) {
    if (e.before < 0 || e.before >= inst.num_tasks || e.after < 0 || e.after >= inst.num_tasks) {
      fail("precedence edge (" + std::to_string(e.before + 1) + "," + std::to_string(e.after + 1) +
           ") out of range");
    }
    if (e.before == e.after) fail("self-edge on task " + std::to_string(e.before + 1));
  }
  topological_order(inst);
}

void validate(const Instance& inst) {
  validate_structure(inst);
  for (int i = 0; i < inst.num_tasks; ++i) {
    bool any = false;
    for (int j = 0; j < inst.num_equipment; ++j) {
      auto t = inst.time(i, j);
      if (t == kIncapable) continue;
      if (t > inst.cycle_time) {
        fail("task " + std::to_string(i + 1) + " equipment " + std::to_string(j + 1) +
             ": task time " + std::to_string(t) + " exceeds cycle time " +
             std::to_string(inst.cycle_time) + " (use -1 for incapable equipment)");
      }
      any = true;
    }
    if (!any) fail("task " + std::to_string(i + 1) + " has no capable equipment");
  }
}

Instance parse_instance(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail("syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) fail("instance document must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kKeys.contains(key)) fail("unknown key '" + key + "'");
  }

  Instance inst;
  const auto& name = require(doc, "name");
  if (!name.is_string()) fail("name: expected a string");
  inst.name = name.get<std::string>();
  inst.num_tasks = as_count(require(doc, "num_tasks"), "num_tasks");
  inst.num_equipment = as_count(require(doc, "num_equipment"), "num_equipment");
  inst.num_workstations = as_count(require(doc, "num_workstations"), "num_workstations");
  inst.cycle_time = as_integer(require(doc, "cycle_time"), "cycle_time");

  const auto& times = require(doc, "task_times");
  if (!times.is_array() || times.size() != static_cast<std::size_t>(inst.num_tasks)) {
    fail("task_times: expected " + std::to_string(inst.num_tasks) + " rows");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto& row = times[i];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(inst.num_equipment)) {
      fail("task_times row " + std::to_string(i + 1) + ": expected " +
           std::to_string(inst.num_equipment) + " entries");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      inst.task_times.push_back(
          as_integer(row[j], "task_times[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]"));
    }
  }

  const auto& costs = require(doc, "equipment_costs");
  if (!costs.is_array() || costs.size() != static_cast<std::size_t>(inst.num_equipment)) {
    fail("equipment_costs: expected " + std::to_string(inst.num_equipment) + " entries");
  }
  for (std::size_t j = 0; j < costs.size(); ++j) {
    inst.equipment_costs.push_back(as_integer(costs[j], "equipment_costs[" + std::to_string(j + 1) + "]"));
  }

  const auto& edges = require(doc, "precedence_edges");
  if (!edges.is_array()) fail("precedence_edges: expected an array of [p, i] pairs");
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 2) fail("precedence_edges: expected [p, i] pairs");
    auto p = as_integer(e[0], "precedence_edges");
    auto i = as_integer(e[1], "precedence_edges");
    if (p < 1 || p > inst.num_tasks || i < 1 || i > inst.num_tasks) {
      fail("precedence edge (" + std::to_string(p) + "," + std::to_string(i) + ") out of range");
    }
    inst.precedence_edges.push_back({static_cast<int>(p - 1), static_cast<int>(i - 1)});
  }
  std::sort(inst.precedence_edges.begin(), inst.precedence_edges.end());
  inst.precedence_edges.erase(std::unique(inst.precedence_edges.begin(), inst.precedence_edges.end()),
                              inst.precedence_edges.end());

  validate(inst);
  return inst;
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open instance file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

std::string serialize_instance(const Instance& inst) {
  nlohmann::ordered_json doc;
  doc["name"] = inst.name;
  doc["num_tasks"] = inst.num_tasks;
  doc["num_equipment"] = inst.num_equipment;
  doc["num_workstations"] = inst.num_workstations;
  doc["cycle_time"] = inst.cycle_time;
  auto rows = nlohmann::ordered_json::array();
  for (int i = 0; i < inst.num_tasks; ++i) {
    auto row = nlohmann::ordered_json::array();
    for (int j = 0; j < inst.num_equipment; ++j) row.push_back(inst.time(i, j));
    rows.push_back(std::move(row));
  }
  doc["task_times"] = std::move(rows);
  doc["equipment_costs"] = inst.equipment_costs;
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : inst.precedence_edges) edges.push_back({e.before + 1, e.after + 1});
  doc["precedence_edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

std::int64_t time_gcd(const Instance& inst) {
  std::int64_t g = inst.cycle_time;
  for (auto t : inst.task_times) {
    if (t != kIncapable) g = std::gcd(g, t);
  }
  return g == 0 ? 1 : g;
}

Instance rescale_times(const Instance& inst) {
  Instance out = inst;
  const auto g = time_gcd(inst);
  if (g <= 1) return out;
  out.cycle_time /= g;
  for (auto& t : out.task_times) {
    if (t != kIncapable) t /= g;
  }
  return out;
}

std::vector<TaskEquipment> allowed_pairs(const Instance& inst) {
  std::vector<TaskEquipment> pairs;
  for (int i = 0; i < inst.num_tasks; ++i) {
    for (int j = 0; j < inst.num_equipment; ++j) {
      if (inst.capable(i, j)) pairs.push_back({i, j});
    }
  }
  return pairs;
}

std::vector<int> topological_order(const Instance& inst) {
  const auto n = static_cast<std::size_t>(inst.num_tasks);
  std::vector<std::vector<int>> succ(n);
  std::vector<int> indegree(n, 0);
  for (const auto& e : inst.precedence_edges) {
    succ[static_cast<std::size_t>(e.before)].push_back(e.after);
    ++indegree[static_cast<std::size_t>(e.after)];
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(static_cast<int>(i));
  }
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    int u = ready.top();
    ready.pop();
    order.push_back(u);
    for (int v : succ[static_cast<std::size_t>(u)]) {
      if (--indegree[static_cast<std::size_t>(v)] == 0) ready.push(v);
    }
  }
  if (order.size() != n) fail("precedence cycle among tasks");
  return order;
}

std::vector<std::vector<int>> predecessors(const Instance& inst) {
  std::vector<std::vector<int>> pred(static_cast<std::size_t>(inst.num_tasks));
  for (const auto& e : inst.precedence_edges) pred[static_cast<std::size_t>(e.after)].push_back(e.before);
  return pred;
}

Assignment Assignment::empty(const Instance& inst) {
  Assignment a;
  a.num_equipment = inst.num_equipment;
  a.num_workstations = inst.num_workstations;
  a.tasks.assign(static_cast<std::size_t>(inst.num_tasks), TaskPlacement{});
  a.active.assign(static_cast<std::size_t>(inst.num_equipment) * inst.num_workstations, 0);
  return a;
}

std::string to_string(const Assignment& a) {
  std::ostringstream os;
  os << "tasks:";
  for (std::size_t i = 0; i < a.tasks.size(); ++i) {
    const auto& t = a.tasks[i];
    os << ' ' << (i + 1) << "->";
    switch (t.state) {
      case PlacementState::assigned:
        os << "(e" << (t.where.equipment + 1) << ",w" << (t.where.station + 1) << ')';
        break;
      case PlacementState::unassigned: os << "unassigned"; break;
      case PlacementState::conflicted: os << "conflicted"; break;
    }
  }
  os << " active:";
  for (int j = 0; j < a.num_equipment; ++j) {
    for (int k = 0; k < a.num_workstations; ++k) {
      if (a.equipment_active(j, k)) os << " (e" << (j + 1) << ",w" << (k + 1) << ')';
    }
  }
  return os.str();
}

}  // namespace ralb

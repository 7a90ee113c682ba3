#include "ralb/qubo.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace ralb {

std::string bits_to_string(std::span<const std::uint8_t> bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) s[i] = '1';
  }
  return s;
}

Bits bits_from_string(std::string_view text) {
  Bits bits(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '0' && text[i] != '1') {
      throw std::invalid_argument("bitstring contains '" + std::string(1, text[i]) + "'");
    }
    bits[i] = text[i] == '1' ? 1 : 0;
  }
  return bits;
}

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

// --- Qubo -------------------------------------------------------------------

void Qubo::add(std::size_t u, std::size_t v, double value) {
  if (u >= size_ || v >= size_) throw std::out_of_range("QUBO index out of range");
  if (u > v) std::swap(u, v);
  terms_[{static_cast<Index>(u), static_cast<Index>(v)}] += value;
}

double Qubo::coefficient(std::size_t u, std::size_t v) const {
  if (u > v) std::swap(u, v);
  auto it = terms_.find({static_cast<Index>(u), static_cast<Index>(v)});
  return it == terms_.end() ? 0.0 : it->second;
}

void Qubo::drop_zeros() {
  std::erase_if(terms_, [](const auto& kv) { return kv.second == 0.0; });
}

std::size_t Qubo::num_diagonal() const {
  return static_cast<std::size_t>(
      std::count_if(terms_.begin(), terms_.end(), [](const auto& kv) { return kv.first.first == kv.first.second; }));
}

double Qubo::energy(std::span<const std::uint8_t> bits) const {
  if (bits.size() != size_) {
    throw std::invalid_argument("bitstring has " + std::to_string(bits.size()) + " bits, model has " +
                                std::to_string(size_));
  }
  double e = 0.0;
  for (const auto& [key, value] : terms_) {
    if (bits[key.first] && bits[key.second]) e += value;
  }
  return e;
}

void write_qubo(std::ostream& os, const Qubo& q) {
  os << "p qubo 0 " << q.size() << ' ' << q.num_diagonal() << ' ' << q.num_offdiagonal() << '\n';
  os << "c offset " << format_double(q.offset()) << '\n';
  for (const auto& [key, value] : q.terms()) {
    if (key.first == key.second) os << key.first << ' ' << key.second << ' ' << format_double(value) << '\n';
  }
  for (const auto& [key, value] : q.terms()) {
    if (key.first != key.second) os << key.first << ' ' << key.second << ' ' << format_double(value) << '\n';
  }
}

Qubo read_qubo(std::istream& is) {
  std::string line;
  std::optional<Qubo> q;
  double offset = 0.0;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == 'c') {
      std::string c, key;
      ls >> c >> key;
      if (key == "offset") ls >> offset;
      continue;
    }
    if (line[0] == 'p') {
      std::string p, kind;
      std::size_t topology = 0, n = 0, nd = 0, no = 0;
      if (!(ls >> p >> kind >> topology >> n >> nd >> no) || kind != "qubo") {
        throw QuboError("line " + std::to_string(lineno) + ": bad problem line");
      }
      q.emplace(n);
      continue;
    }
    if (!q) throw QuboError("line " + std::to_string(lineno) + ": coefficient before problem line");
    std::size_t u = 0, v = 0;
    double value = 0.0;
    if (!(ls >> u >> v >> value)) throw QuboError("line " + std::to_string(lineno) + ": bad coefficient line");
    q->add(u, v, value);
  }
  if (!q) throw QuboError("missing problem line");
  q->add_offset(offset);
  return *q;
}

// --- registry ---------------------------------------------------------------

namespace {

int ceil_log2(std::int64_t x) {
  if (x <= 1) return 0;
  return static_cast<int>(std::bit_width(static_cast<std::uint64_t>(x - 1)));
}

int bit_length(std::int64_t x) {
  if (x <= 0) return 0;
  return static_cast<int>(std::bit_width(static_cast<std::uint64_t>(x)));
}

}  // namespace

std::string_view to_string(SlackWidthRule rule) {
  switch (rule) {
    case SlackWidthRule::bit_length: return "bit-length";
    case SlackWidthRule::ceil_log2: return "ceil-log2";
    case SlackWidthRule::tight: return "tight";
  }
  return "?";
}

SlackWidthRule parse_slack_rule(std::string_view text) {
  if (text == "bit-length") return SlackWidthRule::bit_length;
  if (text == "ceil-log2") return SlackWidthRule::ceil_log2;
  if (text == "tight") return SlackWidthRule::tight;
  throw std::invalid_argument("unknown slack rule '" + std::string(text) + "'");
}

int slack_width(ConstraintFamily family, const Instance& inst, SlackWidthRule rule) {
  switch (family) {
    case ConstraintFamily::task_assignment: return 0;
    case ConstraintFamily::equipment_time:
    case ConstraintFamily::station_time:
      return rule == SlackWidthRule::ceil_log2 ? ceil_log2(inst.cycle_time) : bit_length(inst.cycle_time);
    case ConstraintFamily::precedence:
      if (rule == SlackWidthRule::tight) return bit_length(inst.num_workstations - 1);
      return ceil_log2(static_cast<std::int64_t>(inst.num_tasks) * inst.num_equipment * inst.num_workstations);
  }
  return 0;
}

std::size_t VariableRegistry::x_index(int task, int equipment, int station) const {
  auto slot = (static_cast<std::size_t>(task) * num_equipment + equipment) * num_workstations + station;
  return slot < x_lookup_.size() ? x_lookup_[slot] : npos;
}

void VariableRegistry::index_x() {
  x_lookup_.assign(static_cast<std::size_t>(num_tasks) * num_equipment * num_workstations, npos);
  for (std::size_t u = 0; u < x.size(); ++u) {
    const auto& v = x[u];
    x_lookup_[(static_cast<std::size_t>(v.task) * num_equipment + v.equipment) * num_workstations + v.station] = u;
  }
}

VariableRegistry build_registry(const Instance& inst, const QuboOptions& options) {
  VariableRegistry reg;
  reg.num_tasks = inst.num_tasks;
  reg.num_equipment = inst.num_equipment;
  reg.num_workstations = inst.num_workstations;
  const int m = inst.num_workstations;

  for (const auto& [i, j] : allowed_pairs(inst)) {
    for (int k = 0; k < m; ++k) reg.x.push_back({i, j, k});
  }
  for (int j = 0; j < inst.num_equipment; ++j) {
    for (int k = 0; k < m; ++k) reg.y.push_back({j, k});
  }

  std::size_t next = reg.x.size() + reg.y.size();
  auto add_block = [&](ConstraintFamily f, int a, int b) {
    SlackBlock block{f, a, b, next, slack_width(f, inst, options.slack_rule)};
    const auto id = reg.blocks.size();
    for (int bit = 0; bit < block.width; ++bit) reg.slack.push_back({id, bit, std::int64_t{1} << bit});
    next += static_cast<std::size_t>(block.width);
    reg.blocks.push_back(block);
  };
  for (int j = 0; j < inst.num_equipment; ++j) {
    for (int k = 0; k < m; ++k) add_block(ConstraintFamily::equipment_time, j, k);
  }
  for (int k = 0; k < m; ++k) add_block(ConstraintFamily::station_time, k, -1);
  for (std::size_t e = 0; e < inst.precedence_edges.size(); ++e) {
    add_block(ConstraintFamily::precedence, static_cast<int>(e), -1);
  }

  if (reg.total() > options.max_variables) {
    throw QuboError("QUBO needs " + std::to_string(reg.total()) + " variables, limit is " +
                    std::to_string(options.max_variables));
  }
  reg.index_x();
  return reg;
}

LagrangeConfig::LagrangeConfig(const std::array<double, kNumFamilies>& values) : values_(values) {
  for (auto v : values_) {
    if (!(std::isfinite(v) && v > 0.0)) {
      throw std::invalid_argument("Lagrange parameters must be positive and finite");
    }
  }
}

// --- penalties --------------------------------------------------------------

double PenaltyRow::residual(std::span<const std::uint8_t> bits) const {
  double lhs = 0.0;
  for (const auto& [u, a] : terms) {
    if (bits[u]) lhs += a;
  }
  return lhs - rhs;
}

namespace {

std::vector<PenaltyRow> build_rows(const Instance& inst, const VariableRegistry& reg) {
  std::vector<PenaltyRow> rows;
  const int m = inst.num_workstations;
  const auto C = static_cast<double>(inst.cycle_time);

  auto add_slack = [&](PenaltyRow& row, std::size_t block_id) {
    const auto& block = reg.blocks[block_id];
    for (int bit = 0; bit < block.width; ++bit) {
      row.terms.emplace_back(block.first + static_cast<std::size_t>(bit), std::ldexp(1.0, bit));
    }
    row.slack_block = block_id;
  };

  for (int i = 0; i < inst.num_tasks; ++i) {
    PenaltyRow row{ConstraintFamily::task_assignment, {}, 1.0, std::nullopt};
    for (int j = 0; j < inst.num_equipment; ++j) {
      for (int k = 0; k < m; ++k) {
        if (auto u = reg.x_index(i, j, k); u != VariableRegistry::npos) row.terms.emplace_back(u, 1.0);
      }
    }
    rows.push_back(std::move(row));
  }

  std::size_t block_id = 0;
  for (int j = 0; j < inst.num_equipment; ++j) {
    for (int k = 0; k < m; ++k, ++block_id) {
      PenaltyRow row{ConstraintFamily::equipment_time, {}, 0.0, std::nullopt};
      for (int i = 0; i < inst.num_tasks; ++i) {
        if (auto u = reg.x_index(i, j, k); u != VariableRegistry::npos) {
          row.terms.emplace_back(u, static_cast<double>(inst.time(i, j)));
        }
      }
      add_slack(row, block_id);
      row.terms.emplace_back(reg.y_index(j, k), -C);
      rows.push_back(std::move(row));
    }
  }

  for (int k = 0; k < m; ++k, ++block_id) {
    PenaltyRow row{ConstraintFamily::station_time, {}, C, std::nullopt};
    for (int i = 0; i < inst.num_tasks; ++i) {
      for (int j = 0; j < inst.num_equipment; ++j) {
        if (auto u = reg.x_index(i, j, k); u != VariableRegistry::npos) {
          row.terms.emplace_back(u, static_cast<double>(inst.time(i, j)));
        }
      }
    }
    add_slack(row, block_id);
    rows.push_back(std::move(row));
  }

  // Stations enter with 1-based weights: sum k x_pjk + s - sum l x_ijl = 0.
  for (const auto& e : inst.precedence_edges) {
    PenaltyRow row{ConstraintFamily::precedence, {}, 0.0, std::nullopt};
    for (int j = 0; j < inst.num_equipment; ++j) {
      for (int k = 0; k < m; ++k) {
        if (auto u = reg.x_index(e.before, j, k); u != VariableRegistry::npos) row.terms.emplace_back(u, k + 1.0);
      }
    }
    add_slack(row, block_id);
    for (int j = 0; j < inst.num_equipment; ++j) {
      for (int l = 0; l < m; ++l) {
        if (auto u = reg.x_index(e.after, j, l); u != VariableRegistry::npos) row.terms.emplace_back(u, -(l + 1.0));
      }
    }
    ++block_id;
    rows.push_back(std::move(row));
  }
  return rows;
}

void expand_square(Qubo& q, const PenaltyRow& row, double weight) {
  // Rows never repeat a variable, so (sum a x - b)^2 expands term by term.
  const auto& t = row.terms;
  for (std::size_t s = 0; s < t.size(); ++s) {
    const auto [u, a] = t[s];
    q.add(u, u, weight * (a * a - 2.0 * row.rhs * a));
    for (std::size_t r = s + 1; r < t.size(); ++r) {
      q.add(u, t[r].first, weight * 2.0 * a * t[r].second);
    }
  }
  q.add_offset(weight * row.rhs * row.rhs);
}

}  // namespace

QuboModel build_qubo(const Instance& inst, const LagrangeConfig& lagrange, const QuboOptions& options) {
  validate(inst);
  if (!(std::isfinite(options.cost_scale) && options.cost_scale > 0.0)) {
    throw std::invalid_argument("cost scale must be positive and finite");
  }
  QuboModel model{build_registry(inst, options), Qubo{}, {}, lagrange, options.cost_scale,
                  inst.equipment_costs};
  model.qubo = Qubo(model.registry.total());
  model.rows = build_rows(inst, model.registry);

  for (const auto& y : model.registry.y) {
    auto cost = static_cast<double>(inst.equipment_costs[static_cast<std::size_t>(y.equipment)]);
    auto u = model.registry.y_index(y.equipment, y.station);
    model.qubo.add(u, u, model.cost_scale * cost);
  }
  if (options.normalize_rows) {
    const double time_bound = static_cast<double>(inst.cycle_time);
    const double station_bound = static_cast<double>(inst.num_workstations);
    for (auto& row : model.rows) {
      if (row.family == ConstraintFamily::equipment_time || row.family == ConstraintFamily::station_time) {
        row.norm = 1.0 / (time_bound * time_bound);
      } else if (row.family == ConstraintFamily::precedence) {
        row.norm = 1.0 / (station_bound * station_bound);
      }
    }
  }
  for (const auto& row : model.rows) expand_square(model.qubo, row, lagrange[row.family] * row.norm);
  model.qubo.drop_zeros();
  return model;
}

std::array<double, kNumFamilies> penalty_breakdown(const QuboModel& model, std::span<const std::uint8_t> bits) {
  if (bits.size() != model.registry.total()) throw std::invalid_argument("bitstring length mismatch");
  std::array<double, kNumFamilies> out{};
  for (const auto& row : model.rows) {
    const double r = row.residual(bits);
    out[static_cast<std::size_t>(row.family)] += model.lagrange[row.family] * row.norm * r * r;
  }
  return out;
}

double total_penalty(const QuboModel& model, std::span<const std::uint8_t> bits) {
  double sum = 0.0;
  for (double p : penalty_breakdown(model, bits)) sum += p;
  return sum;
}

bool zero_penalty(const QuboModel& model, std::span<const std::uint8_t> bits) {
  if (bits.size() != model.registry.total()) throw std::invalid_argument("bitstring length mismatch");
  return std::all_of(model.rows.begin(), model.rows.end(),
                     [&](const PenaltyRow& row) { return row.residual(bits) == 0.0; });
}

// --- decode / encode --------------------------------------------------------

Decoded decode(const VariableRegistry& reg, std::span<const std::uint8_t> bits) {
  if (bits.size() != reg.total()) {
    throw std::invalid_argument("bitstring has " + std::to_string(bits.size()) + " bits, registry has " +
                                std::to_string(reg.total()));
  }
  Decoded out;
  auto& a = out.assignment;
  a.num_equipment = reg.num_equipment;
  a.num_workstations = reg.num_workstations;
  a.tasks.assign(static_cast<std::size_t>(reg.num_tasks), TaskPlacement{});
  a.active.assign(static_cast<std::size_t>(reg.num_equipment) * reg.num_workstations, 0);

  for (std::size_t u = 0; u < reg.x.size(); ++u) {
    if (!bits[u]) continue;
    const auto& v = reg.x[u];
    auto& slot = a.tasks[static_cast<std::size_t>(v.task)];
    if (slot.state == PlacementState::unassigned) {
      slot = TaskPlacement::at(v.equipment, v.station);
    } else {
      slot = TaskPlacement{PlacementState::conflicted, {}};
    }
  }
  for (std::size_t t = 0; t < reg.y.size(); ++t) {
    if (bits[reg.y_offset() + t]) a.set_active(reg.y[t].equipment, reg.y[t].station);
  }
  out.slack_values.assign(reg.blocks.size(), 0);
  for (std::size_t s = 0; s < reg.slack.size(); ++s) {
    if (bits[reg.slack_offset() + s]) out.slack_values[reg.slack[s].block] += reg.slack[s].weight;
  }
  return out;
}

Bits encode(const Instance& inst, const VariableRegistry& reg, const Assignment& a) {
  Bits bits(reg.total(), 0);
  for (int i = 0; i < inst.num_tasks; ++i) {
    const auto& t = a.tasks[static_cast<std::size_t>(i)];
    if (!t.assigned()) throw EncodeError("task " + std::to_string(i + 1) + " is not placed");
    auto u = reg.x_index(i, t.where.equipment, t.where.station);
    if (u == VariableRegistry::npos) {
      throw EncodeError("task " + std::to_string(i + 1) + " placed on incapable equipment");
    }
    bits[u] = 1;
  }
  for (int j = 0; j < inst.num_equipment; ++j) {
    for (int k = 0; k < inst.num_workstations; ++k) {
      if (a.equipment_active(j, k)) bits[reg.y_index(j, k)] = 1;
    }
  }

  // Each slack absorbs rhs - lhs of its row.
  std::vector<std::int64_t> pair_load(static_cast<std::size_t>(inst.num_equipment) * inst.num_workstations, 0);
  std::vector<std::int64_t> station_load(static_cast<std::size_t>(inst.num_workstations), 0);
  for (int i = 0; i < inst.num_tasks; ++i) {
    const auto [j, k] = a.tasks[static_cast<std::size_t>(i)].where;
    pair_load[static_cast<std::size_t>(j) * inst.num_workstations + k] += inst.time(i, j);
    station_load[static_cast<std::size_t>(k)] += inst.time(i, j);
  }
  for (const auto& block : reg.blocks) {
    std::int64_t value = 0;
    switch (block.family) {
      case ConstraintFamily::equipment_time:
        value = (a.equipment_active(block.a, block.b) ? inst.cycle_time : 0) -
                pair_load[static_cast<std::size_t>(block.a) * inst.num_workstations + block.b];
        break;
      case ConstraintFamily::station_time:
        value = inst.cycle_time - station_load[static_cast<std::size_t>(block.a)];
        break;
      case ConstraintFamily::precedence: {
        const auto& e = inst.precedence_edges[static_cast<std::size_t>(block.a)];
        value = a.tasks[static_cast<std::size_t>(e.after)].where.station -
                a.tasks[static_cast<std::size_t>(e.before)].where.station;
        break;
      }
      case ConstraintFamily::task_assignment: break;
    }
    const std::int64_t capacity = (std::int64_t{1} << block.width) - 1;
    if (value < 0 || value > capacity) {
      throw EncodeError(std::string(family_name(block.family)) + " slack " + std::to_string(value) +
                        " outside [0, " + std::to_string(capacity) + "]");
    }
    for (int bit = 0; bit < block.width; ++bit) {
      bits[block.first + static_cast<std::size_t>(bit)] = static_cast<std::uint8_t>((value >> bit) & 1);
    }
  }
  return bits;
}

std::string registry_to_json(const VariableRegistry& reg) {
  nlohmann::ordered_json doc;
  doc["total"] = reg.total();
  doc["num_x"] = reg.x.size();
  doc["num_y"] = reg.y.size();
  doc["num_slack"] = reg.slack.size();
  auto vars = nlohmann::ordered_json::array();
  std::size_t index = 0;
  for (const auto& v : reg.x) {
    vars.push_back({{"index", index++}, {"kind", "x"}, {"task", v.task + 1}, {"equipment", v.equipment + 1},
                    {"workstation", v.station + 1}});
  }
  for (const auto& v : reg.y) {
    vars.push_back({{"index", index++}, {"kind", "y"}, {"equipment", v.equipment + 1}, {"workstation", v.station + 1}});
  }
  for (const auto& s : reg.slack) {
    const auto& b = reg.blocks[s.block];
    nlohmann::ordered_json entry{{"index", index++},
                                 {"kind", "slack"},
                                 {"constraint", std::string(family_name(b.family))},
                                 {"block", s.block},
                                 {"bit", s.bit},
                                 {"weight", s.weight}};
    switch (b.family) {
      case ConstraintFamily::equipment_time:
        entry["equipment"] = b.a + 1;
        entry["workstation"] = b.b + 1;
        break;
      case ConstraintFamily::station_time: entry["workstation"] = b.a + 1; break;
      case ConstraintFamily::precedence: entry["edge_index"] = b.a; break;
      case ConstraintFamily::task_assignment: break;
    }
    vars.push_back(std::move(entry));
  }
  doc["variables"] = std::move(vars);
  return doc.dump(2) + "\n";
}

}  // namespace ralb

// Rebuilds tests/data/qpu_reference_samples.csv: the 50 most frequent
// bitstrings of a hardware run on the case study, of which only the
// occurrence, cost and validity of each bar were recorded. Bitstrings are
// synthesized to match: a valid bar gets the optimal placement plus idle
// equipment up to its cost, an invalid bar breaks task placement or
// equipment activation, and the trailing slack bits carry the bar number so
// all 50 bitstrings differ.
//
// usage: make_reference_samples <case_study.json> <out.csv>

#include <fstream>
#include <iostream>

#include "ralb/exact.hpp"
#include "ralb/qubo.hpp"
#include "ralb/summary.hpp"

namespace {

using namespace ralb;

struct Bar {
  std::size_t count;
  std::int64_t cost;
  bool valid;
};

// Position in occurrence order -> (occurrence, cost, valid).
const Bar kBars[50] = {
    {20, 220000, true},  {17, 320000, true},  {16, 220000, true},  {15, 320000, true},  {14, 260000, true},
    {13, 220000, true},  {12, 160000, true},  {11, 260000, false}, {11, 320000, true},  {10, 260000, false},
    {10, 320000, true},  {10, 260000, true},  {10, 260000, true},  {9, 260000, false},  {9, 260000, false},
    {9, 260000, false},  {9, 260000, true},   {9, 260000, true},   {9, 160000, true},   {8, 320000, true},
    {8, 260000, false},  {8, 260000, true},   {8, 260000, false},  {8, 260000, false},  {8, 260000, false},
    {8, 220000, true},   {8, 260000, true},   {7, 260000, true},   {7, 260000, false},  {7, 320000, false},
    {7, 260000, false},  {7, 200000, false},  {7, 160000, true},   {6, 320000, true},   {6, 320000, false},
    {6, 260000, true},   {6, 260000, true},   {6, 260000, true},   {6, 160000, true},   {5, 200000, false},
    {5, 260000, true},   {5, 260000, true},   {5, 320000, true},   {5, 320000, true},   {5, 320000, true},
    {5, 320000, true},   {5, 320000, false},  {5, 260000, false},  {5, 320000, true},   {5, 260000, false},
};

// Switches on idle equipment (2 at station 1, 1 at station 2) until the
// active equipment costs `cost`.
Assignment with_cost(const Instance& inst, Assignment a, std::int64_t cost) {
  const std::pair<int, int> extra[] = {{1, 0}, {0, 1}};
  std::int64_t have = objective(inst, a);
  if (cost - have == inst.equipment_costs[1]) {
    a.set_active(1, 0);
  } else if (cost - have == inst.equipment_costs[0]) {
    a.set_active(0, 1);
  } else if (cost - have == inst.equipment_costs[0] + inst.equipment_costs[1]) {
    for (auto [j, k] : extra) a.set_active(j, k);
  } else if (cost != have) {
    throw std::runtime_error("no activation pattern for cost " + std::to_string(cost));
  }
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: make_reference_samples <case_study.json> <out.csv>\n";
    return 2;
  }
  try {
    const auto inst = rescale_times(load_instance(argv[1]));
    const auto optimum = solve_exact(inst);
    if (!optimum.feasible()) throw std::runtime_error("instance is infeasible");
    const auto base = optimum.optimal_assignments.front();
    const LagrangeConfig lambda(335.982, 18.330, 29.764, 335.982);
    const auto model = build_qubo(inst, lambda);
    const auto& reg = model.registry;

    std::vector<Bits> reads;
    std::size_t invalid_seen = 0;
    for (std::size_t pos = 0; pos < std::size(kBars); ++pos) {
      const auto& bar = kBars[pos];
      Bits bits;
      if (bar.valid) {
        bits = encode(inst, reg, with_cost(inst, base, bar.cost));
      } else if (bar.cost == 200000) {
        // Equipment 1 on at both stations, equipment 2 off where task 4 runs.
        auto a = with_cost(inst, base, 260000);
        bits = encode(inst, reg, a);
        bits[reg.y_index(1, 1)] = 0;
      } else {
        // Drop one task's placement, cycling through the tasks.
        bits = encode(inst, reg, with_cost(inst, base, bar.cost));
        const auto task = static_cast<int>(invalid_seen++ % static_cast<std::size_t>(inst.num_tasks));
        const auto& p = base.tasks[static_cast<std::size_t>(task)].where;
        bits[reg.x_index(task, p.equipment, p.station)] = 0;
      }
      // The bar number goes into the last eight (precedence slack) bits so
      // identical placements stay distinct; the first optimal bar keeps its
      // exact slacks.
      if (pos != 6) {
        for (std::size_t b = 0; b < 8; ++b) bits[bits.size() - 8 + b] = static_cast<std::uint8_t>(((pos + 1) >> b) & 1);
      }
      for (std::size_t r = 0; r < bar.count; ++r) reads.push_back(bits);
    }

    auto set = SampleSet::aggregate(model.qubo, reads, {"reference", 0, {{"source", "hardware-top50"}}});
    if (set.entries.size() != std::size(kBars)) throw std::runtime_error("bitstrings collide");
    std::ofstream f(argv[2], std::ios::binary);
    write_sampleset_csv(f, set, inst, reg, optimum.optimal_cost);
    if (!f) throw std::runtime_error(std::string("cannot write ") + argv[2]);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

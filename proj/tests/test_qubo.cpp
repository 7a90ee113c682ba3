#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "ralb/exact.hpp"
#include "ralb/qubo.hpp"

using namespace ralb;
using Catch::Approx;

namespace {

const LagrangeConfig kStar(335.982, 18.330, 29.764, 335.982);

Instance single(std::int64_t cycle = 1, std::int64_t t = 1, std::int64_t c = 5) {
  Instance inst;
  inst.name = "single";
  inst.num_tasks = inst.num_equipment = inst.num_workstations = 1;
  inst.cycle_time = cycle;
  inst.task_times = {t};
  inst.equipment_costs = {c};
  return inst;
}

Assignment known_optimum(const Instance& inst) {
  auto a = Assignment::empty(inst);
  for (int i = 0; i < 3; ++i) a.place(i, 0, 0);
  a.place(3, 1, 1);
  return a;
}

}  // namespace

TEST_CASE("case study registry has 64 variables") {
  const auto inst = rescale_times(oracle::case_study());
  const auto reg = build_registry(inst);
  CHECK(reg.x.size() == 12);
  CHECK(reg.y.size() == 4);
  CHECK(reg.slack.size() == 48);
  CHECK(reg.total() == 64);
  CHECK(build_registry(inst, {.slack_rule = SlackWidthRule::ceil_log2}).total() == 64);
  CHECK(build_registry(inst, {.slack_rule = SlackWidthRule::tight}).total() == 12 + 4 + 6 * 6 + 3 * 1);

  auto c33 = inst;
  c33.cycle_time = 33;
  CHECK(build_registry(c33).total() == 64);

  // Every index is used once, in x, y, slack order.
  for (std::size_t u = 0; u < reg.x.size(); ++u) {
    const auto& v = reg.x[u];
    CHECK(reg.x_index(v.task, v.equipment, v.station) == u);
  }
  CHECK(reg.x_index(0, 1, 0) == VariableRegistry::npos);
  CHECK(reg.y_index(0, 0) == 12);
  CHECK(reg.blocks.front().first == reg.slack_offset());
  CHECK(reg.blocks.back().first + static_cast<std::size_t>(reg.blocks.back().width) == reg.total());
}

TEST_CASE("slack width rules") {
  auto inst = single(1);
  CHECK(slack_width(ConstraintFamily::station_time, inst, SlackWidthRule::ceil_log2) == 0);
  CHECK(slack_width(ConstraintFamily::station_time, inst, SlackWidthRule::bit_length) == 1);
  CHECK(build_registry(inst, {.slack_rule = SlackWidthRule::ceil_log2}).total() == 2);
  CHECK(build_registry(inst).total() == 4);
  inst = single(32, 1);
  CHECK(slack_width(ConstraintFamily::equipment_time, inst, SlackWidthRule::ceil_log2) == 5);
  CHECK(slack_width(ConstraintFamily::equipment_time, inst, SlackWidthRule::bit_length) == 6);
  inst = single(40, 1);
  CHECK(slack_width(ConstraintFamily::equipment_time, inst, SlackWidthRule::ceil_log2) == 6);
  CHECK(slack_width(ConstraintFamily::equipment_time, inst, SlackWidthRule::bit_length) == 6);

  CHECK(parse_slack_rule("tight") == SlackWidthRule::tight);
  CHECK(to_string(SlackWidthRule::ceil_log2) == "ceil-log2");
  CHECK(parse_slack_rule("bit-length") == SlackWidthRule::bit_length);
  CHECK_THROWS_AS(parse_slack_rule("wide"), std::invalid_argument);
}

TEST_CASE("registry size limit") {
  const auto inst = oracle::case_study();
  CHECK_THROWS_AS(build_registry(inst, {.max_variables = 63}), QuboError);
  CHECK_NOTHROW(build_registry(inst, {.max_variables = 64}));
}

TEST_CASE("Lagrange weights must be positive and finite") {
  CHECK_THROWS_AS(LagrangeConfig(0, 1, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(LagrangeConfig(1, -1, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(LagrangeConfig(1, 1, INFINITY, 1), std::invalid_argument);
  CHECK_THROWS_AS(LagrangeConfig(1, 1, 1, NAN), std::invalid_argument);
  CHECK_NOTHROW(LagrangeConfig(1, 1, 1, 1e-9));
}

TEST_CASE("one task, one machine, one station by hand") {
  const auto inst = single();
  const LagrangeConfig ones(1, 1, 1, 1);
  SECTION("without slack bits") {
    const auto model = build_qubo(inst, ones, {.slack_rule = SlackWidthRule::ceil_log2});
    REQUIRE(model.qubo.size() == 2);
    // (x-1)^2 + (x - y)^2 + (x - 1)^2 + 5y
    CHECK(model.qubo.energy_with_offset(Bits{1, 1}) == 5.0);
    CHECK(model.qubo.energy_with_offset(Bits{0, 0}) == 2.0);
    CHECK(model.qubo.energy_with_offset(Bits{1, 0}) == 1.0);
    CHECK(model.qubo.energy_with_offset(Bits{0, 1}) == 8.0);
    CHECK(model.qubo.energy(Bits{0, 0}) == 0.0);
    CHECK(model.qubo.offset() == 2.0);
  }
  SECTION("with one slack bit per time row") {
    const auto model = build_qubo(inst, ones);
    REQUIRE(model.qubo.size() == 4);
    CHECK(model.qubo.energy_with_offset(Bits{1, 1, 0, 0}) == 5.0);
    CHECK(model.qubo.energy_with_offset(Bits{0, 0, 0, 0}) == 2.0);
    // Empty station absorbed by its slack: only the assignment row is violated.
    CHECK(model.qubo.energy_with_offset(Bits{0, 0, 0, 1}) == 1.0);
  }
}

TEST_CASE("energy matches the naive double loop") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    Qubo q(8);
    for (int t = 0; t < 20; ++t) q.add(rng() % 8, rng() % 8, coef(rng));
    const auto x = oracle::bits_of(rng(), 8);
    CHECK(q.energy(x) == Approx(oracle::naive_energy(q, x)).epsilon(1e-12).margin(1e-12));
  }
  Qubo q(1);
  q.add(0, 0, 3.0);
  CHECK(q.energy(Bits{1}) == 3.0);
  CHECK(q.energy(Bits{0}) == 0.0);
  CHECK_THROWS_AS(q.energy(Bits{1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(q.add(0, 1, 1.0), std::out_of_range);
}

TEST_CASE("case study model dimensions") {
  const auto inst = rescale_times(oracle::case_study());
  const auto model = build_qubo(inst, kStar);
  CHECK(model.qubo.size() == 64);
  CHECK(model.qubo.num_diagonal() == 64);
  CHECK(model.qubo.num_offdiagonal() == 412);
  CHECK(model.rows.size() == 4 + 4 + 2 + 3);
}

TEST_CASE("known optimum encodes with zero penalty for any weights") {
  const auto inst = rescale_times(oracle::case_study());
  const auto a = known_optimum(inst);
  for (const auto& lambda : {kStar, LagrangeConfig(1, 1, 1, 1), LagrangeConfig(1e4, 3, 0.5, 70)}) {
    for (const bool norm : {false, true}) {
      const auto model = build_qubo(inst, lambda, {.normalize_rows = norm});
      const auto bits = encode(inst, model.registry, a);
      CHECK(zero_penalty(model, bits));
      CHECK(total_penalty(model, bits) == 0.0);
      CHECK(model.qubo.energy_with_offset(bits) == Approx(160000.0).margin(1e-9));
      const auto back = decode(model.registry, bits);
      CHECK(back.assignment == a);
      CHECK(back.slack_values == std::vector<std::int64_t>{1, 0, 0, 20, 1, 20, 0, 0, 1});
    }
  }
  const auto scaled = build_qubo(inst, kStar, {.cost_scale = 1e-3});
  CHECK(scaled.qubo.energy_with_offset(encode(inst, scaled.registry, a)) == Approx(160.0).margin(1e-9));
  CHECK_THROWS_AS(build_qubo(inst, kStar, {.cost_scale = 0.0}), std::invalid_argument);
}

TEST_CASE("decode marks missing and doubled placements") {
  const auto inst = rescale_times(oracle::case_study());
  const auto reg = build_registry(inst);
  Bits bits(reg.total(), 0);
  auto d = decode(reg, bits);
  for (const auto& t : d.assignment.tasks) CHECK(t.state == PlacementState::unassigned);
  bits[reg.x_index(1, 0, 0)] = 1;
  bits[reg.x_index(1, 1, 1)] = 1;
  d = decode(reg, bits);
  CHECK(d.assignment.tasks[1].state == PlacementState::conflicted);
  CHECK_FALSE(is_feasible(inst, d.assignment));
  CHECK_THROWS_AS(decode(reg, Bits(3, 0)), std::invalid_argument);
}

TEST_CASE("encode rejects unplaceable assignments") {
  const auto inst = rescale_times(oracle::case_study());
  const auto reg = build_registry(inst);
  auto a = known_optimum(inst);
  a.tasks[2] = {};
  CHECK_THROWS_AS(encode(inst, reg, a), EncodeError);
  a = known_optimum(inst);
  a.set_active(1, 1, false);  // load 20 on inactive equipment: negative slack
  CHECK_THROWS_AS(encode(inst, reg, a), EncodeError);
  a = Assignment::empty(inst);
  for (int i = 0; i < 3; ++i) a.place(i, 0, 1);
  a.place(3, 1, 0);  // loads fit, but task 4 now precedes task 3
  CHECK_THROWS_AS(encode(inst, reg, a), EncodeError);
}

TEST_CASE("every feasible assignment encodes soundly") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = oracle::random_instance(rng, 2 + trial % 4, 1 + trial % 2, 1 + trial % 3);
    const auto model = build_qubo(inst, LagrangeConfig(3, 2, 5, 7));
    for (const auto& a : enumerate_feasible(inst)) {
      const auto bits = encode(inst, model.registry, a);
      CHECK(decode(model.registry, bits).assignment == a);
      CHECK(zero_penalty(model, bits));
      CHECK(std::abs(model.qubo.energy_with_offset(bits) - static_cast<double>(oracle::cost(inst, a))) <= 1e-9);
    }
  }
}

TEST_CASE("energy equals objective exactly when penalties vanish") {
  std::mt19937_64 rng(5);
  const auto inst = single(3, 2, 4);
  const auto model = build_qubo(inst, LagrangeConfig(1.5, 0.75, 2.25, 1));
  const auto n = model.qubo.size();
  REQUIRE(n <= 16);
  for (std::uint64_t w = 0; w < (1u << n); ++w) {
    const auto bits = oracle::bits_of(w, n);
    const double objective_part = bits[model.registry.y_index(0, 0)] ? 4.0 : 0.0;
    const double e = model.qubo.energy_with_offset(bits);
    CHECK(e == Approx(objective_part + total_penalty(model, bits)).margin(1e-9));
    if (zero_penalty(model, bits)) {
      CHECK(is_feasible(inst, decode(model.registry, bits).assignment));
      CHECK(e == Approx(objective_part).margin(1e-9));
    } else {
      CHECK(e > objective_part);
    }
  }
}

TEST_CASE("scaling every weight up never lowers an energy") {
  const auto inst = rescale_times(oracle::case_study());
  const auto low = build_qubo(inst, kStar);
  const auto high = build_qubo(inst, LagrangeConfig(335.982 * 3, 18.330 * 3, 29.764 * 3, 335.982 * 3));
  std::mt19937_64 rng(3);
  for (int t = 0; t < 500; ++t) {
    const auto bits = oracle::bits_of(rng(), 64);
    CHECK(high.qubo.energy_with_offset(bits) >= low.qubo.energy_with_offset(bits) - 1e-6);
  }
  const auto opt = encode(inst, low.registry, known_optimum(inst));
  CHECK(high.qubo.energy_with_offset(opt) == Approx(low.qubo.energy_with_offset(opt)).margin(1e-9));
}

TEST_CASE("small models: zero-penalty minimum is the exact optimum") {
  std::mt19937_64 rng(31);
  int checked = 0;
  for (int trial = 0; checked < 12 && trial < 400; ++trial) {
    const auto inst = oracle::random_instance(rng, 1 + trial % 3, 1 + trial % 2, 1 + (trial / 2) % 2, 3);
    const QuboOptions opt{.slack_rule = SlackWidthRule::tight};
    const auto reg = build_registry(inst, opt);
    if (reg.total() > 16) continue;
    const auto truth = oracle::brute_force(inst);
    if (!truth.optimum) continue;
    ++checked;
    double big = 1.0;
    for (auto c : inst.equipment_costs) big += static_cast<double>(c);
    const auto model = build_qubo(inst, LagrangeConfig(big, big, big, big), opt);
    double best = INFINITY, best_zero = INFINITY;
    Bits argmin;
    for (std::uint64_t w = 0; w < (std::uint64_t{1} << reg.total()); ++w) {
      const auto bits = oracle::bits_of(w, reg.total());
      const double e = model.qubo.energy_with_offset(bits);
      if (e < best) best = e, argmin = bits;
      if (zero_penalty(model, bits)) best_zero = std::min(best_zero, e);
    }
    CHECK(best_zero == Approx(static_cast<double>(*truth.optimum)).margin(1e-9));
    CHECK(best == Approx(best_zero).margin(1e-9));
    CHECK(zero_penalty(model, argmin));
    CHECK(oracle::feasible(inst, decode(model.registry, argmin).assignment));
  }
  CHECK(checked == 12);
}

TEST_CASE("text export round-trips") {
  const auto inst = rescale_times(oracle::case_study());
  const auto model = build_qubo(inst, kStar);
  std::ostringstream os;
  write_qubo(os, model.qubo);
  const auto text = os.str();
  CHECK(text.rfind("p qubo 0 64 64 412\nc offset ", 0) == 0);
  std::istringstream is(text);
  const auto back = read_qubo(is);
  CHECK(back.terms() == model.qubo.terms());
  CHECK(back.offset() == model.qubo.offset());
  std::ostringstream again;
  write_qubo(again, back);
  CHECK(again.str() == text);

  std::istringstream bad("0 0 1\n");
  CHECK_THROWS_AS(read_qubo(bad), QuboError);
}

TEST_CASE("bitstrings and numbers print canonically") {
  CHECK(bits_to_string(Bits{1, 0, 1}) == "101");
  CHECK(bits_from_string("0110") == Bits{0, 1, 1, 0});
  CHECK_THROWS_AS(bits_from_string("012"), std::invalid_argument);
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("registry json lists every variable") {
  const auto inst = rescale_times(oracle::case_study());
  const auto json = registry_to_json(build_registry(inst));
  CHECK(json.find("\"total\": 64") != std::string::npos);
  CHECK(json.find("\"kind\": \"y\"") != std::string::npos);
}

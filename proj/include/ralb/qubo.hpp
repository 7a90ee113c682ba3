#pragma once

// Compilation of a line balancing instance into a QUBO.
//
// Every constraint of the IP model becomes a squared penalty row
//   lambda_f * (sum_u a_u x_u - rhs)^2
// with inequalities turned into equalities by a binary-expanded slack
// integer. The objective sits on the diagonal of the y variables. Squares are
// expanded with x^2 = x, so linear parts land on the diagonal and constants in
// the offset.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ralb/exact.hpp"
#include "ralb/instance.hpp"

namespace ralb {

using Bits = std::vector<std::uint8_t>;

std::string bits_to_string(std::span<const std::uint8_t> bits);
/// Accepts only '0'/'1'. Throws std::invalid_argument otherwise.
Bits bits_from_string(std::string_view text);

class QuboError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Upper-triangular quadratic form x^T Q x plus a tracked constant.
class Qubo {
 public:
  using Index = std::uint32_t;
  using Key = std::pair<Index, Index>;

  Qubo() = default;
  explicit Qubo(std::size_t num_variables) : size_(num_variables) {}

  std::size_t size() const { return size_; }
  double offset() const { return offset_; }
  void add_offset(double value) { offset_ += value; }

  /// Accumulates into Q_{min(u,v), max(u,v)}.
  void add(std::size_t u, std::size_t v, double value);
  double coefficient(std::size_t u, std::size_t v) const;

  /// Removes entries that accumulated to exactly zero.
  void drop_zeros();

  const std::map<Key, double>& terms() const { return terms_; }
  std::size_t num_diagonal() const;
  std::size_t num_offdiagonal() const { return terms_.size() - num_diagonal(); }

  /// x^T Q x, without the offset. Throws std::invalid_argument on a length mismatch.
  double energy(std::span<const std::uint8_t> bits) const;
  double energy_with_offset(std::span<const std::uint8_t> bits) const {
    return energy(bits) + offset_;
  }

 private:
  std::size_t size_ = 0;
  double offset_ = 0.0;
  std::map<Key, double> terms_;
};

/// Text export: `p qubo 0 N ndiag noff`, `c offset <v>`, then `u v coef`
/// (diagonal first, then off-diagonal, each in index order).
void write_qubo(std::ostream& os, const Qubo& q);
Qubo read_qubo(std::istream& is);

/// Shortest decimal that round-trips the double.
std::string format_double(double value);

// ---------------------------------------------------------------------------

struct XVar {
  int task, equipment, station;
};
struct YVar {
  int equipment, station;
};

/// One binary-expanded slack integer. `a`/`b` identify the constraint
/// instance: (equipment, station) for equipment_time, (station, -1) for
/// station_time, (edge index, -1) for precedence.
struct SlackBlock {
  ConstraintFamily family;
  int a = -1;
  int b = -1;
  std::size_t first = 0;  // registry index of bit 0
  int width = 0;
};

struct SlackVar {
  std::size_t block;
  int bit;
  std::int64_t weight;
};

/// How many bits the slack blocks get.
enum class SlackWidthRule {
  /// bit_length(C) for time rows, ceil(log2(n*r*m)) for precedence rows.
  /// Represents every slack value 0..C, including empty stations.
  bit_length,
  /// ceil(log2(C)) for time rows, ceil(log2(n*r*m)) for precedence rows.
  /// Cannot represent a slack of exactly C when C is a power of two.
  ceil_log2,
  /// bit_length(C) for time rows, bit_length(m-1) for precedence rows.
  tight,
};

std::string_view to_string(SlackWidthRule rule);
SlackWidthRule parse_slack_rule(std::string_view text);

struct QuboOptions {
  /// Multiplier on the equipment costs in the objective. 1 keeps the raw
  /// costs, so energy + offset of a feasible bitstring is its cost.
  double cost_scale = 1.0;
  /// Divide each constraint row by its bound before squaring (C for the
  /// time rows, m for precedence), which makes the weights dimensionless.
  bool normalize_rows = false;
  SlackWidthRule slack_rule = SlackWidthRule::bit_length;
  std::size_t max_variables = 1u << 20;
};

class VariableRegistry {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  int num_tasks = 0;
  int num_equipment = 0;
  int num_workstations = 0;
  std::vector<XVar> x;
  std::vector<YVar> y;
  std::vector<SlackVar> slack;
  std::vector<SlackBlock> blocks;

  std::size_t total() const { return x.size() + y.size() + slack.size(); }
  std::size_t y_offset() const { return x.size(); }
  std::size_t slack_offset() const { return x.size() + y.size(); }

  /// npos when the task cannot run on the equipment.
  std::size_t x_index(int task, int equipment, int station) const;
  std::size_t y_index(int equipment, int station) const {
    return y_offset() + static_cast<std::size_t>(equipment) * num_workstations + station;
  }

  void index_x();

 private:
  std::vector<std::size_t> x_lookup_;
};

int slack_width(ConstraintFamily family, const Instance& inst, SlackWidthRule rule);

/// Throws QuboError when the variable count exceeds options.max_variables.
VariableRegistry build_registry(const Instance& inst, const QuboOptions& options = {});

/// One penalty weight per constraint family.
class LagrangeConfig {
 public:
  /// Throws std::invalid_argument unless every value is positive and finite.
  explicit LagrangeConfig(const std::array<double, kNumFamilies>& values);
  LagrangeConfig(double task, double equipment, double station, double precedence)
      : LagrangeConfig(std::array<double, kNumFamilies>{task, equipment, station, precedence}) {}

  double operator[](ConstraintFamily f) const { return values_[static_cast<std::size_t>(f)]; }
  const std::array<double, kNumFamilies>& values() const { return values_; }

 private:
  std::array<double, kNumFamilies> values_;
};

/// (sum_u a_u x_u - rhs)^2 before weighting.
struct PenaltyRow {
  ConstraintFamily family;
  std::vector<std::pair<std::size_t, double>> terms;
  double rhs = 0.0;
  std::optional<std::size_t> slack_block;
  double norm = 1.0;  // multiplies lambda * residual^2

  double residual(std::span<const std::uint8_t> bits) const;
};

struct QuboModel {
  VariableRegistry registry;
  Qubo qubo;
  std::vector<PenaltyRow> rows;
  LagrangeConfig lagrange;
  double cost_scale = 1.0;
  std::vector<std::int64_t> equipment_costs;
};

/// `inst` is expected to be rescaled already (see rescale_times).
QuboModel build_qubo(const Instance& inst, const LagrangeConfig& lagrange,
                     const QuboOptions& options = {});

/// Weighted penalty per family, evaluated from the rows (not from Q).
std::array<double, kNumFamilies> penalty_breakdown(const QuboModel& model,
                                                   std::span<const std::uint8_t> bits);
double total_penalty(const QuboModel& model, std::span<const std::uint8_t> bits);
/// True when every row residual is exactly zero.
bool zero_penalty(const QuboModel& model, std::span<const std::uint8_t> bits);

struct Decoded {
  Assignment assignment;
  std::vector<std::int64_t> slack_values;  // one per registry block
};

/// Never fails on structure: a task with no set x bit is unassigned, with
/// more than one it is conflicted. Throws std::invalid_argument on a length
/// mismatch.
Decoded decode(const VariableRegistry& registry, std::span<const std::uint8_t> bits);

class EncodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bitstring for `a` with every slack set so all rows are satisfied.
/// Throws EncodeError if `a` is not encodable (unplaced task, a slack that is
/// negative or does not fit its block).
Bits encode(const Instance& inst, const VariableRegistry& registry, const Assignment& a);

/// JSON listing of every variable in index order, plus counts.
std::string registry_to_json(const VariableRegistry& registry);

}  // namespace ralb

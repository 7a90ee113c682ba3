#pragma once

// Grid search over the four penalty weights. Each grid point is scored by how
// many sampled bitstrings decode to a feasible assignment at the exact
// optimal cost; energies never decide optimality.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ralb/exact.hpp"
#include "ralb/qubo.hpp"
#include "ralb/samplers.hpp"

namespace ralb {

struct GridAxis {
  std::vector<double> values;

  static GridAxis linear(double min, double max, std::size_t count);
  static GridAxis log_spaced(double min, double max, std::size_t count);
  /// "min:max:count" (linear) or "min:max:count:log".
  static GridAxis parse(std::string_view text);
};

struct GridSpec {
  std::array<GridAxis, kNumFamilies> axes;

  /// Log-spaced, 8 points per weight over [g, 1e4 g], g = largest task time.
  static GridSpec default_for(const Instance& inst);

  /// Throws std::invalid_argument on an empty axis or a non-positive value.
  void validate() const;
  std::size_t size() const;
  /// Flat index -> per-axis indices; the first weight varies slowest.
  std::array<std::size_t, kNumFamilies> unflatten(std::size_t flat) const;
};

struct GridPoint {
  std::array<std::size_t, kNumFamilies> index{};
  std::array<double, kNumFamilies> lambda{};
  std::size_t optimal_count = 0;
  std::size_t valid_count = 0;
  double best_energy = 0.0;  // lowest energy including the offset
};

struct PairMarginal {
  std::size_t first = 0;   // axis of rows
  std::size_t second = 0;  // axis of columns
  /// rows x cols, row-major.
  std::vector<std::size_t> max_optimal;
  std::size_t cols = 0;

  std::size_t at(std::size_t row, std::size_t col) const { return max_optimal[row * cols + col]; }
};

struct Marginals {
  /// Per axis value: max optimal count over all other weights.
  std::array<std::vector<std::size_t>, kNumFamilies> single;
  /// Every axis pair (a < b): max over the remaining two weights.
  std::vector<PairMarginal> pairs;
};

Marginals marginalize(const GridSpec& spec, const std::vector<GridPoint>& points);

struct GridOptions {
  std::size_t reads_per_point = 1000;
  SamplerConfig sampler{};
  std::uint64_t seed = 0;
  QuboOptions qubo{};
  unsigned threads = 0;  // across grid points; each point samples single-threaded
};

struct GridResult {
  GridSpec spec;
  std::optional<std::int64_t> exact_cost;
  std::vector<GridPoint> points;  // flat order
  Marginals marginals;
  std::size_t best = 0;           // index into points
  std::vector<std::string> warnings;

  const GridPoint& best_point() const { return points[best]; }
};

/// Solves the instance exactly, then samples the QUBO at every grid point.
/// Point p uses seed derive_seed(seed, {i1, i2, i3, i4}), so adding points
/// leaves the existing ones untouched. The argmax is the highest optimal
/// count, then the lower best energy, then the lexicographically smaller
/// weight vector.
GridResult grid_search(const Instance& inst, const GridSpec& spec, const GridOptions& options);

/// Scores an already-built model: optimal and valid sample counts plus the
/// lowest energy (with offset).
GridPoint score_samples(const Instance& inst, const QuboModel& model, const SampleSet& set,
                        std::optional<std::int64_t> exact_cost);

void write_grid_csv(std::ostream& os, const GridResult& result);
void write_marginal_1d_csv(std::ostream& os, const GridResult& result);
void write_marginal_2d_csv(std::ostream& os, const GridResult& result);

}  // namespace ralb

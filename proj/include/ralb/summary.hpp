#pragma once

// Scoring and I/O of sample sets against the exact optimum.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ralb/exact.hpp"
#include "ralb/qubo.hpp"
#include "ralb/samplers.hpp"

namespace ralb {

struct SolutionRow {
  std::size_t rank = 0;  // 1-based position in the SampleSet order
  Bits bits;
  double energy = 0.0;
  std::size_t count = 0;
  std::int64_t cost = 0;  // objective of the decoded y bits
  bool valid = false;     // decoded assignment satisfies all constraints
  bool optimal = false;   // valid and cost == exact optimum
};

struct OccurrenceCounts {
  std::size_t valid_solutions = 0;  // distinct bitstrings
  std::size_t invalid_solutions = 0;
  std::size_t optimal_solutions = 0;
  std::size_t valid_occurrences = 0;  // weighted by count
  std::size_t invalid_occurrences = 0;
  std::size_t optimal_occurrences = 0;
};

struct SampleSummary {
  std::vector<SolutionRow> top;
  OccurrenceCounts top_counts;
  OccurrenceCounts overall;
  std::size_t num_reads = 0;
  std::size_t distinct = 0;
  std::optional<std::int64_t> exact_cost;
  std::optional<std::size_t> first_optimal_rank;
};

/// Judges one bitstring: decode, check every constraint, compare with the optimum.
SolutionRow evaluate_sample(const Instance& inst, const VariableRegistry& registry, const Sample& sample,
                            std::optional<std::int64_t> exact_cost);

SampleSummary summarize(const SampleSet& set, const Instance& inst, const VariableRegistry& registry,
                        std::optional<std::int64_t> exact_cost, std::size_t top_k);

/// Human-readable top-K table plus the valid/invalid/optimal tallies.
std::string format_summary(const SampleSummary& summary);

/// CSV with `#` metadata lines, then
/// `bitstring,energy,count,cost,valid,optimal`, one row per entry.
void write_sampleset_csv(std::ostream& os, const SampleSet& set, const Instance& inst,
                         const VariableRegistry& registry, std::optional<std::int64_t> exact_cost);

/// Reads back bitstrings, energies and counts (cost/validity columns are
/// recomputed by summarize). Throws std::runtime_error on malformed input.
SampleSet read_sampleset_csv(std::istream& is);

/// Top-K table as CSV: rank,count,energy,cost,valid,optimal,bitstring.
void write_summary_csv(std::ostream& os, const SampleSummary& summary);

}  // namespace ralb

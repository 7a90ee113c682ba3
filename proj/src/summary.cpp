#include "ralb/summary.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ralb {

SolutionRow evaluate_sample(const Instance& inst, const VariableRegistry& registry, const Sample& sample,
                            std::optional<std::int64_t> exact_cost) {
  SolutionRow row;
  row.bits = sample.bits;
  row.energy = sample.energy;
  row.count = sample.count;
  const auto decoded = decode(registry, sample.bits);
  row.cost = objective(inst, decoded.assignment);
  row.valid = is_feasible(inst, decoded.assignment);
  row.optimal = row.valid && exact_cost && row.cost == *exact_cost;
  return row;
}

namespace {

void tally(OccurrenceCounts& c, const SolutionRow& row) {
  if (row.valid) {
    ++c.valid_solutions;
    c.valid_occurrences += row.count;
  } else {
    ++c.invalid_solutions;
    c.invalid_occurrences += row.count;
  }
  if (row.optimal) {
    ++c.optimal_solutions;
    c.optimal_occurrences += row.count;
  }
}

}  // namespace

SampleSummary summarize(const SampleSet& set, const Instance& inst, const VariableRegistry& registry,
                        std::optional<std::int64_t> exact_cost, std::size_t top_k) {
  SampleSummary s;
  s.num_reads = set.num_reads;
  s.distinct = set.entries.size();
  s.exact_cost = exact_cost;
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    auto row = evaluate_sample(inst, registry, set.entries[i], exact_cost);
    row.rank = i + 1;
    tally(s.overall, row);
    if (row.optimal && !s.first_optimal_rank) s.first_optimal_rank = row.rank;
    if (i < top_k) {
      tally(s.top_counts, row);
      s.top.push_back(std::move(row));
    }
  }
  return s;
}

std::string format_summary(const SampleSummary& s) {
  std::ostringstream os;
  os << "reads: " << s.num_reads << ", distinct solutions: " << s.distinct << '\n';
  os << "exact optimum: " << (s.exact_cost ? std::to_string(*s.exact_cost) : std::string("infeasible")) << '\n';
  os << '\n' << std::setw(5) << "rank" << std::setw(8) << "count" << std::setw(26) << "energy" << std::setw(12)
     << "cost" << std::setw(8) << "valid" << std::setw(9) << "optimal" << '\n';
  for (const auto& row : s.top) {
    os << std::setw(5) << row.rank << std::setw(8) << row.count << std::setw(26) << format_double(row.energy)
       << std::setw(12) << row.cost << std::setw(8) << (row.valid ? "yes" : "no") << std::setw(9)
       << (row.optimal ? "yes" : "no") << '\n';
  }
  auto block = [&](const char* title, const OccurrenceCounts& c) {
    os << '\n' << title << '\n';
    os << "  valid solutions:     " << c.valid_solutions << " (" << c.valid_occurrences << " occurrences)\n";
    os << "  invalid solutions:   " << c.invalid_solutions << " (" << c.invalid_occurrences << " occurrences)\n";
    os << "  optimal solutions:   " << c.optimal_solutions << " (" << c.optimal_occurrences << " occurrences)\n";
  };
  block(("top " + std::to_string(s.top.size()) + ":").c_str(), s.top_counts);
  block("all samples:", s.overall);
  if (s.first_optimal_rank) os << "\nfirst optimal solution at rank " << *s.first_optimal_rank << '\n';
  return os.str();
}

void write_sampleset_csv(std::ostream& os, const SampleSet& set, const Instance& inst,
                         const VariableRegistry& registry, std::optional<std::int64_t> exact_cost) {
  os << "# sampler=" << set.info.name << '\n';
  os << "# seed=" << set.info.seed << '\n';
  os << "# num_reads=" << set.num_reads << '\n';
  for (const auto& [key, value] : set.info.params) os << "# param." << key << '=' << value << '\n';
  os << "# exact_cost=" << (exact_cost ? std::to_string(*exact_cost) : std::string("infeasible")) << '\n';
  os << "bitstring,energy,count,cost,valid,optimal\n";
  for (const auto& entry : set.entries) {
    const auto row = evaluate_sample(inst, registry, entry, exact_cost);
    os << bits_to_string(entry.bits) << ',' << format_double(entry.energy) << ',' << entry.count << ',' << row.cost
       << ',' << (row.valid ? 1 : 0) << ',' << (row.optimal ? 1 : 0) << '\n';
  }
}

SampleSet read_sampleset_csv(std::istream& is) {
  SampleSet set;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  std::optional<std::size_t> declared_reads;
  std::size_t width = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto body = line.substr(1);
      body.erase(0, body.find_first_not_of(' '));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const auto key = body.substr(0, eq);
      const auto value = body.substr(eq + 1);
      if (key == "sampler") {
        set.info.name = value;
      } else if (key == "seed") {
        set.info.seed = std::stoull(value);
      } else if (key == "num_reads") {
        declared_reads = std::stoull(value);
      } else if (key.rfind("param.", 0) == 0) {
        set.info.params.emplace_back(key.substr(6), value);
      }
      continue;
    }
    if (!header) {
      if (line.rfind("bitstring,energy,count", 0) != 0) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": expected CSV header");
      }
      header = true;
      continue;
    }
    std::istringstream ls(line);
    std::string bits, energy, count;
    if (!std::getline(ls, bits, ',') || !std::getline(ls, energy, ',') || !std::getline(ls, count, ',')) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected bitstring,energy,count");
    }
    Sample s;
    try {
      s.bits = bits_from_string(bits);
      s.energy = std::stod(energy);
      s.count = std::stoull(count);
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (set.entries.empty()) width = s.bits.size();
    if (s.bits.size() != width) throw std::runtime_error("line " + std::to_string(lineno) + ": bitstring width differs");
    set.num_reads += s.count;
    set.entries.push_back(std::move(s));
  }
  if (declared_reads && *declared_reads != set.num_reads) {
    throw std::runtime_error("num_reads " + std::to_string(*declared_reads) + " does not match counts total " +
                             std::to_string(set.num_reads));
  }
  set.sort_entries();
  return set;
}

void write_summary_csv(std::ostream& os, const SampleSummary& summary) {
  os << "rank,count,energy,cost,valid,optimal,bitstring\n";
  for (const auto& row : summary.top) {
    os << row.rank << ',' << row.count << ',' << format_double(row.energy) << ',' << row.cost << ','
       << (row.valid ? 1 : 0) << ',' << (row.optimal ? 1 : 0) << ',' << bits_to_string(row.bits) << '\n';
  }
}

}  // namespace ralb

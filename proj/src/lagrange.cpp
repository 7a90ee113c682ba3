#include "ralb/lagrange.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ralb/parallel.hpp"

namespace ralb {

GridAxis GridAxis::linear(double min, double max, std::size_t count) {
  if (count == 0) throw std::invalid_argument("grid axis needs at least one point");
  GridAxis axis;
  if (count == 1) {
    axis.values = {min};
    return axis;
  }
  for (std::size_t i = 0; i < count; ++i) {
    axis.values.push_back(min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return axis;
}

GridAxis GridAxis::log_spaced(double min, double max, std::size_t count) {
  if (!(min > 0.0 && max > 0.0)) throw std::invalid_argument("log-spaced grid needs positive bounds");
  if (count == 0) throw std::invalid_argument("grid axis needs at least one point");
  GridAxis axis;
  if (count == 1) {
    axis.values = {min};
    return axis;
  }
  const double lo = std::log(min);
  const double hi = std::log(max);
  for (std::size_t i = 0; i < count; ++i) {
    axis.values.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1)));
  }
  return axis;
}

GridAxis GridAxis::parse(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto colon = text.find(':', start);
    parts.emplace_back(text.substr(start, colon == std::string_view::npos ? colon : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  const bool log = parts.size() == 4 && parts[3] == "log";
  if (parts.size() != 3 && !log) {
    throw std::invalid_argument("grid spec '" + std::string(text) + "' is not min:max:count[:log]");
  }
  std::size_t used = 0;
  double min = 0.0, max = 0.0;
  long long count = 0;
  try {
    min = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("min");
    max = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("max");
    count = std::stoll(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("count");
  } catch (const std::exception&) {
    throw std::invalid_argument("grid spec '" + std::string(text) + "' is not min:max:count[:log]");
  }
  if (count < 1) throw std::invalid_argument("grid spec '" + std::string(text) + "' needs count >= 1");
  return log ? log_spaced(min, max, static_cast<std::size_t>(count))
             : linear(min, max, static_cast<std::size_t>(count));
}

GridSpec GridSpec::default_for(const Instance& inst) {
  std::int64_t g = 1;
  for (auto t : inst.task_times) g = std::max(g, t);
  GridSpec spec;
  for (auto& axis : spec.axes) axis = GridAxis::log_spaced(static_cast<double>(g), 1e4 * static_cast<double>(g), 8);
  return spec;
}

void GridSpec::validate() const {
  for (std::size_t a = 0; a < kNumFamilies; ++a) {
    if (axes[a].values.empty()) throw std::invalid_argument("grid axis " + std::to_string(a + 1) + " is empty");
    for (double v : axes[a].values) {
      if (!(std::isfinite(v) && v > 0.0)) {
        throw std::invalid_argument("grid axis " + std::to_string(a + 1) + " has non-positive value " +
                                    format_double(v));
      }
    }
  }
}

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (const auto& axis : axes) n *= axis.values.size();
  return n;
}

std::array<std::size_t, kNumFamilies> GridSpec::unflatten(std::size_t flat) const {
  std::array<std::size_t, kNumFamilies> idx{};
  for (std::size_t a = kNumFamilies; a-- > 0;) {
    const auto len = axes[a].values.size();
    idx[a] = flat % len;
    flat /= len;
  }
  return idx;
}

Marginals marginalize(const GridSpec& spec, const std::vector<GridPoint>& points) {
  Marginals m;
  for (std::size_t a = 0; a < kNumFamilies; ++a) m.single[a].assign(spec.axes[a].values.size(), 0);
  for (std::size_t a = 0; a < kNumFamilies; ++a) {
    for (std::size_t b = a + 1; b < kNumFamilies; ++b) {
      PairMarginal pm;
      pm.first = a;
      pm.second = b;
      pm.cols = spec.axes[b].values.size();
      pm.max_optimal.assign(spec.axes[a].values.size() * pm.cols, 0);
      m.pairs.push_back(std::move(pm));
    }
  }
  for (const auto& p : points) {
    for (std::size_t a = 0; a < kNumFamilies; ++a) {
      auto& cell = m.single[a][p.index[a]];
      cell = std::max(cell, p.optimal_count);
    }
    for (auto& pm : m.pairs) {
      auto& cell = pm.max_optimal[p.index[pm.first] * pm.cols + p.index[pm.second]];
      cell = std::max(cell, p.optimal_count);
    }
  }
  return m;
}

GridPoint score_samples(const Instance& inst, const QuboModel& model, const SampleSet& set,
                        std::optional<std::int64_t> exact_cost) {
  GridPoint point;
  point.best_energy = std::numeric_limits<double>::infinity();
  for (const auto& entry : set.entries) {
    const auto decoded = decode(model.registry, entry.bits);
    const bool valid = is_feasible(inst, decoded.assignment);
    if (valid) {
      point.valid_count += entry.count;
      if (exact_cost && objective(inst, decoded.assignment) == *exact_cost) point.optimal_count += entry.count;
    }
    point.best_energy = std::min(point.best_energy, entry.energy + model.qubo.offset());
  }
  return point;
}

GridResult grid_search(const Instance& inst, const GridSpec& spec, const GridOptions& options) {
  spec.validate();
  if (options.reads_per_point < 1) throw std::invalid_argument("reads per point must be >= 1");
  GridResult result;
  result.spec = spec;
  result.exact_cost = solve_exact(inst).optimal_cost;
  if (!result.exact_cost) result.warnings.push_back("instance is infeasible; no sample can be optimal");

  const Instance scaled = rescale_times(inst);
  const auto total = spec.size();
  result.points.resize(total);
  SamplerConfig sampler = options.sampler;
  sampler.threads = 1;

  parallel_for(total, options.threads, [&](std::size_t flat) {
    const auto idx = spec.unflatten(flat);
    std::array<double, kNumFamilies> lambda{};
    for (std::size_t a = 0; a < kNumFamilies; ++a) lambda[a] = spec.axes[a].values[idx[a]];
    const auto model = build_qubo(scaled, LagrangeConfig(lambda), options.qubo);
    const auto set = run_sampler(model.qubo, sampler, options.reads_per_point,
                                 derive_seed(options.seed, {idx[0], idx[1], idx[2], idx[3]}));
    auto point = score_samples(scaled, model, set, result.exact_cost);
    point.index = idx;
    point.lambda = lambda;
    result.points[flat] = point;
  });

  result.marginals = marginalize(spec, result.points);
  for (std::size_t i = 1; i < total; ++i) {
    const auto& p = result.points[i];
    const auto& b = result.points[result.best];
    if (p.optimal_count != b.optimal_count) {
      if (p.optimal_count > b.optimal_count) result.best = i;
    } else if (p.best_energy != b.best_energy) {
      if (p.best_energy < b.best_energy) result.best = i;
    } else if (p.lambda < b.lambda) {
      result.best = i;
    }
  }

  const auto no_valid = static_cast<std::size_t>(
      std::count_if(result.points.begin(), result.points.end(), [](const GridPoint& p) { return p.valid_count == 0; }));
  if (no_valid == total) {
    result.warnings.push_back("no valid samples at any of the " + std::to_string(total) + " points");
  } else if (no_valid > 0) {
    result.warnings.push_back("no valid samples at " + std::to_string(no_valid) + " points");
  }
  return result;
}

void write_grid_csv(std::ostream& os, const GridResult& result) {
  os << "lambda1,lambda2,lambda3,lambda4,optimal_count,valid_count,best_energy\n";
  for (const auto& p : result.points) {
    for (double l : p.lambda) os << format_double(l) << ',';
    os << p.optimal_count << ',' << p.valid_count << ',' << format_double(p.best_energy) << '\n';
  }
}

void write_marginal_1d_csv(std::ostream& os, const GridResult& result) {
  os << "parameter,index,lambda,max_optimal_count\n";
  for (std::size_t a = 0; a < kNumFamilies; ++a) {
    for (std::size_t i = 0; i < result.marginals.single[a].size(); ++i) {
      os << "lambda" << (a + 1) << ',' << i << ',' << format_double(result.spec.axes[a].values[i]) << ','
         << result.marginals.single[a][i] << '\n';
    }
  }
}

void write_marginal_2d_csv(std::ostream& os, const GridResult& result) {
  os << "parameter_a,parameter_b,index_a,index_b,lambda_a,lambda_b,max_optimal_count\n";
  for (const auto& pm : result.marginals.pairs) {
    const auto& va = result.spec.axes[pm.first].values;
    const auto& vb = result.spec.axes[pm.second].values;
    for (std::size_t i = 0; i < va.size(); ++i) {
      for (std::size_t j = 0; j < vb.size(); ++j) {
        os << "lambda" << (pm.first + 1) << ",lambda" << (pm.second + 1) << ',' << i << ',' << j << ','
           << format_double(va[i]) << ',' << format_double(vb[j]) << ',' << pm.at(i, j) << '\n';
      }
    }
  }
}

}  // namespace ralb

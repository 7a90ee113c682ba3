#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "ralb/exact.hpp"
#include "ralb/instance.hpp"
#include "ralb/ising.hpp"
#include "ralb/lagrange.hpp"
#include "ralb/qubo.hpp"
#include "ralb/samplers.hpp"
#include "ralb/summary.hpp"

namespace ralb::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Options {
  std::string instance;
  std::string out;
  std::uint64_t seed = 0;
  std::uint64_t node_budget = ExactOptions{}.node_budget;
  unsigned threads = 0;

  // qubo
  std::vector<double> lambda;
  double cost_scale = 1.0;
  bool normalize_rows = false;
  std::string slack_rule = "bit-length";

  // sampling
  std::string sampler = "sa";
  std::size_t reads = 1000;
  std::size_t sweeps = 1000;
  std::optional<double> beta_start;
  std::optional<double> beta_end;
  bool random_order = false;
  std::size_t subsize = DecomposeParams{}.subsize;
  std::string inner = "sa";
  std::size_t tabu_iters = 0;
  std::size_t tabu_tenure = 0;
  std::size_t top_k = 50;

  std::vector<std::string> grid;
  std::string samples;
};

void write_file(const Options& opt, const std::string& name, const std::string& content) {
  if (opt.out.empty()) return;
  fs::create_directories(opt.out);
  const auto path = fs::path(opt.out) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

QuboOptions qubo_options(const Options& opt) {
  QuboOptions q;
  q.cost_scale = opt.cost_scale;
  q.normalize_rows = opt.normalize_rows;
  q.slack_rule = parse_slack_rule(opt.slack_rule);
  return q;
}

LagrangeConfig lagrange(const Options& opt) {
  if (opt.lambda.size() != kNumFamilies) throw std::invalid_argument("--lambda needs four values l1,l2,l3,l4");
  return LagrangeConfig(opt.lambda[0], opt.lambda[1], opt.lambda[2], opt.lambda[3]);
}

SamplerConfig sampler_config(const Options& opt) {
  SamplerConfig c;
  c.kind = parse_sampler_kind(opt.sampler);
  c.sweeps = opt.sweeps;
  c.beta_start = opt.beta_start;
  c.beta_end = opt.beta_end;
  if (c.beta_start.has_value() != c.beta_end.has_value()) {
    throw std::invalid_argument("--beta-start and --beta-end go together");
  }
  c.random_order = opt.random_order;
  c.tabu = {opt.tabu_tenure, opt.tabu_iters};
  c.decompose.subsize = opt.subsize;
  c.decompose.inner = parse_sampler_kind(opt.inner);
  c.decompose.tabu = {opt.tabu_tenure, opt.tabu_iters};
  c.threads = opt.threads;
  return c;
}

ExactResult exact(const Instance& inst, const Options& opt) {
  ExactOptions e;
  e.node_budget = opt.node_budget;
  return solve_exact(inst, e);
}

std::string cost_text(std::optional<std::int64_t> cost) {
  return cost ? std::to_string(*cost) : std::string("infeasible");
}

std::string lambda_text(const std::array<double, kNumFamilies>& l) {
  std::string s;
  for (std::size_t f = 0; f < l.size(); ++f) s += (f ? "," : "") + format_double(l[f]);
  return s;
}

/// One line per workstation, tasks and stations 1-based.
std::string describe(const Instance& inst, const Assignment& a) {
  std::ostringstream os;
  for (int k = 0; k < inst.num_workstations; ++k) {
    os << "workstation " << (k + 1) << ": ";
    std::int64_t load = 0;
    bool any = false;
    for (int j = 0; j < inst.num_equipment; ++j) {
      if (!a.equipment_active(j, k)) continue;
      os << (any ? "; " : "") << "equipment " << (j + 1) << ", tasks {";
      bool first = true;
      for (int i = 0; i < inst.num_tasks; ++i) {
        const auto& p = a.tasks[static_cast<std::size_t>(i)];
        if (p.assigned() && p.where == Placement{j, k}) {
          os << (first ? "" : ",") << (i + 1);
          load += inst.time(i, j);
          first = false;
        }
      }
      os << '}';
      any = true;
    }
    if (any) {
      os << ", load " << load << '\n';
    } else {
      os << "idle\n";
    }
  }
  return os.str();
}

/// Every option of the subcommand with its value, in the config-file format
/// read by --config. Options without a value are left out.
std::string manifest(const CLI::App& sub) {
  std::istringstream body(sub.config_to_str(true, false));
  std::string text = "# ralb run manifest; rerun with: ralb --config <this file>\n[" + sub.get_name() + "]\n";
  std::string line;
  while (std::getline(body, line)) {
    if (line.ends_with("=\"\"")) continue;
    text += line + '\n';
  }
  return text;
}

// --- commands ---------------------------------------------------------------

int cmd_validate(const Options& opt, std::ostream& out) {
  const auto inst = load_instance(opt.instance);
  out << "ok: " << inst.name << '\n';
  out << "tasks " << inst.num_tasks << ", equipment " << inst.num_equipment << ", workstations "
      << inst.num_workstations << ", cycle time " << inst.cycle_time << ", precedence edges "
      << inst.precedence_edges.size() << '\n';
  out << "time gcd " << time_gcd(inst) << '\n';
  return kOk;
}

int cmd_solve_exact(const Options& opt, std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(opt.instance);
  const auto result = exact(inst, opt);
  err << "solve-exact: " << result.wall_time.count() << " s\n";

  std::ostringstream text;
  text << "instance: " << inst.name << '\n';
  text << "optimal cost: " << cost_text(result.optimal_cost) << '\n';
  text << "nodes explored: " << result.nodes_explored << '\n';
  if (result.feasible()) {
    text << "optimal assignments: " << result.optimal_assignments.size() << '\n';
    text << describe(inst, result.optimal_assignments.front());
  }
  out << text.str();

  std::ostringstream csv;
  csv << "# cost=" << cost_text(result.optimal_cost) << '\n';
  csv << "solution,task,equipment,workstation,time\n";
  for (std::size_t s = 0; s < result.optimal_assignments.size(); ++s) {
    const auto& a = result.optimal_assignments[s];
    for (int i = 0; i < inst.num_tasks; ++i) {
      const auto& p = a.tasks[static_cast<std::size_t>(i)];
      csv << (s + 1) << ',' << (i + 1) << ',' << (p.where.equipment + 1) << ',' << (p.where.station + 1) << ','
          << inst.time(i, p.where.equipment) << '\n';
    }
  }
  write_file(opt, "exact.txt", text.str());
  write_file(opt, "exact.csv", csv.str());
  return kOk;
}

int cmd_build_qubo(const Options& opt, const CLI::App& app, std::ostream& out) {
  const auto raw = load_instance(opt.instance);
  const auto inst = rescale_times(raw);
  const auto model = build_qubo(inst, lagrange(opt), qubo_options(opt));
  const auto& reg = model.registry;

  std::ostringstream qubo, ising;
  write_qubo(qubo, model.qubo);
  write_ising(ising, qubo_to_ising(model.qubo));
  write_file(opt, "qubo.txt", qubo.str());
  write_file(opt, "ising.txt", ising.str());
  write_file(opt, "registry.json", registry_to_json(reg));
  write_file(opt, "manifest.ini", manifest(app));

  out << "instance: " << inst.name << " (times divided by " << time_gcd(raw) << ")\n";
  out << "variables: " << reg.total() << " (x " << reg.x.size() << ", y " << reg.y.size() << ", slack "
      << reg.slack.size() << ")\n";
  out << "terms: " << model.qubo.num_diagonal() << " diagonal, " << model.qubo.num_offdiagonal()
      << " off-diagonal, offset " << format_double(model.qubo.offset()) << '\n';
  return kOk;
}

int cmd_sample(const Options& opt, const CLI::App& app, std::ostream& out, std::ostream& err) {
  const auto raw = load_instance(opt.instance);
  const auto inst = rescale_times(raw);
  const auto config = sampler_config(opt);
  const auto model = build_qubo(inst, lagrange(opt), qubo_options(opt));
  const auto optimum = exact(inst, opt);
  const auto set = run_sampler(model.qubo, config, opt.reads, opt.seed);
  err << "sample: " << set.wall_time.count() << " s\n";

  const auto summary = summarize(set, inst, model.registry, optimum.optimal_cost, opt.top_k);
  std::ostringstream text;
  text << "instance: " << inst.name << '\n';
  text << "sampler: " << set.info.name << ", seed " << opt.seed << ", lambda "
       << lambda_text(model.lagrange.values()) << '\n';
  text << format_summary(summary);

  std::ostringstream samples, table;
  write_sampleset_csv(samples, set, inst, model.registry, optimum.optimal_cost);
  write_summary_csv(table, summary);
  write_file(opt, "samples.csv", samples.str());
  write_file(opt, "summary.txt", text.str());
  write_file(opt, "summary.csv", table.str());
  write_file(opt, "manifest.ini", manifest(app));
  out << text.str();
  return kOk;
}

GridSpec grid_spec(const Options& opt, const Instance& inst) {
  if (opt.grid.empty()) return GridSpec::default_for(inst);
  GridSpec spec;
  if (opt.grid.size() == 1) {
    for (auto& axis : spec.axes) axis = GridAxis::parse(opt.grid[0]);
  } else if (opt.grid.size() == kNumFamilies) {
    for (std::size_t a = 0; a < kNumFamilies; ++a) spec.axes[a] = GridAxis::parse(opt.grid[a]);
  } else {
    throw std::invalid_argument("--grid takes one spec for all weights or one per weight (four)");
  }
  return spec;
}

int cmd_grid_search(const Options& opt, const CLI::App& app, std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(opt.instance);
  GridOptions g;
  g.reads_per_point = opt.reads;
  g.sampler = sampler_config(opt);
  g.seed = opt.seed;
  g.qubo = qubo_options(opt);
  g.threads = opt.threads;
  const auto start = Clock::now();
  const auto result = grid_search(inst, grid_spec(opt, inst), g);
  err << "grid-search: " << std::chrono::duration<double>(Clock::now() - start).count() << " s\n";

  const auto& best = result.best_point();
  std::ostringstream text;
  text << "instance: " << inst.name << '\n';
  text << "grid points: " << result.points.size() << ", reads per point: " << opt.reads << '\n';
  text << "exact optimum: " << cost_text(result.exact_cost) << '\n';
  text << "best lambda: " << lambda_text(best.lambda) << '\n';
  text << "optimal samples: " << best.optimal_count << ", valid samples: " << best.valid_count
       << ", best energy: " << format_double(best.best_energy) << '\n';
  for (const auto& w : result.warnings) text << "warning: " << w << '\n';

  std::ostringstream grid, m1, m2;
  write_grid_csv(grid, result);
  write_marginal_1d_csv(m1, result);
  write_marginal_2d_csv(m2, result);
  write_file(opt, "grid.csv", grid.str());
  write_file(opt, "marginal_1d.csv", m1.str());
  write_file(opt, "marginal_2d.csv", m2.str());
  write_file(opt, "best.txt", text.str());
  write_file(opt, "manifest.ini", manifest(app));
  out << text.str();
  return kOk;
}

int cmd_report(const Options& opt, std::ostream& out) {
  const auto inst = rescale_times(load_instance(opt.instance));
  std::ifstream f(opt.samples, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + opt.samples);
  const auto set = read_sampleset_csv(f);
  const auto registry = build_registry(inst, qubo_options(opt));
  if (!set.entries.empty() && set.entries.front().bits.size() != registry.total()) {
    throw std::invalid_argument("samples have " + std::to_string(set.entries.front().bits.size()) +
                                " bits but the instance encodes to " + std::to_string(registry.total()));
  }
  const auto optimum = exact(inst, opt);
  const auto summary = summarize(set, inst, registry, optimum.optimal_cost, opt.top_k);

  std::ostringstream text, table;
  text << "instance: " << inst.name << '\n';
  text << format_summary(summary);
  write_summary_csv(table, summary);
  write_file(opt, "report.txt", text.str());
  write_file(opt, "report.csv", table.str());
  out << text.str();
  return kOk;
}

// --- option wiring ----------------------------------------------------------

void add_instance(CLI::App* sub, Options& opt) {
  sub->add_option("--instance", opt.instance, "instance JSON file")->required();
}

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("--out", opt.out, "output directory");
  sub->add_option("--node-budget", opt.node_budget, "exact-solver node budget");
}

void add_qubo(CLI::App* sub, Options& opt, bool need_lambda) {
  if (need_lambda) {
    sub->add_option("--lambda", opt.lambda, "penalty weights l1,l2,l3,l4")
        ->delimiter(',')
        ->expected(static_cast<int>(kNumFamilies))
        ->required();
  }
  sub->add_option("--cost-scale", opt.cost_scale, "multiplier on equipment costs in the QUBO");
  sub->add_flag("--normalize-rows", opt.normalize_rows, "divide constraint rows by their bound");
  sub->add_option("--slack-rule", opt.slack_rule, "bit-length | ceil-log2 | tight");
}

void add_sampler(CLI::App* sub, Options& opt) {
  sub->add_option("--seed", opt.seed, "master seed");
  sub->add_option("--reads", opt.reads, "reads (per grid point for grid-search)");
  sub->add_option("--sampler", opt.sampler, "sa | tabu | decomp")->check(CLI::IsMember({"sa", "tabu", "decomp"}));
  sub->add_option("--sweeps", opt.sweeps, "annealing sweeps per read");
  sub->add_option("--beta-start", opt.beta_start, "hot inverse temperature (default: automatic)");
  sub->add_option("--beta-end", opt.beta_end, "cold inverse temperature (default: automatic)");
  sub->add_flag("--random-order", opt.random_order, "random visiting order per sweep");
  sub->add_option("--subsize", opt.subsize, "decomposition window size");
  sub->add_option("--inner", opt.inner, "decomposition inner sampler: sa | tabu")
      ->check(CLI::IsMember({"sa", "tabu"}));
  sub->add_option("--tabu-iters", opt.tabu_iters, "tabu iterations (0: automatic)");
  sub->add_option("--tabu-tenure", opt.tabu_tenure, "tabu tenure (0: automatic)");
  sub->add_option("--threads", opt.threads, "worker threads (0: all cores); results do not depend on it");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robotic assembly line balancing: exact solver, QUBO compiler and samplers", "ralb"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a manifest written by a previous run");
  Options opt;

  auto* validate_cmd = app.add_subcommand("validate", "check an instance file");
  add_instance(validate_cmd, opt);

  auto* exact_cmd = app.add_subcommand("solve-exact", "solve an instance to optimality");
  add_instance(exact_cmd, opt);
  add_common(exact_cmd, opt);

  auto* build_cmd = app.add_subcommand("build-qubo", "write the QUBO, Ising model and variable registry");
  add_instance(build_cmd, opt);
  build_cmd->add_option("--out", opt.out, "output directory")->required();
  add_qubo(build_cmd, opt, true);

  auto* sample_cmd = app.add_subcommand("sample", "sample the QUBO and score the samples");
  add_instance(sample_cmd, opt);
  add_common(sample_cmd, opt);
  add_qubo(sample_cmd, opt, true);
  add_sampler(sample_cmd, opt);
  sample_cmd->add_option("--top-k", opt.top_k, "rows in the summary table");

  auto* grid_cmd = app.add_subcommand("grid-search", "score a grid of penalty weights");
  add_instance(grid_cmd, opt);
  add_common(grid_cmd, opt);
  add_qubo(grid_cmd, opt, false);
  add_sampler(grid_cmd, opt);
  grid_cmd->add_option("--grid", opt.grid, "min:max:count[:log], once for all weights or once per weight");

  auto* report_cmd = app.add_subcommand("report", "tabulate a sample CSV against the exact optimum");
  report_cmd->add_option("--samples", opt.samples, "sample CSV")->required();
  add_instance(report_cmd, opt);
  add_common(report_cmd, opt);
  report_cmd->add_option("--slack-rule", opt.slack_rule, "bit-length | ceil-log2 | tight");
  report_cmd->add_option("--top-k", opt.top_k, "rows in the table");

  for (auto* sub : app.get_subcommands({})) sub->configurable();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(opt, out);
    if (exact_cmd->parsed()) return cmd_solve_exact(opt, out, err);
    if (build_cmd->parsed()) return cmd_build_qubo(opt, *build_cmd, out);
    if (sample_cmd->parsed()) return cmd_sample(opt, *sample_cmd, out, err);
    if (grid_cmd->parsed()) return cmd_grid_search(opt, *grid_cmd, out, err);
    if (report_cmd->parsed()) return cmd_report(opt, out);
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kBudgetExceeded;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace ralb::cli

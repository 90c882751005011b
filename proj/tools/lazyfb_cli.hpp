#pragma once

// Command-line front end. Everything lives in a header so the test-suite can
// drive `run` in-process.

#include <lazyfb/fixtures.hpp>
#include <lazyfb/lazyfb.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace lazyfb::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2, kVerification = 3 };

/// Defaults are the pendulum setup. With `benchmark = batch`, every field that
/// was not given on the command line or in the config file takes the batch
/// value instead.
struct RunConfig {
  std::string benchmark = "pendulum";
  std::size_t resolution = 128;
  std::size_t controls = 17;       // pendulum: control samples; batch: valve samples
  double control_bound = 64.0;     // pendulum only
  std::size_t heating_levels = 7;  // batch only
  double cost_gain = 0.01;         // batch only
  std::size_t sampling = 3;
  double event_radius = 9.0;
  std::size_t max_event_steps = 1000;
  double lambda = 0.99;
  std::string mode = "lazy";       // ordinary | lazy | heuristic
  std::string sigma = "mean";      // worst | mean
  long goal_control = 8;
  std::vector<double> x0{std::numbers::pi + 0.5, 0.0};
  std::size_t max_events = 10000;
  std::uint64_t seed = 1;
  std::string output = ".";
  unsigned threads = 0;
};

/// Canonical `key = value` text, readable back through --config. Fields that
/// do not influence results (output directory, thread count) are left out of
/// the hashed part and appended afterwards.
inline std::string hashed_text(const RunConfig &c) {
  std::ostringstream os;
  os << "benchmark = \"" << c.benchmark << "\"\n";
  os << "resolution = " << c.resolution << "\n";
  os << "controls = " << c.controls << "\n";
  os << "control-bound = " << io::format_double(c.control_bound) << "\n";
  os << "heating-levels = " << c.heating_levels << "\n";
  os << "cost-gain = " << io::format_double(c.cost_gain) << "\n";
  os << "sampling = " << c.sampling << "\n";
  os << "event-radius = " << io::format_double(c.event_radius) << "\n";
  os << "max-event-steps = " << c.max_event_steps << "\n";
  os << "lambda = " << io::format_double(c.lambda) << "\n";
  os << "mode = \"" << c.mode << "\"\n";
  os << "sigma = \"" << c.sigma << "\"\n";
  os << "goal-control = " << c.goal_control << "\n";
  os << "x0 = [";
  for (std::size_t i = 0; i < c.x0.size(); ++i)
    os << (i ? ", " : "") << io::format_double(c.x0[i]);
  os << "]\n";
  os << "max-events = " << c.max_events << "\n";
  os << "seed = " << c.seed << "\n";
  return os.str();
}

inline std::string config_hash(const RunConfig &c) { return io::hex64(io::fnv1a(hashed_text(c))); }

inline std::string config_text(const RunConfig &c) {
  std::ostringstream os;
  os << "# lazyfb configuration, hash " << config_hash(c) << "\n";
  os << hashed_text(c);
  os << "output = \"" << c.output << "\"\n";
  os << "threads = " << c.threads << "\n";
  return os.str();
}

struct Failure : std::runtime_error {
  Failure(int code, const std::string &what) : std::runtime_error(what), code(code) {}
  int code;
};

inline void check_config(const RunConfig &c) {
  if (c.benchmark != "pendulum" && c.benchmark != "batch")
    throw Failure(kUsage, "unknown benchmark '" + c.benchmark + "' (pendulum, batch)");
  if (c.mode != "ordinary" && c.mode != "lazy" && c.mode != "heuristic")
    throw Failure(kUsage, "unknown mode '" + c.mode + "' (ordinary, lazy, heuristic)");
  if (c.sigma != "worst" && c.sigma != "mean")
    throw Failure(kUsage, "unknown sigma '" + c.sigma + "' (worst, mean)");
  if (!(c.lambda >= 0.0 && c.lambda < 1.0))
    throw Failure(kUsage, "lambda must satisfy 0 <= lambda < 1, got " + io::format_double(c.lambda));
  if (c.x0.size() != 2)
    throw Failure(kUsage, "x0 needs two coordinates");
  if (c.sampling == 0 || c.resolution == 0 || c.controls == 0)
    throw Failure(kUsage, "sampling, resolution and controls must be positive");
}

inline AnyBenchmark make_configured(const RunConfig &c) {
  if (c.benchmark == "pendulum") {
    PendulumSetup s;
    s.resolution = c.resolution;
    s.control_count = c.controls;
    s.control_bound = c.control_bound;
    s.event_radius = c.event_radius;
    s.max_event_steps = c.max_event_steps;
    s.lambda = c.lambda;
    return make_pendulum(s);
  }
  BatchSetup s;
  s.resolution = c.resolution;
  s.valve_count = c.controls;
  s.heating_levels = c.heating_levels;
  s.cost_gain = c.cost_gain;
  s.event_radius = c.event_radius;
  s.max_event_steps = c.max_event_steps;
  s.lambda = c.lambda;
  return make_batch(s);
}

inline std::filesystem::path out_path(const RunConfig &c, const std::string &name) {
  std::filesystem::create_directories(c.output);
  return std::filesystem::path(c.output) / (c.benchmark + "-" + name);
}

inline std::ofstream open_out(const std::filesystem::path &p) {
  std::ofstream f(p);
  if (!f)
    throw Failure(kUsage, "cannot write " + p.string());
  return f;
}

inline SigmaKind sigma_kind(const RunConfig &c) {
  return c.sigma == "worst" ? SigmaKind::WorstSuccessor : SigmaKind::MeanMismatch;
}

template <std::size_t N, std::size_t M>
ControlIndex goal_control(const RunConfig &c, const Benchmark<N, M> &b) {
  if (c.goal_control < 0 || static_cast<std::size_t>(c.goal_control) >= b.plant.controls.size())
    throw Failure(kUsage, "goal-control out of range");
  return static_cast<ControlIndex>(c.goal_control);
}

template <std::size_t N> Vec<N> initial_state(const RunConfig &c) {
  Vec<N> x{};
  for (std::size_t i = 0; i < N; ++i)
    x[i] = c.x0.at(i);
  return x;
}

template <std::size_t N, std::size_t M>
TransitionHypergraph build_graph(const RunConfig &c, const Benchmark<N, M> &b) {
  return build_hypergraph(b.grid, b.plant, SamplingScheme{c.sampling}, b.target_cells, c.threads);
}

struct Synthesis {
  FeedbackTable table;
  SolverStats stats;
  std::size_t finite = 0;
};

template <std::size_t N, std::size_t M>
Synthesis synthesize_table(const RunConfig &c, const Benchmark<N, M> &b,
                           const TransitionHypergraph &g, const std::string &mode) {
  Synthesis s;
  if (mode == "lazy") {
    const auto fb = solve_lazy(g, c.lambda);
    s.table = FeedbackTable::from_lazy(fb, "lazy");
    s.stats = fb.solution.stats;
  } else {
    Solution sol = mode == "ordinary"
                       ? minmax_dijkstra(g)
                       : heuristic_dijkstra(g, c.lambda, sigma_kind(c),
                                            uniform_goal_controls(g, goal_control(c, b)));
    s.table = FeedbackTable::from_solution(sol, g.control_count,
                                           mode == "ordinary" ? "ordinary" : "heuristic-" + c.sigma);
    s.stats = sol.stats;
  }
  for (double v : s.table.value)
    s.finite += std::isfinite(v) ? 1 : 0;
  return s;
}

inline std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

// -- subcommands ---------------------------------------------------------------

inline int cmd_synthesize(const RunConfig &c, std::ostream &out) {
  return std::visit(
      [&](const auto &b) {
        const std::string hash = config_hash(c);
        const auto g = build_graph(c, b);
        {
          auto f = open_out(out_path(c, "graph.txt"));
          write_hypergraph(f, g, hash);
        }
        const auto s = synthesize_table(c, b, g, c.mode);
        {
          auto f = open_out(out_path(c, c.mode + "-table.csv"));
          write_feedback_table(f, s.table, {c.benchmark, hash});
        }
        std::size_t base_finite = 0;
        const std::size_t W = s.table.kind == FeedbackTable::Kind::Lazy ? s.table.controls : 1;
        for (std::size_t i = 0; i < s.table.cells; ++i)
          for (std::size_t w = 0; w < W; ++w)
            if (std::isfinite(s.table.value[i * W + w])) {
              ++base_finite;
              break;
            }

        std::ostringstream rep;
        const auto &r = g.report;
        rep << "# config " << hash << "\n";
        rep << "created = " << timestamp() << "\n";
        rep << "benchmark = " << c.benchmark << "\n";
        rep << "mode = " << c.mode << "\n";
        rep << "nodes = " << g.node_count << "\n";
        rep << "controls = " << g.control_count << "\n";
        rep << "edges = " << g.edge_count() << "\n";
        rep << "target_cells = " << g.goal.size() << "\n";
        rep << "pairs_considered = " << r.pairs_considered << "\n";
        rep << "discarded_event_stall = " << r.event_stall << "\n";
        rep << "discarded_left_domain = " << r.left_domain << "\n";
        rep << "discarded_outside = " << r.outside << "\n";
        rep << "discarded_self_loop = " << r.self_loop << "\n";
        rep << "discarded_numerical = " << r.numerical_failure << "\n";
        rep << "table_entries = " << s.table.value.size() << "\n";
        rep << "finite_entries = " << s.finite << "\n";
        rep << "stabilizable_cells = " << base_finite << "\n";
        rep << "stabilizable_fraction = "
            << io::format_double(static_cast<double>(base_finite) / static_cast<double>(g.node_count))
            << "\n";
        rep << "build_seconds = " << r.wall_seconds << "\n";
        rep << "solve_seconds = " << s.stats.wall_seconds << "\n";
        rep << "solver_pops = " << s.stats.pops << "\n";
        rep << "solver_monotone = " << (s.stats.monotone ? "true" : "false") << "\n";
        {
          auto f = open_out(out_path(c, c.mode + "-report.txt"));
          f << rep.str();
        }
        out << rep.str();
        return static_cast<int>(kOk);
      },
      make_configured(c));
}

inline int cmd_simulate(const RunConfig &c, const std::string &table_path, std::ostream &out) {
  std::ifstream in(table_path);
  if (!in)
    throw Failure(kUsage, "cannot read table " + table_path);
  TableHeader h;
  FeedbackTable table;
  try {
    table = read_feedback_table(in, &h);
  } catch (const std::runtime_error &e) {
    throw Failure(kUsage, e.what());
  }
  if (h.benchmark != c.benchmark)
    throw Failure(kUsage, "table was synthesized for '" + h.benchmark + "', config selects '" +
                              c.benchmark + "'");
  return std::visit(
      [&](const auto &b) {
        constexpr std::size_t N = std::decay_t<decltype(b)>::state_dim;
        const auto x0 = initial_state<N>(c);
        if (!b.grid.locate(x0))
          throw Failure(kUsage, "x0 lies outside the state domain");
        if (table.cells != b.grid.cell_count() || table.controls != b.plant.controls.size())
          throw Failure(kUsage, "table size does not match the configured grid and controls");
        const auto goal = goal_flags(b.grid.cell_count(), b.target_cells);
        const auto traj = run_closed_loop(b.plant, b.grid, goal, table, x0, std::nullopt, c.max_events);
        const std::string hash = config_hash(c);
        {
          auto f = open_out(out_path(c, table.label + "-trajectory.csv"));
          write_trajectory_csv(f, traj, b.plant.controls, hash);
        }
        {
          auto f = open_out(out_path(c, table.label + "-trajectory.svg"));
          f << "<!-- config " << hash << " -->\n";
          write_trajectory_svg(f, {&traj}, {table.label}, b.plant.domain, b.plant.controls,
                               b.plant.sample_period);
        }
        out << "label = " << table.label << "\n";
        out << "events = " << traj.events << "\n";
        out << "switches = " << traj.switches << "\n";
        out << "cost = " << io::format_double(traj.cost) << "\n";
        out << "time = " << io::format_double(traj.time_to_target(b.plant.sample_period)) << "\n";
        out << "termination = " << to_string(traj.reason) << "\n";
        return static_cast<int>(kOk);
      },
      make_configured(c));
}

inline int cmd_compare(const RunConfig &c, std::ostream &out) {
  return std::visit(
      [&](const auto &b) {
        constexpr std::size_t N = std::decay_t<decltype(b)>::state_dim;
        const auto x0 = initial_state<N>(c);
        if (!b.grid.locate(x0))
          throw Failure(kUsage, "x0 lies outside the state domain");
        const std::string hash = config_hash(c);
        const auto g = build_graph(c, b);
        const auto ord = synthesize_table(c, b, g, "ordinary");
        const auto lazy = synthesize_table(c, b, g, "lazy");
        const auto heur = synthesize_table(c, b, g, "heuristic");
        const std::vector<const FeedbackTable *> tables{&ord.table, &lazy.table, &heur.table};
        const auto goal = goal_flags(b.grid.cell_count(), b.target_cells);
        const auto rows = compare(b.plant, b.grid, goal, tables, x0, c.max_events);
        {
          auto f = open_out(out_path(c, "comparison.csv"));
          f << "# config " << hash << "\n";
          write_comparison(f, rows);
        }
        using Traj = decltype(run_closed_loop(b.plant, b.grid, goal, ord.table, x0, std::nullopt, 1));
        std::vector<Traj> trajs;
        std::vector<std::string> labels;
        for (const auto *t : tables) {
          try {
            trajs.push_back(run_closed_loop(b.plant, b.grid, goal, *t, x0, std::nullopt, c.max_events));
            labels.push_back(t->label);
            auto f = open_out(out_path(c, t->label + "-trajectory.csv"));
            write_trajectory_csv(f, trajs.back(), b.plant.controls, hash);
          } catch (const StabilizationGap &) {
            // reported in the comparison table
          }
        }
        {
          std::vector<const Traj *> ptrs;
          for (const auto &t : trajs)
            ptrs.push_back(&t);
          auto f = open_out(out_path(c, "comparison.svg"));
          f << "<!-- config " << hash << " -->\n";
          write_trajectory_svg(f, ptrs, labels, b.plant.domain, b.plant.controls, b.plant.sample_period);
        }
        out << "# config " << hash << "\n";
        write_comparison(out, rows);
        return static_cast<int>(kOk);
      },
      make_configured(c));
}

inline int cmd_dump_graph(const RunConfig &c, const std::string &from, const std::string &dest,
                          std::ostream &out) {
  TransitionHypergraph g;
  std::string hash = config_hash(c);
  if (!from.empty()) {
    std::ifstream in(from);
    if (!in)
      throw Failure(kUsage, "cannot read graph " + from);
    try {
      g = read_hypergraph(in, &hash);
    } catch (const std::exception &e) {
      throw Failure(kVerification, e.what());
    }
  } else {
    g = std::visit([&](const auto &b) { return build_graph(c, b); }, make_configured(c));
  }
  const auto v = validate(g);
  if (dest == "-") {
    write_hypergraph(out, g, hash);
  } else if (!dest.empty()) {
    auto f = open_out(dest);
    write_hypergraph(f, g, hash);
  }
  std::ostream &info = dest == "-" ? std::cerr : out;
  info << "nodes = " << g.node_count << "\n";
  info << "edges = " << g.edge_count() << "\n";
  info << "goal = " << g.goal.size() << "\n";
  info << "valid = " << (v.ok() ? "true" : "false") << "\n";
  for (const auto &p : v.violations)
    info << "problem = " << p << "\n";
  return v.ok() ? kOk : kVerification;
}

// -- property suites --------------------------------------------------------------

struct Check {
  std::string name;
  bool pass = true;
  std::string detail;
};

inline bool same_values(const std::vector<double> &a, const std::vector<double> &b, double tol) {
  if (a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isfinite(a[i]) != std::isfinite(b[i]))
      return false;
    if (std::isfinite(a[i]) && std::abs(a[i] - b[i]) > tol)
      return false;
  }
  return true;
}

/// Switch count along the unique run of a lazy feedback on a deterministic graph.
inline std::optional<std::size_t> lazy_run_switches(const ExtendedHypergraph &ext,
                                                    const Solution &sol, NodeId z) {
  const auto &g = ext.graph;
  std::size_t count = 0;
  for (std::size_t steps = 0; !g.goal_node(z); ++steps) {
    if (steps > g.node_count || !sol.control[z])
      return std::nullopt;
    const auto e = find_edge(g, z, *sol.control[z]);
    if (!e)
      return std::nullopt;
    count += *sol.control[z] != ext.decode(z).w ? 1 : 0;
    z = g.targets(*e).front();
  }
  return count;
}

inline std::vector<Check> run_property_suites(std::uint64_t seed) {
  std::vector<Check> checks;

  Check oracle{"oracle-equivalence", true, ""};
  for (std::uint64_t i = 0; i < 200 && oracle.pass; ++i) {
    const auto g = fixtures::random_hypergraph(seed + i, {});
    const auto sol = minmax_dijkstra(g);
    if (!same_values(sol.value, value_iteration_oracle(g), 1e-9) || !sol.stats.monotone) {
      oracle.pass = false;
      oracle.detail = "seed " + std::to_string(seed + i);
    }
  }
  if (oracle.pass)
    oracle.detail = "200 graphs";
  checks.push_back(oracle);

  Check sw{"switch-optimality", true, ""};
  std::size_t starts = 0;
  for (std::uint64_t i = 0; i < 100 && sw.pass; ++i) {
    const bool det = i % 2 == 0;
    const auto g = fixtures::random_small_system(seed + i, det);
    const auto ext = extend(g, 0.99);
    const auto fb = solve_lazy(ext);
    for (NodeId z = 0; z < ext.graph.node_count && sw.pass; ++z) {
      if (!std::isfinite(fb.solution.value[z]))
        continue;
      ++starts;
      const auto want = min_switch_oracle(ext, z);
      const auto got = det ? lazy_run_switches(ext, fb.solution, z)
                           : worst_case_switches(ext, fb.solution, z);
      if (!want || !got || *want != *got) {
        sw.pass = false;
        sw.detail = "seed " + std::to_string(seed + i) + " node " + std::to_string(z);
      }
    }
  }
  if (sw.pass)
    sw.detail = std::to_string(starts) + " extended starts";
  checks.push_back(sw);

  Check ce{"counterexample", true, ""};
  {
    const auto fx = fixtures::counterexample();
    std::vector<std::optional<ControlIndex>> u0(fx.graph.node_count);
    u0[3] = fx.goal_control;
    std::ostringstream d;
    for (auto kind : {SigmaKind::WorstSuccessor, SigmaKind::MeanMismatch}) {
      const auto h = heuristic_dijkstra(fx.graph, 0.99, kind, u0);
      const auto e = fixtures::switches_to_goal(fx.graph, h, fx.start, fx.goal_control);
      d << "heuristic E = " << (e ? std::to_string(*e) : "none") << ", ";
      ce.pass = ce.pass && e && *e == 3;
    }
    const auto ext = extend(fx.graph, 0.99);
    const auto lz = solve_lazy(ext);
    const auto e = fixtures::switches_to_goal(ext, lz, fx.start, fx.goal_control);
    d << "lazy E = " << (e ? std::to_string(*e) : "none");
    ce.pass = ce.pass && e && *e == 1;
    ce.detail = d.str();
  }
  checks.push_back(ce);

  Check zero{"lambda-zero", true, ""};
  for (std::uint64_t i = 0; i < 50 && zero.pass; ++i) {
    const auto g = fixtures::random_hypergraph(seed + 1000 + i, {});
    const auto base = minmax_dijkstra(g);
    const auto lz = solve_lazy(g, 0.0);
    for (NodeId z = 0; z < lz.solution.value.size(); ++z)
      if (lz.solution.value[z] != base.value[z / g.control_count]) {
        zero.pass = false;
        zero.detail = "seed " + std::to_string(seed + 1000 + i);
        break;
      }
  }
  if (zero.pass)
    zero.detail = "50 graphs";
  checks.push_back(zero);
  return checks;
}

inline int cmd_verify(const RunConfig &c, std::ostream &out) {
  const auto checks = run_property_suites(c.seed);
  bool ok = true;
  for (const auto &ch : checks) {
    out << (ch.pass ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << "\n";
    ok = ok && ch.pass;
  }
  return ok ? kOk : kVerification;
}

// -- entry point -------------------------------------------------------------------

inline void error_record(std::ostream &err, const char *kind, const std::string &msg,
                         const std::string &hash) {
  nlohmann::json j{{"error", kind}, {"message", msg}};
  if (!hash.empty())
    j["config"] = hash;
  err << j.dump() << "\n";
}

inline int run(int argc, const char *const *argv, std::ostream &out = std::cout,
               std::ostream &err = std::cerr) {
  RunConfig cfg;
  CLI::App app{"Lazy event-based feedback synthesis for quantized nonlinear systems", "lazyfb"};
  app.set_config("--config", "", "Read options from a TOML file (flags take precedence)");
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the effective configuration and exit");

  auto *o_bench = app.add_option("--benchmark", cfg.benchmark, "pendulum | batch")->capture_default_str();
  auto *o_res = app.add_option("--resolution", cfg.resolution, "Cells per axis")->capture_default_str();
  auto *o_ctl = app.add_option("--controls", cfg.controls, "Control samples (batch: valve samples)")
                    ->capture_default_str();
  app.add_option("--control-bound", cfg.control_bound, "Pendulum control range [-b, b]")->capture_default_str();
  app.add_option("--heating-levels", cfg.heating_levels, "Batch heating levels")->capture_default_str();
  app.add_option("--cost-gain", cfg.cost_gain, "Batch quadratic cost gain")->capture_default_str();
  app.add_option("--sampling", cfg.sampling, "Samples per axis and cell")->capture_default_str();
  auto *o_er = app.add_option("--event-radius", cfg.event_radius, "Event box scale")->capture_default_str();
  app.add_option("--max-event-steps", cfg.max_event_steps, "Plant steps before an event counts as stalled")
      ->capture_default_str();
  auto *o_lambda = app.add_option("--lambda", cfg.lambda, "Switch weight in [0, 1)")->capture_default_str();
  app.add_option("--mode", cfg.mode, "ordinary | lazy | heuristic")->capture_default_str();
  app.add_option("--sigma", cfg.sigma, "Heuristic mismatch term: worst | mean")->capture_default_str();
  auto *o_u0 = app.add_option("--goal-control", cfg.goal_control, "Control assumed on target cells (heuristic)")
                   ->capture_default_str();
  auto *o_x0 = app.add_option("--x0", cfg.x0, "Initial state")->expected(2)->capture_default_str();
  app.add_option("--max-events", cfg.max_events, "Event limit in simulations")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for the property suites")->capture_default_str();
  app.add_option("--output", cfg.output, "Output directory")->capture_default_str();
  app.add_option("--threads", cfg.threads, "Build threads (0: hardware)")->capture_default_str();

  auto *synth = app.add_subcommand("synthesize", "Build the graph, solve, write table and report");
  auto *sim = app.add_subcommand("simulate", "Run a stored feedback table from x0");
  std::string table_path;
  sim->add_option("--table", table_path, "Feedback table file")->required();
  auto *cmp = app.add_subcommand("compare", "Ordinary, lazy and heuristic feedback from x0");
  auto *ver = app.add_subcommand("verify", "Run the oracle property suites");
  auto *dump = app.add_subcommand("dump-graph", "Build (or read) a hypergraph and validate it");
  std::string from, dest;
  dump->add_option("--from", from, "Read an existing dump instead of building");
  dump->add_option("--to", dest, "Write the dump here ('-' for stdout)");
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (cfg.benchmark == "batch") {
    if (o_res->count() == 0)
      cfg.resolution = 64;
    if (o_ctl->count() == 0)
      cfg.controls = 12;
    if (o_er->count() == 0)
      cfg.event_radius = 1.0;
    if (o_lambda->count() == 0)
      cfg.lambda = 0.9;
    if (o_u0->count() == 0)
      cfg.goal_control = 29; // valve 4/11, heating level 1
    if (o_x0->count() == 0)
      cfg.x0 = {0.275, 295.0};
  }
  (void)o_bench;

  std::string hash;
  try {
    check_config(cfg);
    hash = config_hash(cfg);
    if (print_config) {
      out << config_text(cfg);
      return kOk;
    }
    if (*synth)
      return cmd_synthesize(cfg, out);
    if (*sim)
      return cmd_simulate(cfg, table_path, out);
    if (*cmp)
      return cmd_compare(cfg, out);
    if (*ver)
      return cmd_verify(cfg, out);
    if (*dump)
      return cmd_dump_graph(cfg, from, dest, out);
    err << app.help();
    return kUsage;
  } catch (const Failure &e) {
    error_record(err, e.code == kUsage ? "usage" : e.code == kNumerical ? "numerical" : "verification",
                 e.what(), hash);
    return e.code;
  } catch (const ContractViolation &e) {
    error_record(err, "usage", e.what(), hash);
    return kUsage;
  } catch (const DomainViolation &e) {
    error_record(err, "usage", e.what(), hash);
    return kUsage;
  } catch (const NumericalFailure &e) {
    error_record(err, "numerical", e.what(), hash);
    return kNumerical;
  } catch (const StabilizationGap &e) {
    error_record(err, "numerical", e.what(), hash);
    return kNumerical;
  }
}

} // namespace lazyfb::cli

// hotlane: command-line driver for the HOT-lane pricing simulations.
//
//   hotlane simulate --config s.json [--out dir] [--seed N] [--replications N] [--format csv|json]
//   hotlane compare  --config s.json [--controllers vot,integral,selflearning]
//   hotlane sweep    --config s.json --param k2 --from 0.1 --to 0.2 --step 0.02 [--bisect]
//   hotlane analytic --config s.json
//   hotlane approx   --config s.json

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hotlane/hotlane.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hotlane;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "Scenario file (JSON); omitted -> reference scenario");
  cmd->add_option("--out", o.out_dir, "Output directory (default: stdout)");
  cmd->add_option("--seed", o.seed, "Override scenario.seed");
  cmd->add_option("--replications", o.replications, "Override scenario.replications")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--format", o.format, "Stdout format")->check(CLI::IsMember({"csv", "json"}));
}

ScenarioConfig load(const CommonOptions& o) {
  ScenarioConfig c = o.config_path.empty() ? parse_config_text("") : parse_config_file(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.replications) c.replications = *o.replications;
  return c;
}

// Single writer: callers hand over complete buffers.
void emit(const CommonOptions& o, const std::string& file_name, const std::string& payload) {
  if (o.out_dir.empty()) {
    std::cout << payload;
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to stdout");
    return;
  }
  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + o.out_dir + "': " + ec.message());
  const fs::path path = fs::path(o.out_dir) / file_name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << payload;
  f.close();
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json aggregate(const std::vector<SummaryMetrics>& runs) {
  auto stat = [&](auto field) {
    double sum = 0.0;
    for (const auto& r : runs) sum += field(r);
    const double n = static_cast<double>(runs.size());
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& r : runs) ss += (field(r) - mean) * (field(r) - mean);
    const double sd = runs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    return json{{"mean", json_number(mean)}, {"std", json_number(sd)}};
  };
  return {
      {"avg_g1", stat([](const SummaryMetrics& m) { return m.avg_g1; })},
      {"final_u", stat([](const SummaryMetrics& m) { return m.final_u; })},
      {"final_pi", stat([](const SummaryMetrics& m) { return m.final_pi; })},
      {"max_lambda1", stat([](const SummaryMetrics& m) { return m.max_lambda1; })},
      {"final_lambda1", stat([](const SummaryMetrics& m) { return m.final_lambda1; })},
      {"pi_rmse_tail", stat([](const SummaryMetrics& m) { return m.pi_rmse_tail; })},
  };
}

int cmd_simulate(const CommonOptions& o) {
  const ScenarioConfig cfg = load(o);
  const auto reps = static_cast<std::size_t>(cfg.replications);
  if (o.out_dir.empty() && o.format == "csv" && reps > 1)
    throw UsageError("CSV on stdout holds a single trajectory; use --out or --replications 1");

  std::vector<std::future<Trajectory>> jobs;
  for (std::size_t r = 0; r < reps; ++r)
    jobs.push_back(std::async(std::launch::async, [&cfg, r] { return run_closed_loop(cfg, cfg.seed + r); }));

  std::vector<Trajectory> trajs;
  for (auto& j : jobs) trajs.push_back(j.get());

  std::vector<SummaryMetrics> sums;
  json runs = json::array();
  for (std::size_t r = 0; r < reps; ++r) {
    sums.push_back(summarize(trajs[r], cfg.behavior.pi_star));
    runs.push_back({{"replication", r},
                    {"seed", cfg.seed + r},
                    {"fingerprint", hex(trajs[r].fingerprint)},
                    {"summary", to_json(sums.back())}});
  }
  json out = {{"controller", std::string(to_string(cfg.controller.kind))},
              {"config", to_json(cfg)},
              {"summary", to_json(sums.front())},
              {"runs", runs}};
  if (reps > 1) out["aggregate"] = aggregate(sums);
  const std::string summary = out.dump(2) + "\n";

  if (o.out_dir.empty()) {
    if (o.format == "json") {
      emit(o, "", summary);
    } else {
      std::ostringstream ss;
      write_trajectory_csv(ss, trajs.front());
      emit(o, "", ss.str());
    }
    return 0;
  }
  for (std::size_t r = 0; r < reps; ++r) {
    std::ostringstream ss;
    write_trajectory_csv(ss, trajs[r]);
    emit(o, reps == 1 ? "trajectory.csv" : "trajectory_r" + std::to_string(r) + ".csv", ss.str());
  }
  emit(o, "summary.json", summary);
  return 0;
}

std::vector<ControllerKind> parse_controllers(const std::vector<std::string>& names) {
  std::vector<ControllerKind> out;
  for (const auto& n : names) {
    if (n == "vot") out.push_back(ControllerKind::vot);
    else if (n == "integral") out.push_back(ControllerKind::integral);
    else if (n == "selflearning") out.push_back(ControllerKind::selflearning);
    else throw UsageError("unknown controller '" + n + "'");
  }
  return out;
}

inline constexpr double kOptimalQueue = 1e-3;
inline constexpr double kOptimalThroughputBand = 0.5;

int cmd_compare(const CommonOptions& o, const std::vector<std::string>& names) {
  const ScenarioConfig base = load(o);
  const auto kinds = parse_controllers(names);
  if (kinds.size() < 2) throw UsageError("compare needs at least two controllers");

  json rows = json::array();
  for (auto k : kinds) {
    ScenarioConfig c = base;
    c.controller.kind = k;
    const Trajectory traj = run_closed_loop(c);
    const SummaryMetrics m = summarize(traj, c.behavior.pi_star);
    const bool optimal = m.final_lambda1 < kOptimalQueue &&
                         std::abs(m.avg_g1 - c.caps.c1) <= kOptimalThroughputBand;
    rows.push_back({{"controller", std::string(to_string(k))},
                    {"fingerprint", hex(traj.fingerprint)},
                    {"summary", to_json(m)},
                    {"optimal_state", optimal}});
  }
  const json out = {{"seed", base.seed}, {"config", to_json(base)}, {"controllers", rows}};
  emit(o, "compare.json", out.dump(2) + "\n");
  return 0;
}

struct SweepOptions {
  std::string param = "k2";
  std::optional<double> from, to, step;
  bool bisect = false;
  std::optional<double> low, high;
  double resolution = 0.005;
  std::string model = "closed";
};

int cmd_sweep(const CommonOptions& o, const SweepOptions& s) {
  const ScenarioConfig cfg = load(o);
  const GainParam which = s.param == "k1" ? GainParam::k1 : GainParam::k2;
  const ModelKind model = s.model == "approx" ? ModelKind::approximate : ModelKind::closed_loop;

  std::vector<double> grid;
  if (s.from && s.to && s.step) {
    if (!(*s.step > 0.0)) throw UsageError("--step must be > 0");
    const double span = *s.to - *s.from;
    if (span >= 0.0) {
      const auto n = static_cast<long long>(std::floor(span / *s.step + 1e-9));
      for (long long i = 0; i <= n; ++i) grid.push_back(*s.from + static_cast<double>(i) * *s.step);
    }
  } else if (s.from || s.to || s.step) {
    throw UsageError("a grid needs all of --from, --to and --step");
  }
  if (grid.empty() && !s.bisect) throw UsageError("empty grid: give --from/--to/--step or --bisect");

  const auto rows = sweep_gain(cfg, which, grid, model);

  std::optional<double> boundary;
  std::string warning;
  if (s.bisect) {
    const double lo = s.low ? *s.low : (grid.empty() ? 0.0 : grid.front());
    const double hi = s.high ? *s.high : (grid.empty() ? 0.0 : grid.back());
    if (!(hi > lo)) throw UsageError("bisection needs --low < --high (or a grid)");
    try {
      boundary = phase_boundary(cfg, which, lo, hi, s.resolution, model);
    } catch (const BoundaryNotBracketedError& e) {
      warning = e.what();
      std::cerr << "warning: " << warning << "\n";
    }
  }

  if (o.format == "json") {
    json jr = json::array();
    for (const auto& r : rows) {
      json x = to_json(r.report);
      x["value"] = r.value;
      jr.push_back(x);
    }
    json out = {{"param", s.param}, {"model", s.model}, {"rows", jr}};
    if (s.bisect) out["boundary"] = boundary ? json(*boundary) : json(nullptr);
    if (!warning.empty()) out["warning"] = warning;
    emit(o, "sweep.json", out.dump(2) + "\n");
    return 0;
  }

  std::string csv = "value,pattern,ratio_estimate,fit_r2_gaussian,fit_r2_exponential\n";
  for (const auto& r : rows) {
    append_number(csv, r.value);
    csv += ",";
    csv += to_string(r.report.pattern);
    csv += ",";
    append_number(csv, r.report.ratio_estimate);
    csv += ",";
    append_number(csv, r.report.fit_r2_gaussian);
    csv += ",";
    append_number(csv, r.report.fit_r2_exponential);
    csv += "\n";
  }
  emit(o, "sweep.csv", csv);
  if (boundary) {
    if (o.out_dir.empty()) {
      std::cerr << "boundary " << s.param << " = " << *boundary << "\n";
    } else {
      emit(o, "boundary.json",
           json{{"param", s.param}, {"model", s.model}, {"boundary", *boundary}}.dump(2) + "\n");
    }
  }
  return 0;
}

int cmd_analytic(const CommonOptions& o) {
  const ScenarioConfig cfg = load(o);
  const ConstantScenarioParams p = constant_params(cfg);
  std::string csv = "t,u_analytic\n";
  for (std::size_t k = 0; k <= cfg.steps(); ++k) {
    const double t = static_cast<double>(k) * cfg.step.dt;
    const std::array<double, 2> row = {t, analytic_optimal_price(t, p)};
    std::ostringstream ss;
    write_csv_row(ss, row);
    csv += ss.str();
  }
  emit(o, "analytic.csv", csv);
  return 0;
}

int cmd_approx(const CommonOptions& o) {
  const ScenarioConfig cfg = load(o);
  std::ostringstream ss;
  write_csv_header(ss, std::array<std::string_view, 4>{"t", "lambda1", "zeta", "ratio"});
  for (const auto& s : run_approximate(cfg)) {
    const double ratio = s.zeta != 0.0 ? s.lambda1 / s.zeta : std::nan("");
    const std::array<double, 4> row = {s.t, s.lambda1, s.zeta, ratio};
    write_csv_row(ss, row);
  }
  emit(o, "approx.csv", ss.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic pricing of HOT lanes: closed-loop simulation and analysis"};
  app.require_subcommand(1);

  CommonOptions sim_o, cmp_o, swp_o, ana_o, apx_o;
  auto* sim = app.add_subcommand("simulate", "Run one scenario, emit trajectory CSV and summary JSON");
  add_common(sim, sim_o);

  auto* cmp = app.add_subcommand("compare", "Run several controllers on the same demand realization");
  add_common(cmp, cmp_o);
  std::vector<std::string> controllers = {"vot", "integral", "selflearning"};
  cmp->add_option("--controllers", controllers, "Controllers to compare")->delimiter(',');

  auto* swp = app.add_subcommand("sweep", "Classify convergence patterns across a gain");
  add_common(swp, swp_o);
  SweepOptions so;
  swp->add_option("--param", so.param, "Gain to vary")->check(CLI::IsMember({"k1", "k2"}));
  swp->add_option("--from", so.from, "Grid start");
  swp->add_option("--to", so.to, "Grid end (inclusive)");
  swp->add_option("--step", so.step, "Grid spacing");
  swp->add_flag("--bisect", so.bisect, "Locate the phase boundary by bisection");
  swp->add_option("--low", so.low, "Bisection bracket low (default: grid start)");
  swp->add_option("--high", so.high, "Bisection bracket high (default: grid end)");
  swp->add_option("--resolution", so.resolution, "Bisection bracket width")->check(CLI::PositiveNumber);
  swp->add_option("--model", so.model, "closed (full closed loop) or approx")
      ->check(CLI::IsMember({"closed", "approx"}));

  auto* ana = app.add_subcommand("analytic", "Tabulate the closed-form optimal price");
  add_common(ana, ana_o);
  auto* apx = app.add_subcommand("approx", "Integrate the approximate near-equilibrium model");
  add_common(apx, apx_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    if (*sim) return cmd_simulate(sim_o);
    if (*cmp) return cmd_compare(cmp_o, controllers);
    if (*swp) return cmd_sweep(swp_o, so);
    if (*ana) return cmd_analytic(ana_o);
    if (*apx) return cmd_approx(apx_o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::internal);
  }
  return static_cast<int>(ExitCode::usage);
}

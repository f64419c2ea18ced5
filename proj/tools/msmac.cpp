// msmac: validate / analyze / simulate / compare / sweep over scenario files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msmac/compare.hpp"
#include "msmac/engine.hpp"
#include "msmac/report.hpp"
#include "msmac/scenario_io.hpp"
#include "msmac/summary.hpp"
#include "msmac/validate.hpp"
#include "msmac/version.hpp"

namespace fs = std::filesystem;
using msmac::Json;

namespace {

struct CommonArgs {
  std::string scenario_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  bool lenient = false;
  bool own_rate_prefactor = false;
  bool own_rate_collision = false;
  std::string profile_path;
  bool export_log = false;
  std::vector<std::string> axes;
};

std::string default_out_dir(const std::string& subcommand) {
  if (const char* env = std::getenv("MSMAC_OUT")) return env;
  return std::string("msmac-") + subcommand;
}

void apply_override_path(Json& node, const std::vector<std::string>& segments, std::size_t at,
                         const Json& value) {
  const std::string& seg = segments[at];
  const bool last = at + 1 == segments.size();
  if (node.is_array()) {
    if (seg == "*") {
      for (auto& item : node) {
        if (last)
          item = value;
        else
          apply_override_path(item, segments, at + 1, value);
      }
      return;
    }
    const std::size_t idx = static_cast<std::size_t>(std::stoul(seg));
    if (idx >= node.size()) throw msmac::SemanticError("override index out of range: " + seg);
    if (last)
      node[idx] = value;
    else
      apply_override_path(node[idx], segments, at + 1, value);
    return;
  }
  if (!node.is_object()) throw msmac::SemanticError("override path does not address an object");
  if (last) {
    node[seg] = value;
    return;
  }
  if (!node.contains(seg)) node[seg] = Json::object();
  apply_override_path(node[seg], segments, at + 1, value);
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void apply_override(Json& doc, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw msmac::SemanticError("override must look like dotted.key=value: " + spec);
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;  // bare string
  }
  apply_override_path(doc, split(path, '.'), 0, value);
}

Json load_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw msmac::SyntaxError("cannot open file", path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw msmac::SyntaxError(e.what(), path);
  }
}

struct LoadedScenario {
  msmac::ParseResult parsed;
  Json document;  // after overrides
  std::string hash;
};

LoadedScenario load_scenario(const CommonArgs& args) {
  Json doc = load_document(args.scenario_path);
  for (const auto& o : args.overrides) apply_override(doc, o);
  LoadedScenario out;
  out.parsed = msmac::parse_scenario_text(doc.dump(), !args.lenient);
  out.document = std::move(doc);
  out.hash = msmac::scenario_hash(out.parsed.scenario);
  for (const auto& w : out.parsed.warnings) std::cerr << "warning: " << w << "\n";
  return out;
}

msmac::AnalyticOptions analytic_options(const CommonArgs& args) {
  msmac::AnalyticOptions opt;
  if (args.own_rate_prefactor) opt.prefactor = msmac::BufferedPrefactor::OwnRate;
  if (args.own_rate_collision) opt.collision_conv = msmac::CollisionRateConvention::OwnRate;
  return opt;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void write_manifest(const fs::path& dir, const CommonArgs& args, const LoadedScenario& sc,
                    const char* command, const Json& extra = Json::object()) {
  Json manifest;
  manifest["tool_version"] = msmac::kVersion;
  manifest["command"] = command;
  manifest["scenario_file"] = args.scenario_path;
  manifest["scenario_hash"] = sc.hash;
  manifest["overrides"] = args.overrides;
  manifest["seed"] = sc.parsed.scenario.run.seed;
  manifest["replications"] = sc.parsed.scenario.run.replications;
  manifest["horizon_slots"] = sc.parsed.scenario.run.horizon_slots;
  for (const auto& [k, v] : extra.items()) manifest[k] = v;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  // The canonical post-override scenario makes the directory self-describing.
  write_file(dir / "scenario.scn", msmac::emit_scenario(sc.parsed.scenario));
}

msmac::ToleranceProfile load_profile(const std::string& path) {
  if (path.empty()) return msmac::ToleranceProfile::defaults();
  msmac::ToleranceProfile prof = msmac::ToleranceProfile::defaults();
  const Json doc = load_document(path);
  for (const auto& [quantity, rule] : doc.items()) {
    msmac::Tolerance tol;
    const std::string mode = rule.value("mode", "rel");
    tol.mode = mode == "abs" ? msmac::Tolerance::Mode::Absolute : msmac::Tolerance::Mode::Relative;
    tol.value = rule.value("value", 0.1);
    tol.mandatory = rule.value("mandatory", true);
    prof.rules[quantity] = tol;
  }
  return prof;
}

int cmd_validate(const CommonArgs& args) {
  Json doc = load_document(args.scenario_path);
  for (const auto& o : args.overrides) apply_override(doc, o);
  msmac::Scenario scenario;
  try {
    auto parsed = msmac::parse_scenario_text(doc.dump(), !args.lenient);
    scenario = parsed.scenario;
    for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
  } catch (const msmac::SemanticError& e) {
    std::cout << e.what() << "\n";
    return 1;
  }
  const msmac::ValidationReport rep = msmac::validate_scenario(scenario);
  for (const auto& f : rep.findings)
    std::cout << (f.severity == msmac::Severity::Error ? "error" : "warning") << " [" << f.code
              << "] " << f.where << ": " << f.message << "\n";
  for (std::size_t s = 0; s < rep.slot_load.size(); ++s)
    if (rep.slot_load[s] > 0)
      std::cout << "slot " << s + 1 << " load " << msmac::fmt9(rep.slot_load[s]) << "\n";
  std::cout << (rep.ok() ? "valid" : "invalid") << "\n";
  return rep.ok() ? 0 : 1;
}

int cmd_analyze(const CommonArgs& args) {
  const LoadedScenario sc = load_scenario(args);
  const auto table = msmac::expand_schedule(sc.parsed.scenario);
  msmac::AnalyticReport rep = msmac::analytic_report(sc.parsed.scenario, table,
                                                     analytic_options(args));
  rep.scenario_hash = sc.hash;
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  // Soft per-device check: the analytic access delay should not exceed the
  // mean inter-arrival time.
  std::vector<double> adf;
  for (const auto& d : rep.devices) adf.push_back(d.adf);
  const msmac::ValidationReport revalidated = msmac::validate_scenario(sc.parsed.scenario, &adf);
  for (const auto& f : revalidated.findings)
    if (f.severity == msmac::Severity::Warning)
      std::cerr << "warning [" << f.code << "] " << f.where << ": " << f.message << "\n";

  const fs::path dir = args.out_dir;
  fs::create_directories(dir);
  write_manifest(dir, args, sc, "analyze");
  const auto rows = msmac::rows_from_analytic(rep);
  write_file(dir / "analytic.csv", msmac::emit_results_csv(rows));

  std::vector<msmac::ResultRow> headline;
  for (const auto& r : rows)
    if (r.where.rfind("dev:", 0) == 0 || r.where == "global") headline.push_back(r);
  std::cout << msmac::render_table(headline);
  std::cerr << "wrote " << (dir / "analytic.csv").string() << "\n";
  return 0;
}

int cmd_simulate(const CommonArgs& args) {
  const LoadedScenario sc = load_scenario(args);
  const auto table = msmac::expand_schedule(sc.parsed.scenario);
  const auto reps = msmac::run_replications(sc.parsed.scenario, table, args.export_log);
  msmac::SimReport rep = msmac::summarize(reps, sc.parsed.scenario, table);
  rep.scenario_hash = sc.hash;

  const fs::path dir = args.out_dir;
  fs::create_directories(dir);
  write_manifest(dir, args, sc, "simulate");
  write_file(dir / "simreport.csv", msmac::emit_results_csv(msmac::rows_from_sim(rep)));
  if (args.export_log) {
    // Replication 0 is re-run with logging on; identical seed, identical log.
    msmac::RunOptions opt;
    opt.seed = sc.parsed.scenario.run.seed;
    opt.horizon_slots = sc.parsed.scenario.run.horizon_slots;
    opt.warmup_slots = 0;
    opt.log_events = true;
    const auto result = msmac::run(sc.parsed.scenario, table, opt);
    write_file(dir / "events.log", msmac::export_log(result.log));
  }
  std::int64_t collisions = 0;
  for (const auto& r : reps)
    for (const auto& d : r.devices) collisions += d.tx_collision;
  std::cout << "replications " << rep.replications << ", horizon " << rep.horizon_slots
            << " slots, collisions " << collisions << "\n";
  std::cerr << "wrote " << (dir / "simreport.csv").string() << "\n";
  return 0;
}

int cmd_compare(const CommonArgs& args) {
  const LoadedScenario sc = load_scenario(args);
  const auto table = msmac::expand_schedule(sc.parsed.scenario);
  msmac::AnalyticReport analytic =
      msmac::analytic_report(sc.parsed.scenario, table, analytic_options(args));
  analytic.scenario_hash = sc.hash;
  const auto reps = msmac::run_replications(sc.parsed.scenario, table);
  msmac::SimReport sim = msmac::summarize(reps, sc.parsed.scenario, table);
  sim.scenario_hash = sc.hash;
  const msmac::ComparisonReport cmp =
      msmac::compare(analytic, sim, load_profile(args.profile_path));

  const fs::path dir = args.out_dir;
  fs::create_directories(dir);
  write_manifest(dir, args, sc, "compare");
  const auto rows = msmac::rows_from_comparison(cmp);
  write_file(dir / "comparison.csv", msmac::emit_results_csv(rows));
  std::cout << msmac::render_table(rows);
  std::cout << (cmp.overall_pass ? "PASS" : "FAIL") << " (" << cmp.failures()
            << " mandatory failures, " << cmp.warnings() << " informational, "
            << cmp.rows.size() << " rows)\n";
  return cmp.overall_pass ? 0 : 1;
}

struct Axis {
  std::string path;
  std::vector<Json> values;
};

Axis parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw msmac::SemanticError("axis must look like path=gen(...): " + spec);
  Axis axis;
  axis.path = spec.substr(0, eq);
  const std::string gen = spec.substr(eq + 1);
  const auto open = gen.find('(');
  const auto close = gen.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw msmac::SemanticError("axis generator must be logspace(a,b,n), linspace(a,b,n) or list(...)");
  const std::string kind = gen.substr(0, open);
  const std::vector<std::string> parts = split(gen.substr(open + 1, close - open - 1), ',');
  if (kind == "logspace" || kind == "linspace") {
    if (parts.size() != 3) throw msmac::SemanticError(kind + " needs (a,b,n)");
    const double a = std::stod(parts[0]);
    const double b = std::stod(parts[1]);
    const int n = std::stoi(parts[2]);
    if (n < 1) throw msmac::SemanticError("axis needs n >= 1");
    for (int i = 0; i < n; ++i) {
      const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      const double v = kind == "linspace" ? a + (b - a) * t
                                          : a * std::pow(b / a, t);
      axis.values.push_back(v);
    }
  } else if (kind == "list") {
    for (const auto& part : parts) {
      try {
        axis.values.push_back(Json::parse(part));
      } catch (const nlohmann::json::parse_error&) {
        axis.values.push_back(part);
      }
    }
  } else {
    throw msmac::SemanticError("unknown axis generator '" + kind + "'");
  }
  return axis;
}

int cmd_sweep(const CommonArgs& args) {
  Json base = load_document(args.scenario_path);
  for (const auto& o : args.overrides) apply_override(base, o);
  std::vector<Axis> axes;
  for (const auto& spec : args.axes) axes.push_back(parse_axis(spec));
  if (axes.empty()) throw msmac::SemanticError("sweep needs at least one --axis");

  const fs::path dir = args.out_dir;
  fs::create_directories(dir);

  std::string csv;
  for (const auto& axis : axes) csv += msmac::io_detail::csv_quote(axis.path) + ',';
  csv += "scenario_id,quantity,device_or_slot,analytic,simulated,ci_low,ci_high,rel_err,verdict\n";

  std::vector<std::size_t> index(axes.size(), 0);
  Json grid = Json::array();
  bool done = false;
  int points = 0, skipped = 0;
  while (!done) {
    Json doc = base;
    Json point = Json::object();
    std::string prefix;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const Json& v = axes[a].values[index[a]];
      apply_override_path(doc, split(axes[a].path, '.'), 0, v);
      point[axes[a].path] = v;
      prefix += msmac::io_detail::csv_quote(v.dump()) + ',';
    }
    grid.push_back(point);
    ++points;
    std::vector<msmac::ResultRow> rows;
    try {
      auto parsed = msmac::parse_scenario_text(doc.dump(), !args.lenient);
      const std::string hash = msmac::scenario_hash(parsed.scenario);
      const auto table = msmac::expand_schedule(parsed.scenario);
      msmac::AnalyticReport analytic =
          msmac::analytic_report(parsed.scenario, table, analytic_options(args));
      analytic.scenario_hash = hash;
      const auto reps = msmac::run_replications(parsed.scenario, table);
      msmac::SimReport sim = msmac::summarize(reps, parsed.scenario, table);
      sim.scenario_hash = hash;
      rows = msmac::rows_from_comparison(msmac::compare(analytic, sim, load_profile(args.profile_path)));
    } catch (const msmac::SemanticError& e) {
      rows.push_back({"", "validation", "scenario", "", "", "", "", "", "skipped"});
      std::cerr << "grid point skipped: " << e.what() << "\n";
      ++skipped;
    } catch (const msmac::OverloadError& e) {
      // Near the load boundary the recursions leave their validity region
      // before validation rejects the point outright.
      rows.push_back({"", "analysis", "scenario", "", "", "", "", "", "skipped"});
      std::cerr << "grid point skipped: " << e.what() << "\n";
      ++skipped;
    } catch (const msmac::NonConvergenceError& e) {
      rows.push_back({"", "analysis", "scenario", "", "", "", "", "", "skipped"});
      std::cerr << "grid point skipped: " << e.what() << "\n";
      ++skipped;
    }
    for (const auto& r : rows)
      csv += prefix + msmac::io_detail::csv_quote(r.scenario_id) + ',' +
             msmac::io_detail::csv_quote(r.quantity) + ',' + msmac::io_detail::csv_quote(r.where) +
             ',' + r.analytic + ',' + r.simulated + ',' + r.ci_low + ',' + r.ci_high + ',' +
             r.rel_err + ',' + msmac::io_detail::csv_quote(r.verdict) + '\n';

    done = true;
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++index[a] < axes[a].values.size()) {
        done = false;
        break;
      }
      index[a] = 0;
    }
  }
  write_file(dir / "sweep.csv", csv);

  Json manifest;
  manifest["tool_version"] = msmac::kVersion;
  manifest["command"] = "sweep";
  manifest["scenario_file"] = args.scenario_path;
  manifest["overrides"] = args.overrides;
  manifest["grid"] = grid;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cerr << "sweep: " << points << " grid points, " << skipped << " skipped, wrote "
            << (dir / "sweep.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mini-slot MAC protocol analyzer and simulator"};
  app.require_subcommand(1);

  CommonArgs args;
  const auto add_common = [&](CLI::App* cmd, const char* name) {
    cmd->add_option("scenario", args.scenario_path, "scenario file")->required();
    cmd->add_option("--override", args.overrides,
                    "dotted-key override applied before validation, e.g. run.seed=7");
    cmd->add_option("--out", args.out_dir, "output directory (default env MSMAC_OUT or msmac-<cmd>)");
    cmd->add_flag("--lenient", args.lenient, "warn on unknown scenario keys instead of failing");
    cmd->add_flag("--own-rate-prefactor", args.own_rate_prefactor,
                  "buffered prefactor subtracts the waiting device's own rate instead of the sensed mini-slot's");
    cmd->add_flag("--own-rate-collision", args.own_rate_collision,
                  "reproduce the printed collision product with the device's own rate");
    cmd->callback([&args, name] {
      if (args.out_dir.empty()) args.out_dir = default_out_dir(name);
    });
  };

  auto* validate = app.add_subcommand("validate", "check a scenario file");
  add_common(validate, "validate");
  auto* analyze = app.add_subcommand("analyze", "closed-form delay/idle/collision predictions");
  add_common(analyze, "analyze");
  auto* simulate = app.add_subcommand("simulate", "seeded replications of the protocol");
  add_common(simulate, "simulate");
  simulate->add_flag("--export-log", args.export_log, "write the replication-0 event log");
  auto* compare = app.add_subcommand("compare", "analytic vs simulated with a tolerance profile");
  add_common(compare, "compare");
  compare->add_option("--profile", args.profile_path, "tolerance profile JSON");
  auto* sweep = app.add_subcommand("sweep", "compare across a parameter grid");
  add_common(sweep, "sweep");
  sweep->add_option("--axis", args.axes,
                    "grid axis, e.g. 'devices.*.lambda_per_s=logspace(10,1000,5)'")
      ->required();
  sweep->add_option("--profile", args.profile_path, "tolerance profile JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate)) return cmd_validate(args);
    if (app.got_subcommand(analyze)) return cmd_analyze(args);
    if (app.got_subcommand(simulate)) return cmd_simulate(args);
    if (app.got_subcommand(compare)) return cmd_compare(args);
    if (app.got_subcommand(sweep)) return cmd_sweep(args);
  } catch (const msmac::SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const msmac::SemanticError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

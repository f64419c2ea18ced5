#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "msmac/compare.hpp"
#include "msmac/errors.hpp"
#include "msmac/model.hpp"
#include "msmac/validate.hpp"

namespace msmac {

using Json = nlohmann::ordered_json;

struct ParseResult {
  Scenario scenario;
  Json document;               // normalized form, source of the identity hash
  std::vector<std::string> warnings;  // lenient-mode notes
};

namespace io_detail {

inline const Json& require(const Json& obj, const char* key, const std::string& ctx) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw SemanticError(ctx + ": missing required field '" + key + "'");
  return *it;
}

inline void check_keys(const Json& obj, const std::set<std::string>& known,
                       const std::string& ctx, bool strict, std::vector<std::string>* warnings) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (known.count(key)) continue;
    if (strict) throw SemanticError(ctx + ": unknown key '" + key + "'");
    if (warnings) warnings->push_back(ctx + ": ignoring unknown key '" + key + "'");
  }
}

inline Tick us_field(const Json& obj, const char* key, const std::string& ctx) {
  const Json& v = require(obj, key, ctx);
  if (!v.is_number()) throw SemanticError(ctx + ": field '" + key + "' must be a number");
  const Tick t = us_to_ticks(v.get<double>());
  if (t <= 0) throw SemanticError(ctx + ": field '" + key + "' must be a positive duration");
  return t;
}

inline Priority priority_of(const std::string& s, const std::string& ctx) {
  if (s == "HP") return Priority::HP;
  if (s == "RP") return Priority::RP;
  if (s == "LP") return Priority::LP;
  throw SemanticError(ctx + ": class must be one of HP, RP, LP");
}

inline std::string format_sig9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace io_detail

namespace io_detail {
ParseResult parse_scenario_document(const Json& doc, bool strict);
}  // namespace io_detail

// Parses a scenario document and fully validates it. Strict mode rejects
// unknown keys; lenient mode records warnings instead.
inline ParseResult parse_scenario_text(const std::string& text, bool strict = true) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SyntaxError(e.what(), "scenario");
  }
  try {
    return io_detail::parse_scenario_document(doc, strict);
  } catch (const nlohmann::json::exception& e) {
    // Wrong value types surface here (e.g. a string where a number belongs).
    throw SemanticError(std::string("scenario: ") + e.what());
  }
}

inline ParseResult io_detail::parse_scenario_document(const Json& doc, bool strict) {
  ParseResult out;
  if (!doc.is_object()) throw SemanticError("scenario: top level must be an object");
  io_detail::check_keys(doc, {"protocol", "qos", "devices", "assignment", "run"}, "scenario",
                        strict, &out.warnings);

  Scenario& sc = out.scenario;

  const Json& proto = io_detail::require(doc, "protocol", "scenario");
  io_detail::check_keys(proto,
                        {"n_m", "T_m_us", "T_x_us", "r_H", "r_R", "r_L", "synccs", "buffered",
                         "smsa"},
                        "protocol", strict, &out.warnings);
  sc.params.n_m = io_detail::require(proto, "n_m", "protocol").get<int>();
  sc.params.t_m = io_detail::us_field(proto, "T_m_us", "protocol");
  sc.params.t_x = io_detail::us_field(proto, "T_x_us", "protocol");
  sc.params.r_h = io_detail::require(proto, "r_H", "protocol").get<int>();
  sc.params.r_r = io_detail::require(proto, "r_R", "protocol").get<int>();
  sc.params.r_l = io_detail::require(proto, "r_L", "protocol").get<int>();
  sc.params.synccs = proto.value("synccs", false);
  sc.params.buffered = proto.value("buffered", false);
  sc.params.smsa = proto.value("smsa", false);

  if (doc.contains("qos")) {
    const Json& qos = doc["qos"];
    io_detail::check_keys(qos, {"HP", "RP", "LP"}, "qos", strict, &out.warnings);
    for (int c = 0; c < 3; ++c) {
      const char* name = to_string(static_cast<Priority>(c));
      if (!qos.contains(name)) continue;
      const Json& entry = qos[name];
      io_detail::check_keys(entry, {"delta_us", "rho"}, std::string("qos.") + name, strict,
                            &out.warnings);
      sc.qos.delta[static_cast<std::size_t>(c)] =
          io_detail::us_field(entry, "delta_us", std::string("qos.") + name);
      sc.qos.rho[static_cast<std::size_t>(c)] =
          io_detail::require(entry, "rho", std::string("qos.") + name).get<double>();
    }
  }

  const Json& devices = io_detail::require(doc, "devices", "scenario");
  if (!devices.is_array()) throw SemanticError("devices: must be an array");
  for (const Json& d : devices) {
    const std::string ctx = "devices[" + std::to_string(sc.devices.size()) + "]";
    io_detail::check_keys(d, {"id", "class", "lambda_per_s", "traffic"}, ctx, strict,
                          &out.warnings);
    DeviceSpec spec;
    spec.id = io_detail::require(d, "id", ctx).get<int>();
    spec.priority = io_detail::priority_of(io_detail::require(d, "class", ctx).get<std::string>(), ctx);
    const Json traffic = d.value("traffic", Json{{"kind", "poisson"}});
    io_detail::check_keys(traffic, {"kind", "p", "period_us", "phase_us", "ticks_us"},
                          ctx + ".traffic", strict, &out.warnings);
    const std::string kind = io_detail::require(traffic, "kind", ctx + ".traffic").get<std::string>();
    if (kind == "poisson") {
      spec.traffic = PoissonTraffic{};
      spec.lambda_per_s = io_detail::require(d, "lambda_per_s", ctx).get<double>();
      spec.lambda_per_tick = spec.lambda_per_s / 1e9;
    } else if (kind == "bernoulli_per_frame") {
      BernoulliPerFrameTraffic b;
      b.p = io_detail::require(traffic, "p", ctx + ".traffic").get<double>();
      spec.traffic = b;
      if (d.contains("lambda_per_s")) {
        spec.lambda_per_s = d["lambda_per_s"].get<double>();
        spec.lambda_per_tick = spec.lambda_per_s / 1e9;
      } else {
        // Rate implied by one opportunity per logical frame.
        const Tick frame = sc.params.frame_ticks(spec.priority);
        spec.lambda_per_tick = frame > 0 ? b.p / static_cast<double>(frame) : 0.0;
      }
    } else if (kind == "deterministic") {
      DeterministicTraffic det;
      det.period = io_detail::us_field(traffic, "period_us", ctx + ".traffic");
      det.phase = traffic.contains("phase_us")
                      ? us_to_ticks(traffic["phase_us"].get<double>())
                      : 0;
      spec.traffic = det;
      spec.lambda_per_tick = 1.0 / static_cast<double>(det.period);
      if (d.contains("lambda_per_s")) {
        spec.lambda_per_s = d["lambda_per_s"].get<double>();
        spec.lambda_per_tick = spec.lambda_per_s / 1e9;
      }
    } else if (kind == "trace") {
      TraceTraffic tr;
      for (const Json& t : io_detail::require(traffic, "ticks_us", ctx + ".traffic"))
        tr.ticks.push_back(us_to_ticks(t.get<double>()));
      spec.traffic = tr;
      const Tick span = tr.ticks.empty() ? 1 : std::max<Tick>(1, tr.ticks.back());
      spec.lambda_per_tick =
          tr.ticks.empty() ? 1e-18 : static_cast<double>(tr.ticks.size()) / static_cast<double>(span);
      if (d.contains("lambda_per_s")) {
        spec.lambda_per_s = d["lambda_per_s"].get<double>();
        spec.lambda_per_tick = spec.lambda_per_s / 1e9;
      }
    } else {
      throw SemanticError(ctx + ": unknown traffic kind '" + kind + "'");
    }
    sc.devices.push_back(spec);
  }

  const Json& assignment = io_detail::require(doc, "assignment", "scenario");
  if (!assignment.is_array()) throw SemanticError("assignment: must be an array");
  for (const Json& a : assignment) {
    const std::string ctx = "assignment[" + std::to_string(sc.assignment.entries.size()) + "]";
    io_detail::check_keys(a, {"device", "slot", "minislot"}, ctx, strict, &out.warnings);
    AssignmentEntry e;
    e.device = io_detail::require(a, "device", ctx).get<int>();
    e.slot = io_detail::require(a, "slot", ctx).get<int>();
    e.minislot = io_detail::require(a, "minislot", ctx).get<int>();
    sc.assignment.entries.push_back(e);
  }

  const Json& run = io_detail::require(doc, "run", "scenario");
  io_detail::check_keys(run, {"seed", "horizon_slots", "replications", "warmup_fraction"}, "run",
                        strict, &out.warnings);
  sc.run.seed = io_detail::require(run, "seed", "run").get<std::uint64_t>();
  sc.run.horizon_slots = io_detail::require(run, "horizon_slots", "run").get<std::int64_t>();
  sc.run.replications = run.value("replications", 1);
  sc.run.warmup_fraction = run.value("warmup_fraction", 0.1);

  const ValidationReport validation = validate_scenario(sc);
  if (!validation.ok()) {
    std::string msg = "scenario failed validation:";
    for (const auto& f : validation.findings)
      if (f.severity == Severity::Error) msg += "\n  [" + f.code + "] " + f.where + ": " + f.message;
    throw SemanticError(msg);
  }

  out.document = doc;
  return out;
}

inline ParseResult parse_scenario_file(const std::string& path, bool strict = true) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SyntaxError("cannot open file", path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario_text(buf.str(), strict);
  } catch (const SyntaxError& e) {
    throw SyntaxError(e.what(), path);
  }
}

// Canonical emission: fixed section order, two-space indent, LF newlines.
// parse(emit(parse(x))) == parse(x).
inline std::string emit_scenario(const Scenario& sc) {
  Json doc;
  doc["protocol"] = {{"n_m", sc.params.n_m},
                     {"T_m_us", ticks_to_us(sc.params.t_m)},
                     {"T_x_us", ticks_to_us(sc.params.t_x)},
                     {"r_H", sc.params.r_h},
                     {"r_R", sc.params.r_r},
                     {"r_L", sc.params.r_l},
                     {"synccs", sc.params.synccs},
                     {"buffered", sc.params.buffered},
                     {"smsa", sc.params.smsa}};
  Json qos;
  for (int c = 0; c < 3; ++c)
    qos[to_string(static_cast<Priority>(c))] = {
        {"delta_us", ticks_to_us(sc.qos.delta[static_cast<std::size_t>(c)])},
        {"rho", sc.qos.rho[static_cast<std::size_t>(c)]}};
  doc["qos"] = qos;
  Json devices = Json::array();
  for (const auto& d : sc.devices) {
    Json entry;
    entry["id"] = d.id;
    entry["class"] = to_string(d.priority);
    if (d.lambda_per_s != 0.0)
      entry["lambda_per_s"] = d.lambda_per_s;  // verbatim; keeps round trips lossless
    else if (std::holds_alternative<PoissonTraffic>(d.traffic))
      entry["lambda_per_s"] = d.lambda_per_tick * 1e9;
    if (const auto* b = std::get_if<BernoulliPerFrameTraffic>(&d.traffic))
      entry["traffic"] = {{"kind", "bernoulli_per_frame"}, {"p", b->p}};
    else if (const auto* det = std::get_if<DeterministicTraffic>(&d.traffic))
      entry["traffic"] = {{"kind", "deterministic"},
                          {"period_us", ticks_to_us(det->period)},
                          {"phase_us", ticks_to_us(det->phase)}};
    else if (const auto* tr = std::get_if<TraceTraffic>(&d.traffic)) {
      Json ticks = Json::array();
      for (Tick t : tr->ticks) ticks.push_back(ticks_to_us(t));
      entry["traffic"] = {{"kind", "trace"}, {"ticks_us", ticks}};
    } else {
      entry["traffic"] = {{"kind", "poisson"}};
    }
    devices.push_back(entry);
  }
  doc["devices"] = devices;
  Json assignment = Json::array();
  for (const auto& e : sc.assignment.entries)
    assignment.push_back({{"device", e.device}, {"slot", e.slot}, {"minislot", e.minislot}});
  doc["assignment"] = assignment;
  doc["run"] = {{"seed", sc.run.seed},
                {"horizon_slots", sc.run.horizon_slots},
                {"replications", sc.run.replications},
                {"warmup_fraction", sc.run.warmup_fraction}};
  return doc.dump(2) + "\n";
}

// Identity hash over the canonicalized scenario, not file bytes: FNV-1a 64
// of the canonical emission, so formatting and key order do not matter.
inline std::string scenario_hash(const Scenario& sc) {
  const std::string canon = emit_scenario(sc);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Results serialization: one uniform row shape shared by analytic, simulated
// and comparison output.

struct ResultRow {
  std::string scenario_id;
  std::string quantity;
  std::string where;
  std::string analytic;   // printed with 9 significant digits, may be empty
  std::string simulated;
  std::string ci_low;
  std::string ci_high;
  std::string rel_err;
  std::string verdict;
};

namespace io_detail {

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace io_detail

inline std::string emit_results_csv(const std::vector<ResultRow>& rows) {
  std::string out =
      "scenario_id,quantity,device_or_slot,analytic,simulated,ci_low,ci_high,rel_err,verdict\n";
  for (const auto& r : rows) {
    out += io_detail::csv_quote(r.scenario_id) + ',' + io_detail::csv_quote(r.quantity) + ',' +
           io_detail::csv_quote(r.where) + ',' + r.analytic + ',' + r.simulated + ',' + r.ci_low +
           ',' + r.ci_high + ',' + r.rel_err + ',' + io_detail::csv_quote(r.verdict) + '\n';
  }
  return out;
}

// Minimal reader for the dialect emitted above (quoted strings, LF endings).
inline std::vector<ResultRow> parse_results_csv(const std::string& text) {
  std::vector<ResultRow> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            cur += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(cur);
    if (fields.size() != 9) throw SyntaxError("results CSV row with " +
                                              std::to_string(fields.size()) + " fields");
    rows.push_back({fields[0], fields[1], fields[2], fields[3], fields[4], fields[5], fields[6],
                    fields[7], fields[8]});
  }
  return rows;
}

inline std::string fmt9(double v) { return io_detail::format_sig9(v); }

inline std::vector<ResultRow> rows_from_analytic(const AnalyticReport& rep) {
  std::vector<ResultRow> rows;
  for (const auto& d : rep.devices) {
    const std::string where = "dev:" + std::to_string(d.id);
    rows.push_back({rep.scenario_hash, "adf", where, fmt9(d.adf), "", "", "", "", ""});
    rows.push_back({rep.scenario_hash, "ad_us", where, fmt9(ticks_to_us(d.ad)), "", "", "", "", ""});
    rows.push_back({rep.scenario_hash, "collision_prob", where, fmt9(d.q_coll), "", "", "", "", ""});
  }
  for (std::size_t s = 0; s < rep.slots.size(); ++s) {
    const std::string where = "slot:" + std::to_string(s + 1);
    rows.push_back({rep.scenario_hash, "slot_idle", where, fmt9(rep.slots[s].idle), "", "", "", "", ""});
    rows.push_back({rep.scenario_hash, "slot_throughput", where, fmt9(rep.slots[s].throughput), "",
                    "", "", "", ""});
  }
  rows.push_back({rep.scenario_hash, "frame_length_us", "global",
                  fmt9(rep.super_cycle_ticks / kTicksPerUs), "", "", "", "", ""});
  return rows;
}

inline std::vector<ResultRow> rows_from_sim(const SimReport& rep) {
  std::vector<ResultRow> rows;
  for (const auto& d : rep.devices) {
    const std::string where = "dev:" + std::to_string(d.id);
    const auto push = [&](const char* q, const Estimate& e) {
      rows.push_back({rep.scenario_hash, q, where, "", fmt9(e.mean), fmt9(e.lo95()),
                      fmt9(e.hi95()), "", e.reliable ? "" : "unreliable"});
    };
    push("adf", d.adf);
    push("ad_us", d.ad_us);
    push("collision_prob", d.q_coll);
    rows.push_back({rep.scenario_hash, "replacement_rate", where, "",
                    fmt9(d.replacement_rate), "", "", "", ""});
  }
  for (std::size_t s = 0; s < rep.slots.size(); ++s) {
    const std::string where = "slot:" + std::to_string(s + 1);
    rows.push_back({rep.scenario_hash, "slot_idle", where, "", fmt9(rep.slots[s].idle.mean),
                    fmt9(rep.slots[s].idle.lo95()), fmt9(rep.slots[s].idle.hi95()), "", ""});
    rows.push_back({rep.scenario_hash, "slot_throughput", where, "",
                    fmt9(rep.slots[s].throughput.mean), fmt9(rep.slots[s].throughput.lo95()),
                    fmt9(rep.slots[s].throughput.hi95()), "", ""});
  }
  if (rep.frame_length_us.replications > 0)
    rows.push_back({rep.scenario_hash, "frame_length_us", "global", "",
                    fmt9(rep.frame_length_us.mean), fmt9(rep.frame_length_us.lo95()),
                    fmt9(rep.frame_length_us.hi95()), "", ""});
  return rows;
}

inline std::vector<ResultRow> rows_from_comparison(const ComparisonReport& rep) {
  std::vector<ResultRow> rows;
  for (const auto& r : rep.rows)
    rows.push_back({rep.scenario_hash, r.quantity, r.where, fmt9(r.analytic), fmt9(r.simulated),
                    fmt9(r.ci_low), fmt9(r.ci_high), fmt9(r.rel_err),
                    r.pass ? "pass" : (r.mandatory ? "fail" : "warn")});
  return rows;
}

// Aligned text table of comparison rows for terminal output.
inline std::string render_table(const std::vector<ResultRow>& rows) {
  const std::array<std::string, 9> header = {"scenario",  "quantity", "where",
                                             "analytic",  "simulated", "ci_low",
                                             "ci_high",   "rel_err",  "verdict"};
  std::array<std::size_t, 9> width{};
  for (std::size_t c = 0; c < 9; ++c) width[c] = header[c].size();
  const auto field = [](const ResultRow& r, std::size_t c) -> const std::string& {
    switch (c) {
      case 0: return r.scenario_id;
      case 1: return r.quantity;
      case 2: return r.where;
      case 3: return r.analytic;
      case 4: return r.simulated;
      case 5: return r.ci_low;
      case 6: return r.ci_high;
      case 7: return r.rel_err;
      default: return r.verdict;
    }
  };
  for (const auto& r : rows)
    for (std::size_t c = 0; c < 9; ++c) width[c] = std::max(width[c], field(r, c).size());
  std::string out;
  for (std::size_t c = 0; c < 9; ++c) {
    out += header[c];
    out.append(width[c] - header[c].size() + 2, ' ');
  }
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < 9; ++c) {
      const std::string& f = field(r, c);
      out += f;
      out.append(width[c] - f.size() + 2, ' ');
    }
    out += '\n';
  }
  return out;
}

}  // namespace msmac

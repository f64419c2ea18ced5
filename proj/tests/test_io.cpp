#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "msmac/scenario_io.hpp"

using namespace msmac;
using Catch::Matchers::ContainsSubstring;

#ifndef MSMAC_SCENARIO_DIR
#define MSMAC_SCENARIO_DIR "scenarios"
#endif

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* kMinimal = R"({
  "protocol": {"n_m": 10, "T_m_us": 9, "T_x_us": 100, "r_H": 1, "r_R": 1, "r_L": 1},
  "devices": [{"id": 1, "class": "HP", "lambda_per_s": 100.0, "traffic": {"kind": "poisson"}}],
  "assignment": [{"device": 1, "slot": 1, "minislot": 1}],
  "run": {"seed": 1, "horizon_slots": 1000}
})";

}  // namespace

TEST_CASE("shipped flagship scenario parses with the quoted magnitudes") {
  const ParseResult res = parse_scenario_file(std::string(MSMAC_SCENARIO_DIR) + "/flagship.scn");
  const auto& p = res.scenario.params;
  CHECK(p.n_m == 10);
  CHECK(p.slot_ticks() == us_to_ticks(200));
  CHECK(p.r_l == 200);
  // LP assignment cycle of about 40 ms.
  CHECK(p.frame_ticks(Priority::LP) == us_to_ticks(40000));
}

TEST_CASE("every shipped scenario parses strictly") {
  for (const char* name :
       {"uncontended.scn", "mixed_priority.scn", "smsa_stress.scn", "flagship.scn",
        "adf_pair.scn", "micro_nobuf_1.scn", "micro_nobuf_2.scn", "micro_nobuf_3.scn",
        "micro_buf_1.scn"}) {
    INFO(name);
    CHECK_NOTHROW(parse_scenario_file(std::string(MSMAC_SCENARIO_DIR) + "/" + name));
  }
}

TEST_CASE("missing required field names the field") {
  Json doc = Json::parse(kMinimal);
  doc["protocol"].erase("T_x_us");
  CHECK_THROWS_WITH(parse_scenario_text(doc.dump()), ContainsSubstring("T_x_us"));
}

TEST_CASE("duplicate cell without the SMsA switch is a semantic error") {
  Json doc = Json::parse(kMinimal);
  doc["devices"].push_back({{"id", 2}, {"class", "HP"}, {"lambda_per_s", 100.0},
                            {"traffic", {{"kind", "poisson"}}}});
  doc["assignment"].push_back({{"device", 2}, {"slot", 1}, {"minislot", 1}});
  CHECK_THROWS_WITH(parse_scenario_text(doc.dump()), ContainsSubstring("SMsA"));
}

TEST_CASE("unknown keys: rejected in strict mode, warned about in lenient mode") {
  Json doc = Json::parse(kMinimal);
  doc["protocol"]["mystery"] = 1;
  CHECK_THROWS_AS(parse_scenario_text(doc.dump(), true), SemanticError);
  const ParseResult res = parse_scenario_text(doc.dump(), false);
  REQUIRE(res.warnings.size() == 1);
  CHECK_THAT(res.warnings[0], ContainsSubstring("mystery"));
}

TEST_CASE("syntax errors carry a position") {
  CHECK_THROWS_AS(parse_scenario_text("{ not json"), SyntaxError);
}

TEST_CASE("wrong value types are semantic errors, not crashes") {
  Json doc = Json::parse(kMinimal);
  doc["protocol"]["n_m"] = "ten";
  CHECK_THROWS_AS(parse_scenario_text(doc.dump()), SemanticError);
  Json doc2 = Json::parse(kMinimal);
  doc2["devices"] = 5;
  CHECK_THROWS_AS(parse_scenario_text(doc2.dump()), SemanticError);
}

TEST_CASE("parse/emit round trip is the identity on canonical form") {
  const ParseResult first = parse_scenario_text(kMinimal);
  const std::string canon = emit_scenario(first.scenario);
  const ParseResult second = parse_scenario_text(canon);
  CHECK(emit_scenario(second.scenario) == canon);
  CHECK(scenario_hash(first.scenario) == scenario_hash(second.scenario));
}

TEST_CASE("scenario hash covers content, not formatting") {
  const ParseResult a = parse_scenario_text(kMinimal);
  // Same document, different whitespace and key order in the source bytes.
  const std::string reordered = R"({
    "run": {"horizon_slots": 1000, "seed": 1},
    "assignment": [{"minislot": 1, "slot": 1, "device": 1}],
    "devices": [{"traffic": {"kind": "poisson"}, "lambda_per_s": 100.0, "class": "HP", "id": 1}],
    "protocol": {"r_L": 1, "r_R": 1, "r_H": 1, "T_x_us": 100, "T_m_us": 9, "n_m": 10}
  })";
  const ParseResult b = parse_scenario_text(reordered);
  CHECK(scenario_hash(a.scenario) == scenario_hash(b.scenario));

  Json changed = Json::parse(kMinimal);
  changed["run"]["seed"] = 2;
  const ParseResult c = parse_scenario_text(changed.dump());
  CHECK(scenario_hash(a.scenario) != scenario_hash(c.scenario));
}

TEST_CASE("results CSV: empty report is header-only") {
  CHECK(emit_results_csv({}) ==
        "scenario_id,quantity,device_or_slot,analytic,simulated,ci_low,ci_high,rel_err,verdict\n");
}

TEST_CASE("results CSV round trip reproduces identical bytes") {
  std::vector<ResultRow> rows;
  rows.push_back({"abc", "adf", "dev:1", fmt9(1.1176470588), fmt9(1.12), fmt9(1.11), fmt9(1.13),
                  fmt9(0.0021), "pass"});
  rows.push_back({"abc", "slot_idle", "slot:1", fmt9(0.8), fmt9(0.8004), fmt9(0.7998),
                  fmt9(0.801), fmt9(0.0005), "pass"});
  rows.push_back({"abc", "note, with comma", "dev:\"2\"", "", "", "", "", "", ""});
  const std::string csv = emit_results_csv(rows);
  const auto parsed = parse_results_csv(csv);
  REQUIRE(parsed.size() == rows.size());
  CHECK(parsed[2].quantity == "note, with comma");
  CHECK(parsed[2].where == "dev:\"2\"");
  std::vector<ResultRow> round;
  for (const auto& r : parsed) round.push_back(r);
  CHECK(emit_results_csv(round) == csv);
}

TEST_CASE("numbers render with nine significant digits") {
  CHECK(fmt9(1.0 / 3.0) == "0.333333333");
  CHECK(fmt9(562.5) == "562.5");
  CHECK(fmt9(1.1176470588) == "1.11764706");
}

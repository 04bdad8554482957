#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "stabcap/cli.hpp"
#include "stabcap/report.hpp"

using namespace stabcap;
using nlohmann::json;

namespace {

std::string write_config(const std::string& name, const json& j) {
  const std::string path = "cli_test_out/" + name;
  write_file_atomic(path, j.dump(2));
  return path;
}

int run(const std::vector<std::string>& args, std::string* captured = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (captured) *captured = out.str() + err.str();
  return code;
}

json read_report(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  json j;
  in >> j;
  return j;
}

}  // namespace

TEST_CASE("unknown verb exits 2 with usage") {
  std::string text;
  CHECK(run({"frobnicate"}, &text) == 2);
  CHECK(text.find("Usage") != std::string::npos);
}

TEST_CASE("missing config keys are named") {
  const std::string path = write_config("missing_key.json", json{{"seed", 1}});
  std::string text;
  CHECK(run({"bound", "--config", path, "--out", "cli_test_out"}, &text) == 2);
  CHECK(text.find("bound") != std::string::npos);
}

TEST_CASE("seed is required without a wall-clock fallback") {
  const json config{{"model",
                     {{"kind", "additive"},
                      {"dimension", 1},
                      {"drift", {{"name", "scalar_gain"}, {"gain", 2.0}}},
                      {"noise", {{"family", "zero"}}},
                      {"init", {{"family", "point_mass"}, {"value", 1.0}}}}},
                    {"simulate", {{"horizon", 3}, {"count", 2}}}};
  const std::string path = write_config("no_seed.json", config);
  std::string text;
  CHECK(run({"simulate", "--config", path, "--out", "cli_test_out"}, &text) == 2);
  CHECK(text.find("seed") != std::string::npos);
  CHECK(run({"simulate", "--config", path, "--seed", "7", "--out", "cli_test_out"}) == 0);
}

TEST_CASE("bound moment verb reproduces the paper example end to end") {
  const json config{{"seed", 1},
                    {"model",
                     {{"kind", "additive"},
                      {"dimension", 1},
                      {"drift", {{"name", "expanding_sqrt"}}},
                      {"noise", {{"family", "zero"}}},
                      {"init", {{"family", "uniform"}, {"a", -1.0}, {"b", 1.0}}},
                      {"volume_expanding", true}}},
                    {"bound", {{"theorem", "moment"}, {"moment", 1.0}, {"p", 1.0}, {"kappa_max", 100.0}}}};
  const std::string path = write_config("bound_moment.json", config);
  CHECK(run({"bound", "--config", path, "--out", "cli_test_out/moment"}) == 0);
  const json report = read_report("cli_test_out/moment/bound_report.json");
  CHECK(report["schema_version"] == kReportSchemaVersion);
  CHECK(std::abs(report["results"]["kappa_star"].get<double>() - 3.0) < 1e-3);
  CHECK(std::abs(report["results"]["bound_bits"].get<double>() - 0.3849001794597505) < 1e-6);
}

TEST_CASE("lemmas intervals selects both disjoint intervals") {
  const json config{{"seed", 0}, {"lemmas_intervals", {{"intervals", {{0.0, 1.0}, {2.0, 3.0}}}}}};
  const std::string path = write_config("intervals.json", config);
  CHECK(run({"lemmas", "intervals", "--config", path, "--out", "cli_test_out/intervals"}) == 0);
  const json report = read_report("cli_test_out/intervals/lemmas_intervals_report.json");
  CHECK(report["results"]["selected"] == json::array({0, 1}));
}

TEST_CASE("reports round-trip: re-running the embedded config is bit-identical") {
  const json config{{"seed", 5},
                    {"channel", {{"kind", "dmc"}, {"bsc", 0.11}}},
                    {"channel_experiments",
                     {{"tol", 1e-6},
                      {"experiments", {{{"rate", 0.5}, {"blocklength", 40}, {"trials", 30}}}}}}};
  const std::string path = write_config("channel.json", config);
  CHECK(run({"channel", "--config", path, "--out", "cli_test_out/chan_a"}) == 0);
  const json first = read_report("cli_test_out/chan_a/channel_report.json");

  const std::string embedded = write_config("channel_embedded.json", first["config"]);
  CHECK(run({"channel", "--config", embedded, "--out", "cli_test_out/chan_b"}) == 0);
  const json second = read_report("cli_test_out/chan_b/channel_report.json");
  CHECK(first == second);
}

TEST_CASE("channel verb reports capacity near the closed form") {
  const json config{{"seed", 2},
                    {"channel", {{"kind", "dmc"}, {"bsc", 0.11}}},
                    {"channel_experiments", {{"tol", 1e-6}}}};
  const std::string path = write_config("capacity.json", config);
  CHECK(run({"channel", "--config", path, "--out", "cli_test_out/capacity"}) == 0);
  const json report = read_report("cli_test_out/capacity/channel_report.json");
  const double closed_form = 1.0 + 0.11 * std::log2(0.11) + 0.89 * std::log2(0.89);
  CHECK(std::abs(report["results"]["capacity"]["bits"].get<double>() - closed_form) < 1e-5);
}

TEST_CASE("reproduce recipes all pass") {
  for (const RecipeResult& r : run_reproduce_recipes()) {
    INFO(r.name, ": ", r.detail);
    CHECK(r.pass);
  }
}

TEST_CASE("simulate emits trajectories and a report") {
  const json config{{"seed", 3},
                    {"model",
                     {{"kind", "additive"},
                      {"dimension", 1},
                      {"drift", {{"name", "scalar_gain"}, {"gain", 2.0}}},
                      {"noise", {{"family", "zero"}}},
                      {"init", {{"family", "point_mass"}, {"value", 1.0}}}}},
                    {"simulate", {{"horizon", 3}, {"count", 2}}}};
  const std::string path = write_config("simulate.json", config);
  CHECK(run({"simulate", "--config", path, "--out", "cli_test_out/sim"}) == 0);
  std::ifstream csv("cli_test_out/sim/simulate_trajectories.csv");
  REQUIRE(csv);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "trajectory,t,x0");
}

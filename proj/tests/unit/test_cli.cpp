#include "doctest.h"

#include "wcert/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wcert;

namespace {

const std::string kDir = WCERT_SCENARIO_DIR;

std::string scenario(const std::string& name) { return kDir + "/" + name + ".json"; }

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "wcert");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

json report(const std::string& command, const std::string& name,
            const std::vector<std::string>& extra = {}) {
  const auto path = std::filesystem::temp_directory_path() / ("wcert_test_" + name + "_" + command + ".json");
  std::vector<std::string> args{command, scenario(name), "--json", path.string()};
  args.insert(args.end(), extra.begin(), extra.end());
  const Run r = run(args);
  REQUIRE(r.code != kExitError);
  std::ifstream f(path);
  json j = json::parse(f);
  std::filesystem::remove(path);
  return j;
}

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("certify-orbifold exit codes") {
  CHECK(run({"certify-orbifold", scenario("weyl_p2")}).code == kExitPass);
  const Run vac = run({"certify-orbifold", scenario("weyl_vacuum_p2")});
  CHECK(vac.code == kExitFail);
  const json j = report("certify-orbifold", "weyl_vacuum_p2");
  CHECK(j["reason"] == "types not distinct");
  CHECK(j["verdict"] == "not-certified");
}

TEST_CASE("virasoro-check reports c = -1") {
  const json j = report("virasoro-check", "weyl_p2");
  CHECK(j["verdict"] == "pass");
  CHECK(j["virasoro"]["inferred_c"] == "-1");
  CHECK(j["virasoro"]["expected_c"] == "-1");
  const json h = report("virasoro-check", "heisenberg_theta");
  CHECK(h["virasoro"]["inferred_c"] == "1");
}

TEST_CASE("every command runs on every shipped scenario") {
  for (const auto& entry : std::filesystem::directory_iterator(kDir)) {
    if (entry.path().extension() != ".json") continue;
    for (const auto& c : command_names()) {
      const Run r = run({c, entry.path().string()});
      INFO(c, " ", entry.path().string(), " ", r.err);
      CHECK(r.code != kExitError);
      CHECK_FALSE(r.out.empty());
    }
  }
}

TEST_CASE("input errors exit 1") {
  CHECK(run({"certify-orbifold", kDir + "/missing.json"}).code == kExitError);
  CHECK(run({"no-such-command", scenario("weyl_p2")}).code == kExitError);
  CHECK(run({}).code == kExitError);
  const auto bad_json = write_temp("wcert_bad.json", "{ not json");
  CHECK(run({"whittaker-type", bad_json.string()}).code == kExitError);
  const auto bad_scalar = write_temp(
      "wcert_bad_scalar.json",
      R"({"name":"x","algebra":"weyl","whittaker":{"lambda":["1/0"]},"automorphism":{"type":"gp","p":2}})");
  const Run r = run({"whittaker-type", bad_scalar.string()});
  CHECK(r.code == kExitError);
  CHECK_FALSE(r.err.empty());
  const auto bad_order = write_temp(
      "wcert_bad_order.json",
      R"({"name":"x","algebra":{"type":"heisenberg","rank":2},"whittaker":{"lambda":[["1"],["1"]]},
          "automorphism":{"type":"orthogonal","matrix":[["0","1"],["1","0"]],"order":3}})");
  CHECK(run({"whittaker-type", bad_order.string()}).code == kExitError);
  const auto bad_session = write_temp(
      "wcert_bad_session.json",
      R"({"name":"x","algebra":"weyl","whittaker":{"lambda":["1"]},"automorphism":{"type":"gp","p":3},"order":4})");
  CHECK(run({"whittaker-type", bad_session.string()}).code == kExitError);
  std::filesystem::remove(bad_session);
  CHECK(run({"certify-orbifold", scenario("weyl_p2"), "--scale", "D=x"}).code == kExitError);
  CHECK(run({"certify-orbifold", scenario("weyl_p2"), "--scale", "Q=1"}).code == kExitError);
  CHECK(run({"certify-orbifold", scenario("weyl_p2"), "--scale", "N=3x"}).code == kExitError);
  CHECK(run({"certify-orbifold", scenario("weyl_p2"), "--scale", "L=-1"}).code == kExitError);
  std::filesystem::remove(bad_json);
  std::filesystem::remove(bad_scalar);
  std::filesystem::remove(bad_order);
}

TEST_CASE("orthogonal automorphisms load") {
  const auto path = write_temp(
      "wcert_orth.json",
      R"({"name":"swap","algebra":{"type":"heisenberg","rank":2},"whittaker":{"lambda":[["1"],["2"]]},
          "automorphism":{"type":"orthogonal","matrix":[["0","1"],["1","0"]],"order":2},
          "scale":{"D":1}})");
  CHECK(run({"certify-orbifold", path.string()}).code == kExitPass);
  std::filesystem::remove(path);
}

TEST_CASE("digest is stable and tracks the effective scenario") {
  const json a = report("whittaker-type", "weyl_p3");
  const json b = report("whittaker-type", "weyl_p3");
  CHECK(a["scenario_digest"] == b["scenario_digest"]);
  CHECK(a["scenario_digest"].get<std::string>().size() == 64);
  const json c = report("whittaker-type", "weyl_p3", {"--seed", "7"});
  CHECK(c["scenario_digest"] != a["scenario_digest"]);
  CHECK(c["seed"] == 7);
  const json d = report("whittaker-type", "weyl_p3", {"--scale", "D=2"});
  CHECK(d["scenario_digest"] != a["scenario_digest"]);
}

TEST_CASE("reports are deterministic apart from timings") {
  for (const std::string name : {"weyl_p2", "weyl_p3", "heisenberg_theta"}) {
    json a = report("certify-orbifold", name);
    json b = report("certify-orbifold", name);
    CHECK(a.contains("timings"));
    a.erase("timings");
    b.erase("timings");
    CHECK(a.dump() == b.dump());
  }
}

TEST_CASE("scale overrides reach the report") {
  const json j = report("certify-orbifold", "weyl_p2", {"--scale", "D=3/2,N=4,L=7,Lgen=2,slack=1"});
  CHECK(j["scale"]["D"] == "3/2");
  CHECK(j["scale"]["N"] == 4);
  CHECK(j["scale"]["L"] == 7);
  CHECK(j["scale"]["Lgen"] == 2);
  CHECK(j["scale"]["slack"] == "1");
  const auto o = ScaleOverrides::parse("D=1.5, Lgen=3");
  REQUIRE(o.D.has_value());
  CHECK(o.D->twice == 3);
  CHECK(o.L_gen == std::optional<std::size_t>{3});
}

TEST_CASE("coverage lists the targets") {
  const json j = report("certify-orbifold", "weyl_p2");
  REQUIRE(j.contains("pipeline"));
  const json& cert = j["pipeline"]["certificates"][0];
  CHECK(cert["label"] == "cyclic");
  CHECK(cert["coverage"]["target"].size() == 6);
  CHECK(cert["coverage"]["achieved"].size() == 6);
  CHECK(cert["coverage"]["missing"].empty());
  CHECK(j["witnesses"][0]["mode"] == "a(0)");
}

TEST_CASE("span and separator commands") {
  const json s = report("span", "weyl_p2");
  CHECK(s["verdict"] == "fail"); // a(-2) is not in the span
  CHECK(run({"span", scenario("weyl_p2")}).code == kExitFail);
  const json sep = report("separator", "weyl_p3");
  CHECK(sep["verdict"] == "pass");
  CHECK(run({"separator", scenario("weyl_vacuum_p2")}).code == kExitFail);
  CHECK(run({"delta-check", scenario("weyl_p2")}).code == kExitPass);
  CHECK(run({"charge-decompose", scenario("weyl_vacuum_p2")}).code == kExitPass);
  CHECK(run({"charge-decompose", scenario("weyl_p2")}).code == kExitFail);
}

}

#include <cmath>
#include <regex>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "katlas/cli.hpp"
#include "katlas/error.hpp"
#include "support.hpp"

using nlohmann::json;
using testing::rel;
using testing::TempDir;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = katlas::cli::main_entry(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

json config(double p, int N, double a, int k_max = 1) {
  return {{"nonlinearity", {{"omega", 1.0}, {"terms", {{{"coeff", 1.0}, {"p", p}}}}}},
          {"N", N},
          {"a", a},
          {"k_max", k_max}};
}

std::string put(const TempDir& dir, const std::string& name, const json& j) {
  const auto path = dir / name;
  testing::spit(path, j.dump(2));
  return path.string();
}

// Runs a subcommand with output and cache inside dir.
Run sub(const std::string& cmd, const TempDir& dir, const json& cfg, const std::string& out = "out") {
  return run({cmd, "-c", put(dir, cmd + ".json", cfg), "--out", (dir / out).string(), "--cache",
              (dir / "cache").string()});
}

double field(const std::string& line, const std::string& key) {
  const std::regex re("(^|\\s)" + key + "=(\\S+)");
  std::smatch m;
  REQUIRE(std::regex_search(line, m, re));
  return std::stod(m[2].str());
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

json read_json(const std::filesystem::path& p) { return json::parse(testing::slurp(p)); }

}  // namespace

TEST_CASE("check-f exit codes") {
  TempDir dir("cli-check");
  CHECK(sub("check-f", dir, config(4.0, 3, 1.0)).code == 0);
  const Run bad = sub("check-f", dir, config(7.0, 3, 1.0));
  CHECK(bad.code == 1);
  CHECK(json::parse(bad.out).at("f3_ok") == false);

  testing::spit(dir / "broken.json", "{\"nonlinearity\": ");
  CHECK(run({"check-f", "-c", (dir / "broken.json").string()}).code == 2);
  CHECK(run({"check-f", "-c", (dir / "absent.json").string()}).code == 2);
  CHECK(run({"no-such-command"}).code == 2);
  CHECK(run({}).code == 2);
}

TEST_CASE("invalid configurations are usage errors") {
  TempDir dir("cli-config");
  json c = config(4.0, 3, 1.0);
  c["k_max"] = 0;
  CHECK(sub("solve-q", dir, c).code == 2);
  c = config(4.0, 3, -1.0);
  CHECK(sub("solve-q", dir, c).code == 2);
  c = config(4.0, 5, 1.0);
  c["b_sweep"] = {{"min", -1.0}, {"max", 2.0}};
  CHECK(sub("atlas", dir, c).code == 2);
  c = config(4.0, 5, 1.0);
  c["b_scale"] = {{"reference", "b_nowhere"}};
  CHECK(sub("atlas", dir, c).code == 2);
  c = config(4.0, 3, 1.0);
  c["solver"] = {{"integrator_rel_tol", -1.0}};
  CHECK(sub("solve-q", dir, c).code == 2);
  c = config(4.0, 3, 1.0);
  c["nonlinearity"] = {{"omega", 1.0}};
  CHECK(sub("solve-q", dir, c).code == 2);
}

TEST_CASE("solve-q in one dimension reports the closed form") {
  TempDir dir("cli-1d");
  const Run r = sub("solve-q", dir, config(4.0, 1, 1.0));
  REQUIRE(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 1);
  CHECK(rel(field(ls[0], "D"), 4.0 / 3.0) < 1e-6);
  CHECK(rel(field(ls[0], "zeta0"), std::sqrt(2.0)) < 1e-6);
  CHECK(std::filesystem::exists(dir / "out/states/k0.csv"));
  CHECK(read_json(dir / "out/states/k0.json").at("nodes") == 0);
  CHECK(testing::slurp(dir / "out/states/k0.csv").rfind("r,v,dv\n", 0) == 0);
}

TEST_CASE("solve-q N = 3 with two states and a warm cache") {
  TempDir dir("cli-n3");
  const json c = config(4.0, 3, 1.0, 2);
  const Run first = sub("solve-q", dir, c);
  REQUIRE(first.code == 0);
  const auto ls = lines(first.out);
  REQUIRE(ls.size() == 2);
  CHECK(field(ls[0], "nodes") == 0);
  CHECK(field(ls[1], "nodes") == 1);
  CHECK(field(ls[0], "D") < field(ls[1], "D"));
  CHECK(first.err.find("from cache") == std::string::npos);

  const std::string csv = testing::slurp(dir / "out/states/k1.csv");
  const Run second = sub("solve-q", dir, c);
  CHECK(second.code == 0);
  CHECK(second.out == first.out);
  CHECK(second.err.find("k=0: loaded from cache") != std::string::npos);
  CHECK(second.err.find("k=1: loaded from cache") != std::string::npos);
  CHECK(testing::slurp(dir / "out/states/k1.csv") == csv);

  const Run cold = run({"solve-q", "-c", put(dir, "again.json", c), "--out", (dir / "cold").string(),
                        "--no-cache"});
  CHECK(cold.out == first.out);
  CHECK(cold.err.empty());
}

TEST_CASE("thresholds") {
  TempDir dir("cli-thresholds");
  const Run n5 = sub("thresholds", dir, config(2.5, 5, 1.0));
  REQUIRE(n5.code == 0);
  const json j = json::parse(n5.out);
  const double bs = j.at("thresholds").at("b_star");
  const double bd = j.at("thresholds").at("b_dstar");
  CHECK(bd > 0);
  CHECK(bd < bs);
  CHECK(j.at("thresholds").contains("a_star"));
  CHECK(read_json(dir / "out/thresholds.json") == j);

  const Run n4 = sub("thresholds", dir, config(3.0, 4, 1.0));
  REQUIRE(n4.code == 0);
  const json j4 = json::parse(n4.out);
  CHECK(j4.at("thresholds").at("b_star").get<double>() == 1.0 / j4.at("D1").get<double>());

  CHECK(sub("thresholds", dir, config(4.0, 3, 1.0)).code == 1);
}

TEST_CASE("atlas sweep across both thresholds") {
  TempDir dir("cli-sweep");
  json c = config(2.5, 5, 1.0);
  c["b_scale"] = {{"reference", "b_mid"}, {"factor", 1.0}};
  c["b_sweep"] = {{"min", 0.2}, {"max", 1.1}, {"count", 37}, {"relative_to", "b_star"}};
  const Run r = sub("atlas", dir, c);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("branches=2 verified=2") != std::string::npos);

  const json atlas = read_json(dir / "out/atlas.json");
  const double b_star = atlas.at("thresholds").at("b_star");
  const double b_dstar = atlas.at("thresholds").at("b_dstar");
  const std::string sweep = testing::slurp(dir / "out/sweep.csv");
  const auto rows = lines(sweep);
  // 1.0 b_star is a grid point; only b_dstar is added.
  REQUIRE(rows.size() == 1 + 37 + 1);
  CHECK(rows[0] == "b,branch_count,phi_lower,phi_upper");
  bool saw_star = false, saw_dstar = false;
  double last_b = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream in(rows[i]);
    std::string b, n, lo, hi;
    std::getline(in, b, ',');
    std::getline(in, n, ',');
    std::getline(in, lo, ',');
    std::getline(in, hi, ',');
    const double bv = std::stod(b);
    CHECK(bv > last_b);
    last_b = bv;
    const int count = std::stoi(n);
    if (bv == b_star) {
      saw_star = true;
      CHECK(count == 1);
    } else if (bv < b_star) {
      CHECK(count == 2);
      CHECK(std::stod(lo) < std::stod(hi));
      if (bv < b_dstar) CHECK(std::stod(lo) < 0.0);
    } else {
      CHECK(count == 0);
    }
    if (bv == b_dstar) saw_dstar = true;
  }
  CHECK(saw_star);
  CHECK(saw_dstar);
  for (const auto& b : atlas.at("entries").at(0).at("branches")) {
    const std::string csv = testing::slurp(dir / "out" / b.at("csv").get<std::string>());
    CHECK(csv.rfind("r,u\n", 0) == 0);
  }
}

TEST_CASE("atlas N = 3 gives increasing energies") {
  TempDir dir("cli-n3-atlas");
  const json c = config(4.0, 3, 1.0, 3);
  const Run r = sub("atlas", dir, c);
  REQUIRE(r.code == 0);
  const json atlas = read_json(dir / "out/atlas.json");
  REQUIRE(atlas.at("entries").size() == 3);
  double last = 0.0;
  for (const auto& e : atlas.at("entries")) {
    REQUIRE(e.at("branches").size() == 1);
    const double phi = e.at("branches").at(0).at("phi_formula");
    CHECK(phi > last);
    last = phi;
  }
  CHECK(atlas.at("ground_state").at("k") == 0);
  CHECK(atlas.contains("timing"));
}

TEST_CASE("verify accepts a fresh atlas and rejects tampering") {
  TempDir dir("cli-verify");
  REQUIRE(sub("atlas", dir, config(4.0, 3, 1.0, 2)).code == 0);
  const auto path = dir / "out/atlas.json";
  const Run ok = run({"verify", path.string()});
  CHECK(ok.code == 0);
  CHECK(ok.out == "verified 2 branches, 0 failures\n");

  const std::string original = testing::slurp(path);
  json tampered = json::parse(original);
  double& t = tampered["entries"][0]["branches"][0]["t"].get_ref<double&>();
  t *= 1.01;
  testing::spit(path, tampered.dump(2));
  const Run bad = run({"verify", path.string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("FAIL k=0") != std::string::npos);

  testing::spit(path, original);
  const json j = json::parse(original);
  std::filesystem::remove(dir / "out" / j["entries"][1]["branches"][0]["csv"].get<std::string>());
  CHECK(run({"verify", path.string()}).code == 2);
  CHECK(run({"verify", (dir / "nowhere.json").string()}).code == 2);
}

TEST_CASE("N = 4 continuum atlas") {
  TempDir dir("cli-continuum");
  json c = config(3.0, 4, 0.0);
  c["b_scale"] = {{"reference", "inv_D1"}};
  c["lambdas"] = {0.5, 1.0, 2.0};
  c["solver"] = {{"integrator_rel_tol", 1e-12}};
  const Run r = sub("atlas", dir, c);
  REQUIRE(r.code == 0);
  const json atlas = read_json(dir / "out/atlas.json");
  CHECK(atlas.at("continuum_lambdas") == json({0.5, 1.0, 2.0}));
  const auto& branches = atlas.at("entries").at(0).at("branches");
  REQUIRE(branches.size() == 3);
  for (const auto& b : branches) {
    CHECK(b.at("label") == "ContinuumFree");
    CHECK(b.at("phi_formula") == 0.0);
    CHECK(std::fabs(b.at("phi_quadrature").get<double>()) <= 1e-6);
  }
  CHECK(run({"verify", (dir / "out/atlas.json").string()}).code == 0);

  // Past the continuum there is nothing to lift.
  c.erase("solver");
  c["b_scale"] = {{"reference", "inv_D1"}, {"factor", 1.1}};
  const Run none = sub("atlas", dir, c, "none");
  CHECK(none.code == 1);
  CHECK(none.out.find("branches=0") != std::string::npos);
}

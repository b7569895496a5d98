#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kScratch = fs::temp_directory_path() / "warpspec_test_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(WARPSPEC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path write_config(const std::string& name, const json& j) {
  fs::create_directories(kScratch);
  const fs::path p = kScratch / (name + ".json");
  std::ofstream(p) << j.dump();
  return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

const std::string demo(const std::string& name) { return std::string(WARPSPEC_DEMO_DIR) + "/" + name; }

}  // namespace

TEST_CASE("classify prints the euclidean verdict") {
  const fs::path out = kScratch / "classify";
  REQUIRE(run("classify --config " + demo("classify_euclidean.json") + " --out " + out.string()) == 0);
  const json r = json::parse(slurp(out / "classify.json"));
  CHECK(r["result"] == "Finite");
  CHECK(r["theorem"] == "euclidean-finite");
  CHECK(r["threshold"] == 0.0);
  CHECK(r["version"] == WARPSPEC_VERSION);
  CHECK(r["config"]["envelope"]["c"] == 1.0);
}

TEST_CASE("geometry weight column matches one over four r squared") {
  const fs::path out = kScratch / "geometry";
  REQUIRE(run("geometry --config " + demo("geometry_euclidean.json") + " --out " + out.string()) == 0);
  const auto rows = read_csv(out / "geometry.csv");
  REQUIRE(rows.size() == 11);
  CHECK(rows[0] == std::vector<std::string>{"r", "A", "B", "C", "s", "W", "boundary_coeff"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double r = std::strtod(rows[i][0].c_str(), nullptr);
    const double W = std::strtod(rows[i][5].c_str(), nullptr);
    CHECK(W == Catch::Approx(1.0 / (4.0 * r * r)).epsilon(1e-14));
    CHECK(std::strtod(rows[i][1].c_str(), nullptr) == Catch::Approx(2.0 / r).epsilon(1e-14));
    CHECK(std::strtod(rows[i][6].c_str(), nullptr) == Catch::Approx(1.0 / r).epsilon(1e-14));
  }
  CHECK(std::strtod(rows[1][0].c_str(), nullptr) == 1.0);
  CHECK(std::strtod(rows.back()[0].c_str(), nullptr) == 10.0);
  CHECK(fs::exists(out / "potential.csv"));
}

TEST_CASE("csv numbers carry seventeen significant digits") {
  const fs::path out = kScratch / "roundtrip";
  REQUIRE(run("geometry --config " + demo("geometry_hyperbolic.json") + " --out " + out.string()) == 0);
  for (const char* file : {"geometry.csv", "potential.csv"}) {
    const auto rows = read_csv(out / file);
    REQUIRE(rows.size() > 100);
    for (std::size_t i = 1; i < rows.size(); ++i)
      for (const std::string& cell : rows[i]) {
        const double x = std::strtod(cell.c_str(), nullptr);
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.16e", x);
        CHECK(cell == buf);
        const std::size_t mantissa = cell.find('e') - (cell[0] == '-' ? 1 : 0) - 1;
        CHECK(mantissa == 17);
      }
  }
}

TEST_CASE("repeat runs are byte identical") {
  const fs::path a = kScratch / "repeat_a", b = kScratch / "repeat_b";
  const std::string cfg = demo("verify_hardy.json");
  REQUIRE(run("verify hardy --config " + cfg + " --out " + a.string()) == 0);
  REQUIRE(run("verify hardy --config " + cfg + " --out " + b.string()) == 0);
  CHECK(slurp(a / "verify_hardy.json") == slurp(b / "verify_hardy.json"));

  const fs::path c = kScratch / "repeat_c";
  REQUIRE(run("verify hardy --config " + cfg + " --seed 8 --out " + c.string()) == 0);
  const json jc = json::parse(slurp(c / "verify_hardy.json"));
  CHECK(jc["config"]["seed"] == 8);
  CHECK(slurp(a / "verify_hardy.json") != slurp(c / "verify_hardy.json"));

  const json count = {{"command", "count"},
                      {"model", {{"profile", "euclidean"}, {"n", 3}}},
                      {"potential", {{"kind", "inverse_square"}, {"c", 4.0}}},
                      {"sweep", {{"L", {100.0, 1000.0}}, {"points_per_decade", 200}}}};
  const fs::path p = write_config("count_repeat", count);
  REQUIRE(run("count --config " + p.string() + " --out " + (a / "count").string()) == 0);
  REQUIRE(run("count --config " + p.string() + " --out " + (b / "count").string()) == 0);
  CHECK(slurp(a / "count" / "count.csv") == slurp(b / "count" / "count.csv"));
  CHECK(slurp(a / "count" / "count_summary.json") == slurp(b / "count" / "count_summary.json"));
}

TEST_CASE("count reports counts and the resolved config") {
  const json count = {{"command", "count"},
                      {"model", {{"profile", "euclidean"}, {"n", 3}}},
                      {"potential", {{"kind", "inverse_square"}, {"c", 4.0}}},
                      {"sweep", {{"dyadic", {{"start", 100.0}, {"steps", 3}}}}}};
  const fs::path p = write_config("count_dyadic", count);
  const fs::path out = kScratch / "count_dyadic";
  REQUIRE(run("count --config " + p.string() + " --points-per-decade 400 --out " + out.string()) == 0);
  const auto rows = read_csv(out / "count.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"L", "N", "count"});
  CHECK(std::strtod(rows[3][0].c_str(), nullptr) == 400.0);
  const json s = json::parse(slurp(out / "count_summary.json"));
  CHECK(s["config"]["sweep"]["points_per_decade"] == 400);
  CHECK(s["config"]["sweep"]["L"].size() == 3);
  CHECK(s["threshold"] == 0.0);
  CHECK(s.contains("classification"));
}

TEST_CASE("config errors exit with code two") {
  const fs::path out = kScratch / "errors";
  const json empty = {{"command", "count"},
                      {"model", {{"profile", "euclidean"}, {"n", 3}}},
                      {"sweep", {{"L", json::array()}}}};
  CHECK(run("count --config " + write_config("empty_L", empty).string() + " --out " + out.string()) == 2);

  const json unknown = {{"command", "classify"},
                        {"model", "euclidean"},
                        {"n", 3},
                        {"envelope", {{"side", "lower"}, {"cc", 1.0}}}};
  CHECK(run("classify --config " + write_config("unknown", unknown).string() + " --out " + out.string()) == 2);

  const json top = {{"command", "geometry"}, {"model", {{"profile", "euclidean"}, {"n", 3}}}, {"colour", 1}};
  CHECK(run("geometry --config " + write_config("unknown_top", top).string() + " --out " + out.string()) == 2);

  const json mismatch = {{"command", "count"}, {"model", {{"profile", "euclidean"}, {"n", 3}}}};
  CHECK(run("geometry --config " + write_config("mismatch", mismatch).string() + " --out " + out.string()) == 2);

  std::ofstream(kScratch / "broken.json") << "{ not json";
  CHECK(run("geometry --config " + (kScratch / "broken.json").string()) == 2);
  CHECK(run("verify sobolev --config " + demo("verify_hardy.json")) == 2);
  CHECK(run("geometry") == 2);
}

TEST_CASE("domain and refinement failures have their own exit codes") {
  const fs::path out = kScratch / "codes";
  const json weak = {{"command", "witness"},
                     {"model", {{"profile", "euclidean"}, {"n", 3}}},
                     {"potential", {{"kind", "inverse_square"}, {"c", 1.0}}},
                     {"witness", {{"delta", 4.0}}}};
  CHECK(run("witness --config " + write_config("weak", weak).string() + " --out " + out.string()) == 3);

  const json capped = {{"command", "witness"},
                       {"model", {{"profile", "euclidean"}, {"n", 3}}},
                       {"potential", {{"kind", "inverse_square"}, {"c", 5.0}}},
                       {"witness",
                        {{"delta", 4.0}, {"m", 2}, {"minmax_check", true}, {"minmax_nodes", 3}, {"minmax_max_nodes", 4}}}};
  CHECK(run("witness --config " + write_config("capped", capped).string() + " --out " + out.string()) == 4);
}

TEST_CASE("witness json lists each member") {
  const fs::path out = kScratch / "witness";
  REQUIRE(run("witness --config " + demo("witness_euclidean.json") + " --out " + out.string()) == 0);
  const json w = json::parse(slurp(out / "witness.json"));
  REQUIRE(w["witnesses"].size() == 4);
  double R = 1.0;
  for (const auto& m : w["witnesses"]) {
    CHECK(m["R"] == R);
    CHECK(m["k"] == 41.0);
    CHECK(m["support"][0] == R);
    CHECK(m["support"][1] == 82.0 * R);
    CHECK(m["form_value"].get<double>() < 0.0);
    CHECK(m["analytic_bound"].get<double>() < 0.0);
    R *= 82.0;
  }
  CHECK(w["minmax"]["lower_bound"] == 4);
  CHECK(w["minmax"]["sturm_count"].get<int>() >= 4);
}

TEST_CASE("verify suites pass on the shipped demos") {
  const fs::path out = kScratch / "verify";
  for (const char* suite : {"hardy", "uncertainty", "identity8"}) {
    const std::string cfg = demo(std::string("verify_") + suite + ".json");
    REQUIRE(run(std::string("verify ") + suite + " --config " + cfg + " --out " + out.string()) == 0);
    const json r = json::parse(slurp(out / (std::string("verify_") + suite + ".json")));
    CHECK(r["passed"] == true);
    CHECK(r["suite"] == suite);
  }
}

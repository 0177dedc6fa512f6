#include "tikhoflow/config.hpp"
#include "tikhoflow/csv.hpp"
#include "tikhoflow/svg.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

using namespace tikhoflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "tikhoflow_io_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("csv round trip preserves doubles bit for bit") {
  const fs::path file = scratch_dir() / "round.csv";
  csv::Table t;
  t.columns = {"t", "value"};
  t.rows = {{1.0, 0.1 + 0.2},
            {3.141592653589793, 2.2250738585072014e-308},
            {1e4, -1.7976931348623157e308}};
  csv::write_csv(file, t);
  const csv::Table r = csv::read_csv(file);
  REQUIRE(r.columns == t.columns);
  REQUIRE(r.rows.size() == t.rows.size());
  for (size_t i = 0; i < t.rows.size(); ++i)
    for (size_t j = 0; j < t.rows[i].size(); ++j) {
      const double a = t.rows[i][j], b = r.rows[i][j];
      CHECK(std::memcmp(&a, &b, sizeof a) == 0);
    }
  CHECK_FALSE(fs::exists(file.string() + ".tmp"));
}

TEST_CASE("csv column access") {
  csv::Table t;
  t.columns = {"a", "b"};
  t.rows = {{1, 2}, {3, 4}};
  CHECK(t.column("b")[1] == 4.0);
  CHECK_THROWS_AS(t.column("missing"), MissingColumn);
}

TEST_CASE("toml parsing") {
  const std::string text = R"(
# top comment
title = "flow" # trailing comment

[flow]
alpha = 2.0
t_end = 1e4
baseline = false
name = "rank deficient"

[init]
u0 = [2.0, -1.0, 3.0, -2.0]
M = [[1, 0],
     [0, 1]]  # multi-line array
)";
  const auto table = cli::parse_toml(text);
  CHECK(table.at("title").as_string() == "flow");
  CHECK(table.at("flow.alpha").as_number() == 2.0);
  CHECK(table.at("flow.t_end").as_number() == 1e4);
  CHECK(table.at("flow.baseline").as_bool() == false);
  CHECK(table.at("flow.name").as_string() == "rank deficient");
  const auto& u0 = table.at("init.u0").as_array();
  REQUIRE(u0.size() == 4);
  CHECK(u0[3].as_number() == -2.0);
  const auto& M = table.at("init.M").as_array();
  REQUIRE(M.size() == 2);
  CHECK(M[1].as_array()[1].as_number() == 1.0);

  CHECK_THROWS_AS(cli::parse_toml("x = \n"), ParseError);
  CHECK_THROWS_AS(cli::parse_toml("x = [1, 2\n"), ParseError);
  CHECK_THROWS_AS(cli::parse_toml("x = 1\nx = 2\n"), ParseError);
  CHECK_THROWS_AS(cli::parse_toml("x = nope\n"), ParseError);
}

TEST_CASE("config echo round trips exactly") {
  const fs::path dir = scratch_dir();
  const fs::path cfg_path = dir / "cfg.toml";
  {
    std::ofstream out(cfg_path);
    out << R"([problem]
builtin = "rankdef4"

[flow]
alpha = 2.0
q = 0.75
s = 0.16666666666666666
beta = 0.5
gamma = 1.0
c = 0.25

[init]
u0 = [2.0, -1.0, 3.0, -2.0]

[schedule]
t_end = 100.0
points_per_decade = 20

[output]
dir = ")" << (dir / "out").string() << R"("
)";
  }
  const auto cfg = cli::load_config(cfg_path);
  const std::string echo1 = cli::echo_toml(cfg);

  const fs::path echo_path = dir / "echo.toml";
  csv::write_text(echo_path, echo1);
  const auto cfg2 = cli::load_config(echo_path);
  CHECK(cli::echo_toml(cfg2) == echo1);
  CHECK(cfg2.params.s == cfg.params.s);
  CHECK(cfg2.schedule.points_per_decade == 20);
}

TEST_CASE("config validation failures") {
  const fs::path dir = scratch_dir();
  auto write_cfg = [&](const std::string& body) {
    const fs::path p = dir / "bad.toml";
    std::ofstream out(p);
    out << body;
    return p;
  };
  // two problem sources
  CHECK_THROWS_AS(cli::load_config(write_cfg(
                      "[problem]\nbuiltin = \"identity\"\nfile = \"x.json\"\n")),
                  ConfigError);
  // c above its bound
  CHECK_THROWS_AS(
      cli::load_config(write_cfg("[problem]\nbuiltin = \"identity\"\n[flow]\nc = 2.0\n")),
      TikhonovBound);
  // baseline with path checks
  CHECK_THROWS_AS(cli::load_config(write_cfg(
                      "[problem]\nbuiltin = \"identity\"\n[flow]\nc = 0.0\nbaseline = "
                      "true\n[checks]\npath = true\n")),
                  ConfigError);
}

TEST_CASE("svg rendering is deterministic and validates input") {
  const fs::path dir = scratch_dir();
  csv::Table t;
  t.columns = {"t", "y"};
  for (int i = 1; i <= 32; ++i)
    t.rows.push_back({static_cast<double>(i), 1.0 / (i * i)});

  svg::PlotSpec spec;
  spec.x_column = "t";
  spec.y_columns = {"y"};
  spec.loglog = true;
  spec.reference_slopes = {-2.0};
  spec.title = "decay";

  svg::render_svg(dir / "a.svg", t, spec);
  svg::render_svg(dir / "b.svg", t, spec);
  const std::string a = slurp(dir / "a.svg");
  CHECK(a == slurp(dir / "b.svg"));
  CHECK(a.find("<polyline") != std::string::npos);
  CHECK(a.find("stroke-dasharray") != std::string::npos);
  CHECK(a.find("t^-2") != std::string::npos);

  spec.y_columns = {"missing"};
  CHECK_THROWS_AS(svg::render_svg(dir / "c.svg", t, spec), MissingColumn);

  csv::Table single;
  single.columns = {"t", "y"};
  single.rows = {{1.0, 1.0}};
  spec.y_columns = {"y"};
  CHECK_THROWS_AS(svg::render_svg(dir / "d.svg", single, spec), EmptyData);
}

} // TEST_SUITE

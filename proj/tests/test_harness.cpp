#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "perimlab/geometry.hpp"
#include "perimlab/harness.hpp"

using namespace perimlab;
namespace fs = std::filesystem;

namespace {

std::string unique_dir(const char* tag) {
  const fs::path p = fs::temp_directory_path() / (std::string("perimlab-test-") + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

}  // namespace

TEST_CASE("format_double round trips") {
  for (double v : {0.0, 1.0, -1.5, 0.1, 1e-300, 3.141592653589793, 1.2618595071429146,
                   123456789.123456789, -2.2250738585072014e-308}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("parse_grid forms") {
  const std::vector<double> log3 = parse_grid("0.2:0.05:log3");
  REQUIRE(log3.size() == 3);
  CHECK(log3[0] == doctest::Approx(0.2));
  CHECK(log3[2] == doctest::Approx(0.05));
  CHECK(log3[1] == doctest::Approx(std::sqrt(0.2 * 0.05)));

  const std::vector<double> lin5 = parse_grid("0:1:lin5");
  REQUIRE(lin5.size() == 5);
  CHECK(lin5[2] == doctest::Approx(0.5));

  const std::vector<double> list = parse_grid("3,1,4.5");
  REQUIRE(list.size() == 3);
  CHECK(list[1] == 1.0);

  CHECK_THROWS_AS(parse_grid("0:1:log4"), std::invalid_argument);  // log needs positive ends
  CHECK_THROWS_AS(parse_grid("1:2:cub3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("1:2:log1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("1:2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("1,,2"), std::invalid_argument);
}

TEST_CASE("make_shape dispatches and translates") {
  std::map<std::string, std::string> p;
  p["shape"] = "disk:0.5";
  const Polygon disk = make_shape(p);
  CHECK(disk.area() == doctest::Approx(std::numbers::pi * 0.25).epsilon(1e-3));

  p["shape"] = "square";
  p["side"] = "2";
  p["center_x"] = "1";
  p["center_y"] = "-1";
  const Polygon sq = make_shape(p);
  CHECK(sq.area() == doctest::Approx(4.0));
  CHECK(sq.contains({1.0, -1.0}));
  CHECK_FALSE(sq.contains({3.5, 0.0}));

  p.clear();
  p["shape"] = "snowflake";
  p["eta"] = "3";
  p["depth"] = "2";
  const Polygon snow = make_shape(p);
  CHECK(snow.vertices().size() == 48);

  p["shape"] = "halfdisk:lower";
  p["radius"] = "0.5";
  const Polygon low = make_shape(p);
  CHECK(low.contains({0.0, -0.2}));

  p["shape"] = "klein bottle";
  CHECK_THROWS_AS(make_shape(p), std::invalid_argument);
}

TEST_CASE("spec files parse with comments and overrides") {
  const std::string dir = unique_dir("spec");
  const std::string path = dir + "/exp.ini";
  {
    std::ofstream f(path);
    f << "# comment line\n"
      << "name = clt\n"
      << "seed=42   ; trailing comment\n"
      << "outdir = " << dir << "/out\n"
      << "shape=disk:0.5\n"
      << "trials = 2000\n"
      << "\n";
  }
  const ExperimentSpec spec = load_spec(path);
  CHECK(spec.name == "clt");
  CHECK(spec.seed == 42);
  CHECK(spec.params.at("shape") == "disk:0.5");
  CHECK(spec.params.at("trials") == "2000");
  CHECK(spec.params.count("name") == 0);

  {
    std::ofstream f(path);
    f << "seed=1\n";  // no name
  }
  CHECK_THROWS_AS(load_spec(path), std::invalid_argument);
  CHECK_THROWS_AS(load_spec(dir + "/missing.ini"), std::invalid_argument);
}

TEST_CASE("json serialization is canonical") {
  ResultRecord rec;
  rec.experiment = "demo";
  rec.spec_hash = "abc";
  rec.code_version = "v";
  MetricRecord m;
  m.name = "alpha";
  m.value = 1.25;
  m.se = 0.5;
  m.threshold = 0.05;
  m.has_threshold = true;
  m.pass = true;
  rec.metrics.push_back(m);
  rec.artifacts.push_back("plot.svg");
  rec.wall_seconds = 1.5;
  rec.pass = true;

  const std::string a = to_json(rec);
  const std::string b = to_json(rec);
  CHECK(a == b);
  CHECK(a.find("\"experiment\": \"demo\"") != std::string::npos);
  CHECK(a.find("\"alpha\"") != std::string::npos);
  CHECK(a.find("\"wall_seconds\"") != std::string::npos);
  // wall time sits alone on its line so determinism checks can strip it
  std::size_t line_start = a.rfind("\"wall_seconds\"");
  CHECK(a.rfind('\n', line_start) != std::string::npos);
}

TEST_CASE("param_hash is order independent and value sensitive") {
  std::map<std::string, std::string> a{{"x", "1"}, {"y", "2"}};
  std::map<std::string, std::string> b{{"y", "2"}, {"x", "1"}};
  CHECK(param_hash(a) == param_hash(b));
  b["y"] = "3";
  CHECK(param_hash(a) != param_hash(b));
  CHECK(param_hash(a).size() == 16);
}

TEST_CASE("result cache round trips") {
  const std::string dir = unique_dir("cache");
  const ResultCache cache(dir);
  std::string out;
  CHECK_FALSE(cache.lookup("deadbeef", &out));
  cache.store("deadbeef", "{\"v\": 1}\n");
  REQUIRE(cache.lookup("deadbeef", &out));
  CHECK(out == "{\"v\": 1}\n");
  // overwrite wins
  cache.store("deadbeef", "{\"v\": 2}\n");
  cache.lookup("deadbeef", &out);
  CHECK(out == "{\"v\": 2}\n");
}

TEST_CASE("svg renderer emits one polyline per series") {
  SvgSeries s1{"first", {{1, 1}, {2, 4}, {3, 9}}};
  SvgSeries s2{"second", {{1, 2}, {2, 3}, {3, 5}}};
  SvgOptions opt;
  opt.title = "demo";
  opt.log_x = true;
  opt.log_y = true;
  const std::string svg = render_svg({s1, s2}, opt);
  CHECK(svg.find("<svg") == 0);
  std::size_t polylines = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1)) {
    ++polylines;
  }
  CHECK(polylines == 2);
  CHECK(svg.find("demo") != std::string::npos);

  CHECK_THROWS_WITH(render_svg({}, opt), doctest::Contains("empty dataset"));
  SvgSeries bad{"bad", {{0.0, 1.0}, {1.0, 2.0}}};
  CHECK_THROWS_WITH(render_svg({bad}, opt), doctest::Contains("nonpositive value on log axis"));
}

TEST_CASE("polygon path data pins the command count") {
  const SnowflakeSpec spec{3.0, 4, 1.0};
  const Polygon poly = build_snowflake(spec);
  const std::string d = polygon_path_data(poly);
  // M + one L per remaining vertex + Z = vertex count + 1 commands
  std::size_t commands = 0;
  for (char c : d) {
    if (c == 'M' || c == 'L' || c == 'Z') ++commands;
  }
  CHECK(commands == poly.vertices().size() + 1);
  CHECK(d.back() == 'Z');
}

TEST_CASE("unknown experiments name the registry") {
  ExperimentSpec spec;
  spec.name = "frobnicate";
  spec.outdir = unique_dir("unknown");
  CHECK_THROWS_WITH(run_experiment(spec), doctest::Contains("unknown experiment"));
  CHECK(list_experiments().size() == 13);
  for (std::size_t i = 1; i < list_experiments().size(); ++i) {
    CHECK(list_experiments()[i - 1] < list_experiments()[i]);
  }
}

TEST_CASE("experiment runs write a summary the cache can replay") {
  ExperimentSpec spec;
  spec.name = "lattice-classification";
  spec.seed = 9;
  spec.outdir = unique_dir("latexp");
  const ResultRecord rec = run_experiment(spec);
  CHECK(rec.pass);
  CHECK(rec.experiment == "lattice-classification");
  CHECK_FALSE(rec.metrics.empty());
  std::ifstream summary(spec.outdir + "/summary.json");
  REQUIRE(summary.good());
  std::string line, all;
  while (std::getline(summary, line)) {
    if (line.find("wall_seconds") == std::string::npos) all += line + "\n";
  }
  std::string expect = to_json(rec), stripped;
  std::size_t start = 0;
  while (start < expect.size()) {
    std::size_t end = expect.find('\n', start);
    if (end == std::string::npos) end = expect.size();
    const std::string l = expect.substr(start, end - start);
    if (l.find("wall_seconds") == std::string::npos) stripped += l + "\n";
    start = end + 1;
  }
  CHECK(all == stripped);
  // artifacts listed in the record exist on disk
  for (const std::string& name : rec.artifacts) {
    CHECK(fs::exists(fs::path(spec.outdir) / name));
  }
}

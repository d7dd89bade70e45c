#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "gmt/errors.hpp"
#include "gmt/report.hpp"

using namespace gmt;
namespace fs = std::filesystem;

namespace {

ExperimentReport sample_report() {
  ExperimentReport r;
  r.scenario_id = "demo";
  r.seed = 42;
  r.wall_time = 1.25;
  r.params.set("n", "2048");
  r.params.set("deltas", "0.04,0.02,0.01");
  auto& s = r.add_series("areas", {"delta", "area"});
  s.add({0.04, 1.0 / 3.0});
  s.add({0.02, 0.1 + 0.2});
  r.add_verdict(make_verdict("min_area", Comparator::greater_equal, 0.25, 0.3));
  r.add_verdict(make_verdict("drift", Comparator::less_equal, 0.05, 0.2, "too much"));
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("parameter table") {
  ParamTable p{{"n", "2048"}, {"deltas", "0.04, 0.02,0.01"}, {"depths", "4,5,6"}, {"seed", "18446744073709551615"}};
  CHECK(p.as_int("n") == 2048);
  CHECK(p.as_double("n") == 2048.0);
  CHECK(p.as_doubles("deltas") == std::vector<double>{0.04, 0.02, 0.01});
  CHECK(p.as_ints("depths") == std::vector<int>{4, 5, 6});
  CHECK(p.as_uint64("seed") == std::numeric_limits<std::uint64_t>::max());
  CHECK_THROWS_AS(p.as_int("deltas"), ArgumentError);
  CHECK_THROWS_AS(p.as_double("missing"), ArgumentError);

  p.override_value("n", "512");
  CHECK(p.as_int("n") == 512);
  try {
    p.override_value("bogus", "1");
    FAIL("no throw");
  } catch (const ArgumentError& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
  p.apply({{"depths", "2"}});
  CHECK(p.as_ints("depths") == std::vector<int>{2});
  CHECK_THROWS_AS(p.apply({{"nope", "2"}}), ArgumentError);
  CHECK(p.entries().front().first == "n");

  ParamTable bad{{"x", "1.5abc"}, {"y", ""}};
  CHECK_THROWS_AS(bad.as_double("x"), ArgumentError);
  CHECK_THROWS_AS(bad.as_doubles("y"), ArgumentError);
}

TEST_CASE("number formatting round-trips") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2048) == "2048");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
  for (double v : {1e-300, 3.14159, -2.5e17, 0.30000000000000004}) CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("verdicts") {
  CHECK(make_verdict("a", Comparator::less_equal, 1.0, 1.0).passed);
  CHECK_FALSE(make_verdict("a", Comparator::less_equal, 1.0, 1.1).passed);
  CHECK(make_verdict("a", Comparator::greater_equal, 1.0, 1.1).passed);
  CHECK_FALSE(make_verdict("a", Comparator::greater_equal, 1.0, std::nan("")).passed);
  const auto w = withheld_verdict("mc", Comparator::less_equal, 50, 1.0, "low confidence");
  CHECK(w.withheld);
  CHECK_FALSE(w.passed);

  auto r = sample_report();
  CHECK_FALSE(r.all_passed());
  CHECK(r.find_verdict("min_area").passed);
  CHECK(r.params.raw("measured.min_area") == "0.3");
  CHECK(r.params.raw("measured.drift") == "0.2");
  CHECK_THROWS_AS(r.find_verdict("nothing"), ArgumentError);

  ExperimentReport ok;
  ok.add_verdict(make_verdict("x", Comparator::less_equal, 1, 0));
  CHECK(ok.all_passed());
  ok.add_verdict(w);
  CHECK_FALSE(ok.all_passed());
}

TEST_CASE("series") {
  auto r = sample_report();
  const auto& s = r.find_series("areas");
  CHECK(s.column("area").size() == 2);
  CHECK_THROWS_AS(s.column("nothing"), ArgumentError);
  CHECK_THROWS_AS(r.find_series("nothing"), ArgumentError);
  Series t{"t", {"a", "b"}, {}};
  CHECK_THROWS_AS(t.add({1.0}), ArgumentError);

  std::ostringstream os;
  write_csv(os, s);
  CHECK(os.str() == "delta,area\n0.04,0.3333333333333333\n0.02,0.30000000000000004\n");
}

TEST_CASE("JSON round trip") {
  const auto r = sample_report();
  const auto j = r.to_json();
  CHECK(j["scenario_id"] == "demo");
  CHECK(j["seed"] == 42);
  CHECK(j["verdicts"].size() == 2);
  CHECK(j.begin().key() == "scenario_id");
  const auto back = ExperimentReport::from_json(nlohmann::ordered_json::parse(j.dump()));
  CHECK(back == r);

  ExperimentReport nan_report = r;
  nan_report.add_verdict(make_verdict("nan", Comparator::less_equal, 1, std::nan("")));
  const auto jn = nan_report.to_json();
  CHECK(jn["verdicts"][2]["measured"].is_null());
  const auto back_nan = ExperimentReport::from_json(nlohmann::ordered_json::parse(jn.dump()));
  CHECK(std::isnan(back_nan.verdicts[2].measured));
}

TEST_CASE("report files") {
  const fs::path dir = fs::temp_directory_path() / "gmt_test_report";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto r = sample_report();
  write_report(r, dir);
  CHECK(fs::exists(dir / "areas.csv"));
  CHECK(fs::exists(dir / "report.json"));
  CHECK(r.artifacts == std::vector<std::string>{"areas.csv"});
  const auto parsed = ExperimentReport::from_json(nlohmann::ordered_json::parse(slurp(dir / "report.json")));
  CHECK(parsed == r);
  for (const auto& a : parsed.artifacts) CHECK(fs::exists(dir / a));
  CHECK(slurp(dir / "areas.csv").find('\r') == std::string::npos);
  // every measured value appears among the params
  for (const auto& v : parsed.verdicts) CHECK(parsed.params.contains("measured." + v.name));

  const std::string first = slurp(dir / "areas.csv");
  auto again = sample_report();
  write_report(again, dir);
  CHECK(slurp(dir / "areas.csv") == first);
  fs::remove_all(dir);
}

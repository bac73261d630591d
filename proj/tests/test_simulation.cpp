#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rdm/csv.hpp"
#include "rdm/parallel.hpp"
#include "rdm/simulation.hpp"
#include "support.hpp"

using namespace rdm;
using Catch::Matchers::WithinAbs;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("rdm_test_" + name);
  std::ofstream(path) << content;
  return path.string();
}

}  // namespace

TEST_CASE("numeric CSV input") {
  std::istringstream with("x,y\n1,2\n# comment\n\n3,4.5\n");
  const auto a = read_numeric_csv(with, HeaderMode::detect);
  CHECK(a.names == std::vector<std::string>{"x", "y"});
  CHECK(a.columns[1] == std::vector<double>{2, 4.5});
  std::istringstream without("1,2\n3,4\n");
  CHECK(read_numeric_csv(without, HeaderMode::detect).columns[0] == std::vector<double>{1, 3});
  std::istringstream forced("1,2\n3,4\n");
  CHECK(read_numeric_csv(forced, HeaderMode::yes).columns[0] == std::vector<double>{3});
  std::istringstream ragged("1,2\n3\n");
  CHECK_THROWS_AS(read_numeric_csv(ragged, HeaderMode::no), DataError);
  std::istringstream text("x,y\n1,abc\n");
  CHECK_THROWS_AS(read_numeric_csv(text, HeaderMode::detect), DataError);
  std::istringstream inf("1,inf\n");
  CHECK_THROWS_AS(read_numeric_csv(inf, HeaderMode::no), DataError);
  CHECK_THROWS_AS(read_numeric_csv(std::string("/nonexistent/file.csv"), HeaderMode::no), DataError);
  CHECK_THROWS_AS(parse_header_mode("maybe"), ConfigError);
  CHECK(split_csv_line(" a , \"b\",c\r") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("screening CSV input") {
  const auto p = temp_file("screen.csv", "id,0,5,10\ng1,1.5,,2\ng2,NA,3,4\n");
  const auto t = read_screen_csv(p, HeaderMode::detect);
  CHECK(t.response_from_header);
  CHECK(t.input.response == std::vector<double>{0, 5, 10});
  CHECK(t.input.ids == std::vector<std::string>{"g1", "g2"});
  CHECK_FALSE(t.input.rows[0][1].has_value());
  CHECK_FALSE(t.input.rows[1][0].has_value());
  CHECK(*t.input.rows[1][2] == 4);
  const auto q = temp_file("screen2.csv", "g1,1,2,3\ng2,4,5,6\n");
  const auto u = read_screen_csv(q, HeaderMode::detect);
  CHECK_FALSE(u.response_from_header);
  CHECK(u.input.response == std::vector<double>{1, 2, 3});
  CHECK(u.input.rows.size() == 2);
  const auto r = temp_file("resp.csv", "time\n1\n2\n4\n");
  CHECK(read_vector_csv(r) == std::vector<double>{1, 2, 4});
}

TEST_CASE("checkerboard CSV round trip and number formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(std::stod(format_double(1.0 / 3)) == 1.0 / 3);
  Rng rng(3);
  for (Index n1 : {2, 3}) {
    const auto a = test::random_checkerboard(rng, n1, 2);
    std::stringstream ss;
    write_checkerboard(ss, a);
    CHECK(read_checkerboard(ss) == Checkerboard(a.entries()));
  }
  std::istringstream named("N1,N2\n2,0\n0,2\n");
  CHECK(read_checkerboard(named)(0, 0) == 2);
  std::istringstream bad("2,2\n1,1\n1\n");
  CHECK_THROWS_AS(read_checkerboard(bad), DataError);
  std::istringstream margins("2,2\n2,0\n2,0\n");
  CHECK_THROWS_AS(read_checkerboard(margins), DataError);
}

TEST_CASE("parallel_for") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw DataError("boom");
                  }),
                  DataError);
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("simulation harness") {
  SimulationConfig c;
  c.model = CopulaModel::gaussian(0.5);
  c.sizes = {60, 120};
  c.kinds = {{MeasureType::rho}, {MeasureType::r}};
  c.reps = 12;
  c.seed = 9;
  const auto a = simulate(c);
  c.threads = 3;
  const auto b = simulate(c);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mean == b[i].mean);
    CHECK(a[i].sd == b[i].sd);
    CHECK(a[i].classical_mean == b[i].classical_mean);
    CHECK(a[i].true_value.has_value());
  }
  CHECK(a[0].n == 60);
  CHECK(a[0].kind == MeasureKind{MeasureType::rho});

  // Independence at n = 1000: every mean below 0.1.
  SimulationConfig pi;
  pi.model = CopulaModel::independence();
  pi.sizes = {1000};
  pi.kinds = {{MeasureType::rho}, {MeasureType::tau}, {MeasureType::zeta1}, {MeasureType::r}};
  pi.reps = 200;
  for (const auto& row : simulate(pi)) CHECK(row.mean < 0.1);

  SimulationConfig none = c;
  none.reps = 0;
  CHECK_THROWS_AS(simulate(none), ConfigError);
  SimulationConfig parabola = c;
  parabola.model = CopulaModel::noisy_parabola(0.1);
  parabola.reps = 3;
  CHECK_FALSE(simulate(parabola).front().true_value.has_value());
}

TEST_CASE("power harness") {
  PowerConfig c;
  c.family = CopulaModel::gaussian(0.0);
  c.parameters = {0.0, 0.8};
  c.n = 60;
  c.reps = 10;
  c.permutations = 19;
  c.reuse_bandwidth = true;
  const auto rows = power(c);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].rho >= 0.9);
  CHECK(rows[1].xi >= 0.5);
  c.threads = 2;
  const auto again = power(c);
  CHECK(again[0].rho == rows[0].rho);
  CHECK(again[1].zeta1 == rows[1].zeta1);
  c.parameters = {0.5};
  CHECK(power(c).size() == 1);
  CHECK(power_monotone({{0, 0.1, 0.1, 0.1, 0.1}, {1, 0.2, 0.2, 0.2, 0.2}}));
  CHECK_FALSE(power_monotone({{0, 0.3, 0.1, 0.1, 0.1}, {1, 0.2, 0.2, 0.2, 0.2}}));
  c.alpha = 1.5;
  CHECK_THROWS_AS(power(c), ConfigError);
}

TEST_CASE("benchmark harness") {
  BenchConfig c;
  c.sizes = {10};
  c.runs = 3;
  const auto one = bench(c);
  REQUIRE(one.rows.size() == 1);
  CHECK_FALSE(one.fitted_exponent.has_value());
  CHECK(one.rows[0].bandwidth == Bandwidth{2, 2});
  CHECK(one.rows[0].median_seconds < 0.01);
  c.sizes = {1000, 2000};
  const auto two = bench(c);
  CHECK(two.fitted_exponent.has_value());
  CHECK(two.scaling_ratio.has_value());
}

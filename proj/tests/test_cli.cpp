#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rdm/copula_models.hpp"
#include "rdm/csv.hpp"
#include "rdm/rng.hpp"

#ifndef RDM_CLI
#error "RDM_CLI must point at the command-line binary"
#endif

using namespace rdm;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  const auto dir = fs::temp_directory_path() / "rdm_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string path_of(const std::string& name) { return (work_dir() / name).string(); }

std::string write(const std::string& name, const std::string& content) {
  const auto p = path_of(name);
  std::ofstream(p) << content;
  return p;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& args) {
  const std::string cmd = std::string(RDM_CLI) + " " + args + " 2>" + path_of("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Data rows (non-comment lines after the header) split into fields.
std::vector<std::vector<std::string>> rows_of(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::vector<std::vector<std::string>> out;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    out.push_back(split_csv_line(line));
  }
  return out;
}

std::string sample_csv(const std::string& name, const CopulaModel& m, std::size_t n, std::uint64_t seed) {
  const auto s = sample(m, n, seed);
  std::ostringstream os;
  os << "x,y\n";
  for (std::size_t i = 0; i < n; ++i) os << format_double(s.x[i]) << ',' << format_double(s.y[i]) << '\n';
  return write(name, os.str());
}

}  // namespace

TEST_CASE("estimate on a comonotone sample") {
  std::ostringstream os;
  for (int i = 0; i < 30; ++i) os << i << ',' << 2 * i + 1 << '\n';
  const auto in = write("mono.csv", os.str());
  const auto out = path_of("mono_out.csv");
  REQUIRE(run("estimate --input " + in + " --output " + out + " --bandwidth explicit:30,30 --measure rho") == 0);
  const auto text = slurp(out);
  CHECK(text.rfind("# rdm 0.1.0\n# command=estimate", 0) == 0);
  const auto rows = rows_of(out);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0][0] == "rho");
  // The n x n comonotone checkerboard: rho = 1 - 1/n^2.
  CHECK(std::stod(rows[0][1]) == Catch::Approx(1 - 1.0 / 900).epsilon(1e-12));
  CHECK(rows[0][2] == "1");
  CHECK(rows[0][3] == "30");
  CHECK(rows[0][4] == "30");
  CHECK(rows[0][5] == "30");
}

TEST_CASE("estimate reproduces the Blomqvist counterexample") {
  const auto in = sample_csv("ordsum.csv", CopulaModel::ordinal_sum(), 2000, 4);
  const auto out = path_of("ordsum_out.csv");
  REQUIRE(run("estimate --input " + in + " --output " + out + " --measure beta --measure rho") == 0);
  const auto rows = rows_of(out);
  REQUIRE(rows.size() == 2);
  CHECK(std::stod(rows[0][1]) > 0.9);
  CHECK(std::stod(rows[1][1]) < 0.95);
}

TEST_CASE("multivariate estimate") {
  const auto s = sample(CopulaModel::gaussian(0.5), 200, 2);
  std::ostringstream os;
  for (std::size_t i = 0; i < 200; ++i)
    os << format_double(s.x[i]) << ',' << format_double(s.x[(i * 7) % 200]) << ',' << format_double(s.y[i]) << '\n';
  const auto in = write("mv.csv", os.str());
  const auto out = path_of("mv_out.csv");
  REQUIRE(run("estimate --multivariate --input " + in + " --output " + out + " --measure rho,tau,r") == 0);
  CHECK(rows_of(out).size() == 3);
}

TEST_CASE("exit codes") {
  const auto good = sample_csv("good.csv", CopulaModel::gaussian(0.3), 50, 1);
  CHECK(run("simulate --model clayton:theta=2 --reps 2") == 2);
  CHECK(run("estimate --input " + good + " --measure pearson") == 2);
  CHECK(run("estimate --input " + good + " --bandwidth wide") == 2);
  CHECK(run("estimate --input " + good + " --no-such-flag") == 2);
  CHECK(run("") == 2);
  CHECK(run("screen --input " + good + " --fdr 0") == 2);
  CHECK(run("power --model gauss:p=0 --permutations 5") == 2);
  CHECK(run("estimate --input " + path_of("missing.csv")) == 3);
  CHECK(run("estimate --input " + write("bad.csv", "x,y\n1,2\n3,oops\n")) == 3);
  CHECK(run("estimate --input " + write("three.csv", "1,2,3\n4,5,6\n")) == 3);
  CHECK(run("estimate --tie-policy strict --input " + write("ties.csv", "1,2\n1,3\n2,4\n")) == 3);
  CHECK(run("estimate --input " + good + " --bandwidth explicit:80,80") == 3);
  CHECK(run("estimate --input " + good + " --output " + path_of("ok.csv")) == 0);
}

TEST_CASE("outputs are byte-identical across runs and thread counts") {
  const auto a = path_of("sim1.csv"), b = path_of("sim2.csv");
  const std::string sim = "simulate --model gumbel:theta=2 --n 80,120 --reps 16 --measure rho,zeta1 --seed 5";
  REQUIRE(run(sim + " --threads 1 --output " + a) == 0);
  REQUIRE(run(sim + " --threads 4 --output " + b) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(rows_of(a).size() == 4);

  const auto data = sample_csv("perm.csv", CopulaModel::gaussian(0.2), 80, 3);
  const std::string est = "estimate --input " + data + " --measure rho,tau --permutations 39 --seed 11";
  REQUIRE(run(est + " --threads 1 --output " + a) == 0);
  REQUIRE(run(est + " --threads 3 --output " + b) == 0);
  CHECK(slurp(a) == slurp(b));

  const std::string pow = "power --model gauss:p=0 --sweep 0,0.6 --n 50 --reps 8 --permutations 19 --seed 2";
  REQUIRE(run(pow + " --threads 1 --output " + a) == 0);
  REQUIRE(run(pow + " --threads 2 --output " + b) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(rows_of(a).size() == 2);
  CHECK(slurp(a).find("# monotone=") != std::string::npos);
}

TEST_CASE("screen command") {
  std::ostringstream os;
  os << "id";
  for (int t = 1; t <= 24; ++t) os << ',' << t;
  os << '\n';
  Rng rng(1);
  for (int r = 0; r < 6; ++r) {
    os << "row" << r;
    for (int t = 1; t <= 24; ++t) {
      const double x = (t - 12.5) / 12.5;
      const double noise = 0.05 * standard_normal(rng);
      os << ',' << format_double(r < 2 ? x * x + noise : r < 4 ? x + noise : noise);
    }
    os << '\n';
  }
  const auto in = write("screen.csv", os.str());
  const auto a = path_of("screen1.csv"), b = path_of("screen2.csv"), fits = path_of("fits.csv");
  const std::string cmd = "screen --input " + in + " --permutations 199 --seed 3 --fits " + fits;
  REQUIRE(run(cmd + " --threads 1 --output " + a) == 0);
  REQUIRE(run(cmd + " --threads 2 --output " + b) == 0);
  CHECK(slurp(a) == slurp(b));
  const auto rows = rows_of(a);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].size() == 5);
  const auto text = slurp(a);
  CHECK(text.find("\nid,statistic,p,selected_rearranged,selected_spearman\n") != std::string::npos);
  CHECK(text.find("# difference=row") != std::string::npos);
  const auto fit_rows = rows_of(fits);
  CHECK(fit_rows.size() % 24 == 0);
  CHECK_FALSE(fit_rows.empty());

  // q = 1 selects every row; an empty dataset gives an empty report.
  REQUIRE(run("screen --input " + in + " --permutations 19 --fdr 1 --output " + a) == 0);
  for (const auto& r : rows_of(a)) CHECK(r[3] == "1");
  REQUIRE(run("screen --input " + write("empty.csv", "") + " --output " + a) == 0);
  CHECK(rows_of(a).empty());
}

TEST_CASE("bench command") {
  const auto out = path_of("bench.csv");
  REQUIRE(run("bench --n 10 --runs 3 --output " + out) == 0);
  CHECK(rows_of(out).size() == 1);
  CHECK(slurp(out).find("fitted_exponent") == std::string::npos);
  REQUIRE(run("bench --n 2000,4000 --runs 3 --output " + out) == 0);
  CHECK(rows_of(out).size() == 2);
  CHECK(slurp(out).find("# scaling_ratio=") != std::string::npos);
}

TEST_CASE("checkerboard input and output") {
  const auto data = sample_csv("cb.csv", CopulaModel::gaussian(0.7), 100, 6);
  const auto cb = path_of("cb_matrix.csv");
  REQUIRE(run("estimate --input " + data + " --bandwidth explicit:4,5 --checkerboard " + cb + " --output " + path_of("cb_out.csv")) == 0);
  const auto out = path_of("cb_eval.csv");
  REQUIRE(run("estimate --matrix " + cb + " --measure rho --output " + out) == 0);
  const auto est = rows_of(path_of("cb_out.csv"));
  const auto mat = rows_of(out);
  CHECK(std::stod(mat[0][1]) == Catch::Approx(std::stod(est[0][1])).epsilon(1e-12));
  CHECK(mat[0][3] == "4");
  CHECK(mat[0][4] == "5");
}

// Command-line front end: estimate, simulate, power, screen, bench.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rdm/copula_models.hpp"
#include "rdm/csv.hpp"
#include "rdm/errors.hpp"
#include "rdm/estimation.hpp"
#include "rdm/inference.hpp"
#include "rdm/simulation.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct Options {
  std::string input;
  std::string output;
  std::string model = "gauss:p=0.75";
  std::vector<std::string> measures;
  std::vector<std::size_t> sizes;
  std::size_t reps = 0;
  std::uint64_t seed = 1;
  std::string bandwidth = "auto";
  std::size_t permutations = 0;
  double fdr = 0.05;
  unsigned threads = 1;
  bool multivariate = false;
  std::string tie_policy = "random";
  std::string header = "auto";
  std::vector<double> sweep;
  double alpha = 0.05;
  bool fast = false;
  std::string response;
  std::string fits;
  std::size_t top = 6;
  std::string matrix;
  std::string checkerboard_out;
  std::size_t runs = 5;
  double exponent = 0.4;
};

std::vector<rdm::MeasureKind> kinds_of(const Options& o, const char* fallback) {
  std::vector<rdm::MeasureKind> out;
  for (const auto& m : o.measures) out.push_back(rdm::parse_measure(m));
  if (out.empty()) out.push_back(rdm::parse_measure(fallback));
  return out;
}

std::string join_kinds(const std::vector<rdm::MeasureKind>& kinds) {
  std::string s;
  for (std::size_t i = 0; i < kinds.size(); ++i) s += (i ? "," : "") + kinds[i].name();
  return s;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::string num(double x) { return rdm::format_double(x); }

// Signed classical counterpart of R_mu on the same data.
double classical(const rdm::RankedSample& s, rdm::MeasureKind kind, const rdm::Checkerboard& a) {
  switch (kind.type) {
    case rdm::MeasureType::rho: return rdm::spearman_rho(s);
    case rdm::MeasureType::tau: return rdm::kendall_tau(s);
    case rdm::MeasureType::r: return rdm::chatterjee_xi(s);
    default: return rdm::measure(a, kind);
  }
}

/// Header comment: artifact version, then the configuration that determines the output.
void write_preamble(std::ostream& out, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& config) {
  out << "# rdm " << kVersion << '\n';
  out << "# command=" << command;
  for (const auto& [k, v] : config) out << ' ' << k << '=' << v;
  out << '\n';
}

void emit(const Options& o, const std::string& text) {
  if (o.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.output, std::ios::binary);
  if (!f) throw rdm::DataError("cannot write '" + o.output + "'");
  f << text;
}

int cmd_estimate(const Options& o) {
  const auto kinds = kinds_of(o, "rho");
  const auto spec = rdm::BandwidthSpec::parse(o.bandwidth);
  const auto policy = rdm::parse_tie_policy(o.tie_policy);
  std::ostringstream out;

  if (!o.matrix.empty()) {
    std::ifstream in(o.matrix);
    if (!in) throw rdm::DataError("cannot open '" + o.matrix + "'");
    const rdm::Checkerboard a = rdm::read_checkerboard(in);
    write_preamble(out, "estimate", {{"matrix", o.matrix}, {"measures", join_kinds(kinds)}});
    out << "kind,rearranged,measure,N1,N2\n";
    for (const auto& k : kinds)
      out << k.name() << ',' << num(rdm::rearranged_measure(a, k)) << ',' << num(rdm::measure(a, k))
          << ',' << a.rows() << ',' << a.cols() << '\n';
    emit(o, out.str());
    return 0;
  }

  if (o.input.empty()) throw rdm::ConfigError("estimate needs --input or --matrix");
  const auto table = rdm::read_numeric_csv(o.input, rdm::parse_header_mode(o.header));
  const std::size_t cols = table.columns.size();
  std::vector<std::pair<std::string, std::string>> config = {
      {"input", o.input},          {"measures", join_kinds(kinds)}, {"bandwidth", spec.to_string()},
      {"tie_policy", o.tie_policy}, {"seed", std::to_string(o.seed)}};

  if (o.multivariate) {
    if (cols < 2) throw rdm::DataError("--multivariate needs predictor columns and a response");
    std::vector<std::vector<double>> predictors(table.columns.begin(), table.columns.end() - 1);
    const auto& y = table.columns.back();
    config.emplace_back("multivariate", "yes");
    write_preamble(out, "estimate", config);
    out << "kind,estimate,n,d\n";
    for (const auto& k : kinds)
      out << k.name() << ','
          << num(rdm::multivariate_estimate(predictors, y, k, {}, policy, o.seed)) << ','
          << y.size() << ',' << predictors.size() << '\n';
    emit(o, out.str());
    return 0;
  }

  if (cols != 2)
    throw rdm::DataError("expected two columns (x, y), found " + std::to_string(cols) +
                         "; use --multivariate for several predictors");
  const auto s = rdm::pseudo_observations(table.columns[0], table.columns[1], policy, o.seed);
  const auto b = spec.resolve(s);
  const auto a = rdm::empirical_checkerboard(s, b);
  const rdm::Grid g = rdm::as_grid(rdm::si_rearrange(a));
  if (!o.checkerboard_out.empty()) {
    std::ofstream f(o.checkerboard_out);
    if (!f) throw rdm::DataError("cannot write '" + o.checkerboard_out + "'");
    rdm::write_checkerboard(f, a);
  }
  std::vector<rdm::TestResult> tests;
  if (o.permutations > 0) {
    rdm::PermutationOptions po;
    po.permutations = o.permutations;
    po.seed = o.seed;
    po.bandwidth = spec;
    po.reuse_bandwidth = o.fast;
    po.threads = o.threads;
    tests = rdm::permutation_tests(s, kinds, po);
    config.emplace_back("permutations", std::to_string(o.permutations));
    if (o.fast) config.emplace_back("fast", "yes");
  }
  write_preamble(out, "estimate", config);
  out << "kind,estimate,classical,N1,N2,n,x_ties,y_ties" << (tests.empty() ? "" : ",p") << '\n';
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    out << kinds[i].name() << ',' << num(rdm::measure(g, kinds[i])) << ','
        << num(classical(s, kinds[i], a)) << ',' << b.n1 << ',' << b.n2 << ','
        << s.size() << ',' << s.x_tied << ',' << s.y_tied;
    if (!tests.empty()) out << ',' << num(tests[i].p_value);
    out << '\n';
  }
  emit(o, out.str());
  return 0;
}

int cmd_simulate(const Options& o) {
  rdm::SimulationConfig c;
  c.model = rdm::parse_model(o.model);
  c.kinds = kinds_of(o, "rho");
  c.sizes = o.sizes.empty() ? std::vector<std::size_t>{500} : o.sizes;
  c.reps = o.reps ? o.reps : 200;
  c.seed = o.seed;
  c.bandwidth = rdm::BandwidthSpec::parse(o.bandwidth);
  c.threads = o.threads;
  for (auto n : c.sizes)
    if (n < 16 && c.bandwidth.mode == rdm::BandwidthSpec::Mode::cv)
      throw rdm::ConfigError("simulate: n must be at least 16 with automatic bandwidth");
  const auto rows = rdm::simulate(c);
  std::ostringstream out;
  write_preamble(out, "simulate",
                 {{"model", c.model.spec()}, {"n", join(c.sizes)}, {"reps", std::to_string(c.reps)},
                  {"measures", join_kinds(c.kinds)}, {"seed", std::to_string(c.seed)},
                  {"bandwidth", c.bandwidth.to_string()}});
  out << "model,n,kind,reps,true,mean,sd,classical_mean,classical_sd,mean_N1,mean_N2\n";
  for (const auto& r : rows)
    out << c.model.spec() << ',' << r.n << ',' << r.kind.name() << ',' << c.reps << ','
        << (r.true_value ? num(*r.true_value) : "NA") << ',' << num(r.mean) << ',' << num(r.sd)
        << ',' << num(r.classical_mean) << ',' << num(r.classical_sd) << ',' << num(r.mean_n1)
        << ',' << num(r.mean_n2) << '\n';
  emit(o, out.str());
  return 0;
}

int cmd_power(const Options& o) {
  rdm::PowerConfig c;
  c.family = rdm::parse_model(o.model);
  c.parameters = o.sweep;
  if (c.parameters.empty()) {
    if (c.family.has_parameter())
      c.parameters = {c.family.param};
    else
      c.parameters = {0.0};
  }
  c.n = o.sizes.empty() ? 200 : o.sizes.front();
  c.reps = o.reps ? o.reps : 500;
  c.permutations = o.permutations ? o.permutations : 199;
  c.alpha = o.alpha;
  c.seed = o.seed;
  c.bandwidth = rdm::BandwidthSpec::parse(o.bandwidth);
  c.reuse_bandwidth = o.fast;
  c.threads = o.threads;
  if (c.permutations < 19) throw rdm::ConfigError("power: --permutations must be at least 19");
  const auto rows = rdm::power(c);
  std::ostringstream out;
  write_preamble(out, "power",
                 {{"model", c.family.spec()}, {"sweep", join(c.parameters)}, {"n", std::to_string(c.n)},
                  {"reps", std::to_string(c.reps)}, {"permutations", std::to_string(c.permutations)},
                  {"alpha", num(c.alpha)}, {"seed", std::to_string(c.seed)},
                  {"bandwidth", c.bandwidth.to_string()}, {"fast", c.reuse_bandwidth ? "yes" : "no"}});
  out << "parameter,R_rho,R_tau,zeta1,xi\n";
  for (const auto& r : rows)
    out << num(r.parameter) << ',' << num(r.rho) << ',' << num(r.tau) << ',' << num(r.zeta1) << ','
        << num(r.xi) << '\n';
  out << "# monotone=" << (rdm::power_monotone(rows) ? "yes" : "no") << '\n';
  emit(o, out.str());
  return 0;
}

int cmd_screen(const Options& o) {
  if (o.input.empty()) throw rdm::ConfigError("screen needs --input");
  auto data = rdm::read_screen_csv(o.input, rdm::parse_header_mode(o.header));
  if (!o.response.empty()) {
    data.input.response = rdm::read_vector_csv(o.response);
    data.response_from_header = false;
  }
  rdm::ScreenOptions so;
  const auto kinds = kinds_of(o, "rho");
  if (kinds.size() != 1) throw rdm::ConfigError("screen takes a single --measure");
  so.kind = kinds.front();
  so.permutations = o.permutations ? o.permutations : 999;
  so.q = o.fdr;
  so.seed = o.seed;
  so.tie_policy = rdm::parse_tie_policy(o.tie_policy);
  so.reuse_bandwidth = o.fast;
  so.threads = o.threads;
  if (so.permutations < 19) throw rdm::ConfigError("screen: --permutations must be at least 19");
  if (!(so.q > 0 && so.q <= 1)) throw rdm::ConfigError("screen: --fdr must lie in (0, 1]");
  const auto report = rdm::screen(data.input, so);

  std::ostringstream out;
  write_preamble(out, "screen",
                 {{"input", o.input}, {"response", o.response.empty() ? (data.response_from_header ? "header" : "index") : o.response},
                  {"measure", so.kind.name()}, {"permutations", std::to_string(so.permutations)},
                  {"fdr", num(so.q)}, {"seed", std::to_string(so.seed)}, {"tie_policy", o.tie_policy},
                  {"fast", so.reuse_bandwidth ? "yes" : "no"}});
  std::string diff;
  for (auto i : report.difference) diff += (diff.empty() ? "" : ";") + report.entries[i].id;
  out << "# difference=" << diff << '\n';
  for (const auto& e : report.entries)
    if (!e.flag.empty()) out << "# skipped " << e.id << ": " << e.flag << '\n';
  out << "id,statistic,p,selected_rearranged,selected_spearman\n";
  for (const auto& e : report.entries) {
    if (!e.flag.empty()) continue;
    out << e.id << ',' << num(e.statistic) << ',' << num(e.p_value) << ','
        << (e.selected_rearranged ? 1 : 0) << ',' << (e.selected_spearman ? 1 : 0) << '\n';
  }
  emit(o, out.str());

  if (!o.fits.empty()) {
    std::ostringstream fits;
    write_preamble(fits, "screen-fits", {{"input", o.input}, {"top", std::to_string(o.top)}});
    fits << "id,x,y,fit\n";
    for (std::size_t j = 0; j < std::min(o.top, report.difference.size()); ++j) {
      const auto& e = report.entries[report.difference[j]];
      std::vector<double> x;
      std::vector<double> y;
      const auto& row = data.input.rows[e.row];
      for (std::size_t t = 0; t < row.size(); ++t)
        if (row[t]) {
          x.push_back(data.input.response[t]);
          y.push_back(*row[t]);
        }
      const auto fit = rdm::knn3_fit(x, y);
      for (std::size_t t = 0; t < x.size(); ++t)
        fits << e.id << ',' << num(x[t]) << ',' << num(y[t]) << ',' << num(fit[t]) << '\n';
    }
    std::ofstream f(o.fits, std::ios::binary);
    if (!f) throw rdm::DataError("cannot write '" + o.fits + "'");
    f << fits.str();
  }
  return 0;
}

int cmd_bench(const Options& o) {
  rdm::BenchConfig c;
  c.sizes = o.sizes.empty() ? std::vector<std::size_t>{10000, 20000, 40000, 80000} : o.sizes;
  c.exponent = o.exponent;
  c.runs = o.runs;
  c.seed = o.seed;
  c.kind = kinds_of(o, "rho").front();
  for (auto n : c.sizes)
    if (n < 2) throw rdm::ConfigError("bench: n must be at least 2");
  const auto result = rdm::bench(c);
  std::ostringstream out;
  write_preamble(out, "bench",
                 {{"n", join(c.sizes)}, {"exponent", num(c.exponent)}, {"runs", std::to_string(c.runs)},
                  {"measure", c.kind.name()}, {"seed", std::to_string(c.seed)}});
  out << "n,N1,N2,median_seconds\n";
  for (const auto& r : result.rows)
    out << r.n << ',' << r.bandwidth.n1 << ',' << r.bandwidth.n2 << ',' << num(r.median_seconds) << '\n';
  if (result.fitted_exponent) out << "# fitted_exponent=" << num(*result.fitted_exponent) << '\n';
  if (result.scaling_ratio) out << "# scaling_ratio=" << num(*result.scaling_ratio) << '\n';
  emit(o, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rearranged dependence measures: estimation, simulation, testing and screening"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--output", o.output, "Output CSV (default: standard output)");
    sub->add_option("--seed", o.seed, "Master RNG seed");
    sub->add_option("--threads", o.threads, "Worker threads (0: all cores)");
  };
  auto measures = [&](CLI::App* sub) {
    sub->add_option("--measure", o.measures, "rho, tau, gini, beta, sw1, sw2, sw<p>, zeta1, r")
        ->delimiter(',');
  };
  auto bandwidth = [&](CLI::App* sub) {
    sub->add_option("--bandwidth", o.bandwidth, "auto | fixed:s1,s2 | explicit:N1,N2");
  };

  auto* est = app.add_subcommand("estimate", "Estimate R_mu from a CSV sample");
  common(est);
  measures(est);
  bandwidth(est);
  est->add_option("--input", o.input, "CSV with columns x,y (or predictors then response)");
  est->add_option("--matrix", o.matrix, "Checkerboard matrix CSV to evaluate instead of data");
  est->add_option("--header", o.header, "yes | no | auto");
  est->add_option("--tie-policy", o.tie_policy, "random | strict");
  est->add_flag("--multivariate", o.multivariate, "Last column is the response, the others predictors");
  est->add_option("--permutations", o.permutations, "Add permutation p-values with B replicates");
  est->add_flag("--fast", o.fast, "Reuse the observed bandwidth in permutation replicates");
  est->add_option("--checkerboard", o.checkerboard_out, "Write the empirical checkerboard here");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo mean and sd of the estimators");
  common(sim);
  measures(sim);
  bandwidth(sim);
  sim->add_option("--model", o.model, "pi, m, w, gauss:p=.., gumbel:theta=.., parabola:sigma=.., ordsum");
  sim->add_option("--n", o.sizes, "Sample sizes")->delimiter(',');
  sim->add_option("--reps", o.reps, "Replications (default 200)");

  auto* pow = app.add_subcommand("power", "Rejection rates of the independence tests");
  common(pow);
  bandwidth(pow);
  pow->add_option("--model", o.model, "Model family; its parameter is swept");
  pow->add_option("--sweep", o.sweep, "Parameter values")->delimiter(',');
  pow->add_option("--n", o.sizes, "Sample size (default 200)");
  pow->add_option("--reps", o.reps, "Replications per parameter (default 500)");
  pow->add_option("--permutations", o.permutations, "Permutations per test (default 199)");
  pow->add_option("--alpha", o.alpha, "Significance level");
  pow->add_flag("--fast", o.fast, "Reuse the observed bandwidth in permutation replicates");

  auto* scr = app.add_subcommand("screen", "Permutation screening with FDR control");
  common(scr);
  measures(scr);
  scr->add_option("--input", o.input, "CSV: identifier, then one value per response point");
  scr->add_option("--response", o.response, "Response values (default: numeric header or 1..T)");
  scr->add_option("--header", o.header, "yes | no | auto");
  scr->add_option("--permutations", o.permutations, "Permutations per row (default 999)");
  scr->add_option("--fdr", o.fdr, "Benjamini-Hochberg rate q");
  scr->add_option("--tie-policy", o.tie_policy, "random | strict");
  scr->add_option("--fits", o.fits, "Write 3-nearest-neighbour fits of the top rows here");
  scr->add_option("--top", o.top, "Rows of the set difference to fit");
  scr->add_flag("--fast", o.fast, "Reuse the observed bandwidth in permutation replicates");

  auto* ben = app.add_subcommand("bench", "Timing of ranking plus estimation");
  common(ben);
  measures(ben);
  ben->add_option("--n", o.sizes, "Sample sizes")->delimiter(',');
  ben->add_option("--exponent", o.exponent, "Fixed bandwidth exponent s, N = floor(n^s)");
  ben->add_option("--runs", o.runs, "Runs per size (median reported)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*est) return cmd_estimate(o);
    if (*sim) return cmd_simulate(o);
    if (*pow) return cmd_power(o);
    if (*scr) return cmd_screen(o);
    if (*ben) return cmd_bench(o);
  } catch (const rdm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const rdm::UnsupportedError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const rdm::Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#include "rdm/simulation.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>

#include "rdm/errors.hpp"
#include "rdm/inference.hpp"
#include "rdm/parallel.hpp"
#include "rdm/rng.hpp"

namespace rdm {

double classical_estimate(const RankedSample& s, MeasureKind kind, const Checkerboard& empirical) {
  switch (kind.type) {
    case MeasureType::rho: return std::abs(spearman_rho(s));
    case MeasureType::tau: return std::abs(kendall_tau(s));
    case MeasureType::r: return chatterjee_xi(s);
    default: {
      const double v = measure(empirical, kind);
      return kind.is_concordance() ? std::abs(v) : v;
    }
  }
}

namespace {

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd out;
  if (v.empty()) return out;
  double sum = 0;
  for (double x : v) sum += x;
  out.mean = sum / double(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / double(v.size() - 1));
  }
  return out;
}

}  // namespace

std::vector<SimulationRow> simulate(const SimulationConfig& config) {
  if (config.reps < 1) throw ConfigError("simulate: at least one replication is required");
  if (config.kinds.empty()) throw ConfigError("simulate: no measure requested");
  std::vector<SimulationRow> rows;
  for (std::size_t n : config.sizes) {
    const std::size_t K = config.kinds.size();
    std::vector<std::vector<double>> est(K, std::vector<double>(config.reps));
    std::vector<std::vector<double>> cls(K, std::vector<double>(config.reps));
    std::vector<double> n1(config.reps);
    std::vector<double> n2(config.reps);
    const std::uint64_t size_seed = derive_seed(config.seed, n);
    parallel_for(config.reps, config.threads, [&](std::size_t rep) {
      const std::uint64_t rep_seed = derive_seed(size_seed, rep);
      const Sample data = sample(config.model, n, derive_seed(rep_seed, 0));
      const RankedSample s = pseudo_observations(data.x, data.y, TiePolicy::random,
                                                 derive_seed(rep_seed, 1));
      const Bandwidth b = config.bandwidth.resolve(s);
      const Checkerboard a = empirical_checkerboard(s, b);
      const Grid g = as_grid(si_rearrange(a));
      for (std::size_t k = 0; k < K; ++k) {
        est[k][rep] = measure(g, config.kinds[k]);
        cls[k][rep] = classical_estimate(s, config.kinds[k], a);
      }
      n1[rep] = double(b.n1);
      n2[rep] = double(b.n2);
    });
    for (std::size_t k = 0; k < K; ++k) {
      SimulationRow row;
      row.n = n;
      row.kind = config.kinds[k];
      try {
        row.true_value = analytic_value(config.model, config.kinds[k]);
      } catch (const UnsupportedError&) {
      }
      const auto e = mean_sd(est[k]);
      const auto c = mean_sd(cls[k]);
      row.mean = e.mean;
      row.sd = e.sd;
      row.classical_mean = c.mean;
      row.classical_sd = c.sd;
      row.mean_n1 = mean_sd(n1).mean;
      row.mean_n2 = mean_sd(n2).mean;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<PowerRow> power(const PowerConfig& config) {
  if (config.reps < 1) throw ConfigError("power: at least one replication is required");
  if (!(config.alpha > 0 && config.alpha < 1)) throw ConfigError("power: alpha must lie in (0, 1)");
  const MeasureKind kinds[] = {{MeasureType::rho}, {MeasureType::tau}, {MeasureType::zeta1}};
  std::vector<PowerRow> rows;
  for (std::size_t pi = 0; pi < config.parameters.size(); ++pi) {
    const double param = config.parameters[pi];
    const CopulaModel model =
        config.family.has_parameter() ? config.family.with_parameter(param) : config.family;
    std::vector<std::array<int, 4>> reject(config.reps);
    const std::uint64_t param_seed = derive_seed(config.seed, pi);
    parallel_for(config.reps, config.threads, [&](std::size_t rep) {
      const std::uint64_t rep_seed = derive_seed(param_seed, rep);
      const Sample data = sample(model, config.n, derive_seed(rep_seed, 0));
      const RankedSample s =
          pseudo_observations(data.x, data.y, TiePolicy::random, derive_seed(rep_seed, 1));
      PermutationOptions po;
      po.permutations = config.permutations;
      po.seed = derive_seed(rep_seed, 2);
      po.bandwidth = config.bandwidth;
      po.reuse_bandwidth = config.reuse_bandwidth;
      const auto tests = permutation_tests(s, kinds, po);
      const TestResult xi = chatterjee_test(s);
      for (std::size_t t = 0; t < 3; ++t) reject[rep][t] = tests[t].p_value <= config.alpha;
      reject[rep][3] = xi.p_value <= config.alpha;
    });
    std::array<double, 4> rate{};
    for (const auto& r : reject)
      for (std::size_t t = 0; t < 4; ++t) rate[t] += r[t];
    for (auto& x : rate) x /= double(config.reps);
    rows.push_back({param, rate[0], rate[1], rate[2], rate[3]});
  }
  return rows;
}

bool power_monotone(const std::vector<PowerRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i - 1];
    const auto& b = rows[i];
    if (b.rho < a.rho || b.tau < a.tau || b.zeta1 < a.zeta1 || b.xi < a.xi) return false;
  }
  return true;
}

BenchResult bench(const BenchConfig& config) {
  if (config.runs < 1) throw ConfigError("bench: at least one run is required");
  BenchResult result;
  const BandwidthSpec spec = BandwidthSpec::exponent(config.exponent, config.exponent);
  const CopulaModel model = CopulaModel::gaussian(0.5);
  for (std::size_t n : config.sizes) {
    const Sample data = sample(model, n, derive_seed(config.seed, n));
    std::vector<double> times;
    BenchRow row;
    row.n = n;
    for (std::size_t run = 0; run < config.runs; ++run) {
      const auto start = std::chrono::steady_clock::now();
      const RankedSample s = pseudo_observations(data.x, data.y, TiePolicy::random, config.seed);
      const Estimate e = estimate_many(s, std::span<const MeasureKind>(&config.kind, 1), spec);
      const auto stop = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double>(stop - start).count());
      row.bandwidth = e.bandwidth;
    }
    std::sort(times.begin(), times.end());
    const std::size_t mid = times.size() / 2;
    row.median_seconds =
        times.size() % 2 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
    result.rows.push_back(row);
  }
  if (result.rows.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = double(result.rows.size());
    for (const auto& r : result.rows) {
      const double n = double(r.n);
      const double x = std::log(n * std::log(n));
      const double y = std::log(std::max(r.median_seconds, 1e-12));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double denom = k * sxx - sx * sx;
    if (denom > 0) result.fitted_exponent = (k * sxy - sx * sy) / denom;
    const auto& first = result.rows.front();
    const auto& last = result.rows.back();
    const double work_ratio = (double(last.n) * std::log(double(last.n))) /
                              (double(first.n) * std::log(double(first.n)));
    result.scaling_ratio = (last.median_seconds / first.median_seconds) / work_ratio;
  }
  return result;
}

}  // namespace rdm

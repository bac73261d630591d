#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rdm/copula_models.hpp"
#include "rdm/estimation.hpp"
#include "rdm/measures.hpp"

namespace rdm {

/// Classical estimate reported next to R_mu: |rho_n| for rho, |tau_n| for tau, Chatterjee's xi
/// for r, and the measure of the unrearranged empirical checkerboard otherwise.
double classical_estimate(const RankedSample& s, MeasureKind kind, const Checkerboard& empirical);

struct SimulationConfig {
  CopulaModel model;
  std::vector<std::size_t> sizes;
  std::vector<MeasureKind> kinds;
  std::size_t reps = 200;
  std::uint64_t seed = 1;
  BandwidthSpec bandwidth = BandwidthSpec::cv();
  unsigned threads = 1;
};

struct SimulationRow {
  std::size_t n = 0;
  MeasureKind kind;
  std::optional<double> true_value;
  double mean = 0.0;
  double sd = 0.0;
  double classical_mean = 0.0;
  double classical_sd = 0.0;
  double mean_n1 = 0.0;
  double mean_n2 = 0.0;
};

/// Monte Carlo mean and standard deviation of the estimators, one row per (n, kind).
std::vector<SimulationRow> simulate(const SimulationConfig& config);

struct PowerConfig {
  CopulaModel family;
  std::vector<double> parameters;
  std::size_t n = 200;
  std::size_t reps = 500;
  std::size_t permutations = 199;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  BandwidthSpec bandwidth = BandwidthSpec::cv();
  bool reuse_bandwidth = false;
  unsigned threads = 1;
};

struct PowerRow {
  double parameter = 0.0;
  double rho = 0.0;     // permutation test of R_rho
  double tau = 0.0;     // permutation test of R_tau
  double zeta1 = 0.0;   // permutation test of zeta_1
  double xi = 0.0;      // Chatterjee's asymptotic test
};

/// Rejection rates at level alpha of the four independence tests per sweep parameter.
std::vector<PowerRow> power(const PowerConfig& config);

/// True when every test's rejection rate is nondecreasing along the sweep.
bool power_monotone(const std::vector<PowerRow>& rows);

struct BenchConfig {
  std::vector<std::size_t> sizes;
  double exponent = 0.4;
  std::size_t runs = 5;
  std::uint64_t seed = 1;
  MeasureKind kind{};
};

struct BenchRow {
  std::size_t n = 0;
  Bandwidth bandwidth;
  double median_seconds = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  /// Least-squares slope of log(time) against log(n log n); 1 means n log n scaling.
  std::optional<double> fitted_exponent;
  /// (t_last / t_first) / (n_last log n_last / (n_first log n_first)).
  std::optional<double> scaling_ratio;
};

/// Median wall-clock of ranking plus estimation at the fixed bandwidth n^exponent.
BenchResult bench(const BenchConfig& config);

}  // namespace rdm

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdm/estimation.hpp"
#include "rdm/measures.hpp"

namespace rdm {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::vector<double> null_values;  // permutation replicates, empty for asymptotic tests
};

struct PermutationOptions {
  std::size_t permutations = 999;
  std::uint64_t seed = 0;
  BandwidthSpec bandwidth = BandwidthSpec::cv();
  /// Approximate mode: reuse the bandwidth selected on the observed data in every replicate.
  bool reuse_bandwidth = false;
  unsigned threads = 1;
};

/// Add-one permutation p-value (1 + #{null >= statistic}) / (B + 1).
double permutation_p_value(double statistic, std::span<const double> null_values);

/// One-sided permutation tests of independence for several R_mu kinds; each replicate permutes
/// the response ranks and repeats the whole estimation, bandwidth selection included.
std::vector<TestResult> permutation_tests(const RankedSample& s, std::span<const MeasureKind> kinds,
                                          const PermutationOptions& options);

TestResult permutation_test(const RankedSample& s, MeasureKind kind,
                            const PermutationOptions& options);

/// Permutation test of Spearman's rho > 0, or of rho != 0 (statistic |rho|) when two-sided.
TestResult spearman_permutation_test(const RankedSample& s, const PermutationOptions& options,
                                     bool two_sided = false);

/// Asymptotic test: sqrt(n) xi_n is approximately N(0, 2/5) under independence.
TestResult chatterjee_test(const RankedSample& s);

/// Benjamini-Hochberg step-up selection at rate q; returns selected indices in increasing order.
std::vector<std::size_t> bh_fdr(std::span<const double> p_values, double q);

struct ScreenInput {
  std::vector<std::string> ids;
  std::vector<std::vector<std::optional<double>>> rows;  // missing values are nullopt
  std::vector<double> response;
};

struct ScreenOptions {
  MeasureKind kind{};
  std::size_t permutations = 999;
  double q = 0.05;
  std::uint64_t seed = 0;
  TiePolicy tie_policy = TiePolicy::random;
  std::size_t min_observations = 16;
  bool reuse_bandwidth = false;
  unsigned threads = 1;
};

struct ScreenEntry {
  std::string id;
  std::size_t row = 0;             // position in the input
  std::size_t observations = 0;    // after missing-value removal
  std::string flag;                // non-empty when the row was skipped
  double statistic = 0.0;
  double p_value = 1.0;
  double spearman = 0.0;
  double spearman_p = 1.0;
  bool selected_rearranged = false;
  bool selected_spearman = false;
};

struct ScreenReport {
  std::vector<ScreenEntry> entries;     // sorted by rearranged-test p-value, flagged rows last
  std::vector<std::size_t> difference;  // entry positions selected by R_mu but not by Spearman
};

ScreenReport screen(const ScreenInput& input, const ScreenOptions& options);

/// Three-nearest-neighbour regression evaluated at every x: mean response of the 3 points
/// closest in x (the point itself included), ties in distance resolved toward smaller x.
std::vector<double> knn3_fit(std::span<const double> x, std::span<const double> y);

}  // namespace rdm

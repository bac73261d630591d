#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rdm/checkerboard.hpp"
#include "rdm/measures.hpp"

namespace rdm {

enum class TiePolicy { random, strict };

TiePolicy parse_tie_policy(std::string_view text);

/// Ranks 1..n of both coordinates after tie resolution.
struct RankedSample {
  std::vector<std::uint32_t> u_ranks;
  std::vector<std::uint32_t> v_ranks;
  std::size_t x_tied = 0;  // observations involved in a tie before resolution
  std::size_t y_tied = 0;

  std::size_t size() const { return u_ranks.size(); }
  double u(std::size_t i) const { return double(u_ranks[i]) / double(size() + 1); }
  double v(std::size_t i) const { return double(v_ranks[i]) / double(size() + 1); }

  /// Builds a sample from given ranks, checking that both are permutations of 1..n.
  static RankedSample from_ranks(std::vector<std::uint32_t> u, std::vector<std::uint32_t> v);
};

/// Ranks 1..n of `values`; ties broken uniformly at random (seeded) or rejected.
std::vector<std::uint32_t> ranks(std::span<const double> values, TiePolicy policy,
                                 std::uint64_t seed, std::size_t* tied = nullptr);

RankedSample pseudo_observations(std::span<const double> xs, std::span<const double> ys,
                                 TiePolicy policy = TiePolicy::random, std::uint64_t seed = 0);

struct Bandwidth {
  Index n1 = 1;
  Index n2 = 1;
  friend bool operator==(const Bandwidth&, const Bandwidth&) = default;
};

/// How the checkerboard resolution is chosen: cross-validation, N_i = floor(n^s_i), or given.
struct BandwidthSpec {
  enum class Mode { cv, exponent, explicit_size };
  Mode mode = Mode::cv;
  double s1 = 0.0;
  double s2 = 0.0;
  Bandwidth size;

  static BandwidthSpec cv() { return {}; }
  static BandwidthSpec exponent(double s1, double s2);
  static BandwidthSpec explicit_size(Index n1, Index n2);
  /// auto | fixed:s1,s2 | explicit:N1,N2
  static BandwidthSpec parse(std::string_view text);
  std::string to_string() const;

  Bandwidth resolve(const RankedSample& s) const;
};

/// Checkerboard of resolution b obtained by coarsening the n x n permutation checkerboard of
/// the ranks; every observation touches at most 2 x 2 cells.
Checkerboard empirical_checkerboard(const RankedSample& s, Bandwidth b);

/// Least-squares cross-validation criterion of the checkerboard density. `subsample` selects
/// the observations entering the leave-one-out term (empty: all of them).
double cv_score(const RankedSample& s, Bandwidth b, std::span<const std::uint32_t> subsample = {});

/// Sample sizes above this use a subsampled leave-one-out term.
inline constexpr std::size_t kFullCvLimit = 10000;
inline constexpr std::size_t kCvSubsample = 500;

/// Candidate values floor(n^(1/4)) .. floor(n^(1/2)) for each of N1, N2.
std::vector<Index> bandwidth_candidates(std::size_t n);

Bandwidth select_bandwidth(const RankedSample& s);

struct Estimate {
  Bandwidth bandwidth;
  std::vector<double> values;  // one per requested kind
};

/// R_mu estimates for several kinds sharing one bandwidth and one checkerboard.
Estimate estimate_many(const RankedSample& s, std::span<const MeasureKind> kinds,
                       const BandwidthSpec& spec = BandwidthSpec::cv());

double estimate_R(const RankedSample& s, MeasureKind kind,
                  const BandwidthSpec& spec = BandwidthSpec::cv());

double chatterjee_xi(const RankedSample& s);
double spearman_rho(const RankedSample& s);
double kendall_tau(const RankedSample& s);

/// Predictor grid of the multivariate estimator; zero selects the default
/// floor(n^(1/(2(d+1)))) cells per predictor axis and floor(n^(1/3)) response levels.
struct MultivariateGrid {
  Index cells_per_axis = 0;
  Index levels = 0;
};

/// R_mu of Y given (X_1, ..., X_d), d <= 3. `predictors` holds one column per predictor.
double multivariate_estimate(const std::vector<std::vector<double>>& predictors,
                             std::span<const double> y, MeasureKind kind,
                             MultivariateGrid grid = {}, TiePolicy policy = TiePolicy::random,
                             std::uint64_t seed = 0);

}  // namespace rdm

#include "rdm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rdm/errors.hpp"
#include "rdm/normal.hpp"
#include "rdm/parallel.hpp"
#include "rdm/rng.hpp"

namespace rdm {

namespace {

// Guards the comparison against replicates that reproduce the statistic up to rounding.
constexpr double kTieSlack = 1e-12;

void check_permutations(std::size_t b) {
  if (b < 19) throw DomainError("permutation tests need at least 19 permutations");
}

RankedSample permuted(const RankedSample& s, std::uint64_t seed) {
  RankedSample out = s;
  Rng rng(seed);
  shuffle(std::span<std::uint32_t>(out.v_ranks), rng);
  return out;
}

}  // namespace

double permutation_p_value(double statistic, std::span<const double> null_values) {
  const auto exceed = std::count_if(null_values.begin(), null_values.end(),
                                    [&](double v) { return v >= statistic - kTieSlack; });
  return double(1 + exceed) / double(null_values.size() + 1);
}

std::vector<TestResult> permutation_tests(const RankedSample& s, std::span<const MeasureKind> kinds,
                                          const PermutationOptions& options) {
  check_permutations(options.permutations);
  const Estimate observed = estimate_many(s, kinds, options.bandwidth);
  const BandwidthSpec replicate_spec =
      options.reuse_bandwidth
          ? BandwidthSpec::explicit_size(observed.bandwidth.n1, observed.bandwidth.n2)
          : options.bandwidth;
  const std::size_t B = options.permutations;
  std::vector<std::vector<double>> null(kinds.size(), std::vector<double>(B));
  parallel_for(B, options.threads, [&](std::size_t b) {
    const RankedSample p = permuted(s, derive_seed(options.seed, b));
    const Estimate e = estimate_many(p, kinds, replicate_spec);
    for (std::size_t k = 0; k < kinds.size(); ++k) null[k][b] = e.values[k];
  });
  std::vector<TestResult> out;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    TestResult r;
    r.statistic = observed.values[k];
    r.p_value = permutation_p_value(r.statistic, null[k]);
    r.replicates = B;
    r.seed = options.seed;
    r.method = "permutation:R_" + kinds[k].name() + (options.reuse_bandwidth ? ":approximate" : "");
    r.null_values = std::move(null[k]);
    out.push_back(std::move(r));
  }
  return out;
}

TestResult permutation_test(const RankedSample& s, MeasureKind kind,
                            const PermutationOptions& options) {
  return permutation_tests(s, std::span<const MeasureKind>(&kind, 1), options).front();
}

TestResult spearman_permutation_test(const RankedSample& s, const PermutationOptions& options,
                                     bool two_sided) {
  check_permutations(options.permutations);
  auto stat = [&](const RankedSample& x) {
    const double rho = spearman_rho(x);
    return two_sided ? std::abs(rho) : rho;
  };
  TestResult r;
  r.statistic = stat(s);
  r.null_values.resize(options.permutations);
  parallel_for(options.permutations, options.threads, [&](std::size_t b) {
    r.null_values[b] = stat(permuted(s, derive_seed(options.seed, b)));
  });
  r.p_value = permutation_p_value(r.statistic, r.null_values);
  r.replicates = options.permutations;
  r.seed = options.seed;
  r.method = two_sided ? "permutation:spearman:two-sided" : "permutation:spearman";
  return r;
}

TestResult chatterjee_test(const RankedSample& s) {
  TestResult r;
  r.statistic = chatterjee_xi(s);
  const double z = std::sqrt(double(s.size())) * r.statistic / std::sqrt(0.4);
  r.p_value = normal_cdf(-z);
  r.method = "asymptotic:chatterjee";
  return r;
}

std::vector<std::size_t> bh_fdr(std::span<const double> p_values, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("bh_fdr: q must lie in (0, 1]");
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::size_t cutoff = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (p_values[order[i]] <= double(i + 1) * q / double(m)) cutoff = i + 1;
  std::vector<std::size_t> selected(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cutoff));
  std::sort(selected.begin(), selected.end());
  return selected;
}

ScreenReport screen(const ScreenInput& input, const ScreenOptions& options) {
  const std::size_t m = input.rows.size();
  if (input.ids.size() != m) throw DataError("screen: ids and rows differ in number");
  std::vector<ScreenEntry> entries(m);
  parallel_for(m, options.threads, [&](std::size_t row) {
    ScreenEntry& e = entries[row];
    e.id = input.ids[row];
    e.row = row;
    const auto& values = input.rows[row];
    if (values.size() != input.response.size()) {
      e.flag = "length differs from the response";
      return;
    }
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t t = 0; t < values.size(); ++t) {
      if (!values[t]) continue;
      x.push_back(input.response[t]);
      y.push_back(*values[t]);
    }
    e.observations = x.size();
    if (x.size() < options.min_observations) {
      e.flag = "too few observations";
      return;
    }
    auto constant = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
    };
    if (constant(x) || constant(y)) {
      e.flag = "tied values: constant series";
      return;
    }
    const std::uint64_t row_seed = derive_seed(options.seed, row);
    try {
      const RankedSample s = pseudo_observations(x, y, options.tie_policy, derive_seed(row_seed, 2));
      PermutationOptions po;
      po.permutations = options.permutations;
      po.seed = derive_seed(row_seed, 0);
      po.reuse_bandwidth = options.reuse_bandwidth;
      const TestResult t = permutation_test(s, options.kind, po);
      po.seed = derive_seed(row_seed, 1);
      const TestResult sp = spearman_permutation_test(s, po, true);
      e.statistic = t.statistic;
      e.p_value = t.p_value;
      e.spearman = spearman_rho(s);
      e.spearman_p = sp.p_value;
    } catch (const TieError& err) {
      e.flag = std::string("tied values: ") + err.what();
    }
  });

  std::vector<std::size_t> tested;
  for (std::size_t i = 0; i < m; ++i)
    if (entries[i].flag.empty()) tested.push_back(i);
  std::vector<double> p_r;
  std::vector<double> p_s;
  for (auto i : tested) {
    p_r.push_back(entries[i].p_value);
    p_s.push_back(entries[i].spearman_p);
  }
  for (auto j : bh_fdr(p_r, options.q)) entries[tested[j]].selected_rearranged = true;
  for (auto j : bh_fdr(p_s, options.q)) entries[tested[j]].selected_spearman = true;

  std::stable_sort(entries.begin(), entries.end(), [](const ScreenEntry& a, const ScreenEntry& b) {
    const bool fa = !a.flag.empty();
    const bool fb = !b.flag.empty();
    if (fa != fb) return fb;
    if (fa) return a.row < b.row;
    if (a.p_value != b.p_value) return a.p_value < b.p_value;
    return a.row < b.row;
  });
  ScreenReport report;
  report.entries = std::move(entries);
  for (std::size_t i = 0; i < report.entries.size(); ++i)
    if (report.entries[i].selected_rearranged && !report.entries[i].selected_spearman)
      report.difference.push_back(i);
  return report;
}

std::vector<double> knn3_fit(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (y.size() != n) throw DataError("knn3_fit: x and y differ in length");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> fit(n, 0.0);
  const std::size_t k = std::min<std::size_t>(3, n);
  for (std::size_t p = 0; p < n; ++p) {
    const double x0 = x[order[p]];
    double sum = y[order[p]];
    std::size_t left = p;   // next candidate on the left is left - 1
    std::size_t right = p + 1;
    for (std::size_t taken = 1; taken < k; ++taken) {
      const bool has_left = left > 0;
      const bool has_right = right < n;
      bool take_left = has_left;
      if (has_left && has_right)
        take_left = x0 - x[order[left - 1]] <= x[order[right]] - x0;
      if (take_left) {
        sum += y[order[--left]];
      } else {
        sum += y[order[right++]];
      }
    }
    fit[order[p]] = sum / double(k);
  }
  return fit;
}

}  // namespace rdm

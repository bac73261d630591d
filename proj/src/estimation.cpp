#include "rdm/estimation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include "rdm/errors.hpp"
#include "rdm/rearrangement.hpp"
#include "rdm/rng.hpp"

namespace rdm {

TiePolicy parse_tie_policy(std::string_view text) {
  if (text == "random") return TiePolicy::random;
  if (text == "strict") return TiePolicy::strict;
  throw ConfigError("unknown tie policy '" + std::string(text) + "' (expected random or strict)");
}

namespace {

bool is_permutation_of_1_to_n(const std::vector<std::uint32_t>& r) {
  std::vector<bool> seen(r.size() + 1, false);
  for (auto x : r) {
    if (x < 1 || x > r.size() || seen[x]) return false;
    seen[x] = true;
  }
  return true;
}

/// Length of [a0, a1) intersected with [b0, b1).
inline std::int64_t overlap(std::int64_t a0, std::int64_t a1, std::int64_t b0, std::int64_t b1) {
  return std::max<std::int64_t>(0, std::min(a1, b1) - std::max(a0, b0));
}

/// Calls f(cell, overlap) for the cells of an N-cell partition met by rank r (1-based) among
/// n; lengths are in units of 1 / (n N).
template <typename F>
inline void for_each_cell(std::int64_t r, std::int64_t n, std::int64_t cells, F&& f) {
  const std::int64_t lo = (r - 1) * cells;
  const std::int64_t hi = r * cells;
  for (std::int64_t k = lo / n; k < cells && k * n < hi; ++k) {
    const std::int64_t o = overlap(lo, hi, k * n, (k + 1) * n);
    if (o > 0) f(k, o);
  }
}

std::int64_t isqrt(std::int64_t n) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

double parse_double(std::string_view s, std::string_view whole) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("malformed bandwidth '" + std::string(whole) + "'");
  return v;
}

std::pair<std::string_view, std::string_view> split_pair(std::string_view s) {
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) return {s, s};
  return {s.substr(0, comma), s.substr(comma + 1)};
}

}  // namespace

RankedSample RankedSample::from_ranks(std::vector<std::uint32_t> u, std::vector<std::uint32_t> v) {
  if (u.size() != v.size()) throw DataError("rank vectors differ in length");
  if (!is_permutation_of_1_to_n(u) || !is_permutation_of_1_to_n(v))
    throw DataError("ranks must be permutations of 1..n");
  RankedSample s;
  s.u_ranks = std::move(u);
  s.v_ranks = std::move(v);
  return s;
}

std::vector<std::uint32_t> ranks(std::span<const double> values, TiePolicy policy,
                                 std::uint64_t seed, std::size_t* tied) {
  const std::size_t n = values.size();
  for (double x : values)
    if (!std::isfinite(x)) throw DataError("non-finite value in input");
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return values[a] < values[b]; });
  Rng rng(seed);
  std::size_t tied_count = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    if (j - i > 1) {
      tied_count += j - i;
      if (policy == TiePolicy::strict) {
        std::ostringstream msg;
        msg << "tied values (" << values[order[i]] << " occurs " << (j - i)
            << " times) under the strict tie policy";
        throw TieError(msg.str());
      }
      shuffle(std::span<std::uint32_t>(order.data() + i, j - i), rng);
    }
    i = j;
  }
  if (tied) *tied = tied_count;
  std::vector<std::uint32_t> r(n);
  for (std::size_t i = 0; i < n; ++i) r[order[i]] = static_cast<std::uint32_t>(i + 1);
  return r;
}

RankedSample pseudo_observations(std::span<const double> xs, std::span<const double> ys,
                                 TiePolicy policy, std::uint64_t seed) {
  if (xs.size() != ys.size()) throw DataError("x and y differ in length");
  if (xs.size() < 2) throw DataError("at least two observations are required");
  RankedSample s;
  s.u_ranks = ranks(xs, policy, derive_seed(seed, 0), &s.x_tied);
  s.v_ranks = ranks(ys, policy, derive_seed(seed, 1), &s.y_tied);
  return s;
}

BandwidthSpec BandwidthSpec::exponent(double s1, double s2) {
  if (!(s1 > 0 && s1 <= 1 && s2 > 0 && s2 <= 1))
    throw ConfigError("bandwidth exponents must lie in (0, 1]");
  BandwidthSpec b;
  b.mode = Mode::exponent;
  b.s1 = s1;
  b.s2 = s2;
  return b;
}

BandwidthSpec BandwidthSpec::explicit_size(Index n1, Index n2) {
  if (n1 < 1 || n2 < 1) throw ConfigError("bandwidth sizes must be positive");
  BandwidthSpec b;
  b.mode = Mode::explicit_size;
  b.size = {n1, n2};
  return b;
}

BandwidthSpec BandwidthSpec::parse(std::string_view text) {
  if (text == "auto") return cv();
  if (text.starts_with("fixed:")) {
    auto [a, b] = split_pair(text.substr(6));
    return exponent(parse_double(a, text), parse_double(b, text));
  }
  if (text.starts_with("explicit:")) {
    auto [a, b] = split_pair(text.substr(9));
    const double n1 = parse_double(a, text);
    const double n2 = parse_double(b, text);
    if (n1 != std::floor(n1) || n2 != std::floor(n2))
      throw ConfigError("explicit bandwidth must be integer");
    return explicit_size(static_cast<Index>(n1), static_cast<Index>(n2));
  }
  throw ConfigError("unknown bandwidth '" + std::string(text) +
                    "' (expected auto, fixed:s1,s2 or explicit:N1,N2)");
}

std::string BandwidthSpec::to_string() const {
  std::ostringstream os;
  switch (mode) {
    case Mode::cv: os << "auto"; break;
    case Mode::exponent: os << "fixed:" << s1 << ',' << s2; break;
    case Mode::explicit_size: os << "explicit:" << size.n1 << ',' << size.n2; break;
  }
  return os.str();
}

Bandwidth BandwidthSpec::resolve(const RankedSample& s) const {
  const auto n = static_cast<Index>(s.size());
  switch (mode) {
    case Mode::cv: return select_bandwidth(s);
    case Mode::exponent: {
      auto pick = [n](double e) {
        const auto v = static_cast<Index>(std::floor(std::pow(double(n), e) + 1e-9));
        return std::clamp<Index>(v, 1, n);
      };
      return {pick(s1), pick(s2)};
    }
    case Mode::explicit_size:
      if (size.n1 > n || size.n2 > n) throw DomainError("bandwidth exceeds the sample size");
      return size;
  }
  return {};
}

Checkerboard empirical_checkerboard(const RankedSample& s, Bandwidth b) {
  const auto n = static_cast<std::int64_t>(s.size());
  if (b.n1 < 1 || b.n2 < 1) throw DomainError("bandwidth must be positive");
  if (b.n1 > n || b.n2 > n) throw DomainError("bandwidth exceeds the sample size");
  Matrix<double> a = Matrix<double>::Zero(b.n1, b.n2);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for_each_cell(s.u_ranks[i], n, b.n1, [&](std::int64_t k, std::int64_t ox) {
      for_each_cell(s.v_ranks[i], n, b.n2, [&](std::int64_t l, std::int64_t oy) {
        a(static_cast<Index>(k), static_cast<Index>(l)) += double(ox * oy);
      });
    });
  }
  a /= double(n);
  return Checkerboard(std::move(a));
}

namespace {

/// Leave-one-out machinery shared by all candidate bandwidths of one sample. Up to
/// kPrefixLimit observations a 2-D prefix count of the ranks makes each leave-one-out density
/// O(1); larger samples walk the ranks meeting the evaluation cell.
class CvEvaluator {
 public:
  explicit CvEvaluator(const RankedSample& s)
      : s_(s), n_(static_cast<std::int64_t>(s.size())), x_at_(s.size() + 1), y_at_(s.size() + 1) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      x_at_[s.u_ranks[j]] = static_cast<std::uint32_t>(j);
      y_at_[s.v_ranks[j]] = static_cast<std::uint32_t>(j);
    }
    if (n_ <= kPrefixLimit) {
      // prefix_(r, c) = #{j : x-rank <= r, y-rank <= c}
      const auto w = static_cast<std::size_t>(n_ + 1);
      prefix_.assign(w * w, 0);
      for (std::int64_t r = 1; r <= n_; ++r) {
        const std::uint32_t c0 = s.v_ranks[x_at_[static_cast<std::size_t>(r)]];
        std::uint32_t run = 0;
        for (std::size_t c = 1; c < w; ++c) {
          run += c == c0;
          prefix_[static_cast<std::size_t>(r) * w + c] =
              prefix_[static_cast<std::size_t>(r - 1) * w + c] + run;
        }
      }
    }
  }

  double score(Bandwidth b, std::span<const std::uint32_t> subsample) {
    const std::int64_t m = n_ - 1;
    if (n_ < 3) throw DomainError("cv_score: at least three observations are required");
    if (b.n1 < 1 || b.n2 < 1) throw DomainError("bandwidth must be positive");
    if (m < std::max(b.n1, b.n2))
      throw DomainError("cv_score: leave-one-out sample smaller than the bandwidth");

    // Integral of the squared density: sum a^2 / (N1 N2) with a = (sum of overlaps) / n.
    cells_.assign(static_cast<std::size_t>(b.n1 * b.n2), 0);
    if (prefix_.empty()) {
      for (std::size_t i = 0; i < s_.size(); ++i)
        for_each_cell(s_.u_ranks[i], n_, b.n1, [&](std::int64_t k, std::int64_t ox) {
          for_each_cell(s_.v_ranks[i], n_, b.n2, [&](std::int64_t l, std::int64_t oy) {
            cells_[static_cast<std::size_t>(k * b.n2 + l)] += ox * oy;
          });
        });
    } else {
      const AxisTable& tx = table(b.n1);
      const AxisTable& ty = table(b.n2);
      const auto w = static_cast<std::size_t>(b.n2);
      for (std::size_t i = 0; i < s_.size(); ++i) {
        const auto rx = s_.u_ranks[i];
        const auto ry = s_.v_ranks[i];
        const auto k = static_cast<std::size_t>(tx.cell[rx]);
        const auto l = static_cast<std::size_t>(ty.cell[ry]);
        const std::int64_t x0 = tx.len0[rx], x1 = tx.len1[rx];
        const std::int64_t y0 = ty.len0[ry], y1 = ty.len1[ry];
        cells_[k * w + l] += x0 * y0;
        if (y1) cells_[k * w + l + 1] += x0 * y1;
        if (x1) {
          cells_[(k + 1) * w + l] += x1 * y0;
          if (y1) cells_[(k + 1) * w + l + 1] += x1 * y1;
        }
      }
    }
    double sq = 0;
    for (auto c : cells_) sq += double(c) * double(c);
    const double first = sq / (double(n_) * double(n_) * double(b.n1 * b.n2));

    const AxisTable* tx = prefix_.empty() ? nullptr : &table(b.n1);
    const AxisTable* ty = prefix_.empty() ? nullptr : &table(b.n2);
    std::int64_t loo = 0;
    std::size_t used = 0;
    auto add = [&](std::size_t i) {
      loo += prefix_.empty() ? loo_scan(i, b) : loo_prefix(i, b, *tx, *ty);
      ++used;
    };
    if (subsample.empty()) {
      for (std::size_t i = 0; i < s_.size(); ++i) add(i);
    } else {
      for (auto i : subsample) add(i);
    }
    return first - 2.0 * double(loo) / (double(m) * double(used));
  }

 private:
  static constexpr std::int64_t kPrefixLimit = 3000;

  /// Ranks among the m = n - 1 remaining points that meet one cell, split into the fully
  /// covered interior range and up to two partially covered boundary ranks.
  struct Cover {
    std::int32_t lo = 1;
    std::int32_t hi = 0;
    std::int32_t partial[2] = {0, 0};
    std::int32_t partial_len[2] = {0, 0};
    int partials = 0;
  };

  /// Per-resolution lookups, indexed by full-sample rank or by cell.
  struct AxisTable {
    std::vector<std::int32_t> cell;       // first cell met by rank r among n
    std::vector<std::int32_t> len0;       // overlap with that cell
    std::vector<std::int32_t> len1;       // overlap with the next cell
    std::vector<std::int32_t> eval_cell;  // cell holding r / (n + 1)
    std::vector<Cover> covers;
  };

  static Cover make_cover(std::int64_t cells, std::int64_t cell, std::int64_t m) {
    const std::int64_t c0 = cell * m;
    const std::int64_t c1 = (cell + 1) * m;
    const std::int64_t first = c0 / cells + 1;
    const std::int64_t last = (c1 - 1) / cells + 1;
    Cover out;
    out.lo = static_cast<std::int32_t>(first);
    out.hi = static_cast<std::int32_t>(last);
    auto len = [&](std::int64_t r) { return overlap((r - 1) * cells, r * cells, c0, c1); };
    if (len(first) < cells) {
      out.partial[out.partials] = static_cast<std::int32_t>(first);
      out.partial_len[out.partials++] = static_cast<std::int32_t>(len(first));
      ++out.lo;
    }
    if (last >= out.lo && len(last) < cells) {
      out.partial[out.partials] = static_cast<std::int32_t>(last);
      out.partial_len[out.partials++] = static_cast<std::int32_t>(len(last));
      --out.hi;
    }
    return out;
  }

  /// The tables depend only on (n, cells), so they are shared by every sample of a thread,
  /// permutation replicates in particular.
  const AxisTable& table(Index cells) {
    thread_local std::map<std::pair<std::int64_t, Index>, std::unique_ptr<AxisTable>> cache;
    auto& slot = cache[{n_, cells}];
    if (slot) return *slot;
    if (cache.size() > 4096) {
      cache.clear();
      return table(cells);
    }
    auto t = std::make_unique<AxisTable>();
    const auto n = static_cast<std::size_t>(n_);
    t->cell.assign(n + 1, 0);
    t->len0.assign(n + 1, 0);
    t->len1.assign(n + 1, 0);
    t->eval_cell.assign(n + 1, 0);
    for (std::int64_t r = 1; r <= n_; ++r) {
      const auto ri = static_cast<std::size_t>(r);
      int seen = 0;
      for_each_cell(r, n_, cells, [&](std::int64_t k, std::int64_t o) {
        if (seen++ == 0) {
          t->cell[ri] = static_cast<std::int32_t>(k);
          t->len0[ri] = static_cast<std::int32_t>(o);
        } else {
          t->len1[ri] = static_cast<std::int32_t>(o);
        }
      });
      t->eval_cell[ri] = static_cast<std::int32_t>(r * cells / (n_ + 1));
    }
    for (std::int64_t k = 0; k < cells; ++k) t->covers.push_back(make_cover(cells, k, n_ - 1));
    slot = std::move(t);
    return *slot;
  }

  static std::int64_t to_full(std::int64_t r, std::int64_t removed) { return r < removed ? r : r + 1; }
  static std::int64_t to_loo(std::int64_t r, std::int64_t removed) { return r > removed ? r - 1 : r; }

  std::int64_t count(std::int64_t x0, std::int64_t x1, std::int64_t y0, std::int64_t y1) const {
    const auto w = static_cast<std::size_t>(n_ + 1);
    auto p = [&](std::int64_t r, std::int64_t c) {
      return static_cast<std::int64_t>(
          prefix_[static_cast<std::size_t>(r) * w + static_cast<std::size_t>(c)]);
    };
    return p(x1, y1) - p(x0 - 1, y1) - p(x1, y0 - 1) + p(x0 - 1, y0 - 1);
  }

  /// Overlap of leave-one-out rank r with cell `cell` of a `cells`-cell axis.
  std::int64_t loo_overlap(std::int64_t r, std::int64_t cells, std::int64_t cell) const {
    const std::int64_t m = n_ - 1;
    return overlap((r - 1) * cells, r * cells, cell * m, (cell + 1) * m);
  }

  /// Sum over the remaining points of (x-overlap) * (y-overlap) with the evaluation cell.
  std::int64_t loo_prefix(std::size_t i, Bandwidth b, const AxisTable& tx,
                          const AxisTable& ty) const {
    const std::int64_t rx = s_.u_ranks[i];
    const std::int64_t ry = s_.v_ranks[i];
    const std::int64_t kx = tx.eval_cell[static_cast<std::size_t>(rx)];
    const std::int64_t ky = ty.eval_cell[static_cast<std::size_t>(ry)];
    const Cover& cx = tx.covers[static_cast<std::size_t>(kx)];
    const Cover& cy = ty.covers[static_cast<std::size_t>(ky)];
    std::int64_t acc = 0;
    if (cx.lo <= cx.hi && cy.lo <= cy.hi) {
      const std::int64_t x0 = to_full(cx.lo, rx), x1 = to_full(cx.hi, rx);
      const std::int64_t y0 = to_full(cy.lo, ry), y1 = to_full(cy.hi, ry);
      std::int64_t c = count(x0, x1, y0, y1);
      if (x0 <= rx && rx <= x1 && y0 <= ry && ry <= y1) --c;
      acc += c * b.n1 * b.n2;
    }
    for (int p = 0; p < cy.partials; ++p) {
      const auto j = y_at_[static_cast<std::size_t>(to_full(cy.partial[p], ry))];
      const std::int64_t xr = to_loo(s_.u_ranks[j], rx);
      if (xr >= cx.lo && xr <= cx.hi) acc += b.n1 * cy.partial_len[p];
    }
    for (int p = 0; p < cx.partials; ++p) {
      const auto j = x_at_[static_cast<std::size_t>(to_full(cx.partial[p], rx))];
      const std::int64_t yr = to_loo(s_.v_ranks[j], ry);
      acc += cx.partial_len[p] * loo_overlap(yr, b.n2, ky);
    }
    return acc;
  }

  /// Same sum by walking the remaining points whose rank on the finer axis meets the cell.
  std::int64_t loo_scan(std::size_t i, Bandwidth b) const {
    const std::int64_t m = n_ - 1;
    const bool scan_x = b.n1 >= b.n2;
    const auto& scan_ranks = scan_x ? s_.u_ranks : s_.v_ranks;
    const auto& other_ranks = scan_x ? s_.v_ranks : s_.u_ranks;
    const auto& at = scan_x ? x_at_ : y_at_;
    const std::int64_t rs = scan_ranks[i];
    const std::int64_t ro = other_ranks[i];
    const std::int64_t scan_cells = scan_x ? b.n1 : b.n2;
    const std::int64_t other_cells = scan_x ? b.n2 : b.n1;
    const std::int64_t ks = rs * scan_cells / (n_ + 1);
    const std::int64_t ko = ro * other_cells / (n_ + 1);
    const std::int64_t first = ks * m / scan_cells + 1;
    const std::int64_t last = ((ks + 1) * m - 1) / scan_cells + 1;
    std::int64_t acc = 0;
    for (std::int64_t r = first; r <= last; ++r) {
      const std::int64_t rj = other_ranks[at[static_cast<std::size_t>(to_full(r, rs))]];
      acc += loo_overlap(r, scan_cells, ks) * loo_overlap(to_loo(rj, ro), other_cells, ko);
    }
    return acc;
  }

  const RankedSample& s_;
  std::int64_t n_;
  std::vector<std::uint32_t> x_at_;
  std::vector<std::uint32_t> y_at_;
  std::vector<std::uint32_t> prefix_;
  std::vector<std::int64_t> cells_;
};

}  // namespace

double cv_score(const RankedSample& s, Bandwidth b, std::span<const std::uint32_t> subsample) {
  CvEvaluator eval(s);
  return eval.score(b, subsample);
}

std::vector<Index> bandwidth_candidates(std::size_t n) {
  const auto nn = static_cast<std::int64_t>(n);
  const std::int64_t lo = std::max<std::int64_t>(1, isqrt(isqrt(nn)));
  const std::int64_t hi = std::max<std::int64_t>(lo, isqrt(nn));
  const std::int64_t count = hi - lo + 1;
  const std::int64_t stride = count * count > 400 ? 2 : 1;
  std::vector<Index> out;
  for (std::int64_t v = lo; v <= hi; v += stride) out.push_back(static_cast<Index>(v));
  return out;
}

Bandwidth select_bandwidth(const RankedSample& s) {
  if (s.size() < 16) throw DomainError("bandwidth selection needs at least 16 observations");
  std::vector<std::uint32_t> subsample;
  if (s.size() > kFullCvLimit) {
    std::vector<std::uint32_t> all(s.size());
    std::iota(all.begin(), all.end(), 0u);
    Rng rng(derive_seed(0x63765f73756273ULL, s.size()));
    for (std::size_t i = 0; i < kCvSubsample; ++i) {
      const auto j = i + static_cast<std::size_t>(uniform_index(rng, all.size() - i));
      std::swap(all[i], all[j]);
    }
    subsample.assign(all.begin(), all.begin() + kCvSubsample);
    std::sort(subsample.begin(), subsample.end());
  }
  CvEvaluator eval(s);
  const auto candidates = bandwidth_candidates(s.size());
  Bandwidth best;
  double best_score = std::numeric_limits<double>::infinity();
  for (Index n1 : candidates) {
    for (Index n2 : candidates) {
      const double score = eval.score({n1, n2}, subsample);
      const bool better =
          score < best_score ||
          (score == best_score && (n1 + n2 < best.n1 + best.n2 ||
                                   (n1 + n2 == best.n1 + best.n2 && n1 < best.n1)));
      if (better) {
        best_score = score;
        best = {n1, n2};
      }
    }
  }
  return best;
}

Estimate estimate_many(const RankedSample& s, std::span<const MeasureKind> kinds,
                       const BandwidthSpec& spec) {
  Estimate out;
  out.bandwidth = spec.resolve(s);
  const Grid g = as_grid(si_rearrange(empirical_checkerboard(s, out.bandwidth)));
  out.values.reserve(kinds.size());
  for (const auto& kind : kinds) out.values.push_back(measure(g, kind));
  return out;
}

double estimate_R(const RankedSample& s, MeasureKind kind, const BandwidthSpec& spec) {
  return estimate_many(s, std::span<const MeasureKind>(&kind, 1), spec).values.front();
}

namespace {

/// y-ranks listed in increasing order of the x-ranks.
std::vector<std::uint32_t> y_in_x_order(const RankedSample& s) {
  std::vector<std::uint32_t> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[s.u_ranks[i] - 1] = s.v_ranks[i];
  return out;
}

std::int64_t count_inversions(std::vector<std::uint32_t>& a, std::vector<std::uint32_t>& buf,
                              std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = count_inversions(a, buf, lo, mid) + count_inversions(a, buf, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (a[i] <= a[j]) {
      buf[k++] = a[i++];
    } else {
      inv += static_cast<std::int64_t>(mid - i);
      buf[k++] = a[j++];
    }
  }
  while (i < mid) buf[k++] = a[i++];
  while (j < hi) buf[k++] = a[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
            buf.begin() + static_cast<std::ptrdiff_t>(hi), a.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

}  // namespace

double chatterjee_xi(const RankedSample& s) {
  const std::size_t n = s.size();
  if (n < 2) throw DomainError("chatterjee_xi: at least two observations are required");
  const auto r = y_in_x_order(s);
  double total = 0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    total += std::abs(double(r[i + 1]) - double(r[i]));
  return 1.0 - 3.0 * total / (double(n) * double(n) - 1.0);
}

double spearman_rho(const RankedSample& s) {
  const double n = double(s.size());
  double d2 = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = double(s.u_ranks[i]) - double(s.v_ranks[i]);
    d2 += d * d;
  }
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

double kendall_tau(const RankedSample& s) {
  auto r = y_in_x_order(s);
  std::vector<std::uint32_t> buf(r.size());
  const double inv = double(count_inversions(r, buf, 0, r.size()));
  const double n = double(s.size());
  return 1.0 - 4.0 * inv / (n * (n - 1.0));
}

double multivariate_estimate(const std::vector<std::vector<double>>& predictors,
                             std::span<const double> y, MeasureKind kind, MultivariateGrid grid,
                             TiePolicy policy, std::uint64_t seed) {
  const std::size_t d = predictors.size();
  if (d < 1 || d > 3) throw UnsupportedError("multivariate_estimate supports 1 to 3 predictors");
  if (y.empty()) throw DataError("multivariate_estimate: empty response");
  const std::size_t n = y.size();
  for (const auto& col : predictors)
    if (col.size() != n) throw DataError("predictor and response lengths differ");
  if (n < 16) throw DomainError("multivariate_estimate needs at least 16 observations");

  const auto nn = static_cast<std::int64_t>(n);
  const std::int64_t g =
      grid.cells_per_axis > 0
          ? grid.cells_per_axis
          : std::max<std::int64_t>(
                1, static_cast<std::int64_t>(std::floor(
                       std::pow(double(n), 1.0 / (2.0 * double(d + 1))) + 1e-9)));
  const std::int64_t L =
      grid.levels > 0 ? grid.levels
                      : std::max<std::int64_t>(
                            1, static_cast<std::int64_t>(std::floor(std::cbrt(double(n)) + 1e-9)));
  if (g > nn || L > nn) throw DomainError("multivariate grid exceeds the sample size");

  std::vector<std::vector<std::uint32_t>> xr(d);
  for (std::size_t a = 0; a < d; ++a)
    xr[a] = ranks(predictors[a], policy, a == 0 ? derive_seed(seed, 0) : derive_seed(seed, a + 1));
  const auto yr = ranks(y, policy, derive_seed(seed, 1));

  std::int64_t boxes = 1;
  for (std::size_t a = 0; a < d; ++a) boxes *= g;
  // Joint (box, level) weights in units of 1 / (n g^d L); each observation spreads over at
  // most 2^d boxes and 2 levels by exact overlap.
  Matrix<double> joint = Matrix<double>::Zero(boxes, L);
  struct Part {
    std::int64_t cell;
    std::int64_t len;
  };
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Part> parts{{0, 1}};
    for (std::size_t a = 0; a < d; ++a) {
      std::vector<Part> next;
      for_each_cell(xr[a][i], nn, g, [&](std::int64_t k, std::int64_t o) {
        for (const auto& p : parts) next.push_back({p.cell * g + k, p.len * o});
      });
      parts = std::move(next);
    }
    for_each_cell(yr[i], nn, L, [&](std::int64_t l, std::int64_t oy) {
      for (const auto& p : parts)
        joint(static_cast<Index>(p.cell), static_cast<Index>(l)) += double(p.len * oy);
    });
  }
  const double unit = double(nn) * std::pow(double(g), double(d)) * double(L);
  std::vector<Index> kept;
  for (Index b = 0; b < boxes; ++b)
    if (joint.row(b).sum() > 0) kept.push_back(b);
  ConditionalTable<double> table;
  table.weights.resize(static_cast<Index>(kept.size()));
  table.cdf.resize(static_cast<Index>(kept.size()), L);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto row = joint.row(kept[i]);
    const double total = row.sum();
    const auto k = static_cast<Index>(i);
    table.weights(k) = total / unit;
    double run = 0;
    for (Index l = 0; l < L; ++l) {
      run += row(l);
      table.cdf(k, l) = run / total;
    }
    table.cdf(k, L - 1) = 1.0;
  }
  return measure(multivariate_rearrange(table), kind);
}

}  // namespace rdm

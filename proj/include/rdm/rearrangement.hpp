#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rdm/checkerboard.hpp"
#include "rdm/errors.hpp"

namespace rdm {

/// True when every cumulative row-sum column B^l (B_k^l = sum_{j<=l} a(k, j)) is nonincreasing
/// in k, i.e. the checkerboard copula is stochastically increasing.
template <typename Scalar>
bool is_stochastically_increasing(const CheckerboardMatrix<Scalar>& a,
                                  Scalar tol = Scalar(1e-12)) {
  const Matrix<Scalar>& e = a.entries();
  const Scalar slack = tol * std::max<Scalar>(1, Scalar(a.cols()));
  Vector<Scalar> prev = Vector<Scalar>::Zero(a.cols());
  for (Index k = 0; k < a.rows(); ++k) {
    Scalar run = 0;
    for (Index l = 0; l < a.cols(); ++l) {
      run += e(k, l);
      if (k > 0 && run > prev(l) + slack) return false;
      prev(l) = run;
    }
  }
  return true;
}

template <typename Scalar>
bool is_stochastically_increasing(const GridCopula<Scalar>& g, Scalar tol = Scalar(1e-12)) {
  const auto& c = g.cumulative();
  for (Index l = 1; l <= g.v_cells(); ++l) {
    Scalar prev = 0;
    for (Index k = 0; k < g.u_cells(); ++k) {
      const Scalar h = (c(k + 1, l) - c(k, l)) / g.du(k);
      if (k > 0 && h > prev + tol) return false;
      prev = h;
    }
  }
  return true;
}

/// SI-rearrangement of a checkerboard matrix: cumulative row sums, a descending sort of every
/// cumulative column, then differences along each row.
template <typename Scalar>
CheckerboardMatrix<Scalar> si_rearrange(const CheckerboardMatrix<Scalar>& a) {
  if (is_stochastically_increasing(a)) return a;
  const Index n1 = a.rows();
  const Index n2 = a.cols();
  Matrix<Scalar> b(n1, n2);
  for (Index k = 0; k < n1; ++k) {
    Scalar run = 0;
    for (Index l = 0; l < n2; ++l) {
      run += a(k, l);
      b(k, l) = run;
    }
  }
  for (Index l = 0; l < n2; ++l) {
    auto col = b.col(l);
    std::stable_sort(col.begin(), col.end(), std::greater<Scalar>());
  }
  Matrix<Scalar> out(n1, n2);
  for (Index k = 0; k < n1; ++k) {
    out(k, 0) = b(k, 0);
    for (Index l = 1; l < n2; ++l) out(k, l) = std::max(Scalar(0), b(k, l) - b(k, l - 1));
  }
  return CheckerboardMatrix<Scalar>::trusted(std::move(out));
}

template <typename Scalar>
CheckerboardMatrix<Scalar> reverse_rows(const CheckerboardMatrix<Scalar>& a) {
  return CheckerboardMatrix<Scalar>::trusted(a.entries().colwise().reverse());
}

/// SD-rearrangement: the SI-rearrangement with its rows in reverse order.
template <typename Scalar>
CheckerboardMatrix<Scalar> sd_rearrange(const CheckerboardMatrix<Scalar>& a) {
  return reverse_rows(si_rearrange(a));
}

/// Conditional distribution of the response given each predictor box: weights(k) is the
/// probability of box k and cdf(k, l) = P(V <= (l+1)/L | box k) on a uniform grid of L levels.
template <typename Scalar>
struct ConditionalTable {
  Vector<Scalar> weights;
  Matrix<Scalar> cdf;

  void validate() const {
    const Index K = weights.size();
    const Index L = cdf.cols();
    if (K < 1 || L < 1 || cdf.rows() != K)
      throw InvariantError("ConditionalTable: weights and cdf shapes disagree");
    if ((weights.array() <= 0).any())
      throw InvariantError("ConditionalTable: box weights must be positive");
    if (std::abs(weights.sum() - Scalar(1)) > Scalar(1e-10))
      throw InvariantError("ConditionalTable: box weights must sum to 1");
    const Scalar tol = Scalar(1e-10);
    for (Index k = 0; k < K; ++k) {
      if (cdf(k, 0) < -tol) throw InvariantError("ConditionalTable: negative conditional cdf");
      for (Index l = 1; l < L; ++l)
        if (cdf(k, l) < cdf(k, l - 1) - tol)
          throw InvariantError("ConditionalTable: conditional cdf rows must be nondecreasing");
      if (std::abs(cdf(k, L - 1) - Scalar(1)) > tol)
        throw InvariantError("ConditionalTable: conditional cdf rows must end at 1");
    }
    for (Index l = 0; l < L; ++l) {
      const Scalar col = weights.dot(cdf.col(l));
      if (std::abs(col - Scalar(l + 1) / Scalar(L)) > Scalar(1e-9))
        throw InvariantError("ConditionalTable: response margin is not uniform");
    }
  }
};

namespace detail {

/// Weighted SI-rearrangement shared by the grid and multivariate paths. weights(k) are the
/// u-widths of the source cells, cdf(k, l) the conditional cdf at v_breaks(l + 1).
template <typename Scalar>
GridCopula<Scalar> rearrange_weighted(const Vector<Scalar>& weights, const Matrix<Scalar>& cdf,
                                      const Vector<Scalar>& v_breaks) {
  const Index K = weights.size();
  const Index L = cdf.cols();
  std::vector<std::vector<Index>> order(static_cast<std::size_t>(L));
  std::vector<std::vector<Scalar>> right_ends(static_cast<std::size_t>(L));
  std::vector<Scalar> all_breaks{Scalar(0), Scalar(1)};
  for (Index l = 0; l < L; ++l) {
    auto& ord = order[static_cast<std::size_t>(l)];
    ord.resize(static_cast<std::size_t>(K));
    std::iota(ord.begin(), ord.end(), Index{0});
    std::stable_sort(ord.begin(), ord.end(),
                     [&](Index i, Index j) { return cdf(i, l) > cdf(j, l); });
    auto& ends = right_ends[static_cast<std::size_t>(l)];
    ends.resize(static_cast<std::size_t>(K));
    Scalar run = 0;
    for (std::size_t i = 0; i < ord.size(); ++i) {
      run += weights(ord[i]);
      ends[i] = run;
      all_breaks.push_back(run);
    }
  }
  std::sort(all_breaks.begin(), all_breaks.end());
  std::vector<Scalar> merged;
  for (Scalar x : all_breaks) {
    if (x <= 0 || x >= 1) continue;
    if (merged.empty() ? x > Scalar(1e-12) : x - merged.back() > Scalar(1e-12)) merged.push_back(x);
  }
  while (!merged.empty() && Scalar(1) - merged.back() <= Scalar(1e-12)) merged.pop_back();
  Vector<Scalar> u(static_cast<Index>(merged.size()) + 2);
  u(0) = 0;
  for (std::size_t i = 0; i < merged.size(); ++i) u(static_cast<Index>(i) + 1) = merged[i];
  u(u.size() - 1) = 1;

  const Index J = u.size() - 1;
  Matrix<Scalar> mass(J, L);
  std::vector<Scalar> prev(static_cast<std::size_t>(J), Scalar(0));
  for (Index l = 0; l < L; ++l) {
    const auto& ord = order[static_cast<std::size_t>(l)];
    const auto& ends = right_ends[static_cast<std::size_t>(l)];
    for (Index j = 0; j < J; ++j) {
      const Scalar mid = (u(j) + u(j + 1)) / 2;
      auto pos = static_cast<std::size_t>(std::upper_bound(ends.begin(), ends.end(), mid) -
                                          ends.begin());
      pos = std::min(pos, ord.size() - 1);
      const Scalar value = cdf(ord[pos], l);
      const Scalar level = (l == L - 1) ? Scalar(1) : value;
      mass(j, l) = (u(j + 1) - u(j)) * std::max(Scalar(0), level - prev[static_cast<std::size_t>(j)]);
      prev[static_cast<std::size_t>(j)] = std::max(level, prev[static_cast<std::size_t>(j)]);
    }
  }
  return GridCopula<Scalar>::trusted(std::move(u), v_breaks, std::move(mass));
}

}  // namespace detail

/// SI-rearrangement of a grid copula; the u-breakpoints of the result are the cumulative
/// widths of the per-level sorted cells.
///
/// Within a v-cell every conditional cdf is linear in v, so sorting at the cell ends is only
/// exact while no two cells swap order inside. The v-cells are therefore split at every
/// crossing first; the result is the pointwise rearrangement, not just its values at the
/// original v-breaks.
template <typename Scalar>
GridCopula<Scalar> si_rearrange(const GridCopula<Scalar>& g) {
  if (is_stochastically_increasing(g)) return g;
  const Index K = g.u_cells();
  const Index L = g.v_cells();
  Vector<Scalar> w(K);
  Matrix<Scalar> at(K, L + 1);
  const auto& c = g.cumulative();
  for (Index k = 0; k < K; ++k) {
    w(k) = g.du(k);
    for (Index l = 0; l <= L; ++l) at(k, l) = (c(k + 1, l) - c(k, l)) / w(k);
  }
  const auto& vb = g.v_breaks();
  const Scalar eps = Scalar(1e-12);
  std::vector<Scalar> v{Scalar(0)};
  std::vector<Index> cell{0};
  std::vector<Scalar> frac{Scalar(0)};
  for (Index l = 0; l < L; ++l) {
    std::vector<Scalar> ts;
    for (Index i = 0; i < K; ++i)
      for (Index j = i + 1; j < K; ++j) {
        const Scalar d0 = at(i, l) - at(j, l);
        const Scalar d1 = at(i, l + 1) - at(j, l + 1);
        if ((d0 > 0 && d1 < 0) || (d0 < 0 && d1 > 0)) ts.push_back(d0 / (d0 - d1));
      }
    std::sort(ts.begin(), ts.end());
    Scalar last = 0;
    for (Scalar t : ts) {
      if (t - last <= eps || t >= Scalar(1) - eps) continue;
      v.push_back(vb(l) + t * (vb(l + 1) - vb(l)));
      cell.push_back(l);
      frac.push_back(t);
      last = t;
    }
    v.push_back(vb(l + 1));
    cell.push_back(l);
    frac.push_back(Scalar(1));
  }
  const auto J = static_cast<Index>(v.size()) - 1;
  if (J == L) {
    Matrix<Scalar> cdf = at.rightCols(L);
    return detail::rearrange_weighted(w, cdf, vb);
  }
  Vector<Scalar> vr(J + 1);
  Matrix<Scalar> cdf(K, J);
  vr(0) = 0;
  for (Index j = 1; j <= J; ++j) {
    const auto s = static_cast<std::size_t>(j);
    vr(j) = v[s];
    const Index l = cell[s];
    const Scalar t = frac[s];
    for (Index k = 0; k < K; ++k) cdf(k, j - 1) = at(k, l) + t * (at(k, l + 1) - at(k, l));
  }
  vr(J) = 1;
  return detail::rearrange_weighted(w, cdf, vr);
}

/// Mirror image u -> 1 - u of a grid copula.
template <typename Scalar>
GridCopula<Scalar> flip_u(const GridCopula<Scalar>& g) {
  const Index K = g.u_cells();
  Vector<Scalar> u(K + 1);
  for (Index i = 0; i <= K; ++i) u(i) = Scalar(1) - g.u_breaks()(K - i);
  u(0) = 0;
  u(K) = 1;
  return GridCopula<Scalar>::trusted(std::move(u), g.v_breaks(), g.mass().colwise().reverse());
}

template <typename Scalar>
GridCopula<Scalar> sd_rearrange(const GridCopula<Scalar>& g) {
  return flip_u(si_rearrange(g));
}

/// Rearrangement of a multivariate conditional table into a bivariate SI grid copula.
template <typename Scalar>
GridCopula<Scalar> multivariate_rearrange(const ConditionalTable<Scalar>& t) {
  t.validate();
  return detail::rearrange_weighted(t.weights, t.cdf, uniform_breaks<Scalar>(t.cdf.cols()));
}

}  // namespace rdm

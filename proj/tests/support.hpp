#pragma once

// Shared generators and independent oracles for the test binaries. Nothing here calls the
// library's integration code: CDF values, conditional distribution functions and Monte Carlo
// estimates are recomputed from the raw cell masses.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "rdm/checkerboard.hpp"
#include "rdm/measures.hpp"
#include "rdm/rng.hpp"

namespace rdm::test {

/// Sinkhorn scaling of a positive matrix to the given row and column sums.
inline Matrix<double> sinkhorn(Matrix<double> m, const Vector<double>& rows, const Vector<double>& cols) {
  for (int it = 0; it < 5000; ++it) {
    for (Index k = 0; k < m.rows(); ++k) {
      const double s = m.row(k).sum();
      if (s > 0) m.row(k) *= rows(k) / s;
    }
    for (Index l = 0; l < m.cols(); ++l) {
      const double s = m.col(l).sum();
      if (s > 0) m.col(l) *= cols(l) / s;
    }
    const double err = (m.rowwise().sum() - rows).cwiseAbs().maxCoeff();
    if (err < 1e-14) break;
  }
  return m;
}

/// Random checkerboard matrix: random positive entries, some of them zeroed, then scaled.
inline Checkerboard random_checkerboard(Rng& rng, Index n1, Index n2, double zero_share = 0.3) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix<double> m(n1, n2);
  for (Index k = 0; k < n1; ++k)
    for (Index l = 0; l < n2; ++l) {
      const double x = unif(rng);
      m(k, l) = unif(rng) < zero_share ? 1e-3 * x : x * x * 4 + 0.01;
    }
  const Vector<double> rows = Vector<double>::Constant(n1, double(n2));
  const Vector<double> cols = Vector<double>::Constant(n2, double(n1));
  m = sinkhorn(std::move(m), rows, cols);
  // Near-decomposable patterns can stall the scaling; draw again in that case.
  if ((m.rowwise().sum() - rows).cwiseAbs().maxCoeff() > 1e-11 * double(n2))
    return random_checkerboard(rng, n1, n2, zero_share);
  return Checkerboard(std::move(m));
}

/// Random square checkerboard as a convex combination of scaled permutation matrices
/// (Birkhoff), so that exact zeros occur.
inline Checkerboard birkhoff_checkerboard(Rng& rng, Index n, int terms) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> w(static_cast<std::size_t>(terms));
  for (auto& x : w) x = unif(rng) + 0.05;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  Matrix<double> m = Matrix<double>::Zero(n, n);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (int t = 0; t < terms; ++t) {
    std::iota(perm.begin(), perm.end(), Index(0));
    std::shuffle(perm.begin(), perm.end(), rng);
    for (Index k = 0; k < n; ++k) m(k, perm[static_cast<std::size_t>(k)]) += double(n) * w[std::size_t(t)] / total;
  }
  return Checkerboard(std::move(m));
}

inline Vector<double> random_breaks(Rng& rng, Index cells) {
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  Vector<double> w(cells);
  for (Index i = 0; i < cells; ++i) w(i) = unif(rng);
  w /= w.sum();
  Vector<double> b(cells + 1);
  b(0) = 0;
  for (Index i = 0; i < cells; ++i) b(i + 1) = b(i) + w(i);
  b(cells) = 1;
  return b;
}

/// Random grid copula with unequal cell widths.
inline Grid random_grid(Rng& rng, Index k, Index l) {
  const Vector<double> u = random_breaks(rng, k);
  const Vector<double> v = random_breaks(rng, l);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix<double> m(k, l);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < l; ++j) m(i, j) = std::pow(unif(rng), 3) + 0.001;
  Vector<double> rows(k);
  Vector<double> cols(l);
  for (Index i = 0; i < k; ++i) rows(i) = u(i + 1) - u(i);
  for (Index j = 0; j < l; ++j) cols(j) = v(j + 1) - v(j);
  return Grid(u, v, sinkhorn(std::move(m), rows, cols));
}

/// C(u, v) by summing the overlap of [0,u]x[0,v] with every cell.
inline double cdf_oracle(const Grid& g, double u, double v) {
  double acc = 0;
  for (Index k = 0; k < g.u_cells(); ++k) {
    const double a = g.u_breaks()(k);
    const double fu = std::clamp((u - a) / g.du(k), 0.0, 1.0);
    if (fu == 0) continue;
    for (Index l = 0; l < g.v_cells(); ++l) {
      const double b = g.v_breaks()(l);
      const double fv = std::clamp((v - b) / g.dv(l), 0.0, 1.0);
      acc += g.mass()(k, l) * fu * fv;
    }
  }
  return acc;
}

/// d1 C(u, v): conditional distribution function of V given U = u.
inline double partial1_oracle(const Grid& g, double u, double v) {
  Index k = 0;
  while (k + 1 < g.u_cells() && u >= g.u_breaks()(k + 1)) ++k;
  double acc = 0;
  for (Index l = 0; l < g.v_cells(); ++l)
    acc += g.mass()(k, l) * std::clamp((v - g.v_breaks()(l)) / g.dv(l), 0.0, 1.0);
  return acc / g.du(k);
}

/// Draws (U, V) from the density of a grid copula.
class GridSampler {
 public:
  explicit GridSampler(const Grid& g) : g_(g) {
    double acc = 0;
    for (Index k = 0; k < g.u_cells(); ++k)
      for (Index l = 0; l < g.v_cells(); ++l) {
        acc += g.mass()(k, l);
        cum_.push_back(acc);
      }
  }
  std::pair<double, double> operator()(Rng& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double x = unif(rng) * cum_.back();
    const auto idx = static_cast<Index>(std::upper_bound(cum_.begin(), cum_.end(), x) - cum_.begin());
    const Index k = std::min(idx, Index(cum_.size()) - 1) / g_.v_cells();
    const Index l = std::min(idx, Index(cum_.size()) - 1) % g_.v_cells();
    return {g_.u_breaks()(k) + unif(rng) * g_.du(k), g_.v_breaks()(l) + unif(rng) * g_.dv(l)};
  }

 private:
  const Grid& g_;
  std::vector<double> cum_;
};

struct McEstimate {
  double mean = 0;
  double se = 0;
};

template <typename F>
McEstimate mc_mean(F&& draw, std::size_t n) {
  double s = 0, ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = draw();
    s += x;
    ss += x * x;
  }
  const double mean = s / double(n);
  const double var = std::max(0.0, ss / double(n) - mean * mean);
  return {mean, std::sqrt(var / double(n))};
}

/// Monte Carlo oracle for measure(g, kind), reported on the scale of the measure (the
/// standard error is propagated through the affine or power map).
inline McEstimate mc_measure(const Grid& g, MeasureKind kind, Rng& rng, std::size_t draws) {
  GridSampler sampler(g);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  switch (kind.type) {
    case MeasureType::rho: {
      auto e = mc_mean([&] { auto [u, v] = sampler(rng); return u * v; }, draws);
      return {12 * e.mean - 3, 12 * e.se};
    }
    case MeasureType::tau: {
      auto e = mc_mean([&] {
        auto [u1, v1] = sampler(rng);
        auto [u2, v2] = sampler(rng);
        const double s = (u1 - u2) * (v1 - v2);
        return s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0);
      }, draws);
      return e;
    }
    case MeasureType::gini: {
      auto e = mc_mean([&] {
        auto [u, v] = sampler(rng);
        return 2 * (std::abs(u + v - 1) - std::abs(u - v));
      }, draws);
      return e;
    }
    case MeasureType::blomqvist: {
      auto e = mc_mean([&] { auto [u, v] = sampler(rng); return (u <= 0.5 && v <= 0.5) ? 1.0 : 0.0; },
                       draws);
      return {4 * e.mean - 1, 4 * e.se};
    }
    case MeasureType::sigma: {
      const double p = kind.p;
      const double norm = 2 * std::beta(p + 2, p + 1) / (p + 1);
      auto e = mc_mean([&] {
        const double u = unif(rng), v = unif(rng);
        return std::pow(std::abs(cdf_oracle(g, u, v) - u * v), p) / norm;
      }, draws);
      const double m = std::max(e.mean, 1e-300);
      return {std::pow(m, 1 / p), std::pow(m, 1 / p - 1) / p * e.se};
    }
    case MeasureType::zeta1: {
      auto e = mc_mean([&] {
        const double u = unif(rng), v = unif(rng);
        return 3 * std::abs(partial1_oracle(g, u, v) - v);
      }, draws);
      return e;
    }
    case MeasureType::r: {
      auto e = mc_mean([&] {
        const double u = unif(rng), v = unif(rng);
        const double d = partial1_oracle(g, u, v) - v;
        return 6 * d * d;
      }, draws);
      return e;
    }
  }
  return {};
}

/// Majorization criterion for SI: partial row sums are nonincreasing down the rows.
inline bool majorization_ordered(const Checkerboard& a, double tol = 1e-12) {
  for (Index k = 1; k < a.rows(); ++k) {
    double lo = 0, hi = 0;
    for (Index l = 0; l < a.cols(); ++l) {
      hi += a(k - 1, l);
      lo += a(k, l);
      if (lo > hi + tol * double(a.cols())) return false;
    }
  }
  return true;
}

inline std::vector<Index> random_permutation(Rng& rng, Index n) {
  std::vector<Index> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), Index(0));
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace rdm::test

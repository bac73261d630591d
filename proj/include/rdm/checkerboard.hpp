#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rdm/detail/integration.hpp"
#include "rdm/errors.hpp"
#include "rdm/step_function.hpp"

namespace rdm {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// N1 x N2 nonnegative matrix whose columns sum to N1 and rows sum to N2; the checkerboard
/// copula puts density a(k, l) on the cell [k/N1, (k+1)/N1) x [l/N2, (l+1)/N2).
template <typename Scalar>
class CheckerboardMatrix {
 public:
  /// Validates the margin constraints to relative tolerance 1e-10 and renormalizes.
  explicit CheckerboardMatrix(Matrix<Scalar> entries) : a_(std::move(entries)) {
    validate_and_renormalize();
  }

  /// Wraps entries produced by an operation that preserves the constraints exactly.
  static CheckerboardMatrix trusted(Matrix<Scalar> entries) {
    CheckerboardMatrix out;
    out.a_ = std::move(entries);
    return out;
  }

  static CheckerboardMatrix independence(Index rows, Index cols) {
    return trusted(Matrix<Scalar>::Ones(rows, cols));
  }

  /// The N x N checkerboard of the comonotone copula M.
  static CheckerboardMatrix comonotone(Index n) {
    return trusted(Matrix<Scalar>::Identity(n, n) * Scalar(n));
  }

  /// N x N matrix with entry N at (k, perm[k]); perm is a permutation of 0..N-1.
  static CheckerboardMatrix from_permutation(std::span<const Index> perm) {
    const auto n = static_cast<Index>(perm.size());
    Matrix<Scalar> a = Matrix<Scalar>::Zero(n, n);
    std::vector<bool> seen(perm.size(), false);
    for (Index k = 0; k < n; ++k) {
      const Index l = perm[static_cast<std::size_t>(k)];
      if (l < 0 || l >= n || seen[static_cast<std::size_t>(l)])
        throw InvariantError("from_permutation: not a permutation");
      seen[static_cast<std::size_t>(l)] = true;
      a(k, l) = Scalar(n);
    }
    return trusted(std::move(a));
  }

  Index rows() const { return a_.rows(); }
  Index cols() const { return a_.cols(); }
  const Matrix<Scalar>& entries() const { return a_; }
  Scalar operator()(Index k, Index l) const { return a_(k, l); }

  friend bool operator==(const CheckerboardMatrix& x, const CheckerboardMatrix& y) {
    return x.a_.rows() == y.a_.rows() && x.a_.cols() == y.a_.cols() && x.a_ == y.a_;
  }

 private:
  CheckerboardMatrix() = default;

  void validate_and_renormalize() {
    const Index n1 = a_.rows();
    const Index n2 = a_.cols();
    if (n1 < 1 || n2 < 1) throw InvariantError("CheckerboardMatrix: empty matrix");
    const Scalar tol = Scalar(1e-10);
    for (Index k = 0; k < n1; ++k) {
      for (Index l = 0; l < n2; ++l) {
        if (!std::isfinite(a_(k, l))) throw InvariantError("CheckerboardMatrix: non-finite entry");
        if (a_(k, l) < -tol * n2) throw InvariantError("CheckerboardMatrix: negative entry");
        a_(k, l) = std::max(a_(k, l), Scalar(0));
      }
    }
    for (Index k = 0; k < n1; ++k) {
      if (std::abs(a_.row(k).sum() - Scalar(n2)) > tol * n2)
        throw InvariantError("CheckerboardMatrix: row " + std::to_string(k) + " does not sum to N2");
    }
    for (Index l = 0; l < n2; ++l) {
      if (std::abs(a_.col(l).sum() - Scalar(n1)) > tol * n1)
        throw InvariantError("CheckerboardMatrix: column " + std::to_string(l) +
                             " does not sum to N1");
    }
    for (Index k = 0; k < n1; ++k) a_.row(k) *= Scalar(n2) / a_.row(k).sum();
    for (Index l = 0; l < n2; ++l) a_.col(l) *= Scalar(n1) / a_.col(l).sum();
  }

  Matrix<Scalar> a_;
};

using Checkerboard = CheckerboardMatrix<double>;

/// Copula with constant density on the cells of a (possibly non-uniform) rectangular grid.
/// mass(k, l) is the probability of [u_k, u_{k+1}) x [v_l, v_{l+1}).
template <typename Scalar>
class GridCopula {
 public:
  GridCopula(Vector<Scalar> u_breaks, Vector<Scalar> v_breaks, Matrix<Scalar> mass)
      : u_(std::move(u_breaks)), v_(std::move(v_breaks)), mass_(std::move(mass)) {
    validate();
    build_cumulative();
  }

  static GridCopula trusted(Vector<Scalar> u_breaks, Vector<Scalar> v_breaks,
                            Matrix<Scalar> mass) {
    GridCopula out;
    out.u_ = std::move(u_breaks);
    out.v_ = std::move(v_breaks);
    out.mass_ = std::move(mass);
    out.build_cumulative();
    return out;
  }

  const Vector<Scalar>& u_breaks() const { return u_; }
  const Vector<Scalar>& v_breaks() const { return v_; }
  const Matrix<Scalar>& mass() const { return mass_; }
  /// cumulative()(i, j) = C(u_i, v_j).
  const Matrix<Scalar>& cumulative() const { return cum_; }
  Index u_cells() const { return mass_.rows(); }
  Index v_cells() const { return mass_.cols(); }
  Scalar du(Index k) const { return u_(k + 1) - u_(k); }
  Scalar dv(Index l) const { return v_(l + 1) - v_(l); }

  /// Conditional distribution u -> d/du C(u, v) on u-cell k (constant in u, linear in v).
  Scalar partial1(Index k, Scalar v) const {
    const Index l = detail::locate(v_, v);
    const Scalar t = (v - v_(l)) / dv(l);
    return (cum_(k + 1, l) - cum_(k, l) + t * mass_(k, l)) / du(k);
  }

 private:
  GridCopula() = default;

  void validate() const {
    auto check_breaks = [](const Vector<Scalar>& b, const char* name) {
      if (b.size() < 2) throw InvariantError(std::string("GridCopula: too few ") + name);
      if (b(0) != Scalar(0) || b(b.size() - 1) != Scalar(1))
        throw InvariantError(std::string("GridCopula: ") + name + " must run from 0 to 1");
      for (Index i = 1; i < b.size(); ++i)
        if (!(b(i) > b(i - 1)))
          throw InvariantError(std::string("GridCopula: ") + name + " must increase strictly");
    };
    check_breaks(u_, "u_breaks");
    check_breaks(v_, "v_breaks");
    if (mass_.rows() != u_.size() - 1 || mass_.cols() != v_.size() - 1)
      throw InvariantError("GridCopula: mass shape does not match the breakpoints");
    const Scalar tol = Scalar(1e-10);
    if ((mass_.array() < -tol).any()) throw InvariantError("GridCopula: negative cell mass");
    for (Index k = 0; k < mass_.rows(); ++k)
      if (std::abs(mass_.row(k).sum() - (u_(k + 1) - u_(k))) > tol)
        throw InvariantError("GridCopula: u-margin is not uniform");
    for (Index l = 0; l < mass_.cols(); ++l)
      if (std::abs(mass_.col(l).sum() - (v_(l + 1) - v_(l))) > tol)
        throw InvariantError("GridCopula: v-margin is not uniform");
  }

  void build_cumulative() {
    const Index K = mass_.rows();
    const Index L = mass_.cols();
    cum_ = Matrix<Scalar>::Zero(K + 1, L + 1);
    for (Index k = 0; k < K; ++k)
      for (Index l = 0; l < L; ++l)
        cum_(k + 1, l + 1) = cum_(k, l + 1) + cum_(k + 1, l) - cum_(k, l) + mass_(k, l);
  }

  Vector<Scalar> u_;
  Vector<Scalar> v_;
  Matrix<Scalar> mass_;
  Matrix<Scalar> cum_;
};

using Grid = GridCopula<double>;

template <typename Scalar>
Vector<Scalar> uniform_breaks(Index cells) {
  Vector<Scalar> b(cells + 1);
  for (Index i = 0; i <= cells; ++i) b(i) = Scalar(i) / Scalar(cells);
  b(cells) = Scalar(1);
  return b;
}

/// Embeds a checkerboard matrix as a uniform-grid copula, m = a / (N1 N2).
template <typename Scalar>
GridCopula<Scalar> as_grid(const CheckerboardMatrix<Scalar>& a) {
  const Index n1 = a.rows();
  const Index n2 = a.cols();
  return GridCopula<Scalar>::trusted(uniform_breaks<Scalar>(n1), uniform_breaks<Scalar>(n2),
                                     a.entries() / Scalar(n1 * n2));
}

/// C(u, v): bilinear interpolation of the cumulative masses, exact on breakpoints.
template <typename Scalar>
Scalar eval_cdf(const GridCopula<Scalar>& g, Scalar u, Scalar v) {
  if (!(u >= 0 && u <= 1 && v >= 0 && v <= 1))
    throw DomainError("eval_cdf: (u, v) must lie in [0,1]^2");
  const Index k = detail::locate(g.u_breaks(), u);
  const Index l = detail::locate(g.v_breaks(), v);
  const Scalar s = (u - g.u_breaks()(k)) / g.du(k);
  const Scalar t = (v - g.v_breaks()(l)) / g.dv(l);
  const auto& c = g.cumulative();
  return c(k, l) + s * (c(k + 1, l) - c(k, l)) + t * (c(k, l + 1) - c(k, l)) +
         s * t * g.mass()(k, l);
}

template <typename Scalar>
Scalar eval_cdf(const CheckerboardMatrix<Scalar>& a, Scalar u, Scalar v) {
  return eval_cdf(as_grid(a), u, v);
}

/// For each v-breakpoint v_l (l = 1..L) the step function u -> d/du C(u, v_l).
template <typename Scalar>
std::vector<StepFunction<Scalar>> partial1_slices(const GridCopula<Scalar>& g) {
  using Piece = typename StepFunction<Scalar>::Piece;
  std::vector<StepFunction<Scalar>> slices;
  slices.reserve(static_cast<std::size_t>(g.v_cells()));
  const auto& c = g.cumulative();
  for (Index l = 1; l <= g.v_cells(); ++l) {
    std::vector<Piece> pieces;
    pieces.reserve(static_cast<std::size_t>(g.u_cells()));
    for (Index k = 0; k < g.u_cells(); ++k)
      pieces.push_back({g.du(k), (c(k + 1, l) - c(k, l)) / g.du(k)});
    slices.emplace_back(std::move(pieces));
  }
  return slices;
}

/// Checkerboard of a copula given by its CDF: a(k, l) = N1 N2 V_C(cell), each cell volume by
/// inclusion-exclusion of four corner evaluations.
template <typename Scalar, typename Cdf>
CheckerboardMatrix<Scalar> induced_checkerboard(Cdf&& cdf, Index n1, Index n2) {
  if (n1 < 1 || n2 < 1) throw DomainError("induced_checkerboard: N1, N2 must be positive");
  Matrix<Scalar> corner(n1 + 1, n2 + 1);
  for (Index k = 0; k <= n1; ++k)
    for (Index l = 0; l <= n2; ++l)
      corner(k, l) = cdf(Scalar(k) / Scalar(n1), Scalar(l) / Scalar(n2));
  Matrix<Scalar> a(n1, n2);
  for (Index k = 0; k < n1; ++k)
    for (Index l = 0; l < n2; ++l) {
      const Scalar vol = corner(k + 1, l + 1) - corner(k, l + 1) - corner(k + 1, l) + corner(k, l);
      a(k, l) = std::max(Scalar(0), vol * Scalar(n1 * n2));
    }
  return CheckerboardMatrix<Scalar>(std::move(a));
}

namespace detail {

/// Fraction of the fine cell [i/n, (i+1)/n) falling into each coarse cell [k/N, (k+1)/N).
template <typename Scalar>
Matrix<Scalar> overlap_fractions(Index n, Index coarse) {
  Matrix<Scalar> f = Matrix<Scalar>::Zero(n, coarse);
  for (Index i = 0; i < n; ++i) {
    // In units of 1/(n * coarse): fine cell [i*coarse, (i+1)*coarse), coarse cell [k*n, (k+1)*n).
    const std::int64_t lo = static_cast<std::int64_t>(i) * coarse;
    const std::int64_t hi = lo + coarse;
    for (std::int64_t k = lo / n; k * n < hi && k < coarse; ++k) {
      const std::int64_t overlap = std::min(hi, (k + 1) * n) - std::max(lo, k * n);
      if (overlap > 0) f(i, static_cast<Index>(k)) = Scalar(overlap) / Scalar(coarse);
    }
  }
  return f;
}

}  // namespace detail

/// Checkerboard of resolution N1 x N2 carrying the same cell masses as the fine checkerboard
/// P, splitting fine cells by exact overlap length.
template <typename Scalar>
CheckerboardMatrix<Scalar> coarsen(const CheckerboardMatrix<Scalar>& p, Index n1, Index n2) {
  if (n1 < 1 || n2 < 1) throw DomainError("coarsen: N1, N2 must be positive");
  if (n1 > p.rows() || n2 > p.cols())
    throw DomainError("coarsen: bandwidth exceeds the resolution of the input");
  const Matrix<Scalar> fx = detail::overlap_fractions<Scalar>(p.rows(), n1);
  const Matrix<Scalar> fy = detail::overlap_fractions<Scalar>(p.cols(), n2);
  const Scalar scale = Scalar(n1 * n2) / Scalar(p.rows() * p.cols());
  Matrix<Scalar> a = scale * (fx.transpose() * p.entries() * fy);
  return CheckerboardMatrix<Scalar>(std::move(a));
}

/// Checkerboard of the Markov product C_A * C_B for square matrices of equal size.
template <typename Scalar>
CheckerboardMatrix<Scalar> markov_product(const CheckerboardMatrix<Scalar>& a,
                                          const CheckerboardMatrix<Scalar>& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw DomainError("markov_product: matrices must be square and of equal size");
  Matrix<Scalar> prod = (a.entries() * b.entries()) / Scalar(a.rows());
  return CheckerboardMatrix<Scalar>(std::move(prod));
}

/// D_p(C1, C2) = (int int |d1 C1 - d1 C2|^p du dv)^(1/p), integrated exactly on the merged grid:
/// the integrand is constant in u and linear in v on every merged cell.
template <typename Scalar>
Scalar d_p_distance(const GridCopula<Scalar>& g1, const GridCopula<Scalar>& g2, Scalar p) {
  if (!(p >= 1)) throw DomainError("d_p_distance: p must be >= 1");
  const auto us = detail::merge_breaks(g1.u_breaks(), g2.u_breaks());
  const auto vs = detail::merge_breaks(g1.v_breaks(), g2.v_breaks());
  Scalar acc = 0;
  for (std::size_t i = 0; i + 1 < us.size(); ++i) {
    const Scalar mid = (us[i] + us[i + 1]) / 2;
    const Index k1 = detail::locate(g1.u_breaks(), mid);
    const Index k2 = detail::locate(g2.u_breaks(), mid);
    Scalar row = 0;
    for (std::size_t j = 0; j + 1 < vs.size(); ++j) {
      // Evaluate both slices just inside the merged cell so each side stays on one linear piece.
      const Scalar v0 = vs[j];
      const Scalar v1 = vs[j + 1];
      const Scalar vm = (v0 + v1) / 2;
      const Index l1 = detail::locate(g1.v_breaks(), vm);
      const Index l2 = detail::locate(g2.v_breaks(), vm);
      auto slice = [](const GridCopula<Scalar>& g, Index k, Index l, Scalar v) {
        const Scalar t = (v - g.v_breaks()(l)) / g.dv(l);
        const auto& c = g.cumulative();
        return (c(k + 1, l) - c(k, l) + t * g.mass()(k, l)) / g.du(k);
      };
      const Scalar d0 = slice(g1, k1, l1, v0) - slice(g2, k2, l2, v0);
      const Scalar d1 = slice(g1, k1, l1, v1) - slice(g2, k2, l2, v1);
      row += detail::integrate_abs_pow_linear(d0, d1, v1 - v0, p);
    }
    acc += (us[i + 1] - us[i]) * row;
  }
  return std::pow(acc, Scalar(1) / p);
}

template <typename Scalar>
Scalar d_p_distance(const CheckerboardMatrix<Scalar>& a, const CheckerboardMatrix<Scalar>& b,
                    Scalar p) {
  return d_p_distance(as_grid(a), as_grid(b), p);
}

}  // namespace rdm

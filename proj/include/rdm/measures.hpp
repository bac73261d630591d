#pragma once

#include <cmath>
#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "rdm/checkerboard.hpp"
#include "rdm/detail/integration.hpp"
#include "rdm/errors.hpp"
#include "rdm/rearrangement.hpp"

namespace rdm {

enum class MeasureType { rho, tau, gini, blomqvist, sigma, zeta1, r };

struct MeasureKind {
  MeasureType type = MeasureType::rho;
  double p = 1.0;  // exponent of the Schweizer-Wolff measure; unused otherwise

  static MeasureKind sigma(double p) {
    if (!(p >= 1.0)) throw DomainError("sigma_p requires p >= 1");
    return {MeasureType::sigma, p};
  }

  /// Blomqvist's beta is the one kind for which the rearranged measure is not a valid
  /// dependence measure: it can reach 1 on SI copulas other than M.
  bool axiom_valid() const { return type != MeasureType::blomqvist; }

  bool is_concordance() const {
    return type == MeasureType::rho || type == MeasureType::tau || type == MeasureType::gini ||
           type == MeasureType::blomqvist;
  }

  std::string name() const {
    switch (type) {
      case MeasureType::rho: return "rho";
      case MeasureType::tau: return "tau";
      case MeasureType::gini: return "gini";
      case MeasureType::blomqvist: return "beta";
      case MeasureType::zeta1: return "zeta1";
      case MeasureType::r: return "r";
      case MeasureType::sigma: {
        if (p == 1.0) return "sw1";
        if (p == 2.0) return "sw2";
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof buf, p);
        return "sw" + std::string(buf, res.ptr);
      }
    }
    return "?";
  }

  friend bool operator==(const MeasureKind& a, const MeasureKind& b) {
    return a.type == b.type && (a.type != MeasureType::sigma || a.p == b.p);
  }
};

/// Parses rho, tau, gini, beta, sw1, sw2, sw<p>, zeta1, r.
inline MeasureKind parse_measure(std::string_view s) {
  if (s == "rho") return {MeasureType::rho};
  if (s == "tau") return {MeasureType::tau};
  if (s == "gini") return {MeasureType::gini};
  if (s == "beta") return {MeasureType::blomqvist};
  if (s == "zeta1") return {MeasureType::zeta1};
  if (s == "r") return {MeasureType::r};
  if (s.size() > 2 && s.substr(0, 2) == "sw") {
    double p = 0;
    const auto body = s.substr(2);
    auto res = std::from_chars(body.data(), body.data() + body.size(), p);
    if (res.ec == std::errc() && res.ptr == body.data() + body.size() && p >= 1.0)
      return MeasureKind::sigma(p);
  }
  throw ConfigError("unknown measure '" + std::string(s) +
                    "' (expected rho, tau, gini, beta, sw1, sw2, sw<p>, zeta1 or r)");
}

namespace detail {

/// C evaluated on every point of a breakpoint lattice.
template <typename Scalar>
Matrix<Scalar> cdf_on_lattice(const GridCopula<Scalar>& g, const std::vector<Scalar>& us,
                              const std::vector<Scalar>& vs) {
  Matrix<Scalar> out(static_cast<Index>(us.size()), static_cast<Index>(vs.size()));
  for (std::size_t i = 0; i < us.size(); ++i)
    for (std::size_t j = 0; j < vs.size(); ++j)
      out(static_cast<Index>(i), static_cast<Index>(j)) = eval_cdf(g, us[i], vs[j]);
  return out;
}

template <typename Scalar>
std::vector<Scalar> to_std(const Vector<Scalar>& v) {
  return std::vector<Scalar>(v.data(), v.data() + v.size());
}

/// ||M - Pi||_p^p = 2 B(p + 2, p + 1) / (p + 1).
inline double comonotone_norm_pow(double p) {
  if (p == 1.0) return 1.0 / 12.0;
  if (p == 2.0) return 1.0 / 90.0;
  return 2.0 * std::beta(p + 2.0, p + 1.0) / (p + 1.0);
}

/// int_0^1 int_0^1 |D(s, t)|^p ds dt for the bilinear D with corner values d00, d10, d01, d11
/// (first index s). The inner integral is exact; the outer one is adaptive Gauss-Legendre on
/// the pieces between the zeros of the endpoint lines.
template <typename Scalar>
Scalar bilinear_abs_pow(Scalar d00, Scalar d10, Scalar d01, Scalar d11, Scalar p) {
  if (p == Scalar(2)) {
    const Scalar a[2][2] = {{d00, d01}, {d10, d11}};
    const Scalar w[2][2] = {{Scalar(1) / 3, Scalar(1) / 6}, {Scalar(1) / 6, Scalar(1) / 3}};
    Scalar acc = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) acc += w[i][k] * w[j][l] * a[i][j] * a[k][l];
    return acc;
  }
  auto inner = [&](Scalar t) {
    const Scalar left = d00 + (d01 - d00) * t;
    const Scalar right = d10 + (d11 - d10) * t;
    return integrate_abs_pow_linear(left, right, Scalar(1), p);
  };
  std::vector<Scalar> cuts{Scalar(0), Scalar(1)};
  auto add_root = [&](Scalar a, Scalar b) {
    if ((a < 0 && b > 0) || (a > 0 && b < 0)) cuts.push_back(a / (a - b));
  };
  add_root(d00, d01);
  add_root(d10, d11);
  add_root(d10 - d00, d11 - d01);
  std::sort(cuts.begin(), cuts.end());
  Scalar acc = 0;
  const Scalar scale =
      std::pow(std::max({std::abs(d00), std::abs(d10), std::abs(d01), std::abs(d11)}), p);
  if (scale == 0) return Scalar(0);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i])
      acc += adaptive_gauss_legendre<Scalar>(inner, cuts[i], cuts[i + 1], Scalar(1e-12) * scale);
  return acc;
}

}  // namespace detail

/// Q(C1, C2) = 4 int C1 dC2 - 1. On each cell of the merged grid C1 is bilinear and C2 has
/// constant density, so the cell integral is the density times the corner average of C1.
template <typename Scalar>
Scalar concordance_Q(const GridCopula<Scalar>& g1, const GridCopula<Scalar>& g2) {
  const auto us = detail::merge_breaks(g1.u_breaks(), g2.u_breaks());
  const auto vs = detail::merge_breaks(g1.v_breaks(), g2.v_breaks());
  const Matrix<Scalar> c1 = detail::cdf_on_lattice(g1, us, vs);
  Scalar acc = 0;
  for (std::size_t i = 0; i + 1 < us.size(); ++i) {
    const Scalar du = us[i + 1] - us[i];
    const Index k2 = detail::locate(g2.u_breaks(), (us[i] + us[i + 1]) / 2);
    const Scalar col_density = g2.du(k2);
    for (std::size_t j = 0; j + 1 < vs.size(); ++j) {
      const Scalar dv = vs[j + 1] - vs[j];
      const Index l2 = detail::locate(g2.v_breaks(), (vs[j] + vs[j + 1]) / 2);
      const Scalar density = g2.mass()(k2, l2) / (col_density * g2.dv(l2));
      const auto a = static_cast<Index>(i);
      const auto b = static_cast<Index>(j);
      const Scalar avg = (c1(a, b) + c1(a + 1, b) + c1(a, b + 1) + c1(a + 1, b + 1)) / 4;
      acc += density * du * dv * avg;
    }
  }
  return 4 * acc - 1;
}

template <typename Scalar>
Scalar concordance_Q(const CheckerboardMatrix<Scalar>& a, const CheckerboardMatrix<Scalar>& b) {
  return concordance_Q(as_grid(a), as_grid(b));
}

namespace detail {

template <typename Scalar>
Scalar spearman_rho(const GridCopula<Scalar>& g) {
  const auto& c = g.cumulative();
  Scalar acc = 0;
  for (Index k = 0; k < g.u_cells(); ++k)
    for (Index l = 0; l < g.v_cells(); ++l)
      acc += g.du(k) * g.dv(l) * (c(k, l) + c(k + 1, l) + c(k, l + 1) + c(k + 1, l + 1)) / 4;
  return 12 * acc - 3;
}

/// 4 (int C(u, u) du + int C(u, 1 - u) du) - 2; C is quadratic along both diagonals between
/// consecutive grid crossings, so Simpson's rule per piece is exact.
template <typename Scalar>
Scalar gini_gamma(const GridCopula<Scalar>& g) {
  auto diagonal_integral = [&](bool anti) {
    std::vector<Scalar> cuts = to_std(g.u_breaks());
    for (Index l = 0; l < g.v_breaks().size(); ++l)
      cuts.push_back(anti ? Scalar(1) - g.v_breaks()(l) : g.v_breaks()(l));
    std::sort(cuts.begin(), cuts.end());
    auto f = [&](Scalar u) {
      const Scalar v = std::clamp(anti ? Scalar(1) - u : u, Scalar(0), Scalar(1));
      return eval_cdf(g, std::clamp(u, Scalar(0), Scalar(1)), v);
    };
    Scalar acc = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      if (cuts[i + 1] - cuts[i] > Scalar(1e-15)) acc += simpson<Scalar>(f, cuts[i], cuts[i + 1]);
    return acc;
  };
  return 4 * (diagonal_integral(false) + diagonal_integral(true)) - 2;
}

template <typename Scalar>
Scalar schweizer_wolff(const GridCopula<Scalar>& g, Scalar p) {
  const auto& c = g.cumulative();
  const auto& u = g.u_breaks();
  const auto& v = g.v_breaks();
  Scalar acc = 0;
  for (Index k = 0; k < g.u_cells(); ++k)
    for (Index l = 0; l < g.v_cells(); ++l) {
      const Scalar d00 = c(k, l) - u(k) * v(l);
      const Scalar d10 = c(k + 1, l) - u(k + 1) * v(l);
      const Scalar d01 = c(k, l + 1) - u(k) * v(l + 1);
      const Scalar d11 = c(k + 1, l + 1) - u(k + 1) * v(l + 1);
      acc += g.du(k) * g.dv(l) * bilinear_abs_pow(d00, d10, d01, d11, p);
    }
  return std::pow(acc / Scalar(comonotone_norm_pow(double(p))), Scalar(1) / p);
}

/// int int |d1 C(u, v) - v|^p du dv; the integrand is constant in u and linear in v per cell.
template <typename Scalar>
Scalar conditional_deviation(const GridCopula<Scalar>& g, Scalar p) {
  const auto& c = g.cumulative();
  const auto& v = g.v_breaks();
  Scalar acc = 0;
  for (Index k = 0; k < g.u_cells(); ++k) {
    const Scalar du = g.du(k);
    Scalar row = 0;
    for (Index l = 0; l < g.v_cells(); ++l) {
      const Scalar g0 = (c(k + 1, l) - c(k, l)) / du - v(l);
      const Scalar g1 = (c(k + 1, l + 1) - c(k, l + 1)) / du - v(l + 1);
      row += integrate_abs_pow_linear(g0, g1, g.dv(l), p);
    }
    acc += du * row;
  }
  return acc;
}

}  // namespace detail

template <typename Scalar>
Scalar measure(const GridCopula<Scalar>& g, MeasureKind kind) {
  switch (kind.type) {
    case MeasureType::rho: return detail::spearman_rho(g);
    case MeasureType::tau: return concordance_Q(g, g);
    case MeasureType::gini: return detail::gini_gamma(g);
    case MeasureType::blomqvist: return 4 * eval_cdf(g, Scalar(0.5), Scalar(0.5)) - 1;
    case MeasureType::sigma: return detail::schweizer_wolff(g, Scalar(kind.p));
    case MeasureType::zeta1: return 3 * detail::conditional_deviation(g, Scalar(1));
    case MeasureType::r: return 6 * detail::conditional_deviation(g, Scalar(2));
  }
  throw UnsupportedError("measure: unknown kind");
}

template <typename Scalar>
Scalar measure(const CheckerboardMatrix<Scalar>& a, MeasureKind kind) {
  return measure(as_grid(a), kind);
}

/// R_mu(C) = mu of the SI-rearrangement of C.
template <typename Scalar>
Scalar rearranged_measure(const GridCopula<Scalar>& g, MeasureKind kind) {
  return measure(si_rearrange(g), kind);
}

template <typename Scalar>
Scalar rearranged_measure(const CheckerboardMatrix<Scalar>& a, MeasureKind kind) {
  return measure(as_grid(si_rearrange(a)), kind);
}

}  // namespace rdm

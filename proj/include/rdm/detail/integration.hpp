#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Core>

namespace rdm::detail {

/// Sorted union of two breakpoint sequences on [0, 1]; points closer than `tol` are merged.
template <typename Scalar>
std::vector<Scalar> merge_breaks(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& a,
                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
                                 Scalar tol = Scalar(1e-14)) {
  std::vector<Scalar> out(a.data(), a.data() + a.size());
  out.insert(out.end(), b.data(), b.data() + b.size());
  std::sort(out.begin(), out.end());
  std::vector<Scalar> merged;
  merged.reserve(out.size());
  for (Scalar x : out) {
    if (merged.empty() || x - merged.back() > tol) merged.push_back(x);
  }
  merged.front() = Scalar(0);
  merged.back() = Scalar(1);
  return merged;
}

/// Index of the cell [breaks[k], breaks[k+1]) containing x, clamped to the last cell.
template <typename Scalar>
Eigen::Index locate(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& breaks, Scalar x) {
  const Scalar* first = breaks.data();
  const Scalar* last = breaks.data() + breaks.size();
  const auto it = std::upper_bound(first, last, x);
  const Eigen::Index cells = breaks.size() - 1;
  return std::clamp<Eigen::Index>(static_cast<Eigen::Index>(it - first) - 1, 0, cells - 1);
}

/// Integral of |g|^p over an interval of length h, where g is linear with endpoint values
/// g0 and g1. The interval is split at the sign change, then each monotone piece uses the
/// antiderivative |g|^(p+1) / ((p+1) |g'|).
template <typename Scalar>
Scalar integrate_abs_pow_linear(Scalar g0, Scalar g1, Scalar h, Scalar p) {
  if (h <= 0) return Scalar(0);
  auto monotone_piece = [p](Scalar a, Scalar b, Scalar len) -> Scalar {
    const Scalar aa = std::abs(a);
    const Scalar ab = std::abs(b);
    const Scalar span = std::abs(ab - aa);
    const Scalar scale = std::max(aa, ab);
    if (scale == 0) return Scalar(0);
    if (span <= Scalar(1e-7) * scale) {
      // Simpson on a nearly-constant integrand.
      const Scalar mid = std::abs((a + b) / 2);
      return len * (std::pow(aa, p) + 4 * std::pow(mid, p) + std::pow(ab, p)) / 6;
    }
    return len * std::abs(std::pow(ab, p + 1) - std::pow(aa, p + 1)) / ((p + 1) * span);
  };
  if ((g0 < 0 && g1 > 0) || (g0 > 0 && g1 < 0)) {
    const Scalar root = g0 / (g0 - g1);
    return monotone_piece(g0, Scalar(0), root * h) + monotone_piece(Scalar(0), g1, (1 - root) * h);
  }
  return monotone_piece(g0, g1, h);
}

inline constexpr std::array<double, 16> kGaussLegendre16Nodes = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
inline constexpr std::array<double, 16> kGaussLegendre16Weights = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

template <typename Scalar, typename F>
Scalar gauss_legendre16(F&& f, Scalar a, Scalar b) {
  const Scalar half = (b - a) / 2;
  const Scalar mid = (a + b) / 2;
  Scalar acc = 0;
  for (std::size_t i = 0; i < 16; ++i)
    acc += Scalar(kGaussLegendre16Weights[i]) * f(mid + half * Scalar(kGaussLegendre16Nodes[i]));
  return acc * half;
}

/// Adaptive 16-point Gauss-Legendre: bisects until the two halves agree with the whole.
template <typename Scalar, typename F>
Scalar adaptive_gauss_legendre(F&& f, Scalar a, Scalar b, Scalar tol, int depth = 0) {
  const Scalar whole = gauss_legendre16<Scalar>(f, a, b);
  const Scalar mid = (a + b) / 2;
  const Scalar left = gauss_legendre16<Scalar>(f, a, mid);
  const Scalar right = gauss_legendre16<Scalar>(f, mid, b);
  if (depth >= 30 || std::abs(left + right - whole) <= tol) return left + right;
  return adaptive_gauss_legendre<Scalar>(f, a, mid, tol / 2, depth + 1) +
         adaptive_gauss_legendre<Scalar>(f, mid, b, tol / 2, depth + 1);
}

/// Exact integral of a quadratic over [a, b] from three samples (Simpson's rule).
template <typename Scalar, typename F>
Scalar simpson(F&& f, Scalar a, Scalar b) {
  return (b - a) * (f(a) + 4 * f((a + b) / 2) + f(b)) / 6;
}

}  // namespace rdm::detail

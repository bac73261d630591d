#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rdm/errors.hpp"

namespace rdm {

/// Piecewise-constant function on [0, 1], stored left to right as (width, value) pieces.
template <typename Scalar>
class StepFunction {
 public:
  struct Piece {
    Scalar width;
    Scalar value;
    friend bool operator==(const Piece&, const Piece&) = default;
  };

  StepFunction() = default;

  explicit StepFunction(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw InvariantError("StepFunction: no pieces");
    Scalar total = 0;
    for (const auto& p : pieces_) {
      if (!(p.width > 0)) throw InvariantError("StepFunction: piece widths must be positive");
      total += p.width;
    }
    if (std::abs(total - Scalar(1)) > Scalar(1e-12))
      throw InvariantError("StepFunction: widths must sum to 1");
  }

  const std::vector<Piece>& pieces() const { return pieces_; }
  std::size_t size() const { return pieces_.size(); }

  Scalar operator()(Scalar u) const {
    Scalar left = 0;
    for (const auto& p : pieces_) {
      left += p.width;
      if (u < left) return p.value;
    }
    return pieces_.back().value;
  }

  /// Integral of the function over [0, u].
  Scalar integral(Scalar u = Scalar(1)) const {
    Scalar acc = 0;
    Scalar left = 0;
    for (const auto& p : pieces_) {
      if (u <= left) break;
      acc += p.value * std::min(p.width, u - left);
      left += p.width;
    }
    return acc;
  }

  Scalar lp_norm(Scalar p) const {
    Scalar acc = 0;
    for (const auto& piece : pieces_) acc += piece.width * std::pow(std::abs(piece.value), p);
    return std::pow(acc, Scalar(1) / p);
  }

  bool is_decreasing() const {
    return std::adjacent_find(pieces_.begin(), pieces_.end(), [](const Piece& a, const Piece& b) {
             return b.value > a.value;
           }) == pieces_.end();
  }

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

 private:
  std::vector<Piece> pieces_;
};

/// Decreasing rearrangement: pieces sorted by value, largest first; equal values keep their
/// original left-to-right order.
template <typename Scalar>
StepFunction<Scalar> decreasing_rearrangement(const StepFunction<Scalar>& f) {
  auto pieces = f.pieces();
  std::stable_sort(pieces.begin(), pieces.end(),
                   [](const auto& a, const auto& b) { return a.value > b.value; });
  return StepFunction<Scalar>(std::move(pieces));
}

}  // namespace rdm

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rdm/checkerboard.hpp"
#include "rdm/measures.hpp"

namespace rdm {

enum class ModelKind {
  independence,
  comonotone,
  countermonotone,
  gaussian,
  gumbel,
  ordinal_sum,     // 2 Pi on [0, 1/2]^2, M elsewhere
  noisy_parabola,  // (X, (X - 1/2)^2 + sigma Z), sampling only
};

struct CopulaModel {
  ModelKind kind = ModelKind::independence;
  double param = 0.0;  // p, theta or sigma

  static CopulaModel independence() { return {ModelKind::independence, 0.0}; }
  static CopulaModel comonotone() { return {ModelKind::comonotone, 0.0}; }
  static CopulaModel countermonotone() { return {ModelKind::countermonotone, 0.0}; }
  static CopulaModel gaussian(double p);
  static CopulaModel gumbel(double theta);
  static CopulaModel ordinal_sum() { return {ModelKind::ordinal_sum, 0.0}; }
  static CopulaModel noisy_parabola(double sigma);

  bool has_cdf() const { return kind != ModelKind::noisy_parabola; }
  bool has_parameter() const {
    return kind == ModelKind::gaussian || kind == ModelKind::gumbel ||
           kind == ModelKind::noisy_parabola;
  }
  /// Same family with a different parameter (validated).
  CopulaModel with_parameter(double value) const;
  /// Canonical specification string, e.g. "gauss:p=0.75".
  std::string spec() const;
};

/// Parses pi, m, w, gauss:p=<p>, gumbel:theta=<theta>, parabola:sigma=<sigma>, ordsum.
CopulaModel parse_model(std::string_view text);

double cdf(const CopulaModel& model, double u, double v);

struct Sample {
  std::vector<double> x;
  std::vector<double> y;
};

/// n i.i.d. draws, deterministic in seed.
Sample sample(const CopulaModel& model, std::size_t n, std::uint64_t seed);

/// Published closed form (or one-dimensional integral) of the rearranged measure R_mu of the
/// model; throws UnsupportedError for pairs without one.
double analytic_value(const CopulaModel& model, MeasureKind kind);

/// Induced checkerboard from exact rectangle volumes of the model CDF.
Checkerboard induced_checkerboard(const CopulaModel& model, Index n1, Index n2);

}  // namespace rdm

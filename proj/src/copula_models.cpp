#include "rdm/copula_models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rdm/errors.hpp"
#include "rdm/normal.hpp"
#include "rdm/rng.hpp"

namespace rdm {

CopulaModel CopulaModel::gaussian(double p) {
  if (!(p > -1.0 && p < 1.0)) throw DomainError("gaussian copula: p must lie in (-1, 1)");
  return {ModelKind::gaussian, p};
}

CopulaModel CopulaModel::gumbel(double theta) {
  if (!(theta >= 1.0) || !std::isfinite(theta))
    throw DomainError("gumbel copula: theta must be >= 1");
  return {ModelKind::gumbel, theta};
}

CopulaModel CopulaModel::noisy_parabola(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw DomainError("noisy parabola: sigma must be >= 0");
  return {ModelKind::noisy_parabola, sigma};
}

CopulaModel CopulaModel::with_parameter(double value) const {
  switch (kind) {
    case ModelKind::gaussian: return gaussian(value);
    case ModelKind::gumbel: return gumbel(value);
    case ModelKind::noisy_parabola: return noisy_parabola(value);
    default: throw ConfigError("model " + spec() + " has no parameter to sweep");
  }
}

namespace {

std::string format_number(double x) {
  std::ostringstream os;
  os.precision(15);
  os << x;
  return os.str();
}

double parse_parameter(std::string_view text, std::string_view key, std::string_view whole) {
  if (text.substr(0, key.size()) != key || text.size() <= key.size() || text[key.size()] != '=')
    throw ConfigError("malformed model '" + std::string(whole) + "'");
  const auto body = text.substr(key.size() + 1);
  double value = 0;
  auto res = std::from_chars(body.data(), body.data() + body.size(), value);
  if (res.ec != std::errc() || res.ptr != body.data() + body.size())
    throw ConfigError("malformed number in model '" + std::string(whole) + "'");
  return value;
}

}  // namespace

std::string CopulaModel::spec() const {
  switch (kind) {
    case ModelKind::independence: return "pi";
    case ModelKind::comonotone: return "m";
    case ModelKind::countermonotone: return "w";
    case ModelKind::gaussian: return "gauss:p=" + format_number(param);
    case ModelKind::gumbel: return "gumbel:theta=" + format_number(param);
    case ModelKind::ordinal_sum: return "ordsum";
    case ModelKind::noisy_parabola: return "parabola:sigma=" + format_number(param);
  }
  return "?";
}

CopulaModel parse_model(std::string_view text) {
  if (text == "pi") return CopulaModel::independence();
  if (text == "m") return CopulaModel::comonotone();
  if (text == "w") return CopulaModel::countermonotone();
  if (text == "ordsum") return CopulaModel::ordinal_sum();
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError("unknown model '" + std::string(text) + "'");
  const auto family = text.substr(0, colon);
  const auto rest = text.substr(colon + 1);
  try {
    if (family == "gauss") return CopulaModel::gaussian(parse_parameter(rest, "p", text));
    if (family == "gumbel") return CopulaModel::gumbel(parse_parameter(rest, "theta", text));
    if (family == "parabola")
      return CopulaModel::noisy_parabola(parse_parameter(rest, "sigma", text));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown model '" + std::string(text) + "'");
}

namespace {

/// Gaussian copula CDF as a single integral over the first normal score:
/// C(u, v) = int_{-inf}^{a} phi(x) Phi((b - p x) / sqrt(1 - p^2)) dx, a = Phi^-1(u), b = Phi^-1(v).
double gaussian_cdf(double p, double u, double v) {
  if (p == 0.0) return u * v;
  const double a = normal_quantile(u);
  const double b = normal_quantile(v);
  const double s = std::sqrt(1.0 - p * p);
  auto f = [&](double x) { return normal_pdf(x) * normal_cdf((b - p * x) / s); };
  const double lo = std::min(a, -9.0);
  if (a <= lo) return std::clamp(u * normal_cdf((b - p * a) / s), 0.0, std::min(u, v));
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, a, 15, 1e-14);
  return std::clamp(value, std::max(u + v - 1.0, 0.0), std::min(u, v));
}

double gumbel_cdf(double theta, double u, double v) {
  if (u == 0.0 || v == 0.0) return 0.0;
  const double s = std::pow(-std::log(u), theta) + std::pow(-std::log(v), theta);
  return std::exp(-std::pow(s, 1.0 / theta));
}

/// Positive alpha-stable variable with Laplace transform exp(-s^alpha) (Kanter's representation).
double positive_stable(double alpha, Rng& rng) {
  const double w = std::numbers::pi * uniform01(rng);
  const double e = standard_exponential(rng);
  const double a = std::pow(std::sin(alpha * w) / std::sin(w), 1.0 / (1.0 - alpha)) *
                   std::sin((1.0 - alpha) * w) / std::sin(alpha * w);
  return std::pow(a / e, (1.0 - alpha) / alpha);
}

}  // namespace

double cdf(const CopulaModel& model, double u, double v) {
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0))
    throw DomainError("cdf: (u, v) must lie in [0,1]^2");
  if (!model.has_cdf()) throw UnsupportedError("cdf: " + model.spec() + " has no closed CDF");
  if (u == 0.0 || v == 0.0) return 0.0;
  if (u == 1.0) return v;
  if (v == 1.0) return u;
  switch (model.kind) {
    case ModelKind::independence: return u * v;
    case ModelKind::comonotone: return std::min(u, v);
    case ModelKind::countermonotone: return std::max(u + v - 1.0, 0.0);
    case ModelKind::gaussian: return gaussian_cdf(model.param, u, v);
    case ModelKind::gumbel: return gumbel_cdf(model.param, u, v);
    case ModelKind::ordinal_sum:
      return 2.0 * std::min(u, 0.5) * std::min(v, 0.5) + std::max(0.0, std::min(u, v) - 0.5);
    case ModelKind::noisy_parabola: break;
  }
  throw UnsupportedError("cdf: unsupported model");
}

Sample sample(const CopulaModel& model, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Sample out;
  out.x.resize(n);
  out.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = 0;
    double y = 0;
    switch (model.kind) {
      case ModelKind::independence:
        x = uniform01(rng);
        y = uniform01(rng);
        break;
      case ModelKind::comonotone:
        x = y = uniform01(rng);
        break;
      case ModelKind::countermonotone:
        x = uniform01(rng);
        y = 1.0 - x;
        break;
      case ModelKind::gaussian: {
        const double z1 = standard_normal(rng);
        const double z2 = standard_normal(rng);
        x = z1;
        y = model.param * z1 + std::sqrt(1.0 - model.param * model.param) * z2;
        break;
      }
      case ModelKind::gumbel: {
        const double alpha = 1.0 / model.param;
        if (alpha > 1.0 - 1e-9) {
          x = uniform01(rng);
          y = uniform01(rng);
          break;
        }
        const double s = positive_stable(alpha, rng);
        x = std::exp(-std::pow(standard_exponential(rng) / s, alpha));
        y = std::exp(-std::pow(standard_exponential(rng) / s, alpha));
        break;
      }
      case ModelKind::ordinal_sum: {
        const bool lower = uniform01(rng) < 0.5;
        const double a = uniform01(rng);
        const double b = uniform01(rng);
        if (lower) {
          x = a / 2;
          y = b / 2;
        } else {
          x = y = 0.5 + a / 2;
        }
        break;
      }
      case ModelKind::noisy_parabola: {
        x = uniform01(rng);
        y = (x - 0.5) * (x - 0.5);
        if (model.param > 0) y += model.param * standard_normal(rng);
        break;
      }
    }
    out.x[i] = x;
    out.y[i] = y;
  }
  return out;
}

namespace {

double gumbel_rho(double theta) {
  // Extreme-value copula: rho = 12 int_0^1 (1 + A(t))^-2 dt - 3 with Pickands function A.
  auto f = [theta](double t) {
    const double a = std::pow(std::pow(t, theta) + std::pow(1.0 - t, theta), 1.0 / theta);
    return 1.0 / ((1.0 + a) * (1.0 + a));
  };
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-12);
  return 12.0 * integral - 3.0;
}

[[noreturn]] void unsupported(const CopulaModel& model, MeasureKind kind) {
  throw UnsupportedError("analytic_value: no closed form for " + kind.name() + " under " +
                         model.spec());
}

}  // namespace

double analytic_value(const CopulaModel& model, MeasureKind kind) {
  switch (model.kind) {
    case ModelKind::independence: return 0.0;
    case ModelKind::comonotone:
    case ModelKind::countermonotone: return 1.0;
    case ModelKind::gaussian: {
      const double p = std::abs(model.param);
      if (p == 0.0) return 0.0;
      switch (kind.type) {
        case MeasureType::rho: return 6.0 / std::numbers::pi * std::asin(p / 2.0);
        case MeasureType::tau:
        case MeasureType::blomqvist: return 2.0 / std::numbers::pi * std::asin(p);
        case MeasureType::r: return 3.0 / std::numbers::pi * std::asin((1.0 + p * p) / 2.0) - 0.5;
        default: unsupported(model, kind);
      }
    }
    case ModelKind::gumbel: {
      const double theta = model.param;
      switch (kind.type) {
        case MeasureType::tau: return (theta - 1.0) / theta;
        case MeasureType::rho: return gumbel_rho(theta);
        case MeasureType::blomqvist: return 4.0 * std::pow(2.0, -std::pow(2.0, 1.0 / theta)) - 1.0;
        default: unsupported(model, kind);
      }
    }
    case ModelKind::ordinal_sum:
      if (kind.type == MeasureType::blomqvist) return 1.0;
      unsupported(model, kind);
    case ModelKind::noisy_parabola: unsupported(model, kind);
  }
  unsupported(model, kind);
}

Checkerboard induced_checkerboard(const CopulaModel& model, Index n1, Index n2) {
  if (!model.has_cdf())
    throw UnsupportedError("induced_checkerboard: " + model.spec() + " has no closed CDF");
  return induced_checkerboard<double>([&](double u, double v) { return cdf(model, u, v); }, n1,
                                      n2);
}

}  // namespace rdm

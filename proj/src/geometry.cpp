#include "softgate/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "softgate/error.hpp"

namespace softgate {

SimplexPoint::SimplexPoint(std::vector<double> coords, double sum_tolerance)
    : coords_(std::move(coords)) {
  if (coords_.empty()) throw ValidationError("simplex point has no coordinates");
  if (!on_simplex(coords_, sum_tolerance))
    throw ValidationError("coordinates do not form a probability vector");
}

SimplexPoint SimplexPoint::unchecked(std::vector<double> coords) {
  SimplexPoint p;
  p.coords_ = std::move(coords);
  return p;
}

bool on_simplex(std::span<const double> coords, double sum_tolerance) {
  double sum = 0.0;
  for (double c : coords) {
    if (!(c >= 0.0 && c <= 1.0)) return false;
    sum += c;
  }
  return std::abs(sum - 1.0) <= sum_tolerance;
}

double simplex_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw ValidationError("dimension mismatch: " + std::to_string(p.size()) +
                          " vs " + std::to_string(q.size()));
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double simplex_distance(const SimplexPoint& p, const SimplexPoint& q) {
  return simplex_distance(p.coords(), q.coords());
}

double max_simplex_distance(std::size_t dim) {
  if (dim < 2) throw ValidationError("simplex needs at least 2 dimensions");
  return std::numbers::sqrt2;
}

namespace {

double log_unit_ball_volume(std::size_t dim) {
  const double half = 0.5 * static_cast<double>(dim);
  return half * std::log(std::numbers::pi) - std::lgamma(half + 1.0);
}

}  // namespace

double hypersphere_volume(std::size_t dim, double r) {
  if (dim == 0) throw ValidationError("hypersphere dimension must be positive");
  if (!(r >= 0.0)) throw ValidationError("radius must be nonnegative");
  if (r == 0.0) return 0.0;
  return std::exp(log_unit_ball_volume(dim) +
                  static_cast<double>(dim) * std::log(r));
}

double shell_volume(const ShellSpec& spec) {
  if (spec.dim == 0) throw ValidationError("shell dimension must be positive");
  if (!(spec.r_inner >= 0.0) || !(spec.r_outer > spec.r_inner))
    throw ValidationError("shell radii must satisfy r_outer > r_inner >= 0");
  // r_outer^n - r_inner^n = r_outer^n * (1 - (r_inner/r_outer)^n); expm1
  // keeps the factor accurate when the two radii are close.
  const double n = static_cast<double>(spec.dim);
  const double factor =
      spec.r_inner == 0.0 ? 1.0
                          : -std::expm1(n * std::log(spec.r_inner / spec.r_outer));
  return hypersphere_volume(spec.dim, spec.r_outer) * factor;
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("logit is defined on the open interval (0,1)");
  return std::log(p) - std::log1p(-p);
}

SimplexPoint softmax(std::span<const double> z) {
  if (z.empty()) throw ValidationError("softmax of an empty vector");
  for (double v : z)
    if (!std::isfinite(v)) throw ValidationError("softmax input must be finite");
  const double shift = *std::max_element(z.begin(), z.end());
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - shift);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return SimplexPoint::unchecked(std::move(out));
}

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw ValidationError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace softgate

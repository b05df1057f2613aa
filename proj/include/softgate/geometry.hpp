#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace softgate {

// Tolerance for "coordinates sum to one" when a vector is checked as a
// point of the probability simplex.
inline constexpr double kSimplexSumTolerance = 1e-9;

// A point of the probability simplex. Construction validates the simplex
// constraints; use `unchecked` when the caller has already validated.
class SimplexPoint {
 public:
  explicit SimplexPoint(std::vector<double> coords,
                        double sum_tolerance = kSimplexSumTolerance);

  static SimplexPoint unchecked(std::vector<double> coords);

  std::span<const double> coords() const noexcept { return coords_; }
  std::size_t dim() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }

  bool operator==(const SimplexPoint&) const = default;

 private:
  SimplexPoint() = default;
  std::vector<double> coords_;
};

// True when every coordinate lies in [0,1] and the coordinates sum to one
// within `sum_tolerance`.
bool on_simplex(std::span<const double> coords,
                double sum_tolerance = kSimplexSumTolerance);

struct ShellSpec {
  std::size_t dim = 0;
  double r_inner = 0.0;
  double r_outer = 0.0;
};

// Euclidean distance between two probability vectors. Inputs are not
// renormalized. Throws ValidationError on dimension mismatch.
double simplex_distance(std::span<const double> p, std::span<const double> q);
double simplex_distance(const SimplexPoint& p, const SimplexPoint& q);

// Diameter of the probability simplex: sqrt(2) for every dim >= 2, attained
// by any two distinct vertices.
double max_simplex_distance(std::size_t dim);

// Volume of the dim-dimensional ball of radius r,
//   pi^(dim/2) / Gamma(dim/2 + 1) * r^dim,
// evaluated in log space so large dim does not overflow the gamma function.
double hypersphere_volume(std::size_t dim, double r);

// Volume between two concentric dim-balls, V(r_outer) - V(r_inner).
double shell_volume(const ShellSpec& spec);

// log(p / (1 - p)). Throws DomainError unless 0 < p < 1.
double logit(double p);

// Max-shifted softmax; finite for any finite input.
SimplexPoint softmax(std::span<const double> z);

// Index of the largest component; ties go to the lowest index.
std::size_t argmax(std::span<const double> v);

}  // namespace softgate

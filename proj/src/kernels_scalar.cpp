#include "dmpanim/kernels.hpp"

#include <cmath>

namespace dmpanim::kernels {
namespace {

void activations_scalar(const double* centers, const double* widths, std::size_t n, double x,
                        double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x - centers[i];
    out[i] = std::exp(-widths[i] * d * d);
  }
}

WeightedSums weighted_sums_scalar(const double* weights, const double* activations,
                                  std::size_t n) {
  WeightedSums s;
  for (std::size_t i = 0; i < n; ++i) {
    s.weighted += weights[i] * activations[i];
    s.total += activations[i];
  }
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Backend::Scalar, "scalar", &activations_scalar,
                                 &weighted_sums_scalar, &axpy_scalar};
  return table;
}

}  // namespace dmpanim::kernels

#pragma once

// Inner loops of basis evaluation and weight fitting. Every routine has a
// scalar reference version; vectorised versions are picked at runtime when the
// CPU supports them and must agree with the reference to a few ulp.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace dmpanim::kernels {

enum class Backend { Scalar, Avx2 };

struct WeightedSums {
  double weighted = 0.0;  // sum_i w_i * a_i
  double total = 0.0;     // sum_i a_i
};

struct KernelTable {
  Backend backend;
  std::string_view name;

  /// out[i] = exp(-widths[i] * (x - centers[i])^2)
  void (*gaussian_activations)(const double* centers, const double* widths, std::size_t n,
                               double x, double* out);
  WeightedSums (*weighted_sums)(const double* weights, const double* activations,
                                std::size_t n);
  /// y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_kernels();

/// Nullptr when the build or the host lacks AVX2+FMA.
const KernelTable* avx2_kernels();

/// Backends usable on this host, scalar first.
std::vector<Backend> available_backends();

const KernelTable& table_for(Backend backend);

/// The table used by the library. Chosen once from DMPANIM_KERNELS
/// (scalar|avx2|auto) and the CPU, overridable for tests.
const KernelTable& active();

/// Not synchronised with concurrent rollouts; call before starting work.
void set_active(Backend backend);

// Span conveniences over the active table.
void gaussian_activations(std::span<const double> centers, std::span<const double> widths,
                          double x, std::span<double> out);
WeightedSums weighted_sums(std::span<const double> weights, std::span<const double> activations);
void axpy(double a, std::span<const double> x, std::span<double> y);

}  // namespace dmpanim::kernels

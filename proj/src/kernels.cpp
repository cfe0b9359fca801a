#include "dmpanim/kernels.hpp"

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string_view>

namespace dmpanim::kernels {

#if defined(DMPANIM_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

namespace {

bool host_has_avx2() {
#if defined(DMPANIM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* pick_default() {
  const char* env = std::getenv("DMPANIM_KERNELS");
  const std::string_view choice = env ? env : "auto";
  if (choice == "scalar") return &scalar_kernels();
  if (const KernelTable* v = avx2_kernels()) return v;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{pick_default()};
  return current;
}

}  // namespace

const KernelTable* avx2_kernels() {
#if defined(DMPANIM_HAVE_AVX2)
  static const bool ok = host_has_avx2();
  return ok ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out{Backend::Scalar};
  if (avx2_kernels()) out.push_back(Backend::Avx2);
  return out;
}

const KernelTable& table_for(Backend backend) {
  if (backend == Backend::Avx2) {
    if (const KernelTable* v = avx2_kernels()) return *v;
  }
  return scalar_kernels();
}

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void set_active(Backend backend) { slot().store(&table_for(backend), std::memory_order_release); }

void gaussian_activations(std::span<const double> centers, std::span<const double> widths,
                          double x, std::span<double> out) {
  assert(centers.size() == widths.size() && out.size() == centers.size());
  active().gaussian_activations(centers.data(), widths.data(), centers.size(), x, out.data());
}

WeightedSums weighted_sums(std::span<const double> weights, std::span<const double> activations) {
  assert(weights.size() == activations.size());
  return active().weighted_sums(weights.data(), activations.data(), weights.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(a, x.data(), y.data(), x.size());
}

}  // namespace dmpanim::kernels

#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels/kernels_internal.hpp"
#include "mvembed/error.hpp"
#include "mvembed/kernels.hpp"

namespace mvembed::kernels {
namespace {

constexpr KernelTable kScalarTable{&scalar::squared_l2, &scalar::l1, &scalar::dot};
#if defined(MVEMBED_HAVE_AVX2)
constexpr KernelTable kAvx2Table{&avx2::squared_l2, &avx2::l1, &avx2::dot};
#endif
#if defined(MVEMBED_HAVE_NEON)
constexpr KernelTable kNeonTable{&neon::squared_l2, &neon::l1, &neon::dot};
#endif

const KernelTable& table_for(Isa isa) {
  switch (isa) {
#if defined(MVEMBED_HAVE_AVX2)
    case Isa::Avx2: return kAvx2Table;
#endif
#if defined(MVEMBED_HAVE_NEON)
    case Isa::Neon: return kNeonTable;
#endif
    default: return kScalarTable;
  }
}

Isa best_isa() {
  if (isa_supported(Isa::Avx2)) return Isa::Avx2;
  if (isa_supported(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Isa initial_isa() {
  if (const char* env = std::getenv("MVEMBED_SIMD")) {
    const std::string name(env);
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
      if (name == to_string(isa) && isa_supported(isa)) return isa;
    }
  }
  return best_isa();
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::InvalidArgument, "kernel operands differ in length");
  }
}

const KernelTable& checked_table(Isa isa) {
  if (!isa_supported(isa)) {
    throw Error(ErrorCode::InvalidArgument,
                "ISA '" + std::string(to_string(isa)) + "' is not available on this machine");
  }
  return table_for(isa);
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(MVEMBED_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(MVEMBED_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  checked_table(isa);
  active().store(isa, std::memory_order_relaxed);
}

double squared_l2(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  return table_for(active_isa()).squared_l2(a.data(), b.data(), a.size());
}

double l1(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  return table_for(active_isa()).l1(a.data(), b.data(), a.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  return table_for(active_isa()).dot(a.data(), b.data(), a.size());
}

double squared_l2(Isa isa, std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  return checked_table(isa).squared_l2(a.data(), b.data(), a.size());
}

double l1(Isa isa, std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  return checked_table(isa).l1(a.data(), b.data(), a.size());
}

double dot(Isa isa, std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  return checked_table(isa).dot(a.data(), b.data(), a.size());
}

}  // namespace mvembed::kernels

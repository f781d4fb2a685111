#pragma once

// Distance and dot-product kernels behind runtime ISA dispatch.
//
// Every kernel has a portable scalar reference; vector variants (AVX2+FMA on
// x86-64, NEON on AArch64) are compiled in when the target allows and picked
// at first use based on CPUID. Set MVEMBED_SIMD=scalar|avx2|neon to override.
// Results between ISAs agree to rounding, not bit-for-bit; within one ISA the
// summation order is fixed, so runs are reproducible.

#include <span>
#include <string_view>

namespace mvembed::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

/// True when the ISA is both compiled in and supported by this CPU.
bool isa_supported(Isa isa);

/// The ISA currently used by the dispatching entry points.
Isa active_isa();

/// Forces the dispatch target. Throws Error(InvalidArgument) if unsupported.
void set_active_isa(Isa isa);

/// Sum of squared differences. Spans must have equal length.
double squared_l2(std::span<const double> a, std::span<const double> b);

/// Sum of absolute differences.
double l1(std::span<const double> a, std::span<const double> b);

double dot(std::span<const double> a, std::span<const double> b);

/// Explicit-ISA entry points, used by equivalence tests and benchmarks.
double squared_l2(Isa isa, std::span<const double> a, std::span<const double> b);
double l1(Isa isa, std::span<const double> a, std::span<const double> b);
double dot(Isa isa, std::span<const double> a, std::span<const double> b);

}  // namespace mvembed::kernels

#pragma once

#include <cstddef>

namespace mvembed::kernels {

struct KernelTable {
  double (*squared_l2)(const double*, const double*, std::size_t);
  double (*l1)(const double*, const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
};

namespace scalar {
double squared_l2(const double* a, const double* b, std::size_t n);
double l1(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(MVEMBED_HAVE_AVX2)
namespace avx2 {
double squared_l2(const double* a, const double* b, std::size_t n);
double l1(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#endif

#if defined(MVEMBED_HAVE_NEON)
namespace neon {
double squared_l2(const double* a, const double* b, std::size_t n);
double l1(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace neon
#endif

}  // namespace mvembed::kernels

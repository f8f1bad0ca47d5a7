#include "slfrac/kernels.hpp"

#include "slfrac/error.hpp"

namespace slfrac::kernels {

const char* name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool supported(Isa isa) {
  if (isa == Isa::scalar) return true;
#if defined(SLFRAC_HAVE_AVX2)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table& select(Isa isa) {
  if (!supported(isa)) throw InvalidInput(std::string("kernels: instruction set not available: ") + name(isa));
#if defined(SLFRAC_HAVE_AVX2)
  if (isa == Isa::avx2) return avx2_table();
#endif
  return scalar_table();
}

const Table& active() {
  static const Table& t = select(supported(Isa::avx2) ? Isa::avx2 : Isa::scalar);
  return t;
}

}  // namespace slfrac::kernels
